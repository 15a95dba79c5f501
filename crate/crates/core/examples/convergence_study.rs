//! Sup-distance between the stretched chain and the heat-equation limit over
//! a range of `d`, with every resolution on the same drivers.
//!
//! cargo run --release --example convergence_study -- [replications]

use chainlab::lab::{convergence_study, StudyConfig, StudyMode};

fn main() -> chainlab::Result<()> {
    let replications = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(32);
    let cfg = StudyConfig { replications, monotone_seeds: replications.min(100), ..StudyConfig::default() };
    let rep = convergence_study(&cfg, StudyMode::Full)?;
    println!("{replications} replications, K = {}, M = {} steps per unit", cfg.truncation, cfg.steps_per_unit);
    println!("{:>5} {:>10} {:>9} {:>9} {:>9} {:>12}", "d", "E sup", "se", "q50", "q95", "stoch sup");
    for (c, s) in rep.chain.iter().zip(&rep.stochastic) {
        println!(
            "{:>5} {:>10.4} {:>9.4} {:>9.4} {:>9.4} {:>12.4}",
            c.d, c.mean, c.stderr, c.q50, c.q95, s.mean
        );
    }
    println!("\nsplit terms (mean)");
    for s in &rep.split {
        println!("  d = {:>4}: {:.4} {:.4} {:.4}", s.d, s.term1.0, s.term2.0, s.term3.0);
    }
    if let Some(fit) = &rep.chain_slope {
        println!("\nlog-log slope {:.3} (95% CI {:.3}..{:.3})", fit.slope, fit.slope_ci.0, fit.slope_ci.1);
    }
    println!();
    for c in rep.checks.iter().filter(|c| c.threshold.is_some()) {
        println!("{:<36} {:>8.4} {}", c.name, c.value, c.verdict.as_str());
    }
    Ok(())
}
