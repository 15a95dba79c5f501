//! Monte Carlo check of the variance bounds behind the convergence proof:
//! `d Var[Sigma_d - S]`, and the space and time moduli of both fields.
//!
//! cargo run --release --example variance_bounds

use chainlab::lab::{variance_bound_suite, VarianceSuiteConfig};

fn main() -> chainlab::Result<()> {
    let cfg = VarianceSuiteConfig { d_list: vec![16, 32, 64], truncation: 256, ..VarianceSuiteConfig::default() };
    let rep = variance_bound_suite(&cfg)?;
    println!("{} replications", rep.replications);
    for section in rep.sections() {
        println!("\n{} (fitted constant {:.4}, spread {:.3}, {})", section.name, section.fitted_constant, section.spread, section.verdict.as_str());
        for r in &section.rows {
            let at = match (r.d, r.gap) {
                (Some(d), _) => format!("d = {d}"),
                (_, Some(g)) => format!("gap = {g:.2e}"),
                _ => String::new(),
            };
            println!("  {at:<16} ratio {:.4} +- {:.4} (closed form {:.4})", r.ratio, r.ratio_stderr, r.exact_ratio);
        }
    }
    println!("\nkurtosis of S(t, v): {:.3} +- {:.3}", rep.kurtosis.0, rep.kurtosis.1);
    Ok(())
}
