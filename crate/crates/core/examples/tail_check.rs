//! Tail of the sup of short time increments of `Sigma_d`, with a plain
//! Gaussian sample as the reference shape.
//!
//! cargo run --release --example tail_check

use chainlab::lab::{gaussian_tail_samples, sigma_increment_tail, tail_check, TailConfig, TailReport, DEFAULT_THRESHOLDS};

fn show(rep: &TailReport) {
    println!("{} ({} samples, scale {:.4}): {}", rep.label, rep.samples, rep.scale, rep.verdict.as_str());
    for r in &rep.rows {
        println!("  r = {:.1}: P = {:.2e} ({} exceedances){}", r.r, r.probability, r.exceedances, if r.observable { "" } else { " *" });
    }
    for (r, ratio) in &rep.doubling {
        println!("  ln P(2r) / ln P(r) at r = {r}: {ratio:.2}");
    }
    println!("  {}\n", rep.note);
}

fn main() -> chainlab::Result<()> {
    let (xs, scale) = gaussian_tail_samples(10_000, 1.0 / 32.0, 0.5, 1)?;
    show(&tail_check("gaussian", &xs, scale, &DEFAULT_THRESHOLDS, 10)?);
    show(&sigma_increment_tail(&TailConfig::default())?);
    Ok(())
}
