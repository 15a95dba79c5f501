//! Spectral coordinates as zero-start OU processes: the exact-step recursion
//! against the left-endpoint rule.
//!
//! cargo run --example ou_modes

use chainlab::noise::mode_increments;
use chainlab::spectral::continuum_rate;
use chainlab::stats::Summary;
use chainlab::stochastic::{evolve_increments, ou_exact_variance, scheme_covariance, OuScheme};
use ndarray::ArrayView1;

fn main() -> chainlab::Result<()> {
    let t = 0.5;
    println!("closed-form variance (1 - exp(-2 a t)) / (2a) at t = {t}");
    for k in [1, 4, 16] {
        let a = continuum_rate(k);
        println!("  k = {k:>2}: a = {a:>9.3}, Var = {:.6e}", ou_exact_variance(a, t)?);
    }

    // relative variance bias of each scheme; exact-step is exact on every node
    let a = continuum_rate(4);
    let exact = ou_exact_variance(a, t)?;
    println!("\nrelative variance bias at k = 4");
    println!("{:>8} {:>14} {:>14}", "M", "exact-step", "left-endpoint");
    for m in [64usize, 128, 256, 512, 1024] {
        let n = m / 2;
        let delta = 1.0 / m as f64;
        let e = scheme_covariance(a, a, n, delta, OuScheme::ExactStep) / exact - 1.0;
        let l = scheme_covariance(a, a, n, delta, OuScheme::LeftEndpoint) / exact - 1.0;
        println!("{m:>8} {e:>14.2e} {l:>14.2e}");
    }

    // Monte Carlo confirmation
    let steps = 256;
    let xs: Vec<f64> = (0..20_000u64)
        .map(|r| {
            let inc = mode_increments(r, 4, steps, t);
            evolve_increments(ArrayView1::from(&inc), t / steps as f64, a, OuScheme::ExactStep, &[steps])[0]
        })
        .collect();
    let s = Summary::of(&xs);
    println!(
        "\nMonte Carlo, 20000 paths: Var = {:.5e} +- {:.1e} (exact {exact:.5e}), kurtosis {:.3}",
        s.variance, s.variance_stderr, s.kurtosis
    );
    Ok(())
}
