//! Closed-form eigensystem of the chain Laplacian and the fast sine transform.
//!
//! cargo run --example spectral_basis

use std::time::Instant;

use chainlab::spectral::{apply_laplacian, TransformMethod};
use chainlab::SpectralBasis;

fn main() -> chainlab::Result<()> {
    let d = 8;
    let basis = SpectralBasis::new(d)?;
    println!("d = {d}");
    println!("{:>3} {:>12} {:>14} {:>12}", "k", "lambda_k", "-d^2 lambda_k", "pi^2 k^2");
    for k in 1..d {
        let kk = (k * k) as f64;
        println!(
            "{k:>3} {:>12.6} {:>14.6} {:>12.6}",
            basis.eigenvalue(k),
            basis.scaled_rate(k),
            std::f64::consts::PI.powi(2) * kk
        );
    }

    // A f_k = lambda_k f_k, checked with the explicit tridiagonal product
    let mut residual = 0.0_f64;
    for k in 1..d {
        let f: Vec<f64> = (1..d).map(|m| basis.eigenvector(k, m)).collect();
        let af = apply_laplacian(&f);
        for (a, x) in af.iter().zip(&f) {
            residual = residual.max((a - basis.eigenvalue(k) * x).abs());
        }
    }
    println!("max |A f - lambda f| = {residual:.2e}");

    // direct O(d^2) sums against the FFT path
    for d in [256, 1024, 4096] {
        let x: Vec<f64> = (1..d).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let direct = SpectralBasis::new(d)?;
        let fast = SpectralBasis::new(d)?.with_method(TransformMethod::Fast);
        let t0 = Instant::now();
        let a = direct.transform_forward(&x)?;
        let t1 = Instant::now();
        let b = fast.transform_forward(&x)?;
        let t2 = Instant::now();
        let diff = a.iter().zip(&b).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        let back = fast.transform_inverse(&b)?;
        let round = x.iter().zip(&back).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        println!(
            "d = {d:>5}: direct {:>8.2?}, fast {:>8.2?}, max diff {diff:.1e}, round trip {round:.1e}",
            t1 - t0,
            t2 - t1
        );
    }
    Ok(())
}
