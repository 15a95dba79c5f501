//! The mean profile: the chain's `Delta_d` against the continuum `D`.
//!
//! cargo run --example deterministic_profile

use chainlab::deterministic::{
    continuum_truncation_bound, fast_solver, fourier_coeff, node_sup_error, ContinuumProfile,
    DeterministicSolver,
};

fn main() -> chainlab::Result<()> {
    let eps = 1.0;
    println!("c_1 = {:.7}, c_2 = {:.7}", fourier_coeff(1), fourier_coeff(2));
    for k in [32, 200, 512] {
        println!("K = {k:>3}: sup truncation error of D <= {:.2e}", continuum_truncation_bound(eps, k));
    }

    let d = 8;
    let solver = DeterministicSolver::new(eps, d)?;
    let limit = ContinuumProfile::new(eps, 200)?;
    println!("\nprofile at d = {d}");
    println!("{:>5} {:>6} {:>12} {:>12} {:>12}", "t", "i/d", "matrix", "spectral", "D(t, i/d)");
    for t in [0.0, 0.1, 1.0] {
        for i in [2, 4, 6] {
            println!(
                "{t:>5.2} {:>6.3} {:>12.8} {:>12.8} {:>12.8}",
                i as f64 / d as f64,
                solver.delta_matrix(t, i)?,
                solver.delta_spectral(t, i)?,
                limit.value(t, i as f64 / d as f64)?
            );
        }
    }

    println!("\nnode sup error over t_j = j/d, v_i = i/d");
    let profile = ContinuumProfile::new(eps, 512)?;
    let mut last = None;
    for d in [8, 16, 32, 64, 128, 256] {
        let e = node_sup_error(&fast_solver(eps, d)?, &profile, 1.0)?;
        let ratio = last.map(|p: f64| format!("{:.2}", p / e)).unwrap_or_default();
        println!("d = {d:>4}: {e:.3e} {ratio}");
        last = Some(e);
    }
    Ok(())
}
