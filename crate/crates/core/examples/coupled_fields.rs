//! One Brownian family driving both the chain noise `Sigma_d` and the
//! continuum field `S`, and the three-piece split of their distance.
//!
//! cargo run --example coupled_fields

use chainlab::lab::split_distance;
use chainlab::stochastic::{s_field, sigma_d_field, sigma_d_variance, s_variance};
use chainlab::{BrownianDriver, FieldGrid, SpectralBasis};

fn main() -> chainlab::Result<()> {
    let (truncation, steps) = (512, 4096);
    let driver = BrownianDriver::new(2024, truncation, steps, 1.0)?;
    println!("driver: {} modes x {} steps", driver.n_modes(), driver.n_steps());

    println!("\npointwise variance at (t, v) = (0.5, 0.5)");
    println!("  S (K = {truncation}): {:.5}", s_variance(truncation, 1.0, 0.5, 0.5));
    for d in [16, 64, 256] {
        let basis = SpectralBasis::new(d)?;
        println!("  Sigma_d, d = {d:>3}: {:.5}", sigma_d_variance(&basis, 1.0, 0.5, d / 2));
    }

    println!("\nsup-distances on the 4-fold refined lattice, same driver");
    println!("{:>5} {:>9} {:>9} {:>9} {:>9} {:>9}", "d", "term1", "term2", "term3", "total", "step");
    for d in [16, 32, 64, 128] {
        let grid = FieldGrid::new(1.0, d, 4)?;
        let s = split_distance(&driver, &SpectralBasis::new(d)?, truncation, 1.0, &grid)?;
        println!(
            "{d:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            s.term1, s.term2, s.term3, s.total, s.total_floor
        );
    }

    let grid = FieldGrid::new(1.0, 16, 4)?;
    let sigma = sigma_d_field(&driver, &SpectralBasis::new(16)?, 1.0, &grid)?;
    let s = s_field(&driver, truncation, 1.0, &grid)?;
    let mid = grid.n_positions() / 2;
    println!("\nt, Sigma_16(t, 1/2), S(t, 1/2)");
    for j in (0..grid.n_times()).step_by(8) {
        println!("{:.4} {:>9.4} {:>9.4}", grid.time(j), sigma.at(j, mid), s.at(j, mid));
    }
    Ok(())
}
