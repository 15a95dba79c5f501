//! The particle chain integrated directly by Euler-Maruyama, checked against
//! its spectral solution on shared increments.
//!
//! cargo run --example euler_oracle

use chainlab::lab::coupling_gap;
use chainlab::oracle::{integrate, stability_limit, ChainConfig, ChainSystem};
use chainlab::stochastic::OuScheme;
use chainlab::{BrownianDriver, FieldGrid};

fn main() -> chainlab::Result<()> {
    let d = 8;
    println!("stability gate at d = {d}: step < {:.3e}", stability_limit(d));

    let homogeneous = ChainConfig { d, sigma: 1.0, system: ChainSystem::Homogeneous };
    println!("\nsup gap to the spectral solution, mean of 16 drivers");
    let mut sums = [0.0; 4];
    for r in 0..16 {
        let fine = BrownianDriver::new(100 + r, d - 1, 8192, 1.0)?;
        for (m, factor) in [8, 4, 2, 1].into_iter().enumerate() {
            sums[m] += coupling_gap(&homogeneous, &fine.coarsen(factor)?, OuScheme::ExactStep)? / 16.0;
        }
    }
    for (m, e) in sums.iter().enumerate() {
        let ratio = if m > 0 { format!("ratio {:.3}", sums[m - 1] / e) } else { String::new() };
        println!("  step 1/{:<6} {e:.3e} {ratio}", 1024 << m);
    }

    // pulled chain = mean chain + homogeneous chain
    let drv = BrownianDriver::new(7, d - 1, 1024, 1.0)?;
    let grid = FieldGrid::nodes(1.0, d)?;
    let pulled = ChainSystem::Pulled { epsilon: 1.0 };
    let full = integrate(&ChainConfig { d, sigma: 1.0, system: pulled }, &drv, &grid)?;
    let mean = integrate(&ChainConfig { d, sigma: 0.0, system: pulled }, &drv, &grid)?;
    let noise = integrate(&homogeneous, &drv, &grid)?;
    let gap = full
        .values
        .iter()
        .zip((mean.values + noise.values).iter())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    println!("\nsuperposition gap {gap:.1e}");
    println!("Xi(1, i/8): {:?}", full.values.row(d).iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    Ok(())
}
