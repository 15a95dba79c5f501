use ndarray::Array2;
use serde::Serialize;

use crate::deterministic::DeterministicSolver;
use crate::error::{Error, Result};
use crate::grid::{Field, FieldGrid};
use crate::noise::BrownianDriver;
use crate::oracle::{integrate, ChainConfig, ChainSystem};
use crate::spectral::SpectralBasis;
use crate::stochastic::{s_field, sigma_d_nodes, OuScheme};

/// Largest absolute difference over the lattice points.
pub fn supnorm_distance(a: &Field, b: &Field) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(a.values
        .iter()
        .zip(b.values.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())))
}

/// Sup-norms of the three pieces of
///
/// ```text
/// Sigma_d(t, v_hat) - S(t, v) = [Sigma_d(t, v_hat) - Sigma_d(t_hat, v_hat)]
///                             + [Sigma_d(t_hat, v_hat) - S(t_hat, v_hat)]
///                             + [S(t_hat, v_hat) - S(t, v)]
/// ```
///
/// over the refined lattice. `total` is the left-hand side, so
/// `total <= term1 + term2 + term3` on every path. `total_floor` is the
/// distance of the step field `Sigma(t, floor(dv)/d)` itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SplitDistance {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub total: f64,
    pub total_floor: f64,
}

impl SplitDistance {
    pub fn triangle_holds(&self) -> bool {
        self.total <= self.term1 + self.term2 + self.term3 + 1e-12
    }
}

pub fn split_distance(
    driver: &BrownianDriver,
    basis: &SpectralBasis,
    truncation: usize,
    sigma: f64,
    grid: &FieldGrid,
) -> Result<SplitDistance> {
    let nodes = sigma_d_nodes(driver, basis, sigma, grid, OuScheme::default())?;
    let s = s_field(driver, truncation, sigma, grid)?;
    split_from_nodes(&nodes, &s)
}

/// Split from the nodal values `Sigma(t_j, i/d)` (all lattice times, sites
/// `0..=d`) and the field `S` on the same lattice.
pub fn split_from_nodes(nodes: &Array2<f64>, s: &Field) -> Result<SplitDistance> {
    let g = &s.grid;
    if nodes.dim() != (g.n_times(), g.d() + 1) {
        return Err(Error::GridMismatch(format!(
            "nodal array {:?} does not match lattice {g:?}",
            nodes.dim()
        )));
    }
    let mut out = SplitDistance::default();
    for j in 0..g.n_times() {
        let jh = g.refined_index(g.t_hat_index(j));
        for i in 0..g.n_positions() {
            let ih = g.v_hat_index(i);
            let sigma_hat_v = nodes[[j, ih]];
            let sigma_hat_tv = nodes[[jh, ih]];
            let s_here = s.values[[j, i]];
            let s_hat = s.values[[jh, g.refined_index(ih)]];
            out.term1 = out.term1.max((sigma_hat_v - sigma_hat_tv).abs());
            out.term2 = out.term2.max((sigma_hat_tv - s_hat).abs());
            out.term3 = out.term3.max((s_hat - s_here).abs());
            out.total = out.total.max((sigma_hat_v - s_here).abs());
            out.total_floor = out.total_floor.max((nodes[[j, g.floor_index(i)]] - s_here).abs());
        }
    }
    Ok(out)
}

/// Largest gap over the node lattice `t_j = jT/d`, `v_i = i/d` between the
/// Euler chain and its spectral solution, both driven by `driver` at the
/// driver's fine step.
pub fn coupling_gap(config: &ChainConfig, driver: &BrownianDriver, scheme: OuScheme) -> Result<f64> {
    let d = config.d;
    let grid = FieldGrid::nodes(driver.horizon(), d)?;
    let euler = integrate(config, driver, &grid)?;
    let basis = SpectralBasis::new(d)?;
    let noise = if config.sigma > 0.0 {
        sigma_d_nodes(driver, &basis, config.sigma, &grid, scheme)?
    } else {
        ndarray::Array2::zeros((grid.n_times(), d + 1))
    };
    let mut worst = 0.0_f64;
    let mean = match config.system {
        ChainSystem::Pulled { epsilon } => Some(DeterministicSolver::with_basis(epsilon, basis)?),
        ChainSystem::Homogeneous => None,
    };
    for j in 0..grid.n_times() {
        let profile = match &mean {
            Some(solver) => solver.profile(grid.time(j))?,
            None => vec![0.0; d + 1],
        };
        for i in 0..=d {
            worst = worst.max((euler.at(j, i) - profile[i] - noise[[j, i]]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FieldKind;

    #[test]
    fn identical_and_shifted_fields() {
        let g = FieldGrid::nodes(1.0, 4).unwrap();
        let a = Field::zeros(g, FieldKind::SigmaD);
        assert_eq!(supnorm_distance(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.values[[2, 3]] = 0.37;
        assert_eq!(supnorm_distance(&a, &b).unwrap(), 0.37);
        let other = Field::zeros(FieldGrid::nodes(2.0, 4).unwrap(), FieldKind::SigmaD);
        assert!(supnorm_distance(&a, &other).is_err());
    }

    #[test]
    fn term2_is_a_node_maximum() {
        let drv = BrownianDriver::new(1, 64, 512, 1.0).unwrap();
        let basis = SpectralBasis::new(8).unwrap();
        let grid = FieldGrid::new(1.0, 8, 4).unwrap();
        let nodes = sigma_d_nodes(&drv, &basis, 1.0, &grid, OuScheme::default()).unwrap();
        let s = s_field(&drv, 64, 1.0, &grid).unwrap();
        let split = split_from_nodes(&nodes, &s).unwrap();
        let mut node_max = 0.0_f64;
        for j in 0..=8 {
            for i in 0..=8 {
                node_max = node_max.max((nodes[[4 * j, i]] - s.at(4 * j, 4 * i)).abs());
            }
        }
        assert_eq!(split.term2, node_max);
        assert!(split.triangle_holds());
        assert!(split.total > 0.0);
    }
}
