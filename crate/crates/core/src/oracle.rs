//! Explicit Euler-Maruyama integration of the rescaled particle chain
//!
//! ```text
//! dXi(t, i/d) = d^2 (Xi(t, (i+1)/d) - 2 Xi(t, i/d) + Xi(t, (i-1)/d)) dt + sqrt(d) sigma dB^{i,d}_t
//! ```
//!
//! with `B^{i,d} = Q (B^1, ..., B^{d-1})`. It touches neither the
//! eigenvalues nor any OU coordinate, and serves as the independent check of
//! the spectral solutions.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{Field, FieldGrid, FieldKind};
use crate::noise::BrownianDriver;
use crate::spectral::SpectralBasis;
use crate::stochastic::coupled_chain_noise;

/// Largest chain size the oracle is run at in routine suites.
pub const ORACLE_MAX_D: usize = 32;

/// Boundary and initial data of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "system")]
pub enum ChainSystem {
    /// `Xi(t,0) = 0`, `Xi(t,1) = 1 + eps t`, `Xi(0, i/d) = i/d`.
    Pulled { epsilon: f64 },
    /// Zero boundary and zero initial data.
    Homogeneous,
}

impl ChainSystem {
    fn right_boundary(&self, t: f64) -> f64 {
        match *self {
            ChainSystem::Pulled { epsilon } => 1.0 + epsilon * t,
            ChainSystem::Homogeneous => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub d: usize,
    pub sigma: f64,
    pub system: ChainSystem,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(domain(format!("chain needs d >= 2, got {}", self.d)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("noise level {} must be finite and >= 0", self.sigma)));
        }
        if let ChainSystem::Pulled { epsilon } = self.system {
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                return Err(domain(format!("pulling speed {epsilon} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Largest admissible step, `1/(2d^2)` (exclusive).
pub fn stability_limit(d: usize) -> f64 {
    let d = d as f64;
    1.0 / (2.0 * d * d)
}

/// Default step `1/(8d^2)`.
pub fn default_step(d: usize) -> f64 {
    stability_limit(d) / 4.0
}

pub fn check_stability(d: usize, step: f64) -> Result<()> {
    let limit = stability_limit(d);
    if !(step > 0.0 && step < limit) {
        return Err(Error::Stability { step, limit, d });
    }
    Ok(())
}

/// Positions `Xi^0, ..., Xi^d` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub time: f64,
    pub positions: Vec<f64>,
}

impl ChainState {
    pub fn initial(config: &ChainConfig) -> Self {
        let d = config.d;
        let positions = match config.system {
            ChainSystem::Pulled { .. } => (0..=d).map(|i| i as f64 / d as f64).collect(),
            ChainSystem::Homogeneous => vec![0.0; d + 1],
        };
        Self { time: 0.0, positions }
    }

    pub fn d(&self) -> usize {
        self.positions.len() - 1
    }
}

/// One explicit step. `noise[i-1]` is the chain increment `Delta B^{i,d}`.
pub fn euler_step(
    state: &ChainState,
    config: &ChainConfig,
    noise: &[f64],
    step: f64,
) -> Result<ChainState> {
    let d = config.d;
    if state.d() != d {
        return Err(Error::ShapeMismatch { expected: d + 1, found: state.positions.len() });
    }
    if noise.len() != d - 1 {
        return Err(Error::ShapeMismatch { expected: d - 1, found: noise.len() });
    }
    check_stability(d, step)?;
    let mut next = state.clone();
    advance(&state.positions, &mut next.positions, config, noise, step);
    next.time = state.time + step;
    next.positions[d] = config.system.right_boundary(next.time);
    Ok(next)
}

fn advance(x: &[f64], out: &mut [f64], config: &ChainConfig, noise: &[f64], step: f64) {
    let d = config.d;
    let df = d as f64;
    let drift = df * df * step;
    let diffusion = df.sqrt() * config.sigma;
    out[0] = 0.0;
    for i in 1..d {
        out[i] = x[i] + drift * (x[i + 1] - 2.0 * x[i] + x[i - 1]) + diffusion * noise[i - 1];
    }
}

/// Integrates over the driver's fine grid and samples every site on the
/// times of `grid` (`grid.d()` must equal `config.d`).
pub fn integrate(config: &ChainConfig, driver: &BrownianDriver, grid: &FieldGrid) -> Result<Field> {
    config.validate()?;
    let d = config.d;
    if grid.d() != d || grid.refine() != 1 {
        return Err(Error::GridMismatch(format!(
            "the oracle samples the node lattice of its own chain (d = {d}), got {grid:?}"
        )));
    }
    check_stability(d, driver.step())?;
    let basis = SpectralBasis::new(d)?;
    let noise = if config.sigma == 0.0 {
        Array2::zeros((d - 1, driver.n_steps()))
    } else {
        coupled_chain_noise(driver, &basis)?
    };
    let record = driver.step_indices(&grid.times())?;
    let mut values = Array2::zeros((grid.n_times(), d + 1));
    let mut state = ChainState::initial(config);
    let mut next = state.positions.clone();
    let mut column = vec![0.0; d - 1];
    let step = driver.step();
    let mut n = 0;
    for (j, &target) in record.iter().enumerate() {
        while n < target {
            for (i, c) in column.iter_mut().enumerate() {
                *c = noise[[i, n]];
            }
            advance(&state.positions, &mut next, config, &column, step);
            n += 1;
            // time from the step count so all trajectories share node times
            state.time = n as f64 * step;
            next[d] = config.system.right_boundary(state.time);
            std::mem::swap(&mut state.positions, &mut next);
        }
        values.row_mut(j).iter_mut().zip(&state.positions).for_each(|(v, x)| *v = *x);
    }
    Field::new(*grid, FieldKind::Euler, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stability_gate() {
        assert!(check_stability(8, 1.0 / 128.0).is_err());
        assert!(check_stability(8, 1.0 / 129.0).is_ok());
        assert!(check_stability(8, 0.0).is_err());
        let cfg = ChainConfig { d: 8, sigma: 1.0, system: ChainSystem::Homogeneous };
        let drv = BrownianDriver::new(1, 7, 64, 1.0).unwrap();
        let grid = FieldGrid::nodes(1.0, 8).unwrap();
        assert!(matches!(integrate(&cfg, &drv, &grid), Err(Error::Stability { .. })));
    }

    #[test]
    fn linear_profile_is_a_fixed_point() {
        let cfg = ChainConfig { d: 10, sigma: 0.0, system: ChainSystem::Pulled { epsilon: 0.0 } };
        let mut s = ChainState::initial(&cfg);
        let zero = vec![0.0; 9];
        for _ in 0..100 {
            s = euler_step(&s, &cfg, &zero, default_step(10)).unwrap();
        }
        for (i, x) in s.positions.iter().enumerate() {
            assert_abs_diff_eq!(*x, i as f64 / 10.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn boundaries_are_exact() {
        let cfg = ChainConfig { d: 6, sigma: 0.5, system: ChainSystem::Pulled { epsilon: 2.0 } };
        let mut s = ChainState::initial(&cfg);
        let noise = vec![0.01; 5];
        for _ in 0..10 {
            s = euler_step(&s, &cfg, &noise, 0.001).unwrap();
            assert_eq!(s.positions[0], 0.0);
            assert_eq!(s.positions[6], 1.0 + 2.0 * s.time);
        }
        assert!(euler_step(&s, &cfg, &[0.0; 4], 0.001).is_err());
    }

    #[test]
    fn reproducible() {
        let cfg = ChainConfig { d: 8, sigma: 1.0, system: ChainSystem::Pulled { epsilon: 1.0 } };
        let drv = BrownianDriver::new(4, 7, 1024, 1.0).unwrap();
        let grid = FieldGrid::nodes(1.0, 8).unwrap();
        let a = integrate(&cfg, &drv, &grid).unwrap();
        let b = integrate(&cfg, &drv, &grid).unwrap();
        assert_eq!(a.values, b.values);
    }
}
