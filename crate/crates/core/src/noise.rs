//! Master Brownian family `(B^k)_{k >= 1}` on a uniform fine time grid.
//!
//! Mode `k` draws its increments from its own ChaCha stream keyed by
//! `(seed, k)`, so enlarging the number of modes never changes the modes
//! already present, and a single mode can be regenerated on its own.

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};

/// Increments of `B^k` over `n_steps` equal steps of `[0, horizon]`.
pub fn mode_increments(seed: u64, k: usize, n_steps: usize, horizon: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let scale = (horizon / n_steps as f64).sqrt();
    (0..n_steps)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect()
}

/// Derives an independent seed for a named sub-experiment.
///
/// SplitMix64 finalizer over `(seed, tag, index)`.
pub fn substream_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in tag.bytes().chain(index.to_le_bytes()) {
        h = mix(h ^ u64::from(b));
    }
    mix(h)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The single source of randomness shared by every field representation.
#[derive(Clone, Debug)]
pub struct BrownianDriver {
    seed: u64,
    horizon: f64,
    /// `[n_modes x n_steps]`, row `k - 1` holds `Delta B^k`.
    increments: Array2<f64>,
}

impl BrownianDriver {
    pub fn new(seed: u64, n_modes: usize, n_steps: usize, horizon: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(domain("driver needs at least one mode"));
        }
        if n_steps == 0 {
            return Err(domain("driver needs at least one time step"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("horizon T = {horizon} must be positive and finite")));
        }
        let mut increments = Array2::zeros((n_modes, n_steps));
        for (k, mut row) in increments.rows_mut().into_iter().enumerate() {
            let inc = mode_increments(seed, k + 1, n_steps, horizon);
            row.iter_mut().zip(inc).for_each(|(r, x)| *r = x);
        }
        Ok(Self { seed, horizon, increments })
    }

    /// Wraps externally supplied increments, `[n_modes x n_steps]`.
    pub fn from_increments(seed: u64, horizon: f64, increments: Array2<f64>) -> Result<Self> {
        if increments.nrows() == 0 || increments.ncols() == 0 {
            return Err(domain("empty increment array"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(domain(format!("horizon T = {horizon} must be positive and finite")));
        }
        Ok(Self { seed, horizon, increments })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_modes(&self) -> usize {
        self.increments.nrows()
    }

    pub fn n_steps(&self) -> usize {
        self.increments.ncols()
    }

    /// Fine step `delta = T / M`.
    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps() as f64
    }

    /// Increments of mode `k` (1-based).
    pub fn mode(&self, k: usize) -> ArrayView1<'_, f64> {
        self.increments.row(k - 1)
    }

    pub fn increments(&self) -> &Array2<f64> {
        &self.increments
    }

    pub fn require_modes(&self, needed: usize) -> Result<()> {
        if self.n_modes() < needed {
            return Err(Error::InsufficientModes { needed, available: self.n_modes() });
        }
        Ok(())
    }

    /// The same Brownian paths seen on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps() % factor != 0 {
            return Err(Error::GridMismatch(format!(
                "cannot coarsen {} steps by a factor of {factor}",
                self.n_steps()
            )));
        }
        let coarse = self.n_steps() / factor;
        let increments = Array2::from_shape_fn((self.n_modes(), coarse), |(k, j)| {
            (0..factor).map(|s| self.increments[[k, j * factor + s]]).sum()
        });
        Ok(Self { seed: self.seed, horizon: self.horizon, increments })
    }

    /// Fine-step index of time `t`, which must lie on the fine grid.
    pub fn step_index(&self, t: f64) -> Result<usize> {
        let x = t / self.step();
        let n = x.round();
        if !(0.0..=self.n_steps() as f64).contains(&n) || (x - n).abs() > 1e-9 * x.abs().max(1.0) {
            return Err(Error::GridMismatch(format!(
                "time {t} is not a node of the fine grid with step {}",
                self.step()
            )));
        }
        Ok(n as usize)
    }

    /// Fine-step indices of every time in `times`.
    pub fn step_indices(&self, times: &[f64]) -> Result<Vec<usize>> {
        times.iter().map(|&t| self.step_index(t)).collect()
    }

    /// Brownian path `B^k(t_n)` at fine nodes `n = 0..=M`.
    pub fn path(&self, k: usize) -> Vec<f64> {
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(self.mode(k).iter().map(|x| {
                acc += x;
                acc
            }))
            .collect()
    }
}
