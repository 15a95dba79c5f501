//! Spectral coordinates and the coupled random fields.
//!
//! Every stochastic integral is driven by the increments of one
//! [`BrownianDriver`]. Mode `k` enters
//!
//! ```text
//! S(t, v)        = sigma sum_{k<=K}  w_k(t)     sqrt(2) sin(k pi v),   w_k     rate pi^2 k^2
//! Sigma(t, i/d)  = sigma sum_{k<d}   w_{k,d}(t) sqrt(2) sin(k pi i/d), w_{k,d} rate -d^2 lambda_k
//! ```
//!
//! where each `w` is a zero-start Ornstein-Uhlenbeck coordinate
//! `int_0^t exp(-a(t-u)) dB^k_u`.

use std::f64::consts::{PI, SQRT_2};

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{step_field, Field, FieldGrid, FieldKind};
use crate::noise::BrownianDriver;
use crate::spectral::{continuum_rate, sin_pi, SpectralBasis, TransformMethod};

/// Update rule for one fine step of an OU coordinate driven by `Delta B`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuScheme {
    /// `w <- exp(-a delta) w + sqrt((1 - exp(-2 a delta)) / (2 a delta)) Delta B`.
    ///
    /// The step variance equals the exact transition variance, so the
    /// coordinate has the exact law at every fine node for any `a delta`.
    #[default]
    ExactStep,
    /// Left-endpoint Ito rule `w <- exp(-a delta) (w + Delta B)`.
    LeftEndpoint,
}

impl OuScheme {
    /// `(decay, noise gain)` for one step of length `delta` at rate `a`.
    pub fn coefficients(self, rate: f64, delta: f64) -> (f64, f64) {
        let x = rate * delta;
        let decay = (-x).exp();
        match self {
            OuScheme::ExactStep => {
                let gain = if x == 0.0 { 1.0 } else { (-(-2.0 * x).exp_m1() / (2.0 * x)).sqrt() };
                (decay, gain)
            }
            OuScheme::LeftEndpoint => (decay, decay),
        }
    }
}

/// `Var[int_0^t exp(-a(t-u)) dB_u] = (1 - exp(-2at)) / (2a)`.
pub fn ou_exact_variance(rate: f64, t: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(domain(format!("OU rate {rate} must be positive")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("time t = {t} must be >= 0")));
    }
    Ok(ou_variance(rate, t))
}

fn ou_variance(rate: f64, t: f64) -> f64 {
    -(-2.0 * rate * t).exp_m1() / (2.0 * rate)
}

/// `Var[w(t + h) - w(t)]` for a zero-start OU coordinate at rate `a > 0`.
pub fn ou_increment_variance(rate: f64, t: f64, h: f64) -> f64 {
    let shrink = (-rate * h).exp_m1();
    ou_variance(rate, t) * shrink * shrink + ou_variance(rate, h)
}

/// Covariance after `n` fine steps of two coordinates driven by the same
/// increments at rates `a` and `b` under `scheme`.
///
/// With `a = b` this is the exact variance of the simulated coordinate,
/// discretization included.
pub fn scheme_covariance(a: f64, b: f64, n: usize, delta: f64, scheme: OuScheme) -> f64 {
    let (da, ga) = scheme.coefficients(a, delta);
    let (db, gb) = scheme.coefficients(b, delta);
    let q = da * db;
    let sum = if q == 1.0 { n as f64 } else { (1.0 - q.powi(n as i32)) / (1.0 - q) };
    delta * ga * gb * sum
}

/// Runs one OU coordinate through the increments and records it at the
/// fine-step indices in `record` (ascending; `0` means `t = 0`).
pub fn evolve_increments(
    increments: ArrayView1<'_, f64>,
    delta: f64,
    rate: f64,
    scheme: OuScheme,
    record: &[usize],
) -> Vec<f64> {
    let (decay, gain) = scheme.coefficients(rate, delta);
    let mut out = Vec::with_capacity(record.len());
    let mut w = 0.0;
    let mut n = 0;
    for &target in record {
        while n < target {
            w = decay * w + gain * increments[n];
            n += 1;
        }
        out.push(w);
    }
    out
}

/// OU coordinate of mode `k` at rate `a >= 0`, sampled at `times`.
///
/// With `a = 0` this is the Brownian path `B^k` itself.
pub fn evolve_ou(
    driver: &BrownianDriver,
    k: usize,
    rate: f64,
    times: &[f64],
    scheme: OuScheme,
) -> Result<Vec<f64>> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(domain(format!("OU rate {rate} must be finite and >= 0")));
    }
    if k == 0 {
        return Err(domain("modes are numbered from 1"));
    }
    driver.require_modes(k)?;
    let record = sorted_indices(driver, times)?;
    Ok(evolve_increments(driver.mode(k), driver.step(), rate, scheme, &record))
}

fn sorted_indices(driver: &BrownianDriver, times: &[f64]) -> Result<Vec<usize>> {
    let idx = driver.step_indices(times)?;
    if idx.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::GridMismatch("evaluation times must be ascending".into()));
    }
    Ok(idx)
}

/// Paths of `w_k` and `w_{k,d}` for one mode on an evaluation grid.
#[derive(Clone, Debug, Serialize)]
pub struct OuEnsemble {
    pub k: usize,
    pub continuum_rate: f64,
    pub discrete_rate: f64,
    pub times: Vec<f64>,
    pub continuum: Vec<f64>,
    pub discrete: Vec<f64>,
}

impl OuEnsemble {
    pub fn new(
        driver: &BrownianDriver,
        basis: &SpectralBasis,
        k: usize,
        times: &[f64],
        scheme: OuScheme,
    ) -> Result<Self> {
        if k == 0 || k >= basis.d() {
            return Err(domain(format!("mode k = {k} outside 1..={}", basis.d() - 1)));
        }
        let continuum_rate = continuum_rate(k);
        let discrete_rate = basis.scaled_rate(k);
        Ok(Self {
            k,
            continuum_rate,
            discrete_rate,
            times: times.to_vec(),
            continuum: evolve_ou(driver, k, continuum_rate, times, scheme)?,
            discrete: evolve_ou(driver, k, discrete_rate, times, scheme)?,
        })
    }
}

/// Upper bound `sigma^2 / (pi^2 K)` on the pointwise variance of the modes
/// dropped from `S` by truncation at `K`.
pub fn s_truncation_variance_bound(sigma: f64, truncation: usize) -> f64 {
    sigma * sigma / (PI * PI * truncation as f64)
}

/// Exact pointwise variance of `Sigma(t, i/d)`.
pub fn sigma_d_variance(basis: &SpectralBasis, sigma: f64, t: f64, i: usize) -> f64 {
    (1..basis.d())
        .map(|k| 2.0 * basis.eigenvector(k, i).powi(2) * ou_variance(basis.scaled_rate(k), t))
        .sum::<f64>()
        * sigma
        * sigma
}

/// Exact pointwise variance of the `K`-mode field `S(t, v)`.
pub fn s_variance(truncation: usize, sigma: f64, t: f64, v: f64) -> f64 {
    (1..=truncation)
        .map(|k| 2.0 * sin_pi(k as f64 * v).powi(2) * ou_variance(continuum_rate(k), t))
        .sum::<f64>()
        * sigma
        * sigma
}

/// OU coordinates of every mode in `rates`, recorded at `record`.
/// Returns `[n_record x n_modes]`.
fn coordinate_table(
    driver: &BrownianDriver,
    rates: &[f64],
    record: &[usize],
    scheme: OuScheme,
) -> Array2<f64> {
    let mut table = Array2::zeros((record.len(), rates.len()));
    for (m, &rate) in rates.iter().enumerate() {
        let path = evolve_increments(driver.mode(m + 1), driver.step(), rate, scheme, record);
        table.column_mut(m).iter_mut().zip(path).for_each(|(x, w)| *x = w);
    }
    table
}

fn check_grid(driver: &BrownianDriver, grid: &FieldGrid) -> Result<Vec<usize>> {
    if grid.horizon() > driver.horizon() * (1.0 + 1e-12) {
        return Err(Error::GridMismatch(format!(
            "grid horizon {} exceeds driver horizon {}",
            grid.horizon(),
            driver.horizon()
        )));
    }
    driver.step_indices(&grid.times())
}

/// `Sigma(t_j, i/d)` at every lattice time and every site `i = 0..=d`.
pub fn sigma_d_nodes(
    driver: &BrownianDriver,
    basis: &SpectralBasis,
    sigma: f64,
    grid: &FieldGrid,
    scheme: OuScheme,
) -> Result<Array2<f64>> {
    let d = basis.d();
    if grid.d() != d {
        return Err(Error::GridMismatch(format!("grid d = {} but basis d = {d}", grid.d())));
    }
    driver.require_modes(d - 1)?;
    let record = check_grid(driver, grid)?;
    let rates: Vec<f64> = (1..d).map(|k| basis.scaled_rate(k)).collect();
    let coords = coordinate_table(driver, &rates, &record, scheme);
    let mut nodes = Array2::zeros((record.len(), d + 1));
    let mut row = vec![0.0; d - 1];
    let mut out = vec![0.0; d - 1];
    let scale = sigma * SQRT_2;
    for j in 0..record.len() {
        row.iter_mut().zip(coords.row(j)).for_each(|(r, c)| *r = *c);
        basis.sine_sum_into(&row, &mut out)?;
        for i in 1..d {
            nodes[[j, i]] = scale * out[i - 1];
        }
    }
    Ok(nodes)
}

/// The step field `Sigma_d(t, v) = Sigma(t, floor(dv)/d)` on the lattice.
pub fn sigma_d_field(
    driver: &BrownianDriver,
    basis: &SpectralBasis,
    sigma: f64,
    grid: &FieldGrid,
) -> Result<Field> {
    let nodes = sigma_d_nodes(driver, basis, sigma, grid, OuScheme::default())?;
    step_field(*grid, FieldKind::SigmaD, &nodes)
}

/// The `K`-mode field `S` at every lattice point.
///
/// Modes above the lattice resolution `N = d * refine` are folded onto
/// their sine aliases on `{m/N}`, which is exact on the lattice.
pub fn s_field_with(
    driver: &BrownianDriver,
    truncation: usize,
    sigma: f64,
    grid: &FieldGrid,
    scheme: OuScheme,
) -> Result<Field> {
    if truncation == 0 {
        return Err(domain("truncation K must be at least 1"));
    }
    driver.require_modes(truncation)?;
    let record = check_grid(driver, grid)?;
    let rates: Vec<f64> = (1..=truncation).map(continuum_rate).collect();
    let coords = coordinate_table(driver, &rates, &record, scheme);
    let synth = SpectralBasis::new(grid.cells())?.with_method(TransformMethod::Fast);
    let mut values = Array2::zeros((grid.n_times(), grid.n_positions()));
    let scale = sigma * SQRT_2;
    let mut row = vec![0.0; truncation];
    for j in 0..record.len() {
        row.iter_mut().zip(coords.row(j)).for_each(|(r, c)| *r = *c);
        let series = synth.lattice_series(&row)?;
        values.row_mut(j).iter_mut().zip(series).for_each(|(x, y)| *x = scale * y);
    }
    Field::new(*grid, FieldKind::STruncated, values)
}

pub fn s_field(driver: &BrownianDriver, truncation: usize, sigma: f64, grid: &FieldGrid) -> Result<Field> {
    s_field_with(driver, truncation, sigma, grid, OuScheme::default())
}

/// `S(t, v)` from the coordinates `w_1(t), ..., w_K(t)` at an arbitrary `v`.
pub fn s_value(coords: &[f64], sigma: f64, v: f64) -> f64 {
    let sum: f64 = coords
        .iter()
        .enumerate()
        .map(|(m, w)| w * sin_pi((m + 1) as f64 * v))
        .sum();
    sigma * SQRT_2 * sum
}

/// Continuum coordinates `w_1(t), ..., w_K(t)` at each of `times`,
/// as `[n_times x K]`.
pub fn continuum_coordinates(
    driver: &BrownianDriver,
    truncation: usize,
    times: &[f64],
    scheme: OuScheme,
) -> Result<Array2<f64>> {
    driver.require_modes(truncation)?;
    let record = sorted_indices(driver, times)?;
    let rates: Vec<f64> = (1..=truncation).map(continuum_rate).collect();
    Ok(coordinate_table(driver, &rates, &record, scheme))
}

/// Discrete coordinates `w_{1,d}(t), ..., w_{d-1,d}(t)` at each of `times`,
/// as `[n_times x (d-1)]`.
pub fn discrete_coordinates(
    driver: &BrownianDriver,
    basis: &SpectralBasis,
    times: &[f64],
    scheme: OuScheme,
) -> Result<Array2<f64>> {
    driver.require_modes(basis.dim())?;
    let record = sorted_indices(driver, times)?;
    let rates: Vec<f64> = (1..basis.d()).map(|k| basis.scaled_rate(k)).collect();
    Ok(coordinate_table(driver, &rates, &record, scheme))
}

/// `Sigma(t, i/d)` from discrete coordinates.
pub fn sigma_value(basis: &SpectralBasis, coords: &[f64], sigma: f64, i: usize) -> f64 {
    let sum: f64 = coords
        .iter()
        .enumerate()
        .map(|(m, w)| w * basis.eigenvector(m + 1, i))
        .sum();
    sigma * SQRT_2 * sum
}

/// Increments of the chain noises `(B^{1,d}, ..., B^{d-1,d}) = Q (B^1, ..., B^{d-1})`,
/// as `[(d-1) x M]`.
pub fn coupled_chain_noise(driver: &BrownianDriver, basis: &SpectralBasis) -> Result<Array2<f64>> {
    let dim = basis.dim();
    driver.require_modes(dim)?;
    let steps = driver.n_steps();
    let mut out = Array2::zeros((dim, steps));
    let mut col = vec![0.0; dim];
    for n in 0..steps {
        for (k, c) in col.iter_mut().enumerate() {
            *c = driver.increments()[[k, n]];
        }
        let rotated = basis.transform_inverse(&col)?;
        out.column_mut(n).iter_mut().zip(rotated).for_each(|(o, r)| *o = r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_variance_values() {
        assert_abs_diff_eq!(ou_exact_variance(PI * PI, 10.0).unwrap(), 0.5 / (PI * PI), epsilon = 1e-12);
        assert_eq!(ou_exact_variance(3.0, 0.0).unwrap(), 0.0);
        assert!(ou_exact_variance(0.0, 1.0).is_err());
        assert!(ou_exact_variance(-1.0, 1.0).is_err());
    }

    #[test]
    fn zero_rate_gives_brownian_path() {
        let drv = BrownianDriver::new(5, 2, 64, 1.0).unwrap();
        let times: Vec<f64> = (0..=8).map(|j| j as f64 / 8.0).collect();
        let path = drv.path(2);
        for scheme in [OuScheme::ExactStep, OuScheme::LeftEndpoint] {
            let w = evolve_ou(&drv, 2, 0.0, &times, scheme).unwrap();
            for (j, x) in w.iter().enumerate() {
                assert_abs_diff_eq!(*x, path[8 * j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn evolve_rejects_off_grid_times() {
        let drv = BrownianDriver::new(5, 2, 64, 1.0).unwrap();
        assert!(evolve_ou(&drv, 1, 1.0, &[0.001], OuScheme::ExactStep).is_err());
        assert!(evolve_ou(&drv, 3, 1.0, &[0.5], OuScheme::ExactStep).is_err());
        assert!(evolve_ou(&drv, 1, 1.0, &[0.5, 0.25], OuScheme::ExactStep).is_err());
    }

    #[test]
    fn increment_variance_limits() {
        let a = 4.0;
        assert_abs_diff_eq!(ou_increment_variance(a, 0.0, 0.3), ou_variance(a, 0.3), epsilon = 1e-15);
        assert_eq!(ou_increment_variance(a, 0.5, 0.0), 0.0);
    }

    #[test]
    fn lattice_s_field_matches_direct_sum() {
        let drv = BrownianDriver::new(11, 40, 256, 1.0).unwrap();
        let grid = FieldGrid::new(1.0, 4, 4).unwrap();
        let field = s_field(&drv, 40, 1.3, &grid).unwrap();
        let coords = continuum_coordinates(&drv, 40, &grid.times(), OuScheme::ExactStep).unwrap();
        for j in 0..grid.n_times() {
            let row: Vec<f64> = coords.row(j).to_vec();
            for i in 0..grid.n_positions() {
                let direct = s_value(&row, 1.3, grid.position(i));
                assert_abs_diff_eq!(field.at(j, i), direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fields_vanish_on_boundaries() {
        let drv = BrownianDriver::new(2, 64, 512, 1.0).unwrap();
        let grid = FieldGrid::new(1.0, 16, 2).unwrap();
        let basis = SpectralBasis::new(16).unwrap();
        let sig = sigma_d_field(&drv, &basis, 1.0, &grid).unwrap();
        let s = s_field(&drv, 64, 1.0, &grid).unwrap();
        for f in [&sig, &s] {
            assert!(f.values.row(0).iter().all(|&x| x == 0.0));
            assert!(f.values.column(0).iter().all(|&x| x == 0.0));
            assert!(f.values.column(grid.n_positions() - 1).iter().all(|&x| x == 0.0));
        }
        let zero = sigma_d_field(&drv, &basis, 0.0, &grid).unwrap();
        assert!(zero.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn insufficient_modes() {
        let drv = BrownianDriver::new(2, 8, 64, 1.0).unwrap();
        let grid = FieldGrid::nodes(1.0, 16).unwrap();
        let basis = SpectralBasis::new(16).unwrap();
        assert!(matches!(
            sigma_d_field(&drv, &basis, 1.0, &grid),
            Err(Error::InsufficientModes { needed: 15, available: 8 })
        ));
        assert!(s_field(&drv, 9, 1.0, &grid).is_err());
        assert!(coupled_chain_noise(&drv, &basis).is_err());
    }

    #[test]
    fn single_mode_rotation_is_identity() {
        let drv = BrownianDriver::new(9, 1, 32, 1.0).unwrap();
        let basis = SpectralBasis::new(2).unwrap();
        let rotated = coupled_chain_noise(&drv, &basis).unwrap();
        for (a, b) in rotated.row(0).iter().zip(drv.mode(1)) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn exact_variance_bounds_from_cosine_constant() {
        // Var[w_k] <= 1/(2 pi^2 k^2) and Var[w_{k,d}] <= 1/(-2 d^2 lambda_k) <= 1/(8 k^2)
        for d in [4, 16, 128] {
            let basis = SpectralBasis::new(d).unwrap();
            for k in 1..d {
                for t in [0.01, 0.5, 5.0] {
                    let kk = (k * k) as f64;
                    assert!(ou_variance(continuum_rate(k), t) <= 0.5 / (PI * PI * kk) * (1.0 + 1e-12));
                    assert!(ou_variance(basis.scaled_rate(k), t) <= 1.0 / (8.0 * kk) * (1.0 + 1e-12));
                }
            }
        }
    }
}
