//! Mean field of the pulled chain (`sigma = 0`).
//!
//! On the lattice the solution is
//!
//! ```text
//! Delta(t, i/d) = (i/d)(eps t + 1) + eps (h^i / d^2 - [exp(d^2 t A) h / d^2]^i),
//! h^i = (i / 6d)(i^2 - d^2),
//! ```
//!
//! and its continuum limit is
//!
//! ```text
//! D(t, v) = v(eps t + 1) + eps (h(v) - sum_k c_k exp(-k^2 pi^2 t) sqrt(2) sin(k pi v)),
//! h(v) = v (v^2 - 1) / 6,    c_k = sqrt(2) int_0^1 h(v) sin(k pi v) dv = (-1)^k sqrt(2) / (k pi)^3.
//! ```
//!
//! The matrix exponential is always applied through the exact eigensystem.

use std::f64::consts::{PI, SQRT_2};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{step_field, Field, FieldGrid, FieldKind};
use crate::spectral::{continuum_eigenfunction, SpectralBasis, TransformMethod};

/// Default number of retained sine modes in `D`.
pub const DEFAULT_TRUNCATION: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicParams {
    /// Pulling speed of the right end.
    pub epsilon: f64,
    /// Number of intervals of the chain.
    pub d: usize,
    /// Number of retained modes in the continuum series.
    pub truncation: usize,
}

impl DeterministicParams {
    pub fn new(epsilon: f64, d: usize, truncation: usize) -> Result<Self> {
        let p = Self { epsilon, d, truncation };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(domain(format!("pulling speed {} must be finite and >= 0", self.epsilon)));
        }
        if self.d < 2 {
            return Err(domain(format!("d = {} must be at least 2", self.d)));
        }
        if self.truncation == 0 {
            return Err(domain("truncation K must be at least 1"));
        }
        Ok(())
    }
}

/// `h(v) = v(v^2 - 1)/6` on `[0, 1]`.
pub fn h_continuum(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(domain(format!("position v = {v} outside [0, 1]")));
    }
    Ok(v * (v * v - 1.0) / 6.0)
}

/// `h^i = (i/(6d))(i^2 - d^2)`, which equals `d^2 h(i/d)`.
pub fn h_discrete(d: usize, i: usize) -> Result<f64> {
    if d < 2 || i > d {
        return Err(domain(format!("site i = {i} outside 0..={d}")));
    }
    Ok(h_site(d, i))
}

fn h_site(d: usize, i: usize) -> f64 {
    let (i, d) = (i as f64, d as f64);
    i / (6.0 * d) * (i * i - d * d)
}

/// Sine coefficient `c_k = sqrt(2) int_0^1 h(v) sin(k pi v) dv` in closed form.
pub fn fourier_coeff(k: usize) -> f64 {
    let kp = k as f64 * PI;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * SQRT_2 / (kp * kp * kp)
}

/// Certified bound on `|D - D_K|`: `eps sqrt(2) sum_{k>K} |c_k| <= eps / (pi^3 K^2)`.
pub fn continuum_truncation_bound(epsilon: f64, truncation: usize) -> f64 {
    let k = truncation as f64;
    epsilon / (PI.powi(3) * k * k)
}

/// Spectral solver for the discrete mean field at fixed `d`.
///
/// Holds the projections `p_k = sum_m h^m f_k^m`, so each evaluation is a
/// single sine sum.
#[derive(Clone, Debug)]
pub struct DeterministicSolver {
    epsilon: f64,
    basis: SpectralBasis,
    h: Vec<f64>,
    projections: Vec<f64>,
}

impl DeterministicSolver {
    pub fn new(epsilon: f64, d: usize) -> Result<Self> {
        Self::with_basis(epsilon, SpectralBasis::new(d)?)
    }

    pub fn with_basis(epsilon: f64, basis: SpectralBasis) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(domain(format!("pulling speed {epsilon} must be finite and >= 0")));
        }
        let d = basis.d();
        let h: Vec<f64> = (1..d).map(|i| h_site(d, i)).collect();
        let projections = basis.sine_sum(&h)?;
        Ok(Self { epsilon, basis, h, projections })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn check(&self, t: f64, i: usize) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain(format!("time t = {t} must be finite and >= 0")));
        }
        if i > self.basis.d() {
            return Err(domain(format!("site i = {i} outside 0..={}", self.basis.d())));
        }
        Ok(())
    }

    fn boundary(&self, t: f64, i: usize) -> Option<f64> {
        if i == 0 {
            Some(0.0)
        } else if i == self.basis.d() {
            Some(1.0 + self.epsilon * t)
        } else {
            None
        }
    }

    /// `Delta(t, i/d)` with `exp(d^2 t A) h` evaluated as `Q exp(d^2 t Lambda) Q^T h`.
    pub fn delta_matrix(&self, t: f64, i: usize) -> Result<f64> {
        self.check(t, i)?;
        if let Some(b) = self.boundary(t, i) {
            return Ok(b);
        }
        let d = self.basis.d() as f64;
        let mut coords = self.basis.transform_forward(&self.h)?;
        for (k, c) in coords.iter_mut().enumerate() {
            *c *= (d * d * t * self.basis.eigenvalue(k + 1)).exp();
        }
        let evolved = self.basis.transform_inverse(&coords)?;
        Ok(self.assemble(t, i, evolved[i - 1]))
    }

    /// `Delta(t, i/d)` through the precomputed projections
    /// `(2/d^3) sum_k p_k exp(d^2 t lambda_k) f_k^i`.
    pub fn delta_spectral(&self, t: f64, i: usize) -> Result<f64> {
        self.check(t, i)?;
        if let Some(b) = self.boundary(t, i) {
            return Ok(b);
        }
        let d = self.basis.d() as f64;
        let mut acc = 0.0;
        for (k, p) in self.projections.iter().enumerate() {
            let k = k + 1;
            acc += p * (d * d * t * self.basis.eigenvalue(k)).exp() * self.basis.eigenvector(k, i);
        }
        // assemble() divides by d^2; the sine sum carries the remaining 2/d.
        Ok(self.assemble(t, i, 2.0 / d * acc))
    }

    // (i/d)(eps t + 1) + eps (h^i - evolved^i) / d^2
    fn assemble(&self, t: f64, i: usize, evolved: f64) -> f64 {
        let d = self.basis.d() as f64;
        i as f64 / d * (self.epsilon * t + 1.0) + self.epsilon * (self.h[i - 1] - evolved) / (d * d)
    }

    /// All sites `i = 0..=d` at time `t`.
    pub fn profile(&self, t: f64) -> Result<Vec<f64>> {
        self.check(t, 0)?;
        let d = self.basis.d();
        let df = d as f64;
        let coeffs: Vec<f64> = self
            .projections
            .iter()
            .enumerate()
            .map(|(k, p)| p * (df * df * t * self.basis.eigenvalue(k + 1)).exp())
            .collect();
        let evolved = self.basis.sine_sum(&coeffs)?;
        let mut out = Vec::with_capacity(d + 1);
        out.push(0.0);
        for i in 1..d {
            out.push(self.assemble(t, i, 2.0 / df * evolved[i - 1]));
        }
        out.push(1.0 + self.epsilon * t);
        Ok(out)
    }

    /// `Delta_d(t, v) = Delta(t, floor(dv)/d)` on the lattice.
    pub fn field(&self, grid: FieldGrid) -> Result<Field> {
        if grid.d() != self.basis.d() {
            return Err(crate::error::Error::GridMismatch(format!(
                "grid resolution {} differs from solver resolution {}",
                grid.d(),
                self.basis.d()
            )));
        }
        let mut nodal = Array2::zeros((grid.n_times(), grid.d() + 1));
        for (j, mut row) in nodal.rows_mut().into_iter().enumerate() {
            let p = self.profile(grid.time(j))?;
            row.iter_mut().zip(p).for_each(|(r, x)| *r = x);
        }
        step_field(grid, FieldKind::DeltaD, &nodal)
    }
}

/// `Delta(t, i/d)` through the matrix-exponential representation.
pub fn delta_discrete_matrix(params: &DeterministicParams, t: f64, i: usize) -> Result<f64> {
    params.validate()?;
    DeterministicSolver::new(params.epsilon, params.d)?.delta_matrix(t, i)
}

/// `Delta(t, i/d)` through the projected spectral sum.
pub fn delta_discrete_spectral(params: &DeterministicParams, t: f64, i: usize) -> Result<f64> {
    params.validate()?;
    DeterministicSolver::new(params.epsilon, params.d)?.delta_spectral(t, i)
}

/// Truncated continuum limit `D`.
#[derive(Clone, Debug)]
pub struct ContinuumProfile {
    epsilon: f64,
    coeffs: Vec<f64>,
}

impl ContinuumProfile {
    pub fn new(epsilon: f64, truncation: usize) -> Result<Self> {
        DeterministicParams::new(epsilon, 2, truncation)?;
        let coeffs = (1..=truncation).map(fourier_coeff).collect();
        Ok(Self { epsilon, coeffs })
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn truncation_bound(&self) -> f64 {
        continuum_truncation_bound(self.epsilon, self.truncation())
    }

    pub fn value(&self, t: f64, v: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain(format!("time t = {t} must be finite and >= 0")));
        }
        let h = h_continuum(v)?;
        if v == 0.0 {
            return Ok(0.0);
        }
        if v == 1.0 {
            return Ok(1.0 + self.epsilon * t);
        }
        let mut series = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let k = k + 1;
            let decay = (-crate::spectral::continuum_rate(k) * t).exp();
            if decay == 0.0 {
                break;
            }
            series += c * decay * continuum_eigenfunction(k, v);
        }
        Ok(v * (self.epsilon * t + 1.0) + self.epsilon * (h - series))
    }

    /// `D` sampled on every lattice point, through one lattice sine series
    /// per time row.
    pub fn field(&self, grid: FieldGrid) -> Result<Field> {
        let synth = SpectralBasis::new(grid.cells())?.with_method(TransformMethod::Fast);
        let mut values = Array2::zeros((grid.n_times(), grid.n_positions()));
        let mut weighted = vec![0.0; self.coeffs.len()];
        for j in 0..grid.n_times() {
            let t = grid.time(j);
            for (k, (w, c)) in weighted.iter_mut().zip(&self.coeffs).enumerate() {
                *w = SQRT_2 * c * (-crate::spectral::continuum_rate(k + 1) * t).exp();
            }
            let series = synth.lattice_series(&weighted)?;
            for (i, s) in series.iter().enumerate() {
                let v = grid.position(i);
                values[[j, i]] = v * (self.epsilon * t + 1.0) + self.epsilon * (h_continuum(v)? - s);
            }
            let last = grid.n_positions() - 1;
            values[[j, 0]] = 0.0;
            values[[j, last]] = 1.0 + self.epsilon * t;
        }
        Field::new(grid, FieldKind::DContinuum, values)
    }
}

/// Truncated `D(t, v)` with `K` modes.
pub fn d_continuum(epsilon: f64, t: f64, v: f64, truncation: usize) -> Result<f64> {
    ContinuumProfile::new(epsilon, truncation)?.value(t, v)
}

/// Largest `|Delta_d - D|` over the node lattice `t_j = jT/d`, `v_i = i/d`.
pub fn node_sup_error(
    solver: &DeterministicSolver,
    continuum: &ContinuumProfile,
    horizon: f64,
) -> Result<f64> {
    let grid = FieldGrid::nodes(horizon, solver.basis().d())?;
    let mut worst = 0.0_f64;
    for j in 0..grid.n_times() {
        let t = grid.time(j);
        let p = solver.profile(t)?;
        for (i, x) in p.iter().enumerate() {
            worst = worst.max((x - continuum.value(t, grid.position(i))?).abs());
        }
    }
    Ok(worst)
}

/// Solver with a fast sine transform, for large `d`.
pub fn fast_solver(epsilon: f64, d: usize) -> Result<DeterministicSolver> {
    DeterministicSolver::with_basis(epsilon, SpectralBasis::new(d)?.with_method(TransformMethod::Fast))
}
