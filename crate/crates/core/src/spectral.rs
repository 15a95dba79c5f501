//! Eigensystem of the discrete Dirichlet Laplacian.
//!
//! The chain interaction matrix `A` is the `(d-1) x (d-1)` tridiagonal matrix
//! with `-2` on the diagonal and `1` on both off-diagonals. Its eigenpairs are
//! known in closed form:
//!
//! ```text
//! lambda_k = -2 (1 - cos(k pi / d)),     f_k^m = sin(k m pi / d),
//! ```
//!
//! and `Q[j][k] = sqrt(2/d) f_k^j` is orthonormal. `Q` is also symmetric, so
//! the forward transform `Q^T x` and the inverse transform `Q c` are the same
//! sine sum. Both are available as explicit `O(d^2)` sums and through an FFT
//! based type-I sine transform.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};

/// `lambda_k` for the `(d-1) x (d-1)` Laplacian.
pub fn eigenvalue(d: usize, k: usize) -> Result<f64> {
    check_mode(d, k)?;
    Ok(eigenvalue_unchecked(d, k))
}

// -4 sin^2(x/2) == -2(1 - cos x), without the cancellation for small k/d.
fn eigenvalue_unchecked(d: usize, k: usize) -> f64 {
    let half = 0.5 * PI * k as f64 / d as f64;
    -4.0 * half.sin().powi(2)
}

/// `f_k^m = sin(k m pi / d)`.
pub fn eigenvector_component(d: usize, k: usize, m: usize) -> Result<f64> {
    check_mode(d, k)?;
    if m == 0 || m >= d {
        return Err(domain(format!("component index m = {m} outside 1..={}", d - 1)));
    }
    Ok(reduced_sine(k * m, d))
}

/// Decay rate `theta_k = pi^2 k^2` of the continuum mode `k`.
pub fn continuum_rate(k: usize) -> f64 {
    let k = k as f64;
    PI * PI * k * k
}

/// Continuum Dirichlet eigenfunction `psi_k(v) = sqrt(2) sin(k pi v)`.
pub fn continuum_eigenfunction(k: usize, v: f64) -> f64 {
    std::f64::consts::SQRT_2 * sin_pi(k as f64 * v)
}

/// `sin(pi x)`, exactly zero at integer `x`.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

fn check_mode(d: usize, k: usize) -> Result<()> {
    if d < 2 {
        return Err(domain(format!("number of intervals d = {d} must be at least 2")));
    }
    if k == 0 || k >= d {
        return Err(domain(format!("mode k = {k} outside 1..={}", d - 1)));
    }
    Ok(())
}

/// `sin(n pi / d)` with the argument reduced modulo `2d` first, so that
/// multiples of `d` give an exact zero.
fn reduced_sine(n: usize, d: usize) -> f64 {
    let r = n % (2 * d);
    if r == 0 || r == d {
        0.0
    } else {
        (PI * r as f64 / d as f64).sin()
    }
}

/// `y = A x` with the Dirichlet convention `x_0 = x_d = 0`.
pub fn apply_laplacian(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    laplacian_into(x, &mut out);
    out
}

pub fn apply_laplacian_into(x: &[f64], out: &mut [f64]) -> Result<()> {
    if x.len() != out.len() {
        return Err(Error::ShapeMismatch { expected: x.len(), found: out.len() });
    }
    laplacian_into(x, out);
    Ok(())
}

fn laplacian_into(x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let left = if i == 0 { 0.0 } else { x[i - 1] };
        let right = if i + 1 == n { 0.0 } else { x[i + 1] };
        out[i] = left - 2.0 * x[i] + right;
    }
}

/// How sine sums are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TransformMethod {
    /// Explicit `O(d^2)` sums over a table of sines.
    #[default]
    Direct,
    /// Type-I discrete sine transform through a complex FFT of length `2d`.
    Fast,
}

/// Closed-form eigensystem for a fixed number of intervals `d`.
///
/// Immutable after construction; safe to share across threads.
#[derive(Clone)]
pub struct SpectralBasis {
    d: usize,
    eigenvalues: Vec<f64>,
    /// `sin(m pi / d)` for `m = 0..2d`, exact zeros at `m = 0, d`.
    sines: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    method: TransformMethod,
}

impl fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("d", &self.d)
            .field("method", &self.method)
            .finish()
    }
}

impl SpectralBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(domain(format!("number of intervals d = {d} must be at least 2")));
        }
        let eigenvalues = (1..d).map(|k| eigenvalue_unchecked(d, k)).collect();
        let sines = (0..2 * d).map(|m| reduced_sine(m, d)).collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * d);
        Ok(Self { d, eigenvalues, sines, fft, method: TransformMethod::Direct })
    }

    pub fn with_method(mut self, method: TransformMethod) -> Self {
        self.method = method;
        self
    }

    pub fn method(&self) -> TransformMethod {
        self.method
    }

    /// Number of intervals.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of interior sites, `d - 1`.
    pub fn dim(&self) -> usize {
        self.d - 1
    }

    /// `lambda_k`, 1-based.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// All eigenvalues, `lambda_1 > lambda_2 > ... > lambda_{d-1}`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Decay rate `-d^2 lambda_k` of mode `k` in the rescaled chain.
    pub fn scaled_rate(&self, k: usize) -> f64 {
        let d = self.d as f64;
        -d * d * self.eigenvalue(k)
    }

    /// `f_k^m = sin(k m pi / d)`, both indices 1-based. `m` may be `0` or `d`
    /// (giving zero), which is handy at the boundary.
    pub fn eigenvector(&self, k: usize, m: usize) -> f64 {
        self.sines[(k * m) % (2 * self.d)]
    }

    /// Entry `Q[j][k] = sqrt(2/d) f_k^j` (1-based).
    pub fn q(&self, j: usize, k: usize) -> f64 {
        self.norm() * self.eigenvector(k, j)
    }

    fn norm(&self) -> f64 {
        (2.0 / self.d as f64).sqrt()
    }

    /// Coordinates `Q^T x` of an interior vector.
    pub fn transform_forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.sine_sum(x)?;
        let s = self.norm();
        out.iter_mut().for_each(|y| *y *= s);
        Ok(out)
    }

    /// Interior vector `Q c` from coordinates `c`.
    pub fn transform_inverse(&self, c: &[f64]) -> Result<Vec<f64>> {
        // Q is symmetric.
        self.transform_forward(c)
    }

    /// `y_j = sum_k c_k sin(j k pi / d)` for `j = 1..d-1`.
    pub fn sine_sum(&self, c: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.sine_sum_into(c, &mut out)?;
        Ok(out)
    }

    pub fn sine_sum_into(&self, c: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if c.len() != n {
            return Err(Error::ShapeMismatch { expected: n, found: c.len() });
        }
        if out.len() != n {
            return Err(Error::ShapeMismatch { expected: n, found: out.len() });
        }
        match self.method {
            TransformMethod::Direct => self.direct_sine_sum(c, out),
            TransformMethod::Fast => self.fast_sine_sum(c, out),
        }
        Ok(())
    }

    fn direct_sine_sum(&self, c: &[f64], out: &mut [f64]) {
        let period = 2 * self.d;
        for (j, y) in out.iter_mut().enumerate() {
            let j = j + 1;
            let mut acc = 0.0;
            let mut idx = 0;
            for &ck in c {
                idx += j;
                if idx >= period {
                    idx -= period;
                }
                acc += ck * self.sines[idx];
            }
            *y = acc;
        }
    }

    fn fast_sine_sum(&self, c: &[f64], out: &mut [f64]) {
        let d = self.d;
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * d];
        for (k, &ck) in c.iter().enumerate() {
            buf[k + 1].re = ck;
            buf[2 * d - k - 1].re = -ck;
        }
        self.fft.process(&mut buf);
        // FFT of the odd extension is -2i times the sine sum.
        for (j, y) in out.iter_mut().enumerate() {
            *y = -0.5 * buf[j + 1].im;
        }
    }

    /// `y_m = sum_{k=1}^{K} c_k sin(k m pi / d)` for `m = 0..=d` and any `K`.
    ///
    /// Modes `k >= d` are folded onto their aliases on the lattice
    /// (`sin((2d q +- r) m pi / d) = +- sin(r m pi / d)`), which is exact.
    pub fn lattice_series(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let d = self.d;
        let mut bins = vec![0.0; d - 1];
        for (m, &c) in coeffs.iter().enumerate() {
            let r = (m + 1) % (2 * d);
            if r == 0 || r == d {
                continue;
            }
            if r < d {
                bins[r - 1] += c;
            } else {
                bins[2 * d - r - 1] -= c;
            }
        }
        let mut out = vec![0.0; d + 1];
        self.sine_sum_into(&bins, &mut out[1..d])?;
        Ok(out)
    }

    /// Dense `Q`, row-major, for diagnostics and tests.
    pub fn q_matrix(&self) -> Vec<Vec<f64>> {
        (1..self.d)
            .map(|j| (1..self.d).map(|k| self.q(j, k)).collect())
            .collect()
    }
}

/// Sharp constant `c = 2/pi^2` in `cos u <= 1 - c u^2` on `[-pi, pi]`.
pub const COSINE_CONSTANT: f64 = 2.0 / (PI * PI);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_eigenvalues() {
        assert_abs_diff_eq!(eigenvalue(2, 1).unwrap(), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eigenvalue(3, 1).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eigenvalue(3, 2).unwrap(), -3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalue_domain_errors() {
        assert!(eigenvalue(1, 1).is_err());
        assert!(eigenvalue(4, 0).is_err());
        assert!(eigenvalue(4, 4).is_err());
        assert!(eigenvector_component(4, 1, 0).is_err());
        assert!(eigenvector_component(4, 1, 4).is_err());
        assert!(SpectralBasis::new(1).is_err());
    }

    #[test]
    fn scaled_first_eigenvalue_is_close_to_pi_squared() {
        let d = 64.0_f64;
        let lam = eigenvalue(64, 1).unwrap();
        let bound = PI.powi(4) / (12.0 * d * d) * 1.1;
        assert!((d * d * lam + PI * PI).abs() <= bound);
    }

    #[test]
    fn eigenvector_components() {
        assert_eq!(eigenvector_component(2, 1, 1).unwrap(), 1.0);
        assert_eq!(eigenvector_component(4, 2, 2).unwrap(), 0.0);
        for d in [2, 5, 16, 33] {
            for k in 1..d {
                let s: f64 = (1..d)
                    .map(|m| eigenvector_component(d, k, m).unwrap().powi(2))
                    .sum();
                assert_abs_diff_eq!(s, d as f64 / 2.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn laplacian_of_eigenvector() {
        let basis = SpectralBasis::new(12).unwrap();
        for k in 1..12 {
            let f: Vec<f64> = (1..12).map(|m| basis.eigenvector(k, m)).collect();
            let af = apply_laplacian(&f);
            for (a, x) in af.iter().zip(&f) {
                assert_abs_diff_eq!(*a, basis.eigenvalue(k) * x, epsilon = 1e-13);
            }
        }
        assert_eq!(apply_laplacian(&[0.0; 5]), vec![0.0; 5]);
        assert!(apply_laplacian_into(&[1.0, 2.0], &mut [0.0; 3]).is_err());
    }

    #[test]
    fn eigenvalues_strictly_decreasing_in_range() {
        let basis = SpectralBasis::new(100).unwrap();
        let ev = basis.eigenvalues();
        assert!(ev.windows(2).all(|w| w[1] < w[0]));
        assert!(ev.iter().all(|&l| l > -4.0 && l < 0.0));
    }

    #[test]
    fn sharp_cosine_bound_on_scaled_rates() {
        for d in [2, 3, 10, 64, 257] {
            let basis = SpectralBasis::new(d).unwrap();
            for k in 1..d {
                let lower = 2.0 * COSINE_CONSTANT * continuum_rate(k);
                assert!(basis.scaled_rate(k) >= lower * (1.0 - 1e-12), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn unit_coordinate_from_first_mode() {
        let basis = SpectralBasis::new(10).unwrap();
        let x: Vec<f64> = (1..10).map(|m| basis.q(m, 1)).collect();
        let c = basis.transform_forward(&x).unwrap();
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn fast_and_direct_agree() {
        for d in [2, 3, 7, 16, 100, 512] {
            let direct = SpectralBasis::new(d).unwrap();
            let fast = direct.clone().with_method(TransformMethod::Fast);
            let x: Vec<f64> = (0..d - 1).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
            let a = direct.transform_forward(&x).unwrap();
            let b = fast.transform_forward(&x).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert_abs_diff_eq!(p, q, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lattice_series_folds_high_modes() {
        let basis = SpectralBasis::new(6).unwrap();
        let coeffs: Vec<f64> = (1..=40).map(|k| 1.0 / k as f64).collect();
        let y = basis.lattice_series(&coeffs).unwrap();
        for (m, ym) in y.iter().enumerate() {
            let direct: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * sin_pi(((k + 1) * m) as f64 / 6.0))
                .sum();
            assert_abs_diff_eq!(*ym, direct, epsilon = 1e-13);
        }
        assert_eq!(y[0], 0.0);
        assert_eq!(y[6], 0.0);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let basis = SpectralBasis::new(8).unwrap();
        assert!(matches!(
            basis.transform_forward(&[1.0; 6]),
            Err(Error::ShapeMismatch { expected: 7, found: 6 })
        ));
    }
}
