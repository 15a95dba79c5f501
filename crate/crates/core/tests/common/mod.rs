//! Independent oracles for the integration tests. Nothing here calls the
//! closed forms under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// The `(d-1) x (d-1)` tridiagonal `(1, -2, 1)` matrix.
pub fn laplacian(d: usize) -> DMatrix<f64> {
    let n = d - 1;
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => -2.0,
        1 => 1.0,
        _ => 0.0,
    })
}

/// Eigenpairs of the Laplacian from a dense symmetric solver, eigenvalues
/// in decreasing order, eigenvectors normalized with a positive first entry.
pub fn dense_eigen(d: usize) -> (Vec<f64>, Vec<DVector<f64>>) {
    let eig = SymmetricEigen::new(laplacian(d));
    let mut order: Vec<usize> = (0..d - 1).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let v = eig.eigenvectors.column(i).into_owned();
            if v[0] < 0.0 {
                -v
            } else {
                v
            }
        })
        .collect();
    (values, vectors)
}

/// Classical RK4 for the rescaled mean chain
/// `x_i' = d^2 (x_{i+1} - 2 x_i + x_{i-1})`, `x_0 = 0`, `x_d = 1 + eps t`,
/// started from `x_i(0) = i/d`. Returns all sites at `t_end`.
pub fn rk4_mean_chain(epsilon: f64, d: usize, t_end: f64, dt: f64) -> Vec<f64> {
    let n = d - 1;
    let d2 = (d * d) as f64;
    let rhs = |t: f64, x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { x[i - 1] };
                let right = if i == n - 1 { 1.0 + epsilon * t } else { x[i + 1] };
                d2 * (right - 2.0 * x[i] + left)
            })
            .collect()
    };
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let mut x: Vec<f64> = (1..d).map(|i| i as f64 / d as f64).collect();
    let steps = (t_end / dt).round() as usize;
    let h = t_end / steps as f64;
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + h / 2.0, &axpy(&x, &k1, h / 2.0));
        let k3 = rhs(t + h / 2.0, &axpy(&x, &k2, h / 2.0));
        let k4 = rhs(t + h, &axpy(&x, &k3, h));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let mut out = vec![0.0];
    out.extend(x);
    out.push(1.0 + epsilon * t_end);
    out
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`, started on 32
/// panels so that oscillating integrands cannot fool the first estimate.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const PANELS: usize = 32;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|p| simpson_adaptive(f, a + p as f64 * h, a + (p + 1) as f64 * h, tol / PANELS as f64))
        .sum()
}

fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Dense matrix-vector product.
pub fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).iter().cloned().collect()
}

/// Sample mean and unbiased variance with the standard error of each.
pub struct Moments {
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    Moments { mean, mean_se: (var / n).sqrt(), var, var_se: ((m4 - m2 * m2) / n).sqrt() }
}

/// `|estimate - target| <= k * se`, with a readable failure message.
pub fn within_se(estimate: f64, target: f64, se: f64, k: f64) -> Result<(), String> {
    if (estimate - target).abs() <= k * se {
        Ok(())
    } else {
        Err(format!("estimate {estimate} vs target {target}: {:.2} SE", (estimate - target).abs() / se))
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
