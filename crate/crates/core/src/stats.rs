//! Small Monte Carlo summaries.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Running moments of a sample, accumulated in input order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    /// Standard error of the variance estimate.
    pub variance_stderr: f64,
    /// `m4 / m2^2`.
    pub kurtosis: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::default();
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for x in xs {
            let c = x - mean;
            let c2 = c * c;
            m2 += c2;
            m4 += c2 * c2;
        }
        m2 /= nf;
        m4 /= nf;
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        Self {
            n,
            mean,
            variance,
            stderr: (variance / nf).sqrt(),
            variance_stderr: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
            kurtosis: if m2 > 0.0 { m4 / (m2 * m2) } else { f64::NAN },
        }
    }

    /// Approximate standard error of the kurtosis of a Gaussian sample.
    pub fn kurtosis_stderr(&self) -> f64 {
        (24.0 / self.n as f64).sqrt()
    }
}

/// Sample covariance of two equally long samples.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n as f64 - 1.0)
}

/// Linear-interpolation quantile of a sample, `q` in `[0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval for the slope.
    pub slope_ci: (f64, f64),
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len().min(y.len());
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = x[..n].iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if n <= 2 {
        return LineFit { slope, intercept, slope_stderr: f64::NAN, slope_ci: (f64::NAN, f64::NAN) };
    }
    let rss: f64 = x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    LineFit {
        slope,
        intercept,
        slope_stderr,
        slope_ci: (slope - t * slope_stderr, slope + t * slope_stderr),
    }
}

/// `exp(mean(ln r))`, the least-squares constant for `ln r_i = ln c`.
pub fn fitted_constant(ratios: &[f64]) -> f64 {
    (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
}

/// `max / min` of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn summary_of_small_sample() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_abs_diff_eq!(s.variance, 5.0 / 3.0, epsilon = 1e-15);
        assert_eq!(Summary::of(&[]).n, 0);
    }

    #[test]
    fn quantiles() {
        let xs = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert_eq!(quantile(&xs, 1.0), 5.0);
        assert_eq!(quantile(&xs, 0.125), 1.5);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|a| 1.0 - 0.5 * a).collect();
        let f = fit_line(&x, &y);
        assert_abs_diff_eq!(f.slope, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.intercept, 1.0, epsilon = 1e-14);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn constants() {
        assert_abs_diff_eq!(fitted_constant(&[2.0, 8.0]), 4.0, epsilon = 1e-14);
        assert_eq!(spread(&[1.0, 3.0, 2.0]), 3.0);
        assert_abs_diff_eq!(covariance(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), 2.0, epsilon = 1e-14);
    }
}
