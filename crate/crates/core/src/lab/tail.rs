use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Check, Verdict};
use crate::error::{domain, Result};
use crate::noise::{substream_seed, BrownianDriver};
use crate::spectral::SpectralBasis;
use crate::stats::{fit_line, LineFit};
use crate::stochastic::{discrete_coordinates, scheme_covariance, OuScheme};

/// Thresholds `r`, in units of the process scale.
pub const DEFAULT_THRESHOLDS: [f64; 8] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub r: f64,
    pub exceedances: usize,
    pub probability: f64,
    pub log_probability: f64,
    /// Binomial standard error of `probability`.
    pub stderr: f64,
    /// Whether the row has enough exceedances to enter the fit.
    pub observable: bool,
}

/// Empirical `P(sup Y >= r * scale)` against `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub label: String,
    pub samples: usize,
    pub scale: f64,
    pub min_exceedances: usize,
    pub rows: Vec<TailRow>,
    /// Least-squares fit of `ln P` against `r^2` over observable rows.
    pub slope: Option<LineFit>,
    /// `ln P(2r) / ln P(r)` wherever both are observable.
    pub doubling: Vec<(f64, f64)>,
    /// Largest second difference of `ln P` over consecutive observable rows;
    /// `<= 0` means `ln P` is concave in `r`.
    pub max_curvature: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

impl TailReport {
    pub fn check(&self) -> Check {
        let c = match self.slope {
            Some(f) => Check::new(format!("{}_tail_slope", self.label), f.slope, self.verdict)
                .with_stderr(f.slope_stderr)
                .with_threshold(0.0),
            None => Check::new(format!("{}_tail_slope", self.label), f64::NAN, self.verdict),
        };
        c.with_note(self.note.clone())
    }

    pub fn observable(&self) -> impl Iterator<Item = &TailRow> {
        self.rows.iter().filter(|r| r.observable)
    }
}

/// Tail table of `samples` at thresholds `r * scale`.
///
/// PASS when `ln P` falls strictly across the observable rows and the
/// fitted slope against `r^2` has a 95% interval below zero. Fewer than
/// three observable rows gives `Insufficient`, not a failure.
pub fn tail_check(
    label: &str,
    samples: &[f64],
    scale: f64,
    thresholds: &[f64],
    min_exceedances: usize,
) -> Result<TailReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(domain(format!("tail scale {scale} must be positive")));
    }
    if samples.is_empty() {
        return Err(domain("no samples"));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("thresholds must be strictly increasing"));
    }
    let n = samples.len() as f64;
    let rows: Vec<TailRow> = thresholds
        .iter()
        .map(|&r| {
            let exceedances = samples.iter().filter(|&&y| y >= r * scale).count();
            let p = exceedances as f64 / n;
            TailRow {
                r,
                exceedances,
                probability: p,
                log_probability: p.ln(),
                stderr: (p * (1.0 - p) / n).sqrt(),
                observable: exceedances >= min_exceedances.max(1),
            }
        })
        .collect();
    let obs: Vec<&TailRow> = rows.iter().filter(|r| r.observable).collect();
    let mut doubling = Vec::new();
    for a in &obs {
        if let Some(b) = obs.iter().find(|b| (b.r - 2.0 * a.r).abs() < 1e-12) {
            doubling.push((a.r, b.log_probability / a.log_probability));
        }
    }
    let max_curvature = obs
        .windows(3)
        .map(|w| w[2].log_probability - 2.0 * w[1].log_probability + w[0].log_probability)
        .reduce(f64::max);
    let (slope, verdict, note) = if obs.len() < 3 {
        (
            None,
            Verdict::Insufficient,
            format!(
                "insufficient tail data: {} thresholds with at least {min_exceedances} exceedances",
                obs.len()
            ),
        )
    } else {
        let x: Vec<f64> = obs.iter().map(|r| r.r * r.r).collect();
        let y: Vec<f64> = obs.iter().map(|r| r.log_probability).collect();
        let fit = fit_line(&x, &y);
        let falling = y.windows(2).all(|w| w[1] < w[0]);
        let ok = falling && fit.slope_ci.1 < 0.0;
        let note = format!(
            "ln P vs r^2 slope {:.4} (95% CI [{:.4}, {:.4}]) over {} thresholds{}",
            fit.slope,
            fit.slope_ci.0,
            fit.slope_ci.1,
            obs.len(),
            if falling { "" } else { "; ln P not strictly decreasing" }
        );
        (Some(fit), Verdict::from_bool(ok), note)
    };
    Ok(TailReport {
        label: label.to_string(),
        samples: samples.len(),
        scale,
        min_exceedances,
        rows,
        slope,
        doubling,
        max_curvature,
        verdict,
        note,
    })
}

/// `xi * T^H` for standard normal `xi`; the one-dimensional sanity case.
pub fn gaussian_tail_samples(n: usize, horizon: f64, hurst: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    if !(hurst > 0.0 && hurst <= 1.0) {
        return Err(domain(format!("H = {hurst} must lie in (0, 1]")));
    }
    if !(horizon > 0.0) {
        return Err(domain("window length must be positive"));
    }
    let scale = horizon.powf(hurst);
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, "gaussian-tail", 0));
    let xs = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect();
    Ok((xs, scale))
}

/// Sup of the time increment `Y_tau = Sigma(t + tau, i/d) - Sigma(t, i/d)`
/// over `tau` in `[0, T/d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub sigma: f64,
    pub horizon: f64,
    pub d: usize,
    pub steps_per_unit: usize,
    pub replications: usize,
    pub seed: u64,
    /// Window start `t`.
    pub time: f64,
    /// Site `v`, rounded down to `i/d`.
    pub position: f64,
    pub thresholds: Vec<f64>,
    pub min_exceedances: usize,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            horizon: 1.0,
            d: 32,
            steps_per_unit: 4096,
            replications: 10_000,
            seed: 2024,
            time: 0.5,
            position: 0.5,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            min_exceedances: 10,
        }
    }
}

impl TailConfig {
    fn steps(&self, t: f64) -> Result<usize> {
        let x = t * self.steps_per_unit as f64;
        if (x - x.round()).abs() > 1e-9 * x.max(1.0) {
            return Err(domain(format!(
                "time {t} is not on the fine grid with {} steps per unit",
                self.steps_per_unit
            )));
        }
        Ok(x.round() as usize)
    }

    fn window(&self) -> Result<(usize, usize)> {
        if self.d < 2 {
            return Err(domain("tail check needs d >= 2"));
        }
        if !(self.sigma > 0.0) {
            return Err(domain("tail check needs sigma > 0"));
        }
        if self.steps_per_unit == 0 {
            return Err(domain("steps per unit must be positive"));
        }
        if !(self.time >= 0.0) || !(0.0..=1.0).contains(&self.position) {
            return Err(domain("window start or site out of range"));
        }
        let start = self.steps(self.time)?;
        let len = self.steps(self.horizon / self.d as f64)?;
        if len == 0 {
            return Err(domain("window [0, T/d] holds no fine step"));
        }
        Ok((start, len))
    }

    fn site(&self) -> usize {
        ((self.d as f64 * self.position + 1e-9).floor() as usize).min(self.d)
    }
}

/// `sqrt(max_tau Var Y_tau)` in closed form for the simulated scheme.
fn increment_scale(cfg: &TailConfig, basis: &SpectralBasis, start: usize, len: usize) -> f64 {
    let delta = 1.0 / cfg.steps_per_unit as f64;
    let scheme = OuScheme::default();
    let i = cfg.site();
    let mut worst = 0.0_f64;
    for m in 1..=len {
        let var: f64 = (1..basis.d())
            .map(|k| {
                let a = basis.scaled_rate(k);
                let (decay, _) = scheme.coefficients(a, delta);
                let v0 = scheme_covariance(a, a, start, delta, scheme);
                let v1 = scheme_covariance(a, a, start + m, delta, scheme);
                2.0 * basis.eigenvector(k, i).powi(2) * (v1 + v0 * (1.0 - 2.0 * decay.powi(m as i32)))
            })
            .sum();
        worst = worst.max(var);
    }
    cfg.sigma * worst.sqrt()
}

/// Monte Carlo sample of `sup_tau Y_tau` and its scale.
pub fn sigma_increment_samples(cfg: &TailConfig) -> Result<(Vec<f64>, f64)> {
    let (start, len) = cfg.window()?;
    let basis = SpectralBasis::new(cfg.d)?;
    let delta = 1.0 / cfg.steps_per_unit as f64;
    let i = cfg.site();
    let row_weights: Vec<f64> =
        (1..cfg.d).map(|k| cfg.sigma * std::f64::consts::SQRT_2 * basis.eigenvector(k, i)).collect();
    let steps = start + len;
    let samples = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let seed = substream_seed(cfg.seed, "tail", r as u64);
            let driver = BrownianDriver::new(seed, cfg.d - 1, steps, steps as f64 * delta)?;
            let times: Vec<f64> = (start..=steps).map(|n| n as f64 * driver.step()).collect();
            let coords = discrete_coordinates(&driver, &basis, &times, OuScheme::default())?;
            let value = |j: usize| -> f64 { coords.row(j).iter().zip(&row_weights).map(|(w, c)| w * c).sum() };
            let y0 = value(0);
            Ok((1..times.len()).map(|j| value(j) - y0).fold(0.0_f64, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((samples, increment_scale(cfg, &basis, start, len)))
}

/// Tail table of the `Sigma_d` time-increment sup.
pub fn sigma_increment_tail(cfg: &TailConfig) -> Result<TailReport> {
    let (samples, scale) = sigma_increment_samples(cfg)?;
    tail_check("sigma_increment", &samples, scale, &cfg.thresholds, cfg.min_exceedances)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_exceedances_is_not_a_failure() {
        let xs = vec![0.0; 100];
        let rep = tail_check("flat", &xs, 1.0, &DEFAULT_THRESHOLDS, 10).unwrap();
        assert_eq!(rep.verdict, Verdict::Insufficient);
        assert!(rep.note.starts_with("insufficient tail data"));
    }

    #[test]
    fn gaussian_scalar() {
        let (xs, scale) = gaussian_tail_samples(200_000, 2.0, 0.25, 3).unwrap();
        let rep = tail_check("gauss", &xs, scale, &DEFAULT_THRESHOLDS, 10).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{}", rep.note);
        // ln P(xi >= r) ~ -r^2/2 - ln r - ln sqrt(2 pi)
        let slope = rep.slope.unwrap().slope;
        assert!((-0.75..-0.5).contains(&slope), "{slope}");
        assert!(rep.max_curvature.unwrap() < 0.0);
    }

    #[test]
    fn bad_inputs() {
        assert!(tail_check("x", &[], 1.0, &[1.0], 1).is_err());
        assert!(tail_check("x", &[1.0], 0.0, &[1.0], 1).is_err());
        assert!(tail_check("x", &[1.0], 1.0, &[2.0, 1.0], 1).is_err());
        assert!(gaussian_tail_samples(10, 1.0, 0.0, 1).is_err());
    }
}
