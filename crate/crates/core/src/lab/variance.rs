use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Check, Verdict};
use crate::error::{domain, Error, Result};
use crate::noise::{substream_seed, BrownianDriver};
use crate::spectral::{continuum_rate, sin_pi, SpectralBasis};
use crate::stats::{fitted_constant, spread, Summary};
use crate::stochastic::{
    continuum_coordinates, discrete_coordinates, s_value, scheme_covariance, sigma_value, OuScheme,
};

pub const MIN_VARIANCE_REPLICATIONS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSuiteConfig {
    pub sigma: f64,
    pub d_list: Vec<usize>,
    pub truncation: usize,
    pub steps_per_unit: usize,
    pub replications: usize,
    pub seed: u64,
    /// Design point `(t, v)`.
    pub time: f64,
    pub position: f64,
    pub v_gaps: Vec<f64>,
    pub t_gaps: Vec<f64>,
    /// Largest allowed `max / min` of the ratios within a section.
    pub stability_factor: f64,
}

impl Default for VarianceSuiteConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            d_list: vec![16, 32, 64, 128],
            truncation: 512,
            steps_per_unit: 4096,
            replications: MIN_VARIANCE_REPLICATIONS,
            seed: 2024,
            time: 0.5,
            position: 0.5,
            v_gaps: (2..=8).rev().map(|p| 0.5_f64.powi(p)).collect(),
            t_gaps: (2..=10).rev().map(|p| 0.5_f64.powi(p)).collect(),
            stability_factor: 2.0,
        }
    }
}

impl VarianceSuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_VARIANCE_REPLICATIONS {
            return Err(Error::InsufficientReplications {
                needed: MIN_VARIANCE_REPLICATIONS,
                got: self.replications,
            });
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("sigma = {} must be positive for variance bounds", self.sigma)));
        }
        if self.d_list.is_empty() || self.d_list.iter().any(|&d| d < 2) {
            return Err(domain(format!("d_list {:?} needs entries >= 2", self.d_list)));
        }
        let dmax = *self.d_list.iter().max().unwrap();
        if self.truncation < dmax {
            return Err(domain(format!("truncation K = {} is below max d = {dmax}", self.truncation)));
        }
        if !(self.time > 0.0) || !(0.0..=1.0).contains(&self.position) {
            return Err(domain(format!("design point ({}, {}) is outside (0, T] x [0, 1]", self.time, self.position)));
        }
        if self.v_gaps.iter().any(|&g| !(g > 0.0) || self.position + g > 1.0) {
            return Err(domain("v gaps must be positive and keep v + gap <= 1"));
        }
        if self.t_gaps.iter().any(|&g| !(g > 0.0)) {
            return Err(domain("t gaps must be positive"));
        }
        if self.steps_per_unit == 0 {
            return Err(domain("steps per unit must be positive"));
        }
        if !(self.stability_factor >= 1.0) {
            return Err(domain("stability factor must be >= 1"));
        }
        Ok(())
    }

    fn delta(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }

    fn index(&self, t: f64) -> Result<usize> {
        let x = t * self.steps_per_unit as f64;
        if (x - x.round()).abs() > 1e-9 * x.max(1.0) {
            return Err(Error::GridMismatch(format!(
                "time {t} is not on the fine grid with {} steps per unit",
                self.steps_per_unit
            )));
        }
        Ok(x.round() as usize)
    }

    fn times(&self) -> Vec<f64> {
        std::iter::once(self.time).chain(self.t_gaps.iter().map(|g| self.time + g)).collect()
    }
}

/// One variance ratio `Var[difference] / scale`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub d: Option<usize>,
    pub gap: Option<f64>,
    pub variance: f64,
    pub variance_stderr: f64,
    pub scale: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// The same ratio computed in closed form for the simulated scheme.
    pub exact_ratio: f64,
}

/// Ratios for one bound and the constant fitted to them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSection {
    pub name: String,
    pub rows: Vec<RatioRow>,
    /// `exp(mean(ln ratio))`.
    pub fitted_constant: f64,
    /// `max / min` of the ratios.
    pub spread: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

impl BoundSection {
    fn new(name: &str, rows: Vec<RatioRow>, threshold: f64) -> Self {
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let ok = ratios.iter().all(|r| *r > 0.0 && r.is_finite());
        let s = if ok { spread(&ratios) } else { f64::INFINITY };
        Self {
            name: name.to_string(),
            fitted_constant: if ok { fitted_constant(&ratios) } else { f64::NAN },
            spread: s,
            threshold,
            verdict: Verdict::from_bool(s <= threshold),
            rows,
        }
    }

    fn checks(&self) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .rows
            .iter()
            .map(|r| {
                let mut c = Check::info(format!("{}_ratio", self.name), r.ratio).with_stderr(r.ratio_stderr);
                if let Some(d) = r.d {
                    c = c.at_d(d);
                }
                let gap = r.gap.map(|g| format!("gap {g}, ")).unwrap_or_default();
                c.with_note(format!("{gap}closed form {:.6}", r.exact_ratio))
            })
            .collect();
        out.push(Check::info(format!("{}_fitted_constant", self.name), self.fitted_constant));
        out.push(
            Check::new(format!("{}_spread", self.name), self.spread, self.verdict)
                .with_threshold(self.threshold)
                .with_note("max/min of the ratios across d and design points"),
        );
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub replications: usize,
    /// `d Var[Sigma_d(t,v) - S(t,v)]`.
    pub d_scaling: BoundSection,
    /// `Var[S(t,v) - S(t,v')] / |v - v'|`.
    pub v_modulus: BoundSection,
    /// `Var[S(t,v) - S(t',v)] / |t - t'|^{1/2}`.
    pub t_modulus_s: BoundSection,
    /// `Var[Sigma_d(t,v) - Sigma_d(t',v)] / |t - t'|^{1/2}` across `d`.
    pub t_modulus_sigma: BoundSection,
    /// Kurtosis of `S(t, v)`, 3 for a Gaussian.
    pub kurtosis: (f64, f64),
    pub checks: Vec<Check>,
}

impl VarianceReport {
    pub fn sections(&self) -> [&BoundSection; 4] {
        [&self.d_scaling, &self.v_modulus, &self.t_modulus_s, &self.t_modulus_sigma]
    }

    pub fn passed(&self) -> bool {
        self.sections().iter().all(|s| s.verdict == Verdict::Pass)
    }
}

struct Layout {
    nd: usize,
    nv: usize,
    nt: usize,
}

impl Layout {
    fn len(&self) -> usize {
        1 + self.nd + self.nv + self.nt + self.nd * self.nt
    }
    fn s(&self) -> usize {
        0
    }
    fn sigma(&self, l: usize) -> usize {
        1 + l
    }
    fn s_v(&self, g: usize) -> usize {
        1 + self.nd + g
    }
    fn s_t(&self, g: usize) -> usize {
        1 + self.nd + self.nv + g
    }
    fn sigma_t(&self, l: usize, g: usize) -> usize {
        1 + self.nd + self.nv + self.nt + l * self.nt + g
    }
}

fn site(d: usize, v: f64) -> usize {
    ((d as f64 * v + 1e-9).floor() as usize).min(d)
}

fn sample(cfg: &VarianceSuiteConfig, bases: &[SpectralBasis], lay: &Layout, r: usize) -> Result<Vec<f64>> {
    let times = cfg.times();
    let n_last = times.iter().map(|&t| cfg.index(t)).collect::<Result<Vec<_>>>()?;
    let steps = *n_last.iter().max().unwrap();
    let dmax = bases.iter().map(|b| b.d()).max().unwrap();
    let modes = cfg.truncation.max(dmax - 1);
    let seed = substream_seed(cfg.seed, "variance", r as u64);
    let driver = BrownianDriver::new(seed, modes, steps, steps as f64 * cfg.delta())?;
    let times: Vec<f64> = n_last.iter().map(|&n| n as f64 * driver.step()).collect();
    let scheme = OuScheme::default();
    let mut out = vec![0.0; lay.len()];
    let cont = continuum_coordinates(&driver, cfg.truncation, &times, scheme)?;
    let w0 = cont.row(0).to_vec();
    out[lay.s()] = s_value(&w0, cfg.sigma, cfg.position);
    for (g, gap) in cfg.v_gaps.iter().enumerate() {
        out[lay.s_v(g)] = s_value(&w0, cfg.sigma, cfg.position + gap);
    }
    for g in 0..lay.nt {
        out[lay.s_t(g)] = s_value(&cont.row(g + 1).to_vec(), cfg.sigma, cfg.position);
    }
    for (l, basis) in bases.iter().enumerate() {
        let i = site(basis.d(), cfg.position);
        let disc = discrete_coordinates(&driver, basis, &times, scheme)?;
        out[lay.sigma(l)] = sigma_value(basis, &disc.row(0).to_vec(), cfg.sigma, i);
        for g in 0..lay.nt {
            out[lay.sigma_t(l, g)] = sigma_value(basis, &disc.row(g + 1).to_vec(), cfg.sigma, i);
        }
    }
    Ok(out)
}

fn row(d: Option<usize>, gap: Option<f64>, diff: &[f64], scale: f64, exact: f64) -> RatioRow {
    let s = Summary::of(diff);
    RatioRow {
        d,
        gap,
        variance: s.variance,
        variance_stderr: s.variance_stderr,
        scale,
        ratio: s.variance / scale,
        ratio_stderr: s.variance_stderr / scale,
        exact_ratio: exact / scale,
    }
}

/// Closed-form variances of the simulated fields, discretization included.
struct Exact<'a> {
    cfg: &'a VarianceSuiteConfig,
    scheme: OuScheme,
}

impl Exact<'_> {
    fn cov(&self, a: f64, b: f64, n: usize) -> f64 {
        scheme_covariance(a, b, n, self.cfg.delta(), self.scheme)
    }

    /// `Var[Sigma(t, i/d) - S(t, v)]`.
    fn discrete_gap(&self, basis: &SpectralBasis, n: usize) -> f64 {
        let (d, v) = (basis.d(), self.cfg.position);
        let i = site(d, v);
        let mut total = 0.0;
        for k in 1..=self.cfg.truncation {
            let b = continuum_rate(k);
            let phi = sin_pi(k as f64 * v);
            let mut x = phi * phi * self.cov(b, b, n);
            if k < d {
                let a = basis.scaled_rate(k);
                let f = basis.eigenvector(k, i);
                x += f * f * self.cov(a, a, n) - 2.0 * f * phi * self.cov(a, b, n);
            }
            total += 2.0 * x;
        }
        self.cfg.sigma.powi(2) * total
    }

    /// `Var[S(t, v) - S(t, v + gap)]`.
    fn v_gap(&self, gap: f64, n: usize) -> f64 {
        let v = self.cfg.position;
        (1..=self.cfg.truncation)
            .map(|k| {
                let b = continuum_rate(k);
                let dphi = sin_pi(k as f64 * v) - sin_pi(k as f64 * (v + gap));
                2.0 * dphi * dphi * self.cov(b, b, n)
            })
            .sum::<f64>()
            * self.cfg.sigma.powi(2)
    }

    /// `Var[w(t_1) - w(t_0)]` for one coordinate, `n1 > n0` steps.
    fn increment(&self, rate: f64, n0: usize, n1: usize) -> f64 {
        let (decay, _) = self.scheme.coefficients(rate, self.cfg.delta());
        let v0 = self.cov(rate, rate, n0);
        let v1 = self.cov(rate, rate, n1);
        v1 + v0 * (1.0 - 2.0 * decay.powi((n1 - n0) as i32))
    }

    fn s_time_gap(&self, n0: usize, n1: usize) -> f64 {
        let v = self.cfg.position;
        (1..=self.cfg.truncation)
            .map(|k| 2.0 * sin_pi(k as f64 * v).powi(2) * self.increment(continuum_rate(k), n0, n1))
            .sum::<f64>()
            * self.cfg.sigma.powi(2)
    }

    fn sigma_time_gap(&self, basis: &SpectralBasis, n0: usize, n1: usize) -> f64 {
        let i = site(basis.d(), self.cfg.position);
        (1..basis.d())
            .map(|k| 2.0 * basis.eigenvector(k, i).powi(2) * self.increment(basis.scaled_rate(k), n0, n1))
            .sum::<f64>()
            * self.cfg.sigma.powi(2)
    }
}

/// Monte Carlo estimates of the three quadratic-mean bounds and the
/// `1/d` decay of the pointwise variance of `Sigma_d - S`.
///
/// Refuses to run below [`MIN_VARIANCE_REPLICATIONS`].
pub fn variance_bound_suite(cfg: &VarianceSuiteConfig) -> Result<VarianceReport> {
    cfg.validate()?;
    let bases: Vec<SpectralBasis> = cfg.d_list.iter().map(|&d| SpectralBasis::new(d)).collect::<Result<_>>()?;
    let lay = Layout { nd: bases.len(), nv: cfg.v_gaps.len(), nt: cfg.t_gaps.len() };
    let samples: Vec<Vec<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| sample(cfg, &bases, &lay, r))
        .collect::<Result<_>>()?;
    let col = |idx: usize| -> Vec<f64> { samples.iter().map(|s| s[idx]).collect() };
    let diff = |a: usize, b: usize| -> Vec<f64> { samples.iter().map(|s| s[a] - s[b]).collect() };

    let exact = Exact { cfg, scheme: OuScheme::default() };
    let n0 = cfg.index(cfg.time)?;

    let d_rows = bases
        .iter()
        .enumerate()
        .map(|(l, b)| {
            let d = b.d();
            row(Some(d), None, &diff(lay.sigma(l), lay.s()), 1.0 / d as f64, exact.discrete_gap(b, n0))
        })
        .collect();
    let v_rows = cfg
        .v_gaps
        .iter()
        .enumerate()
        .map(|(g, &gap)| row(None, Some(gap), &diff(lay.s(), lay.s_v(g)), gap, exact.v_gap(gap, n0)))
        .collect();
    let mut ts_rows = Vec::new();
    let mut tsig_rows = Vec::new();
    for (g, &gap) in cfg.t_gaps.iter().enumerate() {
        let n1 = cfg.index(cfg.time + gap)?;
        let scale = gap.sqrt();
        ts_rows.push(row(None, Some(gap), &diff(lay.s_t(g), lay.s()), scale, exact.s_time_gap(n0, n1)));
        for (l, b) in bases.iter().enumerate() {
            tsig_rows.push(row(
                Some(b.d()),
                Some(gap),
                &diff(lay.sigma_t(l, g), lay.sigma(l)),
                scale,
                exact.sigma_time_gap(b, n0, n1),
            ));
        }
    }
    let f = cfg.stability_factor;
    let d_scaling = BoundSection::new("variance_d_scaling", d_rows, f);
    let v_modulus = BoundSection::new("variance_v_modulus", v_rows, f);
    let t_modulus_s = BoundSection::new("variance_t_modulus_s", ts_rows, f);
    let t_modulus_sigma = BoundSection::new("variance_t_modulus_sigma", tsig_rows, f);

    let s = Summary::of(&col(lay.s()));
    let kurtosis = (s.kurtosis, s.kurtosis_stderr());
    let mut checks = Vec::new();
    for section in [&d_scaling, &v_modulus, &t_modulus_s, &t_modulus_sigma] {
        checks.extend(section.checks());
    }
    checks.push(
        Check::info("s_point_kurtosis", kurtosis.0)
            .with_stderr(kurtosis.1)
            .with_note("3 for a Gaussian"),
    );
    Ok(VarianceReport {
        replications: cfg.replications,
        d_scaling,
        v_modulus,
        t_modulus_s,
        t_modulus_sigma,
        kurtosis,
        checks,
    })
}
