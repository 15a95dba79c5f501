use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{split_from_nodes, SplitDistance};
use super::tail::{sigma_increment_tail, TailConfig, TailReport};
use super::variance::{variance_bound_suite, VarianceReport, VarianceSuiteConfig};
use super::{Check, Verdict};
use crate::deterministic::{fast_solver, node_sup_error, ContinuumProfile};
use crate::error::{domain, Error, Result};
use crate::grid::{step_field, Field, FieldGrid, FieldKind};
use crate::noise::{substream_seed, BrownianDriver};
use crate::spectral::{SpectralBasis, TransformMethod};
use crate::stats::{fit_line, quantile, LineFit, Summary};
use crate::stochastic::{s_field, sigma_d_nodes, OuScheme};

/// Parameters of a multi-resolution study on shared drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub epsilon: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub d_list: Vec<usize>,
    /// Continuum truncation `K`.
    pub truncation: usize,
    /// Fine driver steps per unit time.
    pub steps_per_unit: usize,
    /// Sub-grid refinement between lattice nodes, in both axes.
    pub refine: usize,
    pub replications: usize,
    pub seed: u64,
    /// Seeds entering the per-seed monotonicity check.
    pub monotone_seeds: usize,
    /// Allowed growth factor between consecutive resolutions on one seed.
    pub slack: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            sigma: 1.0,
            horizon: 1.0,
            d_list: vec![16, 32, 64, 128],
            truncation: 512,
            steps_per_unit: 4096,
            refine: 4,
            replications: 256,
            seed: 2024,
            monotone_seeds: 100,
            slack: 1.1,
        }
    }
}

impl StudyConfig {
    /// Total fine steps `M T`.
    pub fn fine_steps(&self) -> Result<usize> {
        let m = self.steps_per_unit as f64 * self.horizon;
        if (m - m.round()).abs() > 1e-9 * m.max(1.0) || m.round() < 1.0 {
            return Err(domain(format!(
                "steps per unit {} times horizon {} is not a positive integer",
                self.steps_per_unit, self.horizon
            )));
        }
        Ok(m.round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(domain(format!("horizon T = {} must be positive", self.horizon)));
        }
        for (name, x) in [("epsilon", self.epsilon), ("sigma", self.sigma)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(domain(format!("{name} = {x} must be finite and >= 0")));
            }
        }
        if self.d_list.is_empty() {
            return Err(domain("d_list is empty"));
        }
        if self.d_list.iter().any(|&d| d < 2) || self.d_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain(format!(
                "d_list {:?} must be strictly ascending with every d >= 2",
                self.d_list
            )));
        }
        let dmax = *self.d_list.last().unwrap();
        if self.truncation < dmax {
            return Err(domain(format!("truncation K = {} is below max d = {dmax}", self.truncation)));
        }
        if self.refine == 0 {
            return Err(domain("refine must be at least 1"));
        }
        if self.replications == 0 {
            return Err(domain("replications must be at least 1"));
        }
        if !(self.slack >= 1.0) {
            return Err(domain(format!("slack {} must be >= 1", self.slack)));
        }
        let m = self.fine_steps()?;
        for &d in &self.d_list {
            if m % (d * self.refine) != 0 {
                return Err(domain(format!(
                    "fine steps {m} are not a multiple of d * refine = {} (lattice times must be driver nodes)",
                    d * self.refine
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self, d: usize) -> Result<FieldGrid> {
        FieldGrid::new(self.horizon, d, self.refine)
    }

    pub fn replication_seed(&self, r: usize) -> u64 {
        substream_seed(self.seed, "replication", r as u64)
    }

    pub fn driver(&self, r: usize) -> Result<BrownianDriver> {
        let modes = self.truncation.max(*self.d_list.last().unwrap_or(&2) - 1);
        BrownianDriver::new(self.replication_seed(r), modes, self.fine_steps()?, self.horizon)
    }
}

/// Which sup-distances a study measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    /// `Xi_d = Delta_d + Sigma_d` against `X = D + S`.
    Full,
    /// `Sigma_d` against `S` only.
    Homogeneous,
}

/// Sup-distances of one replication, one entry per `d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationDistances {
    pub replication: usize,
    pub seed: u64,
    /// `sup |Xi_d - X|` (equal to `stochastic` in homogeneous mode).
    pub chain: Vec<f64>,
    /// `sup |Sigma_d - S|`.
    pub stochastic: Vec<f64>,
    pub split: Vec<SplitDistance>,
}

/// Distribution of a sup-distance over replications at one `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceStats {
    pub d: usize,
    pub mean: f64,
    pub stderr: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

impl DistanceStats {
    fn of(d: usize, xs: &[f64]) -> Self {
        let s = Summary::of(xs);
        Self {
            d,
            mean: s.mean,
            stderr: s.stderr,
            q05: quantile(xs, 0.05),
            q25: quantile(xs, 0.25),
            q50: quantile(xs, 0.5),
            q75: quantile(xs, 0.75),
            q95: quantile(xs, 0.95),
            max: quantile(xs, 1.0),
        }
    }

    pub fn quantiles_monotone(&self) -> bool {
        self.q05 <= self.q25 && self.q25 <= self.q50 && self.q50 <= self.q75 && self.q75 <= self.q95
            && self.q95 <= self.max
    }
}

/// Mean and standard error of each split term at one `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitStats {
    pub d: usize,
    pub term1: (f64, f64),
    pub term2: (f64, f64),
    pub term3: (f64, f64),
    pub total: (f64, f64),
    /// Replications on which `total <= term1 + term2 + term3` held.
    pub triangle_holds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Monotonicity {
    pub seeds: usize,
    pub monotone: usize,
    pub fraction: f64,
    pub slack: f64,
}

impl Monotonicity {
    fn of(rows: &[&[f64]], slack: f64) -> Self {
        let monotone = rows
            .iter()
            .filter(|r| r.windows(2).all(|w| w[1] <= slack * w[0]))
            .count();
        let seeds = rows.len();
        Self { seeds, monotone, fraction: monotone as f64 / seeds.max(1) as f64, slack }
    }
}

/// Result of a convergence study, with every check that was judged.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub mode: StudyMode,
    pub chain: Vec<DistanceStats>,
    pub stochastic: Vec<DistanceStats>,
    pub split: Vec<SplitStats>,
    /// `sup |Delta_d - D|` over the node lattice, per `d` (full mode only).
    pub deterministic: Vec<(usize, f64)>,
    /// Least-squares slope of `ln E sup |Xi_d - X|` against `ln d`.
    pub chain_slope: Option<LineFit>,
    pub stochastic_slope: Option<LineFit>,
    pub chain_monotonicity: Monotonicity,
    pub stochastic_monotonicity: Monotonicity,
    pub variance: Option<VarianceReport>,
    pub tail: Option<TailReport>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub replications: Vec<ReplicationDistances>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        super::all_passed(&self.checks)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Level {
    grid: FieldGrid,
    basis: SpectralBasis,
    /// `Delta_d - D` on the lattice.
    mean_gap: Option<Array2<f64>>,
}

fn prepare(cfg: &StudyConfig, mode: StudyMode) -> Result<Vec<Level>> {
    let profile = ContinuumProfile::new(cfg.epsilon, cfg.truncation)?;
    cfg.d_list
        .iter()
        .map(|&d| {
            let grid = cfg.grid(d)?;
            let basis = SpectralBasis::new(d)?.with_method(TransformMethod::Fast);
            let mean_gap = match mode {
                StudyMode::Full => {
                    let delta = fast_solver(cfg.epsilon, d)?.field(grid)?;
                    let limit = profile.field(grid)?;
                    Some(delta.values - limit.values)
                }
                StudyMode::Homogeneous => None,
            };
            Ok(Level { grid, basis, mean_gap })
        })
        .collect()
}

fn replicate(cfg: &StudyConfig, levels: &[Level], r: usize) -> Result<ReplicationDistances> {
    let n = levels.len();
    let mut out = ReplicationDistances {
        replication: r,
        seed: cfg.replication_seed(r),
        chain: Vec::with_capacity(n),
        stochastic: Vec::with_capacity(n),
        split: Vec::with_capacity(n),
    };
    let driver = if cfg.sigma > 0.0 { Some(cfg.driver(r)?) } else { None };
    for level in levels {
        let (split, noise_gap) = match &driver {
            Some(drv) => {
                let nodes = sigma_d_nodes(drv, &level.basis, cfg.sigma, &level.grid, OuScheme::default())?;
                let s = s_field(drv, cfg.truncation, cfg.sigma, &level.grid)?;
                let split = split_from_nodes(&nodes, &s)?;
                let step = step_field(level.grid, FieldKind::SigmaD, &nodes)?;
                (split, step.values - s.values)
            }
            None => (
                SplitDistance::default(),
                Array2::zeros((level.grid.n_times(), level.grid.n_positions())),
            ),
        };
        let chain = match &level.mean_gap {
            Some(gap) => gap
                .iter()
                .zip(noise_gap.iter())
                .fold(0.0_f64, |m, (a, b)| m.max((a + b).abs())),
            None => split.total_floor,
        };
        out.chain.push(chain);
        out.stochastic.push(split.total_floor);
        out.split.push(split);
    }
    Ok(out)
}

/// Sup-distances at every `d` of the config on `R` shared drivers.
pub fn convergence_study(cfg: &StudyConfig, mode: StudyMode) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let levels = prepare(cfg, mode)?;
    let replications: Vec<ReplicationDistances> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| replicate(cfg, &levels, r))
        .collect::<Result<_>>()?;
    let deterministic = match mode {
        StudyMode::Full => {
            let profile = ContinuumProfile::new(cfg.epsilon, cfg.truncation)?;
            cfg.d_list
                .iter()
                .map(|&d| Ok((d, node_sup_error(&fast_solver(cfg.epsilon, d)?, &profile, cfg.horizon)?)))
                .collect::<Result<Vec<_>>>()?
        }
        StudyMode::Homogeneous => Vec::new(),
    };
    Ok(build_report(cfg, mode, replications, deterministic))
}

/// Full study of `Xi_d` against `X`, with the optional variance and tail
/// suites folded into the same report.
pub fn full_theorem_check(
    cfg: &StudyConfig,
    variance: Option<&VarianceSuiteConfig>,
    tail: Option<&TailConfig>,
) -> Result<ConvergenceReport> {
    let mut report = convergence_study(cfg, StudyMode::Full)?;
    if let Some(v) = variance {
        let suite = variance_bound_suite(v)?;
        report.checks.extend(suite.checks.iter().cloned());
        report.variance = Some(suite);
    }
    if let Some(t) = tail {
        let table = sigma_increment_tail(t)?;
        report.checks.push(table.check());
        report.tail = Some(table);
    }
    Ok(report)
}

fn column(reps: &[ReplicationDistances], pick: impl Fn(&ReplicationDistances) -> f64) -> Vec<f64> {
    reps.iter().map(pick).collect()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let s = Summary::of(xs);
    (s.mean, s.stderr)
}

fn slope(stats: &[DistanceStats]) -> Option<LineFit> {
    if stats.len() < 2 || stats.iter().any(|s| !(s.mean > 0.0)) {
        return None;
    }
    let x: Vec<f64> = stats.iter().map(|s| (s.d as f64).ln()).collect();
    let y: Vec<f64> = stats.iter().map(|s| s.mean.ln()).collect();
    Some(fit_line(&x, &y))
}

fn decreasing_check(name: &str, stats: &[DistanceStats]) -> Check {
    if stats.len() < 2 {
        return Check::skipped(name, "needs at least two resolutions");
    }
    let worst = stats
        .windows(2)
        .map(|w| w[1].mean / w[0].mean)
        .fold(f64::MIN, f64::max);
    Check::new(name, worst, Verdict::from_bool(worst < 1.0))
        .with_threshold(1.0)
        .with_note("largest ratio of consecutive means; strict decrease needs < 1")
}

fn build_report(
    cfg: &StudyConfig,
    mode: StudyMode,
    replications: Vec<ReplicationDistances>,
    deterministic: Vec<(usize, f64)>,
) -> ConvergenceReport {
    let n = cfg.d_list.len();
    let mut chain = Vec::with_capacity(n);
    let mut stochastic = Vec::with_capacity(n);
    let mut split = Vec::with_capacity(n);
    for (l, &d) in cfg.d_list.iter().enumerate() {
        chain.push(DistanceStats::of(d, &column(&replications, |r| r.chain[l])));
        stochastic.push(DistanceStats::of(d, &column(&replications, |r| r.stochastic[l])));
        split.push(SplitStats {
            d,
            term1: mean_se(&column(&replications, |r| r.split[l].term1)),
            term2: mean_se(&column(&replications, |r| r.split[l].term2)),
            term3: mean_se(&column(&replications, |r| r.split[l].term3)),
            total: mean_se(&column(&replications, |r| r.split[l].total)),
            triangle_holds: replications.iter().filter(|r| r.split[l].triangle_holds()).count(),
        });
    }
    let seeds = cfg.monotone_seeds.min(replications.len());
    let chain_rows: Vec<&[f64]> = replications[..seeds].iter().map(|r| r.chain.as_slice()).collect();
    let stoch_rows: Vec<&[f64]> = replications[..seeds].iter().map(|r| r.stochastic.as_slice()).collect();
    let chain_monotonicity = Monotonicity::of(&chain_rows, cfg.slack);
    let stochastic_monotonicity = Monotonicity::of(&stoch_rows, cfg.slack);

    let mut checks = Vec::new();
    let stochastic_active = cfg.sigma > 0.0;
    if mode == StudyMode::Full {
        for s in &chain {
            checks.push(Check::info("chain_sup_mean", s.mean).at_d(s.d).with_stderr(s.stderr));
        }
        checks.push(decreasing_check("chain_sup_mean_decreasing", &chain));
        checks.push(monotone_check("chain_seed_monotone_fraction", &chain_monotonicity));
        if let Some(fit) = slope(&chain) {
            checks.push(
                Check::info("chain_loglog_slope", fit.slope)
                    .with_stderr(fit.slope_stderr)
                    .with_note(format!("95% CI [{:.4}, {:.4}]", fit.slope_ci.0, fit.slope_ci.1)),
            );
        }
        for &(d, e) in &deterministic {
            checks.push(Check::info("deterministic_node_sup_error", e).at_d(d));
        }
        if deterministic.len() >= 2 {
            let worst = deterministic
                .windows(2)
                .map(|w| w[1].1 / w[0].1)
                .fold(f64::MIN, f64::max);
            checks.push(
                Check::new("deterministic_node_sup_decreasing", worst, Verdict::from_bool(worst < 1.0))
                    .with_threshold(1.0),
            );
        }
    }
    if stochastic_active {
        for s in &stochastic {
            checks.push(Check::info("stochastic_sup_mean", s.mean).at_d(s.d).with_stderr(s.stderr));
        }
        checks.push(decreasing_check("stochastic_sup_mean_decreasing", &stochastic));
        checks.push(monotone_check("stochastic_seed_monotone_fraction", &stochastic_monotonicity));
        if let Some(fit) = slope(&stochastic) {
            checks.push(
                Check::info("stochastic_loglog_slope", fit.slope)
                    .with_stderr(fit.slope_stderr)
                    .with_note(format!("95% CI [{:.4}, {:.4}]", fit.slope_ci.0, fit.slope_ci.1)),
            );
        }
        for s in &split {
            for (name, (m, se)) in [("split_term1", s.term1), ("split_term2", s.term2), ("split_term3", s.term3)] {
                checks.push(Check::info(name, m).at_d(s.d).with_stderr(se));
            }
        }
        let violations: usize = split.iter().map(|s| replications.len() - s.triangle_holds).sum();
        checks.push(
            Check::new("split_triangle_violations", violations as f64, Verdict::from_bool(violations == 0))
                .with_threshold(0.0),
        );
    } else {
        checks.push(Check::skipped("stochastic_sup_mean_decreasing", "sigma = 0, both noise fields vanish"));
    }
    ConvergenceReport {
        config: cfg.clone(),
        mode,
        chain_slope: slope(&chain),
        stochastic_slope: slope(&stochastic),
        chain,
        stochastic,
        split,
        deterministic,
        chain_monotonicity,
        stochastic_monotonicity,
        variance: None,
        tail: None,
        checks,
        replications,
    }
}

fn monotone_check(name: &str, m: &Monotonicity) -> Check {
    if m.seeds == 0 {
        return Check::skipped(name, "no seeds");
    }
    Check::new(name, m.fraction, Verdict::from_bool(m.fraction >= 0.95))
        .with_threshold(0.95)
        .with_note(format!("{} of {} seeds non-increasing up to factor {}", m.monotone, m.seeds, m.slack))
}

/// `Xi_d` and `X` for one replication, for heatmaps.
pub fn chain_and_limit(cfg: &StudyConfig, d: usize, r: usize) -> Result<(Field, Field)> {
    cfg.validate()?;
    if !cfg.d_list.contains(&d) {
        return Err(Error::Config(format!("d = {d} is not in d_list {:?}", cfg.d_list)));
    }
    let grid = cfg.grid(d)?;
    let basis = SpectralBasis::new(d)?.with_method(TransformMethod::Fast);
    let drv = cfg.driver(r)?;
    let nodes = sigma_d_nodes(&drv, &basis, cfg.sigma, &grid, OuScheme::default())?;
    let sigma_d = step_field(grid, FieldKind::SigmaD, &nodes)?;
    let s = s_field(&drv, cfg.truncation, cfg.sigma, &grid)?;
    let delta = fast_solver(cfg.epsilon, d)?.field(grid)?;
    let limit = ContinuumProfile::new(cfg.epsilon, cfg.truncation)?.field(grid)?;
    Ok((delta.plus(&sigma_d, FieldKind::ChainD)?, limit.plus(&s, FieldKind::Limit)?))
}
