//! Runs a configured experiment and writes its artifacts.
//!
//! Every file lands in the output directory:
//!
//! | file | content |
//! |---|---|
//! | `report.json` | resolved config, every check, the full report |
//! | `stats.csv` | `name,d,value,stderr,threshold,verdict`, one row per check |
//! | `config.resolved.toml` | the config with all defaults filled in |
//! | `heatmap_*.csv` | field values, row `j` is `t_j`, column `i` is `v_i` |
//! | `curve_*.csv` | two columns, `d` and a sup-distance |
//! | `distances.csv`, `split.csv`, `variance.csv`, `tail.csv` | per-kind tables |
//! | `*.svg` | optional renderings of the curves and heatmaps |
//!
//! Outputs depend only on the config and seed, never on the worker count.

mod describe;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::deterministic::{fast_solver, node_sup_error, ContinuumProfile};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::lab::{
    chain_and_limit, convergence_study, coupling_gap, sigma_increment_tail, variance_bound_suite,
    write_checks_csv, write_json, Check, ConvergenceReport, StudyMode, TailReport, VarianceReport, Verdict,
};
use crate::noise::BrownianDriver;
use crate::oracle::{stability_limit, ChainConfig, ChainSystem, ORACLE_MAX_D};
use crate::spectral::{SpectralBasis, TransformMethod};
use crate::stochastic::{s_field, sigma_d_field, OuScheme};

pub use describe::describe;

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.experiment.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(w) = self.workers {
            cfg.experiment.workers = w;
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub checks: Vec<Check>,
    /// Files written, relative to `out_dir`, in write order.
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        crate::lab::all_passed(&self.checks)
    }

    /// `0` iff no check failed.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }
}

/// Loads `path`, applies `overrides` and runs.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let mut cfg = ExperimentConfig::load(path)?;
    overrides.apply(&mut cfg);
    run(&cfg)
}

/// Worker pool of the configured size; `0` means every available core.
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let pool = worker_pool(cfg.experiment.workers)?;
    let out_dir = cfg.output.dir.clone();
    fs::create_dir_all(&out_dir)?;
    pool.install(|| execute(&cfg, &out_dir))
}

#[derive(Clone, Copy, Debug, Serialize)]
struct DeterministicRow {
    d: usize,
    node_sup_error: f64,
}

#[derive(Serialize)]
struct RunReport<'a> {
    kind: &'static str,
    passed: bool,
    config: &'a ExperimentConfig,
    checks: &'a [Check],
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<&'a ConvergenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deterministic: Option<&'a [DeterministicRow]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance: Option<&'a VarianceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<&'a TailReport>,
}

struct Writer<'a> {
    dir: &'a Path,
    svg: bool,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(PathBuf::from(name));
        self.dir.join(name)
    }

    fn table<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        w.flush()?;
        Ok(())
    }

    fn heatmap(&mut self, name: &str, field: &Field) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(self.path(&format!("{name}.csv")))?;
        for row in field.values.rows() {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        if self.svg {
            let svg = plot::heatmap_svg(field, name);
            fs::write(self.path(&format!("{name}.svg")), svg)?;
        }
        Ok(())
    }

    fn curve(&mut self, name: &str, column: &str, points: &[(usize, f64)]) -> Result<()> {
        let rows: Vec<Vec<String>> = points.iter().map(|(d, y)| vec![d.to_string(), y.to_string()]).collect();
        self.table(&format!("{name}.csv"), &["d", column], &rows)?;
        if self.svg {
            let svg = plot::loglog_svg(points, column);
            fs::write(self.path(&format!("{name}.svg")), svg)?;
        }
        Ok(())
    }
}

fn execute(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    let mut w = Writer { dir: out_dir, svg: cfg.output.svg, files: Vec::new() };
    let mut checks = Vec::new();
    let mut convergence = None;
    let mut deterministic = None;
    let mut variance = None;
    let mut tail = None;
    match cfg.experiment.kind {
        ExperimentKind::Deterministic => {
            let rows = deterministic_study(cfg, &mut checks)?;
            let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.d, r.node_sup_error)).collect();
            w.curve("curve_deterministic", "node_sup_error", &points)?;
            let d = cfg.heatmap_d();
            let grid = cfg.study_config().grid(d)?;
            w.heatmap(&format!("heatmap_delta_d{d}"), &fast_solver(cfg.model.epsilon, d)?.field(grid)?)?;
            let profile = ContinuumProfile::new(cfg.model.epsilon, cfg.discretization.truncation)?;
            w.heatmap(&format!("heatmap_continuum_d{d}"), &profile.field(grid)?)?;
            deterministic = Some(rows);
        }
        ExperimentKind::Full | ExperimentKind::Homogeneous => {
            let mode = if cfg.experiment.kind == ExperimentKind::Full { StudyMode::Full } else { StudyMode::Homogeneous };
            let study = cfg.study_config();
            let report = convergence_study(&study, mode)?;
            checks.extend(report.checks.iter().cloned());
            oracle_checks(cfg, &mut checks)?;
            write_study_tables(&mut w, &report)?;
            let d = cfg.heatmap_d();
            if mode == StudyMode::Full {
                let (chain, limit) = chain_and_limit(&study, d, 0)?;
                w.heatmap(&format!("heatmap_chain_d{d}"), &chain)?;
                w.heatmap(&format!("heatmap_limit_d{d}"), &limit)?;
            } else {
                let grid = study.grid(d)?;
                let drv = study.driver(0)?;
                let basis = SpectralBasis::new(d)?.with_method(TransformMethod::Fast);
                w.heatmap(&format!("heatmap_sigma_d{d}"), &sigma_d_field(&drv, &basis, study.sigma, &grid)?)?;
                w.heatmap(&format!("heatmap_s_d{d}"), &s_field(&drv, study.truncation, study.sigma, &grid)?)?;
            }
            convergence = Some(report);
        }
        ExperimentKind::VarianceSuite | ExperimentKind::TailCheck => {}
    }
    if cfg.run_variance() {
        let report = variance_bound_suite(&cfg.variance_config())?;
        checks.extend(report.checks.iter().cloned());
        write_variance_table(&mut w, &report)?;
        variance = Some(report);
    }
    if cfg.run_tail() {
        let report = sigma_increment_tail(&cfg.tail_config())?;
        checks.push(report.check());
        write_tail_table(&mut w, &report)?;
        tail = Some(report);
    }
    write_checks_csv(&w.path("stats.csv"), &checks)?;
    let passed = crate::lab::all_passed(&checks);
    let body = RunReport {
        kind: cfg.experiment.kind.as_str(),
        passed,
        config: cfg,
        checks: &checks,
        convergence: convergence.as_ref(),
        deterministic: deterministic.as_deref(),
        variance: variance.as_ref(),
        tail: tail.as_ref(),
    };
    write_json(&w.path("report.json"), &body)?;
    fs::write(w.path("config.resolved.toml"), cfg.to_toml_string()?)?;
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), checks, files: w.files })
}

fn deterministic_study(cfg: &ExperimentConfig, checks: &mut Vec<Check>) -> Result<Vec<DeterministicRow>> {
    let eps = cfg.model.epsilon;
    let k = cfg.discretization.truncation;
    let profile = ContinuumProfile::new(eps, k)?;
    let bound = profile.truncation_bound();
    let mut initial = 0.0_f64;
    for n in 0..=1024 {
        let v = n as f64 / 1024.0;
        initial = initial.max((profile.value(0.0, v)? - v).abs());
    }
    checks.push(
        Check::new("continuum_initial_profile", initial, Verdict::from_bool(initial <= bound + 1e-12))
            .with_threshold(bound)
            .with_note("max |D(0,v) - v| against the truncation bound"),
    );
    let mut boundary = 0.0_f64;
    let top = cfg.discretization.d_list.last().copied().unwrap_or(2);
    for j in 0..=top {
        let t = cfg.model.horizon * j as f64 / top as f64;
        boundary = boundary.max(profile.value(t, 0.0)?.abs());
        boundary = boundary.max((profile.value(t, 1.0)? - 1.0 - eps * t).abs());
    }
    checks.push(
        Check::new("continuum_boundary", boundary, Verdict::from_bool(boundary <= bound + 1e-12))
            .with_threshold(bound),
    );
    let mut rows = Vec::new();
    for &d in &cfg.discretization.d_list {
        let e = node_sup_error(&fast_solver(eps, d)?, &profile, cfg.model.horizon)?;
        checks.push(Check::info("deterministic_node_sup_error", e).at_d(d));
        rows.push(DeterministicRow { d, node_sup_error: e });
    }
    if rows.len() >= 2 {
        let worst = rows
            .windows(2)
            .map(|w| w[1].node_sup_error / w[0].node_sup_error)
            .fold(f64::MIN, f64::max);
        checks.push(
            Check::new("deterministic_node_sup_decreasing", worst, Verdict::from_bool(worst < 1.0))
                .with_threshold(1.0),
        );
    }
    oracle_checks(cfg, checks)?;
    Ok(rows)
}

/// Reason the Euler oracle cannot run at `d`, if any.
pub fn oracle_skip_reason(cfg: &ExperimentConfig, d: usize) -> Option<String> {
    let step = 1.0 / cfg.discretization.steps_per_unit as f64;
    if d > ORACLE_MAX_D {
        return Some(format!("d = {d} exceeds the oracle limit {ORACLE_MAX_D}"));
    }
    if step >= stability_limit(d) {
        return Some(format!(
            "fine step {step:e} violates the stability gate 1/(2d^2) = {:e}",
            stability_limit(d)
        ));
    }
    None
}

/// Euler chain against the spectral solution at every oracle-sized `d`,
/// on the driver of replication 0.
fn oracle_checks(cfg: &ExperimentConfig, checks: &mut Vec<Check>) -> Result<()> {
    let study = cfg.study_config();
    let system = match cfg.experiment.kind {
        ExperimentKind::Homogeneous => ChainSystem::Homogeneous,
        _ => ChainSystem::Pulled { epsilon: cfg.model.epsilon },
    };
    let sigma = if cfg.experiment.kind == ExperimentKind::Deterministic { 0.0 } else { cfg.model.sigma };
    for &d in &cfg.discretization.d_list {
        if let Some(reason) = oracle_skip_reason(cfg, d) {
            checks.push(Check::skipped("euler_oracle_gap", reason).at_d(d));
            continue;
        }
        let driver = BrownianDriver::new(study.replication_seed(0), d - 1, study.fine_steps()?, study.horizon)?;
        let chain = ChainConfig { d, sigma, system };
        let gap = coupling_gap(&chain, &driver, OuScheme::default())?;
        checks.push(
            Check::info("euler_oracle_gap", gap)
                .at_d(d)
                .with_note("sup over nodes of |Euler - spectral| on a shared driver; O(step)"),
        );
    }
    Ok(())
}

fn write_study_tables(w: &mut Writer<'_>, report: &ConvergenceReport) -> Result<()> {
    let d_list = &report.config.d_list;
    let mut rows = Vec::new();
    for r in &report.replications {
        for (l, d) in d_list.iter().enumerate() {
            let s = &r.split[l];
            rows.push(vec![
                r.replication.to_string(),
                d.to_string(),
                r.chain[l].to_string(),
                r.stochastic[l].to_string(),
                s.term1.to_string(),
                s.term2.to_string(),
                s.term3.to_string(),
                s.total.to_string(),
            ]);
        }
    }
    w.table(
        "distances.csv",
        &["replication", "d", "chain_sup", "stochastic_sup", "term1", "term2", "term3", "split_total"],
        &rows,
    )?;
    let split: Vec<Vec<String>> = report
        .split
        .iter()
        .map(|s| {
            vec![
                s.d.to_string(),
                s.term1.0.to_string(),
                s.term1.1.to_string(),
                s.term2.0.to_string(),
                s.term2.1.to_string(),
                s.term3.0.to_string(),
                s.term3.1.to_string(),
                s.total.0.to_string(),
                s.total.1.to_string(),
            ]
        })
        .collect();
    w.table(
        "split.csv",
        &["d", "term1", "term1_se", "term2", "term2_se", "term3", "term3_se", "total", "total_se"],
        &split,
    )?;
    if report.mode == StudyMode::Full {
        let points: Vec<(usize, f64)> = report.chain.iter().map(|s| (s.d, s.mean)).collect();
        w.curve("curve_chain", "mean_sup_chain", &points)?;
    }
    if report.config.sigma > 0.0 {
        let points: Vec<(usize, f64)> = report.stochastic.iter().map(|s| (s.d, s.mean)).collect();
        w.curve("curve_stochastic", "mean_sup_stochastic", &points)?;
    }
    Ok(())
}

fn opt(x: Option<impl ToString>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_variance_table(w: &mut Writer<'_>, report: &VarianceReport) -> Result<()> {
    let mut rows = Vec::new();
    for section in report.sections() {
        for r in &section.rows {
            rows.push(vec![
                section.name.clone(),
                opt(r.d),
                opt(r.gap),
                r.variance.to_string(),
                r.variance_stderr.to_string(),
                r.scale.to_string(),
                r.ratio.to_string(),
                r.ratio_stderr.to_string(),
                r.exact_ratio.to_string(),
            ]);
        }
    }
    w.table(
        "variance.csv",
        &["section", "d", "gap", "variance", "variance_se", "scale", "ratio", "ratio_se", "exact_ratio"],
        &rows,
    )
}

fn write_tail_table(w: &mut Writer<'_>, report: &TailReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.r.to_string(),
                r.exceedances.to_string(),
                r.probability.to_string(),
                r.log_probability.to_string(),
                r.stderr.to_string(),
                r.observable.to_string(),
            ]
        })
        .collect();
    w.table("tail.csv", &["r", "exceedances", "probability", "log_probability", "se", "observable"], &rows)
}
