use std::fmt::Write;

use super::oracle_skip_reason;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::deterministic::continuum_truncation_bound;
use crate::error::Result;
use crate::stochastic::s_truncation_variance_bound;

/// Throughput assumed by the time estimate, operations per second per worker.
const OPS_PER_SECOND: f64 = 2e8;

fn mib(bytes: f64) -> String {
    format!("{:.1} MiB", bytes / (1024.0 * 1024.0))
}

fn seconds(ops: f64, workers: usize) -> String {
    let s = ops / OPS_PER_SECOND / workers.max(1) as f64;
    if s < 60.0 {
        format!("{s:.0} s")
    } else {
        format!("{:.1} min", s / 60.0)
    }
}

/// Dry-run plan: resolved parameters, cost estimates, truncation tail
/// bounds and the checks that `run` would judge. Nothing is simulated.
pub fn describe(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let e = &cfg.experiment;
    let m = &cfg.model;
    let disc = &cfg.discretization;
    let kind = e.kind;
    let workers = if e.workers == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { e.workers };
    let steps = (disc.steps_per_unit as f64 * m.horizon).round();
    let stochastic = matches!(kind, ExperimentKind::Full | ExperimentKind::Homogeneous) && m.sigma > 0.0;
    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "experiment  {} (seed {}, {} workers)", kind.as_str(), e.seed, workers).ok();
    writeln!(w, "model       epsilon = {}, sigma = {}, horizon T = {}", m.epsilon, m.sigma, m.horizon).ok();
    writeln!(
        w,
        "lattice     d in {:?}, K = {}, {} fine steps (step {:e}), refine {}",
        disc.d_list,
        disc.truncation,
        steps,
        1.0 / disc.steps_per_unit as f64,
        disc.refine
    )
    .ok();
    writeln!(w, "output      {}", cfg.output.dir.display()).ok();
    writeln!(w).ok();
    writeln!(w, "truncation tail bounds").ok();
    writeln!(
        w,
        "  S pointwise variance   sigma^2/(pi^2 K)  = {:e}",
        s_truncation_variance_bound(m.sigma, disc.truncation)
    )
    .ok();
    writeln!(
        w,
        "  D sup error            eps/(pi^3 K^2)    = {:e}",
        continuum_truncation_bound(m.epsilon, disc.truncation)
    )
    .ok();
    writeln!(w).ok();
    writeln!(w, "estimates (rough, {OPS_PER_SECOND:e} ops/s per worker)").ok();
    if matches!(kind, ExperimentKind::Full | ExperimentKind::Homogeneous) {
        let modes = disc.truncation.max(disc.d_list.last().unwrap() - 1) as f64;
        let driver = modes * steps * 8.0;
        let lattice: f64 = disc
            .d_list
            .iter()
            .map(|&d| ((d * disc.refine + 1) as f64).powi(2) * 8.0)
            .fold(0.0, f64::max);
        let per_rep = if stochastic { 6.0 * modes * steps * (1 + disc.d_list.len()) as f64 } else { 0.0 };
        let fields: f64 = disc
            .d_list
            .iter()
            .map(|&d| {
                let n = (d * disc.refine + 1) as f64;
                n * n * (n.log2() + 8.0)
            })
            .sum();
        writeln!(w, "  convergence study      {} replications", e.replications).ok();
        writeln!(w, "    driver per replication  {}", mib(driver)).ok();
        writeln!(w, "    peak memory             {}", mib(workers as f64 * (driver + 6.0 * lattice))).ok();
        writeln!(
            w,
            "    time                    {}",
            seconds(e.replications as f64 * (per_rep + fields), workers)
        )
        .ok();
    }
    if cfg.run_variance() {
        let v = cfg.variance_config();
        let far = v.time + v.t_gaps.iter().cloned().fold(0.0, f64::max);
        let ops = v.replications as f64 * 6.0 * v.truncation as f64 * far * v.steps_per_unit as f64;
        writeln!(w, "  variance suite         {} replications, {}", v.replications, seconds(ops, workers)).ok();
    }
    if cfg.run_tail() {
        let t = cfg.tail_config();
        let len = (t.time + t.horizon / t.d as f64) * t.steps_per_unit as f64;
        let ops = t.replications as f64 * 6.0 * (t.d - 1) as f64 * len;
        writeln!(w, "  tail check             {} replications at d = {}, {}", t.replications, t.d, seconds(ops, workers)).ok();
    }
    writeln!(w).ok();
    writeln!(w, "checks").ok();
    for line in planned_checks(&cfg) {
        writeln!(w, "  {line}").ok();
    }
    Ok(s)
}

fn planned_checks(cfg: &ExperimentConfig) -> Vec<String> {
    let kind = cfg.experiment.kind;
    let sigma = cfg.model.sigma;
    let mut out = Vec::new();
    match kind {
        ExperimentKind::Deterministic => {
            out.push("continuum_initial_profile      |D(0,v) - v| <= truncation bound".into());
            out.push("continuum_boundary             D(t,0) = 0, D(t,1) = 1 + eps t".into());
            out.push("deterministic_node_sup_error   per d (info)".into());
            out.push("deterministic_node_sup_decreasing  consecutive ratios < 1".into());
        }
        ExperimentKind::Full | ExperimentKind::Homogeneous => {
            if kind == ExperimentKind::Full {
                out.push("chain_sup_mean                 per d (info)".into());
                out.push("chain_sup_mean_decreasing      consecutive ratios < 1".into());
                out.push(format!(
                    "chain_seed_monotone_fraction   >= 0.95 of {} seeds within factor {}",
                    cfg.experiment.monotone_seeds.min(cfg.experiment.replications),
                    cfg.experiment.slack
                ));
                out.push("chain_loglog_slope             (info)".into());
                out.push("deterministic_node_sup_decreasing  consecutive ratios < 1".into());
            }
            if sigma > 0.0 {
                out.push("stochastic_sup_mean_decreasing consecutive ratios < 1".into());
                out.push("stochastic_seed_monotone_fraction  >= 0.95".into());
                out.push("split_term1..3                 per d (info)".into());
                out.push("split_triangle_violations      == 0".into());
            }
        }
        ExperimentKind::VarianceSuite | ExperimentKind::TailCheck => {}
    }
    if matches!(kind, ExperimentKind::Deterministic | ExperimentKind::Full | ExperimentKind::Homogeneous) {
        for &d in &cfg.discretization.d_list {
            match oracle_skip_reason(cfg, d) {
                Some(reason) => out.push(format!("euler_oracle_gap d = {d}: skipped, {reason}")),
                None => out.push(format!("euler_oracle_gap d = {d}: run (info)")),
            }
        }
    }
    if cfg.run_variance() {
        let f = cfg.variance_config().stability_factor;
        for name in ["d_scaling", "v_modulus", "t_modulus_s", "t_modulus_sigma"] {
            out.push(format!("variance_{name}_spread  max/min ratio <= {f}"));
        }
    }
    if cfg.run_tail() {
        out.push("sigma_increment_tail_slope     ln P vs r^2 slope CI below 0".into());
    }
    out
}
