//! Experiment configuration files.
//!
//! A config is TOML with the sections `[experiment]`, `[model]`,
//! `[discretization]` and the optional `[variance]`, `[tail]` and `[output]`.
//! Unknown keys are errors. See `configs/` for annotated samples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::{StudyConfig, TailConfig, VarianceSuiteConfig, DEFAULT_THRESHOLDS, MIN_VARIANCE_REPLICATIONS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Deterministic,
    Homogeneous,
    Full,
    VarianceSuite,
    TailCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Deterministic => "deterministic",
            ExperimentKind::Homogeneous => "homogeneous",
            ExperimentKind::Full => "full",
            ExperimentKind::VarianceSuite => "variance-suite",
            ExperimentKind::TailCheck => "tail-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Worker threads; `0` uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_monotone_seeds")]
    pub monotone_seeds: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub epsilon: f64,
    pub sigma: f64,
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub d_list: Vec<usize>,
    pub truncation: usize,
    pub steps_per_unit: usize,
    #[serde(default = "default_refine")]
    pub refine: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSection {
    pub enabled: Option<bool>,
    pub replications: Option<usize>,
    pub time: Option<f64>,
    pub position: Option<f64>,
    pub v_gaps: Option<Vec<f64>>,
    pub t_gaps: Option<Vec<f64>>,
    pub stability_factor: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSection {
    pub enabled: Option<bool>,
    pub d: Option<usize>,
    pub replications: Option<usize>,
    pub time: Option<f64>,
    pub position: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
    pub min_exceedances: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub svg: bool,
    /// Resolution of the heatmap dumps; defaults to the smallest `d`.
    pub heatmap_d: Option<usize>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out_dir(), svg: true, heatmap_d: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub model: ModelSection,
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub variance: VarianceSection,
    #[serde(default)]
    pub tail: TailSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_replications() -> usize {
    256
}
fn default_monotone_seeds() -> usize {
    100
}
fn default_slack() -> f64 {
    1.1
}
fn default_refine() -> usize {
    4
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let study = StudyConfig::default();
        Self {
            experiment: ExperimentSection {
                kind: ExperimentKind::Full,
                seed: study.seed,
                replications: study.replications,
                workers: 0,
                monotone_seeds: study.monotone_seeds,
                slack: study.slack,
            },
            model: ModelSection { epsilon: study.epsilon, sigma: study.sigma, horizon: study.horizon },
            discretization: DiscretizationSection {
                d_list: study.d_list,
                truncation: study.truncation,
                steps_per_unit: study.steps_per_unit,
                refine: study.refine,
            },
            variance: VarianceSection::default(),
            tail: TailSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Line (1-based) of the first `key = ...` assignment in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|n| n + 1)
}

/// A validation failure tied to the key that caused it.
#[derive(Debug)]
struct Invalid {
    key: &'static str,
    message: String,
}

fn invalid(key: &'static str, message: impl Into<String>) -> Invalid {
    Invalid { key, message: message.into() }
}

impl ExperimentConfig {
    /// Parses and validates. Errors carry the line of the offending key.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.check().map_err(|inv| {
            let at = line_of(text, inv.key).map(|l| format!("line {l}: ")).unwrap_or_default();
            Error::ConfigParse { path: origin.to_path_buf(), message: format!("{at}`{}`: {}", inv.key, inv.message) }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.check()
            .map_err(|inv| Error::Config(format!("`{}`: {}", inv.key, inv.message)))
    }

    fn check(&self) -> std::result::Result<(), Invalid> {
        let m = &self.model;
        let disc = &self.discretization;
        let exp = &self.experiment;
        if !(m.horizon > 0.0 && m.horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive, got {}", m.horizon)));
        }
        if !(m.epsilon >= 0.0 && m.epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be finite and >= 0, got {}", m.epsilon)));
        }
        if !(m.sigma >= 0.0 && m.sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be finite and >= 0, got {}", m.sigma)));
        }
        if disc.d_list.is_empty() {
            return Err(invalid("d_list", "is empty"));
        }
        if disc.d_list.iter().any(|&d| d < 2) {
            return Err(invalid("d_list", "every d must be at least 2"));
        }
        if disc.d_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("d_list", "must be strictly ascending"));
        }
        let dmax = *disc.d_list.last().unwrap();
        if disc.truncation < dmax {
            return Err(invalid("truncation", format!("K = {} is below max d = {dmax}", disc.truncation)));
        }
        if disc.refine == 0 {
            return Err(invalid("refine", "must be at least 1"));
        }
        if disc.steps_per_unit == 0 {
            return Err(invalid("steps_per_unit", "must be positive"));
        }
        let total = disc.steps_per_unit as f64 * m.horizon;
        if (total - total.round()).abs() > 1e-9 * total {
            return Err(invalid(
                "steps_per_unit",
                format!("steps_per_unit * horizon = {total} is not an integer"),
            ));
        }
        let total = total.round() as usize;
        for &d in &disc.d_list {
            if total % (d * disc.refine) != 0 {
                return Err(invalid(
                    "steps_per_unit",
                    format!(
                        "{total} fine steps over the horizon are not a multiple of d * refine = {} for d = {d}",
                        d * disc.refine
                    ),
                ));
            }
        }
        if exp.replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if !(exp.slack >= 1.0) {
            return Err(invalid("slack", "must be >= 1"));
        }
        if m.sigma == 0.0
            && matches!(exp.kind, ExperimentKind::Homogeneous | ExperimentKind::VarianceSuite | ExperimentKind::TailCheck)
        {
            return Err(invalid("sigma", format!("kind = {} needs sigma > 0", exp.kind.as_str())));
        }
        if let Some(h) = self.output.heatmap_d {
            if !disc.d_list.contains(&h) {
                return Err(invalid("heatmap_d", format!("{h} is not in d_list")));
            }
        }
        if self.run_variance() {
            if m.sigma == 0.0 {
                return Err(invalid("sigma", "the variance suite needs sigma > 0"));
            }
            let v = self.variance_config();
            if v.replications < MIN_VARIANCE_REPLICATIONS {
                return Err(invalid(
                    "replications",
                    format!(
                        "the variance suite needs at least {MIN_VARIANCE_REPLICATIONS} replications, got {}",
                        v.replications
                    ),
                ));
            }
            let far = v.time + v.t_gaps.iter().cloned().fold(0.0, f64::max);
            if far > m.horizon + 1e-12 {
                return Err(invalid("t_gaps", format!("time + largest gap = {far} exceeds the horizon")));
            }
            v.validate().map_err(|e| invalid("variance", e.to_string()))?;
        } else if self.experiment.kind == ExperimentKind::VarianceSuite {
            return Err(invalid("enabled", "kind = variance-suite needs the variance suite enabled"));
        }
        if self.run_tail() {
            if m.sigma == 0.0 {
                return Err(invalid("sigma", "the tail check needs sigma > 0"));
            }
            let t = self.tail_config();
            if t.time + t.horizon / t.d as f64 > m.horizon + 1e-12 {
                return Err(invalid("time", "tail window runs past the horizon"));
            }
            if t.replications == 0 {
                return Err(invalid("replications", "tail check needs at least one replication"));
            }
        } else if self.experiment.kind == ExperimentKind::TailCheck {
            return Err(invalid("enabled", "kind = tail-check needs the tail check enabled"));
        }
        Ok(())
    }

    pub fn study_config(&self) -> StudyConfig {
        StudyConfig {
            epsilon: self.model.epsilon,
            sigma: self.model.sigma,
            horizon: self.model.horizon,
            d_list: self.discretization.d_list.clone(),
            truncation: self.discretization.truncation,
            steps_per_unit: self.discretization.steps_per_unit,
            refine: self.discretization.refine,
            replications: self.experiment.replications,
            seed: self.experiment.seed,
            monotone_seeds: self.experiment.monotone_seeds,
            slack: self.experiment.slack,
        }
    }

    pub fn run_variance(&self) -> bool {
        use ExperimentKind::*;
        let default = matches!(self.experiment.kind, Homogeneous | Full | VarianceSuite) && self.model.sigma > 0.0;
        self.variance.enabled.unwrap_or(default) && self.experiment.kind != Deterministic
            && self.experiment.kind != TailCheck
    }

    pub fn run_tail(&self) -> bool {
        use ExperimentKind::*;
        let default = matches!(self.experiment.kind, Homogeneous | Full | TailCheck) && self.model.sigma > 0.0;
        self.tail.enabled.unwrap_or(default) && self.experiment.kind != Deterministic
            && self.experiment.kind != VarianceSuite
    }

    pub fn variance_config(&self) -> VarianceSuiteConfig {
        let base = VarianceSuiteConfig::default();
        let v = &self.variance;
        let replications = v.replications.unwrap_or(if self.experiment.kind == ExperimentKind::VarianceSuite {
            self.experiment.replications
        } else {
            base.replications
        });
        VarianceSuiteConfig {
            sigma: self.model.sigma,
            d_list: self.discretization.d_list.clone(),
            truncation: self.discretization.truncation,
            steps_per_unit: self.discretization.steps_per_unit,
            replications,
            seed: self.experiment.seed,
            time: v.time.unwrap_or(base.time),
            position: v.position.unwrap_or(base.position),
            v_gaps: v.v_gaps.clone().unwrap_or(base.v_gaps),
            t_gaps: v.t_gaps.clone().unwrap_or(base.t_gaps),
            stability_factor: v.stability_factor.unwrap_or(base.stability_factor),
        }
    }

    pub fn tail_config(&self) -> TailConfig {
        let base = TailConfig::default();
        let t = &self.tail;
        let replications = t.replications.unwrap_or(if self.experiment.kind == ExperimentKind::TailCheck {
            self.experiment.replications
        } else {
            base.replications
        });
        TailConfig {
            sigma: self.model.sigma,
            horizon: self.model.horizon,
            d: t.d.unwrap_or(base.d),
            steps_per_unit: self.discretization.steps_per_unit,
            replications,
            seed: self.experiment.seed,
            time: t.time.unwrap_or(base.time * self.model.horizon),
            position: t.position.unwrap_or(base.position),
            thresholds: t.thresholds.clone().unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec()),
            min_exceedances: t.min_exceedances.unwrap_or(base.min_exceedances),
        }
    }

    /// The config with every optional value filled in as it will be used.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        let run_v = self.run_variance();
        let run_t = self.run_tail();
        let v = self.variance_config();
        out.variance = VarianceSection {
            enabled: Some(run_v),
            replications: Some(v.replications),
            time: Some(v.time),
            position: Some(v.position),
            v_gaps: Some(v.v_gaps),
            t_gaps: Some(v.t_gaps),
            stability_factor: Some(v.stability_factor),
        };
        let t = self.tail_config();
        out.tail = TailSection {
            enabled: Some(run_t),
            d: Some(t.d),
            replications: Some(t.replications),
            time: Some(t.time),
            position: Some(t.position),
            thresholds: Some(t.thresholds),
            min_exceedances: Some(t.min_exceedances),
        };
        out.output.heatmap_d = Some(self.heatmap_d());
        out
    }

    pub fn heatmap_d(&self) -> usize {
        self.output.heatmap_d.unwrap_or(self.discretization.d_list[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[experiment]
kind = "full"
seed = 7
replications = 16

[model]
epsilon = 1.0
sigma = 1.0
horizon = 1.0

[discretization]
d_list = [8, 16]
truncation = 64
steps_per_unit = 1024
"#;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn sample_parses_with_defaults() {
        let cfg = parse(SAMPLE).unwrap();
        assert_eq!(cfg.discretization.refine, 4);
        assert_eq!(cfg.output.dir, PathBuf::from("out"));
        assert!(cfg.run_variance());
        assert_eq!(cfg.variance_config().replications, 1000);
        assert_eq!(cfg.tail_config().replications, 10_000);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let text = SAMPLE.replace("seed = 7", "seed = 7\nsed = 8");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 5"), "{err}");
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn validation_errors_name_the_line() {
        let text = SAMPLE.replace("d_list = [8, 16]", "d_list = []");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 13") && err.contains("d_list"), "{err}");
        let text = SAMPLE.replace("d_list = [8, 16]", "d_list = [16, 8]");
        assert!(parse(&text).is_err());
        let text = SAMPLE.replace("truncation = 64", "truncation = 8");
        assert!(parse(&text).unwrap_err().to_string().contains("line 14"));
        let text = SAMPLE.replace("steps_per_unit = 1024", "steps_per_unit = 1000");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn variance_suite_refuses_small_ensembles() {
        let text = SAMPLE.replace("\"full\"", "\"variance-suite\"");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("at least 1000"), "{err}");
    }

    #[test]
    fn resolved_round_trip() {
        let cfg = parse(SAMPLE).unwrap().resolved();
        let text = cfg.to_toml_string().unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.resolved(), cfg);
    }
}
