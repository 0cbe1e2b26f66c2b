//! TOML run configuration. Unknown keys anywhere are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{AisConfig, JeConfig, Protocol, RdsConfig, TiConfig};
use crate::scores::ScoreConfig;
use crate::targets::{self, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ti,
    Ais,
    Je,
    Rds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Gaussian {
        dim: usize,
        #[serde(default)]
        mean: Vec<f64>,
        #[serde(default = "one")]
        cov_scale: f64,
    },
    Gmm2dPaper {},
    MuellerBrown {
        /// Overrides the sampled-Hessian smoothness.
        #[serde(default)]
        beta: Option<f64>,
    },
    Mog1d {
        m: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl TargetSpec {
    pub fn build(&self) -> Result<Target> {
        match self {
            TargetSpec::Gaussian { dim, mean, cov_scale } => targets::make_gaussian(*dim, mean, *cov_scale),
            TargetSpec::Gmm2dPaper {} => Ok(targets::make_paper_gmm()),
            TargetSpec::MuellerBrown { beta } => {
                let t = targets::make_mueller_brown();
                match beta {
                    Some(b) => t.with_beta(*b),
                    None => Ok(t),
                }
            }
            TargetSpec::Mog1d { m } => targets::make_mog1d(*m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub r: f64,
    pub steps: usize,
    pub total_time: f64,
    /// λ(0) = 2β; defaults to the target's smoothness.
    pub beta: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { r: 1.0, steps: 2000, total_time: 20.0, beta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct JeSection {
    #[serde(flatten)]
    pub run: JeConfig,
    /// Defaults to the geometric curve of the `[schedule]` table.
    pub protocol: Option<Protocol>,
    /// Known log Z₀; skips the TI phase.
    pub log_z0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub target: TargetSpec,
    #[serde(default)]
    pub recenter: bool,
    #[serde(default = "default_particles")]
    pub n_particles: usize,
    #[serde(default = "default_rounds")]
    pub n_rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Exact reference samples per round for MMD/W₂ (0 disables).
    #[serde(default)]
    pub reference_samples: usize,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub ti: TiConfig,
    #[serde(default)]
    pub ais: AisConfig,
    #[serde(default)]
    pub je: JeSection,
    #[serde(default)]
    pub rds: RdsConfig,
    #[serde(default = "default_score")]
    pub score: ScoreConfig,
}

fn default_particles() -> usize {
    256
}
fn default_rounds() -> usize {
    16
}
fn default_eps() -> Vec<f64> {
    vec![0.05, 0.1, 0.25]
}
fn default_score() -> ScoreConfig {
    ScoreConfig::Exact
}

impl RunConfig {
    pub fn new(method: Method, target: TargetSpec) -> Self {
        toml::from_str::<RunConfig>(&format!(
            "method = {:?}\n[target]\n{}",
            method_name(method),
            toml::to_string(&target).expect("target spec serializes")
        ))
        .expect("minimal config parses")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string() + &span_hint(text, e.span())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 || self.n_rounds == 0 {
            return Err(Error::Config("n_particles and n_rounds must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Ti => "ti",
        Method::Ais => "ais",
        Method::Je => "je",
        Method::Rds => "rds",
    }
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line}: `{}`)", text.get(r).unwrap_or("").trim())
        }
        None => String::new(),
    }
}
