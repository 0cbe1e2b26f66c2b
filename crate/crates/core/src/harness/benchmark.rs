//! The Table-1 style benchmark: every method on one target, one CSV row each.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{Method, RunConfig, ScheduleConfig, TargetSpec};
use super::runner::{run_estimate, RunOutput};
use crate::curves::fmt_g;
use crate::error::{Error, Result};
use crate::estimators::TiConfig;
use crate::scores::{PosteriorLmc, RecursiveLmc, Rejection, ScoreConfig, SelfNormalized};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Gm2d,
    Mueller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Paper,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gm2d" => Ok(Suite::Gm2d),
            "mueller" => Ok(Suite::Mueller),
            _ => Err(Error::Config(format!("unknown suite `{s}` (expected gm2d or mueller)"))),
        }
    }
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::Config(format!("unknown scale `{s}` (expected desk or paper)"))),
        }
    }
}

/// Row labels, in output order.
pub const GM2D_METHODS: &[&str] = &["ti", "ais", "exact", "rdmc", "rsdmc", "zodmc", "sndmc"];
pub const MUELLER_METHODS: &[&str] = &["ti", "ais", "rdmc", "rsdmc", "zodmc", "sndmc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub target: String,
    pub z_ratio_mean: f64,
    pub z_ratio_std: f64,
    pub mmd_mean: Option<f64>,
    pub mmd_std: Option<f64>,
    pub w2_mean: Option<f64>,
    pub w2_std: Option<f64>,
    pub oracle_calls_per_sample: f64,
    pub seconds: f64,
    pub value_calls_per_sample: f64,
    pub error: Option<String>,
}

pub const CSV_HEADER: &str = "method,target,z_ratio_mean,z_ratio_std,mmd_mean,mmd_std,w2_mean,w2_std,\
oracle_calls_per_sample,seconds,value_calls_per_sample,error";

impl BenchmarkRow {
    fn from_output(label: &str, out: &RunOutput) -> Self {
        let s = &out.summary;
        let (zm, zs) = s.relative_error.as_ref().map(|r| (r.mean_ratio, r.std_ratio)).unwrap_or((f64::NAN, f64::NAN));
        let ms = |v: &Option<Vec<f64>>| v.as_ref().map(|v| mean_std(v));
        let mmd = ms(&s.mmd);
        let w2 = ms(&s.w2);
        Self {
            method: label.to_string(),
            target: s.target.clone(),
            z_ratio_mean: zm,
            z_ratio_std: zs,
            mmd_mean: mmd.map(|p| p.0),
            mmd_std: mmd.map(|p| p.1),
            w2_mean: w2.map(|p| p.0),
            w2_std: w2.map(|p| p.1),
            oracle_calls_per_sample: s.oracle_calls_per_sample,
            seconds: s.elapsed_seconds,
            value_calls_per_sample: s.value_calls_per_sample,
            error: None,
        }
    }

    fn failed(label: &str, target: &str, e: &Error, seconds: f64) -> Self {
        Self {
            method: label.to_string(),
            target: target.to_string(),
            z_ratio_mean: f64::NAN,
            z_ratio_std: f64::NAN,
            mmd_mean: None,
            mmd_std: None,
            w2_mean: None,
            w2_std: None,
            oracle_calls_per_sample: f64::NAN,
            seconds,
            value_calls_per_sample: f64::NAN,
            error: Some(e.to_string()),
        }
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_g).unwrap_or_default();
        let err = self.error.as_deref().unwrap_or("").replace([',', '\n', '"'], " ");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.target,
            fmt_g(self.z_ratio_mean),
            fmt_g(self.z_ratio_std),
            opt(self.mmd_mean),
            opt(self.mmd_std),
            opt(self.w2_mean),
            opt(self.w2_std),
            fmt_g(self.oracle_calls_per_sample),
            fmt_g(self.seconds),
            fmt_g(self.value_calls_per_sample),
            err
        )
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

pub fn rows_to_csv(rows: &[BenchmarkRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.to_csv_line());
    }
    s
}

/// The run configuration behind one benchmark row.
pub fn method_config(suite: Suite, scale: Scale, label: &str, seed: u64) -> Result<RunConfig> {
    let known = match suite {
        Suite::Gm2d => GM2D_METHODS,
        Suite::Mueller => MUELLER_METHODS,
    };
    if !known.contains(&label) {
        return Err(Error::Config(format!("method `{label}` is not part of this suite (have {})", known.join(", "))));
    }
    let paper = scale == Scale::Paper;
    let target = match suite {
        Suite::Gm2d => TargetSpec::Gmm2dPaper {},
        Suite::Mueller => TargetSpec::MuellerBrown { beta: None },
    };
    let method = match label {
        "ti" => Method::Ti,
        "ais" => Method::Ais,
        _ => Method::Rds,
    };
    let mut cfg = RunConfig::new(method, target);
    cfg.seed = seed;
    let (rounds, particles) = if paper { (1024, 1024) } else { (16, 256) };
    cfg.n_rounds = rounds;
    cfg.n_particles = particles;
    if suite == Suite::Gm2d {
        cfg.reference_samples = particles;
    }
    cfg.ti = TiConfig::default();
    match label {
        "ti" => {
            if paper {
                cfg.n_particles = 32;
                cfg.reference_samples = cfg.reference_samples.min(32);
            }
        }
        "ais" => {
            // λ(0) = 100, 0.01 time units per level.
            let steps = if paper { 60_000 } else { 15_000 };
            cfg.schedule = ScheduleConfig { r: 1.0, steps, total_time: 0.01 * steps as f64, beta: Some(50.0) };
        }
        "exact" => cfg.score = ScoreConfig::Exact,
        "rdmc" => {
            cfg.score = ScoreConfig::Rdmc(if paper {
                PosteriorLmc::default()
            } else {
                PosteriorLmc { n_samples: 16, lmc_steps: 16, step_size: 0.01, is_proposals: 16 }
            })
        }
        "rsdmc" => {
            cfg.score = ScoreConfig::Rsdmc(if paper {
                RecursiveLmc::default()
            } else {
                RecursiveLmc { depth: 2, n_samples: 4, lmc_steps: 4, step_size: 0.01, is_proposals: 16 }
            })
        }
        "zodmc" => {
            let n_samples = if paper { 1024 } else { DESK_ZODMC_SAMPLES };
            cfg.score = ScoreConfig::Zodmc(Rejection { n_samples, ..Rejection::default() });
            if !paper {
                cfg.n_particles = DESK_ZODMC_PARTICLES;
                cfg.reference_samples = cfg.reference_samples.min(DESK_ZODMC_PARTICLES);
            }
        }
        "sndmc" => cfg.score = ScoreConfig::Sndmc(SelfNormalized { n_samples: 1024 }),
        _ => unreachable!("label checked above"),
    }
    Ok(cfg)
}

/// Rejection sampling is by far the most expensive score at desk scale.
pub const DESK_ZODMC_SAMPLES: usize = 4;
pub const DESK_ZODMC_PARTICLES: usize = 32;

pub fn suite_configs(suite: Suite, scale: Scale, methods: Option<&[String]>, seed: u64) -> Result<Vec<(String, RunConfig)>> {
    let all = match suite {
        Suite::Gm2d => GM2D_METHODS,
        Suite::Mueller => MUELLER_METHODS,
    };
    let labels: Vec<String> = match methods {
        Some(m) => m.iter().map(|s| s.trim().to_ascii_lowercase()).collect(),
        None => all.iter().map(|s| s.to_string()).collect(),
    };
    labels
        .into_iter()
        .map(|l| method_config(suite, scale, &l, seed).map(|c| (l, c)))
        .collect()
}

/// Runs the suite. Per-method failures become rows with the error column set.
pub fn run_benchmark(suite: Suite, scale: Scale, methods: Option<&[String]>, seed: u64) -> Result<Vec<BenchmarkRow>> {
    let configs = suite_configs(suite, scale, methods, seed)?;
    Ok(configs
        .iter()
        .map(|(label, cfg)| {
            let start = std::time::Instant::now();
            match run_estimate(cfg) {
                Ok(out) => BenchmarkRow::from_output(label, &out),
                Err(e) => {
                    let target = cfg.target.build().map(|t| t.name).unwrap_or_default();
                    BenchmarkRow::failed(label, &target, &e, start.elapsed().as_secs_f64())
                }
            }
        })
        .collect())
}

/// The CSV with the seconds column blanked, for determinism checks.
pub fn csv_without_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            if f.len() > 9 {
                f[9] = "";
            }
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
