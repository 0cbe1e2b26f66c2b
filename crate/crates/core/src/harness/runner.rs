//! Dispatches a [`RunConfig`] to an estimator, round by round.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{method_name, Method, RunConfig};
use crate::curves::AnnealingSchedule;
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_ais, estimate_je, estimate_rds, estimate_ti, median_trick, EstimateReport, Protocol,
};
use crate::metrics::{default_sigmas, mean_and_se, mmd, relative_error_stats, w2_empirical, RelErrorStats};
use crate::rng::{Rng, RunSeed};
use crate::scores::ScoreEstimator;
use crate::targets::{Oracle, OracleCounter, SampleMeta, SampleSet, Target};

pub const WORKERS_ENV: &str = "ANNEALZ_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: String,
    pub target: String,
    pub seed: u64,
    pub n_rounds: usize,
    pub n_particles: usize,
    pub known_log_z: Option<f64>,
    /// Per-round estimate: the mean of that round's particle estimates.
    pub round_estimates: Vec<f64>,
    pub median_estimate: f64,
    pub relative_error: Option<RelErrorStats>,
    pub mmd: Option<Vec<f64>>,
    pub w2: Option<Vec<f64>>,
    pub oracle_calls: u64,
    pub value_calls: u64,
    pub oracle_calls_per_sample: f64,
    pub value_calls_per_sample: f64,
    pub failures: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub config: RunConfig,
    pub rounds: Vec<EstimateReport>,
}

impl RunOutput {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON with every timing field zeroed, for determinism comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut c = self.clone();
        c.summary.elapsed_seconds = 0.0;
        c.rounds.iter_mut().for_each(|r| r.elapsed_seconds = 0.0);
        c.to_json()
    }
}

/// Worker count from the config, else the environment, else rayon's default.
pub fn worker_count(cfg_workers: Option<usize>) -> Result<Option<usize>> {
    if cfg_workers.is_some() {
        return Ok(cfg_workers);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

pub fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(workers)? {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn build_target(cfg: &RunConfig) -> Result<Target> {
    let t = cfg.target.build()?;
    if cfg.recenter {
        t.recentered(2000)
    } else {
        Ok(t)
    }
}

/// Runs all rounds of the configured estimator.
pub fn run_estimate(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    with_pool(cfg.workers, || run_rounds(cfg))?
}

fn run_rounds(cfg: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let target = build_target(cfg)?;
    let echo = serde_json::to_value(cfg).map_err(|e| Error::Internal(e.to_string()))?;
    let score = match cfg.method {
        Method::Rds => Some(ScoreEstimator::new(&target, cfg.score.clone())?),
        _ => None,
    };
    let mut rounds = Vec::with_capacity(cfg.n_rounds);
    // The 1% failure budget applies to the whole run; stop as soon as it is spent.
    let allowed = 0.01 * (cfg.n_rounds * cfg.n_particles) as f64;
    let mut failures = 0;
    for round in 0..cfg.n_rounds as u64 {
        let seed = RunSeed::new(cfg.seed, round);
        let counter = OracleCounter::new();
        let mut report = match cfg.method {
            Method::Ti => run_ti_round(cfg, &target, seed, &counter)?,
            Method::Ais => {
                let sched = schedule_for(cfg, &target)?;
                estimate_ais(&target, &sched, &cfg.ti, &cfg.ais, cfg.n_particles, seed, &counter)?
            }
            Method::Je => {
                let protocol = match cfg.je.protocol {
                    Some(p) => p,
                    None => {
                        let s = schedule_for(cfg, &target)?;
                        Protocol::Geometric { r: s.r, beta: s.beta }
                    }
                };
                estimate_je(&target, protocol, &cfg.je.run, &cfg.ti, &cfg.ais, cfg.je.log_z0, cfg.n_particles, seed, &counter)?
            }
            Method::Rds => {
                let score = score.as_ref().expect("score built for rds");
                estimate_rds(&target, &cfg.rds, score, cfg.n_particles, seed, &counter)?
            }
        };
        report.config_echo = echo.clone();
        failures += report.failures;
        if failures as f64 > allowed {
            return Err(Error::Divergence(format!(
                "{failures} of {} particles failed by round {round}: {}",
                cfg.n_rounds * cfg.n_particles,
                report.failure_messages.first().map(String::as_str).unwrap_or("")
            )));
        }
        rounds.push(report);
    }
    summarize(cfg, &target, rounds, start)
}

fn schedule_for(cfg: &RunConfig, target: &Target) -> Result<AnnealingSchedule> {
    let s = &cfg.schedule;
    AnnealingSchedule::new(s.beta.unwrap_or(target.beta), s.r, s.steps, s.total_time)
}

fn run_ti_round(cfg: &RunConfig, target: &Target, seed: RunSeed, counter: &OracleCounter) -> Result<EstimateReport> {
    let start = Instant::now();
    let mut ti = cfg.ti.clone();
    ti.n_particles = cfg.n_particles;
    let mut rngs: Vec<Rng> = (0..ti.n_particles as u64).map(|i| seed.particle(i)).collect();
    let out = estimate_ti(&Oracle::new(target, counter), &ti, target.beta, 0.0, &mut rngs)?;
    let counts = counter.snapshot();
    let meta = SampleMeta { estimator: "ti".into(), round: seed.round, seed: seed.base };
    Ok(EstimateReport {
        method: "ti".into(),
        target: target.name.clone(),
        seed: seed.base,
        round: seed.round,
        z_hat_samples: vec![out.log_z0_hat.exp()],
        log_z0_hat: Some(out.log_z0_hat),
        work_samples: out.log_ratios.iter().map(|r| -r).collect(),
        oracle_calls: counts.grad,
        value_calls: counts.value,
        failures: 0,
        failure_messages: vec![],
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config_echo: serde_json::Value::Null,
        samples: Some(SampleSet::new(target.dim(), out.particles, meta)?),
    })
}

fn summarize(cfg: &RunConfig, target: &Target, rounds: Vec<EstimateReport>, start: Instant) -> Result<RunOutput> {
    let round_estimates: Vec<f64> = rounds.iter().map(EstimateReport::z_hat).collect();
    let relative_error = match target.known_log_z {
        Some(lz) => Some(relative_error_stats(&round_estimates, lz.exp(), &cfg.epsilon)?),
        None => None,
    };
    let (mmd_v, w2_v) = if cfg.reference_samples > 0 && target.has_exact_sampler() {
        let pairs: Vec<(f64, f64)> = rounds
            .par_iter()
            .map(|r| sample_quality(target, r, cfg.reference_samples, cfg.seed))
            .collect::<Result<_>>()?;
        (Some(pairs.iter().map(|p| p.0).collect()), Some(pairs.iter().map(|p| p.1).collect()))
    } else {
        (None, None)
    };
    let oracle_calls: u64 = rounds.iter().map(|r| r.oracle_calls).sum();
    let value_calls: u64 = rounds.iter().map(|r| r.value_calls).sum();
    let samples = (cfg.n_rounds * cfg.n_particles) as f64;
    let summary = RunSummary {
        method: match cfg.method {
            Method::Rds => format!("rds-{}", cfg.score.name()),
            m => method_name(m).to_string(),
        },
        target: target.name.clone(),
        seed: cfg.seed,
        n_rounds: cfg.n_rounds,
        n_particles: cfg.n_particles,
        known_log_z: target.known_log_z,
        median_estimate: median_trick(&round_estimates)?,
        round_estimates,
        relative_error,
        mmd: mmd_v,
        w2: w2_v,
        oracle_calls,
        value_calls,
        oracle_calls_per_sample: oracle_calls as f64 / samples,
        value_calls_per_sample: value_calls as f64 / samples,
        failures: rounds.iter().map(|r| r.failures).sum(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { summary, config: cfg.clone(), rounds })
}

/// MMD and W₂ of a round's samples against fresh exact samples.
pub fn sample_quality(target: &Target, report: &EstimateReport, n_ref: usize, base_seed: u64) -> Result<(f64, f64)> {
    let samples = report
        .samples
        .as_ref()
        .ok_or_else(|| Error::Internal("round produced no samples".into()))?;
    let mut rng = RunSeed::new(base_seed, report.round).reference(0);
    let meta = SampleMeta { estimator: "exact".into(), round: report.round, seed: base_seed };
    let reference = target.sample_exact(&mut rng, n_ref, meta)?;
    Ok((mmd(samples, &reference, &default_sigmas())?, w2_empirical(samples, &reference)?))
}

/// Mean and standard error of a metric series.
pub fn metric_mean_se(v: &[f64]) -> (f64, f64) {
    mean_and_se(v)
}
