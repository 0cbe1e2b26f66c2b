//! Normalizing-constant estimators: thermodynamic integration, annealed
//! importance sampling, Jarzynski and reverse-diffusion sampling.

mod ais;
mod je;
mod median;
mod rds;
mod ti;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ais::{estimate_ais, initialize_pi0, AisConfig};
pub use je::{estimate_je, mazonka_bias, JeConfig, Protocol};
pub use median::{free_energy, median_trick, n_for_confidence};
pub use rds::{estimate_rds, rds_time_grid, RdsConfig};
pub use ti::{estimate_ti, ti_levels, TiConfig, TiOutput};

use crate::error::{Error, Result};
use crate::rng::{Rng, RunSeed};
use crate::targets::{log_sum_exp, OracleCounter, SampleMeta, SampleSet};

/// Accumulated work, optionally with its per-step increments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkRecord {
    pub w: f64,
    pub increments: Option<Vec<f64>>,
}

impl WorkRecord {
    pub fn new(keep: bool) -> Self {
        Self { w: 0.0, increments: keep.then(Vec::new) }
    }

    #[inline]
    pub fn add(&mut self, dw: f64) {
        self.w += dw;
        if let Some(v) = &mut self.increments {
            v.push(dw);
        }
    }
}

/// What one particle contributes to a round.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleOutcome {
    pub log_z_hat: f64,
    pub work: f64,
    pub sample: Vec<f64>,
}

/// One round of an estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: String,
    pub target: String,
    pub seed: u64,
    pub round: u64,
    pub z_hat_samples: Vec<f64>,
    pub log_z0_hat: Option<f64>,
    pub work_samples: Vec<f64>,
    pub oracle_calls: u64,
    pub value_calls: u64,
    pub failures: usize,
    pub failure_messages: Vec<String>,
    pub elapsed_seconds: f64,
    #[serde(default)]
    pub config_echo: serde_json::Value,
    #[serde(skip)]
    pub samples: Option<SampleSet>,
}

impl EstimateReport {
    /// Round estimate: the average of the particle estimates, computed in log space.
    pub fn log_z_hat(&self) -> f64 {
        let logs: Vec<f64> = self.z_hat_samples.iter().map(|z| z.ln()).collect();
        log_sum_exp(&logs) - (logs.len() as f64).ln()
    }

    pub fn z_hat(&self) -> f64 {
        self.log_z_hat().exp()
    }

    pub fn n_attempted(&self) -> usize {
        self.z_hat_samples.len() + self.failures
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.n_attempted().max(1) as f64
    }

    /// Fails when more than 1% of the particles were dropped.
    pub fn check_failure_rate(&self) -> Result<()> {
        if self.failure_rate() > 0.01 {
            return Err(Error::Divergence(format!(
                "{} of {} particles failed in round {}: {}",
                self.failures,
                self.n_attempted(),
                self.round,
                self.failure_messages.first().map(String::as_str).unwrap_or("")
            )));
        }
        Ok(())
    }
}

pub(crate) fn run_particles<F>(n: usize, seed: RunSeed, f: F) -> Vec<Result<ParticleOutcome>>
where
    F: Fn(&mut Rng) -> Result<ParticleOutcome> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.particle(i);
            f(&mut rng)
        })
        .collect()
}

pub(crate) struct ReportBuilder<'a> {
    pub method: &'a str,
    pub target: &'a str,
    pub dim: usize,
    pub seed: RunSeed,
    pub counter: &'a OracleCounter,
    pub start: Instant,
    pub log_z0_hat: Option<f64>,
}

impl ReportBuilder<'_> {
    pub fn finish(self, outcomes: Vec<Result<ParticleOutcome>>) -> Result<EstimateReport> {
        let mut z = Vec::with_capacity(outcomes.len());
        let mut w = Vec::with_capacity(outcomes.len());
        let mut pts = Vec::with_capacity(outcomes.len() * self.dim);
        let mut failures = 0;
        let mut failure_messages = Vec::new();
        for o in outcomes {
            let bad = match o {
                Ok(p) => {
                    // A very negative log Ẑ underflows to Ẑ = 0: a valid, if useless, estimate.
                    let zh = p.log_z_hat.exp();
                    if p.log_z_hat.is_finite() && zh.is_finite() && p.sample.iter().all(|v| v.is_finite()) {
                        z.push(zh);
                        w.push(p.work);
                        pts.extend_from_slice(&p.sample);
                        None
                    } else {
                        Some(format!("non-finite estimate (log Z = {})", p.log_z_hat))
                    }
                }
                Err(e) => Some(e.to_string()),
            };
            if let Some(msg) = bad {
                failures += 1;
                if failure_messages.len() < 5 {
                    failure_messages.push(msg);
                }
            }
        }
        let meta = SampleMeta { estimator: self.method.to_string(), round: self.seed.round, seed: self.seed.base };
        let samples = if pts.is_empty() { None } else { Some(SampleSet::new(self.dim, pts, meta)?) };
        let counts = self.counter.snapshot();
        Ok(EstimateReport {
            method: self.method.to_string(),
            target: self.target.to_string(),
            seed: self.seed.base,
            round: self.seed.round,
            z_hat_samples: z,
            log_z0_hat: self.log_z0_hat,
            work_samples: w,
            oracle_calls: counts.grad,
            value_calls: counts.value,
            failures,
            failure_messages,
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            config_echo: serde_json::Value::Null,
            samples,
        })
    }
}
