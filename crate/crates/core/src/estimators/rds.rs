//! Reverse-diffusion normalizing-constant estimator.
//!
//! X₀ ∼ N(0, I) is pushed through the time-reversed OU process with an
//! estimated score. The work collects log φ(X₀), the score terms
//! h‖s‖² + √(2h)⟨s, ξ₂⟩ and finally V(X_N) − (T − δ)d, and Ẑ = e^{−W}.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ais::norm2;
use super::{run_particles, EstimateReport, ParticleOutcome, ReportBuilder};
use crate::error::{invalid, Result};
use crate::kernels::{rds_step_in_place, RdsCoefficients};
use crate::rng::{self, RunSeed};
use crate::scores::ScoreEstimator;
use crate::targets::{Oracle, OracleCounter, Target};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RdsConfig {
    pub total_time: f64,
    pub delta: f64,
    pub n_steps: usize,
    /// When set, δ = ε²/(β²d²) replaces `delta`.
    pub delta_from_epsilon: Option<f64>,
}

impl Default for RdsConfig {
    fn default() -> Self {
        Self { total_time: 5.0, delta: 0.005, n_steps: 50, delta_from_epsilon: None }
    }
}

impl RdsConfig {
    pub fn resolved_delta(&self, target: &Target) -> f64 {
        match self.delta_from_epsilon {
            Some(eps) => {
                let bd = target.beta * target.dim() as f64;
                eps * eps / (bd * bd)
            }
            None => self.delta,
        }
    }
}

/// t_k = (k/N)(T − δ), k = 0..=N.
pub fn rds_time_grid(total_time: f64, delta: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps)
        .map(|k| if n_steps == 0 { 0.0 } else { k as f64 / n_steps as f64 * (total_time - delta) })
        .collect()
}

pub fn estimate_rds(
    target: &Target,
    cfg: &RdsConfig,
    score: &ScoreEstimator,
    n_particles: usize,
    seed: RunSeed,
    counter: &OracleCounter,
) -> Result<EstimateReport> {
    let delta = cfg.resolved_delta(target);
    if n_particles == 0 {
        return invalid("RDS needs at least one particle");
    }
    if !(delta >= 0.0) || !(cfg.total_time >= delta) {
        return invalid("RDS needs 0 ≤ δ ≤ T");
    }
    if cfg.n_steps == 0 && cfg.total_time != delta {
        return invalid("RDS with no steps needs T = δ");
    }
    let start = Instant::now();
    let oracle = Oracle::new(target, counter);
    let d = target.dim();
    let grid = rds_time_grid(cfg.total_time, delta, cfg.n_steps);
    let coeffs: Vec<RdsCoefficients> = grid.windows(2).map(|w| RdsCoefficients::new(w[1] - w[0])).collect();
    let horizon = cfg.total_time - delta;
    let outcomes = run_particles(n_particles, seed, |rng| {
        let mut x = vec![0.0; d];
        rng::fill_normal(rng, &mut x);
        let mut w = -0.5 * norm2(&x) - 0.5 * d as f64 * LN_2PI;
        let mut s = vec![0.0; d];
        let mut xi2 = vec![0.0; d];
        for (k, c) in coeffs.iter().enumerate() {
            let t_score = cfg.total_time - grid[k];
            let mut score_fn = |y: &[f64], out: &mut [f64], r: &mut rng::Rng| score.score(&oracle, t_score, y, out, r);
            rds_step_in_place(&mut score_fn, &mut x, c, &mut s, &mut xi2, rng)?;
            let dot: f64 = s.iter().zip(&xi2).map(|(a, b)| a * b).sum();
            w += c.h * norm2(&s) + (2.0 * c.h).sqrt() * dot;
        }
        w += oracle.value(&x) - horizon * d as f64;
        Ok(ParticleOutcome { log_z_hat: -w, work: w, sample: x })
    });
    let method = format!("rds-{}", score.name());
    ReportBuilder { method: &method, target: &target.name, dim: d, seed, counter, start, log_z0_hat: None }
        .finish(outcomes)
}
