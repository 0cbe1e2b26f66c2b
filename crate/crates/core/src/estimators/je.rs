//! Jarzynski estimator: Euler–Maruyama annealed Langevin dynamics with a
//! left-endpoint Riemann sum for the work W = (1/T)∫₀ᵀ ∂_θV_θ(X_t) dt.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ais::{initialize_pi0, norm2};
use super::{run_particles, AisConfig, EstimateReport, ParticleOutcome, ReportBuilder, TiConfig};
use crate::curves::AnnealingSchedule;
use crate::error::{invalid, Result};
use crate::kernels::check_divergence;
use crate::rng::{self, Rng, RunSeed};
use crate::targets::{Oracle, OracleCounter, Target};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Protocol {
    /// V_θ = V + λ(θ)‖x‖²/2 with the schedule's λ; ∂_θV_θ = ½λ'(θ)‖x‖².
    Geometric { r: f64, beta: f64 },
    /// V_θ(x) = K(x − θL)²/2 in one dimension, simulated exactly.
    Mazonka { l: f64, k: f64 },
    /// V_θ = V + λ‖x‖²/2 for every θ.
    Static { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JeConfig {
    pub total_time: f64,
    pub n_steps: usize,
    /// Keep the per-step work increments of particle 0 (diagnostics).
    pub keep_increments: bool,
}

impl Default for JeConfig {
    fn default() -> Self {
        Self { total_time: 50.0, n_steps: 5000, keep_increments: false }
    }
}

/// B_T = (L²/T)(1 − (1 − e^{−KT})/(KT)), the mean dissipated work of the Mazonka protocol.
pub fn mazonka_bias(l: f64, k: f64, t: f64) -> f64 {
    l * l / t * (1.0 + (-k * t).exp_m1() / (k * t))
}

/// One JE round. `log_z0` overrides the TI estimate of the starting constant;
/// the Mazonka protocol always uses its analytic Z₀ = √(2π/K).
#[allow(clippy::too_many_arguments)]
pub fn estimate_je(
    target: &Target,
    protocol: Protocol,
    cfg: &JeConfig,
    ti_cfg: &TiConfig,
    ais_cfg: &AisConfig,
    log_z0: Option<f64>,
    n_particles: usize,
    seed: RunSeed,
    counter: &OracleCounter,
) -> Result<EstimateReport> {
    if n_particles == 0 || cfg.n_steps == 0 || !(cfg.total_time > 0.0) {
        return invalid("JE needs particles, steps and a positive horizon");
    }
    let start = Instant::now();
    let oracle = Oracle::new(target, counter);
    let d = target.dim();
    let h = cfg.total_time / cfg.n_steps as f64;
    let dtheta = 1.0 / cfg.n_steps as f64;

    let (log_z0, outcomes) = match protocol {
        Protocol::Mazonka { l, k } => {
            if d != 1 || !(k > 0.0) {
                return invalid("the Mazonka protocol is one-dimensional with K > 0");
            }
            let lz0 = 0.5 * (2.0 * std::f64::consts::PI / k).ln();
            let a = l / cfg.total_time;
            let decay = (-k * h).exp();
            let sd = (-(-2.0 * k * h).exp_m1() / k).sqrt();
            let out = run_particles(n_particles, seed, |rng| {
                let mut x = rng::normal(rng) / k.sqrt();
                // y = X − a t + a/K is an OU process with rate K.
                let mut y = x + a / k;
                let mut w = 0.0;
                for i in 0..cfg.n_steps {
                    let theta = i as f64 * dtheta;
                    w += -k * l * (x - theta * l) * dtheta;
                    y = decay * y + sd * rng::normal(rng);
                    x = y + a * (i + 1) as f64 * h - a / k;
                }
                Ok(ParticleOutcome { log_z_hat: lz0 - w, work: w, sample: vec![x] })
            });
            (lz0, out)
        }
        Protocol::Geometric { r, beta } => {
            let sched = AnnealingSchedule::new(beta, r, cfg.n_steps, cfg.total_time)?;
            let lz0 = resolve_log_z0(&oracle, log_z0, ti_cfg, beta, seed)?;
            let out = run_particles(n_particles, seed, |rng| {
                let mut x = vec![0.0; d];
                let mut g = vec![0.0; d];
                initialize_pi0(&oracle, beta, ais_cfg.init_steps, &mut x, &mut g, rng)?;
                let mut w = 0.0;
                for i in 0..cfg.n_steps {
                    let theta = i as f64 * dtheta;
                    w += 0.5 * sched.lambda_prime(theta) * norm2(&x) * dtheta;
                    ald_step(&oracle, sched.lambda(theta), h, &mut x, &mut g, rng)?;
                }
                Ok(ParticleOutcome { log_z_hat: lz0 - w, work: w, sample: x })
            });
            (lz0, out)
        }
        Protocol::Static { lambda } => {
            if !(lambda > 0.0) {
                return invalid("the static protocol needs λ > 0");
            }
            let beta = 0.5 * lambda;
            let lz0 = resolve_log_z0(&oracle, log_z0, ti_cfg, beta, seed)?;
            let out = run_particles(n_particles, seed, |rng| {
                let mut x = vec![0.0; d];
                let mut g = vec![0.0; d];
                initialize_pi0(&oracle, beta, ais_cfg.init_steps, &mut x, &mut g, rng)?;
                for _ in 0..cfg.n_steps {
                    ald_step(&oracle, lambda, h, &mut x, &mut g, rng)?;
                }
                Ok(ParticleOutcome { log_z_hat: lz0, work: 0.0, sample: x })
            });
            (lz0, out)
        }
    };
    ReportBuilder { method: "je", target: &target.name, dim: d, seed, counter, start, log_z0_hat: Some(log_z0) }
        .finish(outcomes)
}

fn resolve_log_z0(oracle: &Oracle<'_>, given: Option<f64>, ti_cfg: &TiConfig, beta: f64, seed: RunSeed) -> Result<f64> {
    if let Some(v) = given {
        return Ok(v);
    }
    let mut rngs: Vec<Rng> = (0..ti_cfg.n_particles as u64).map(|i| seed.auxiliary(i)).collect();
    Ok(super::estimate_ti(oracle, ti_cfg, beta, beta, &mut rngs)?.log_z0_hat)
}

#[inline]
fn ald_step(oracle: &Oracle<'_>, lambda: f64, h: f64, x: &mut [f64], g: &mut [f64], rng: &mut Rng) -> Result<()> {
    oracle.grad(x, g)?;
    let sd = (2.0 * h).sqrt();
    for (xi, gi) in x.iter_mut().zip(g.iter()) {
        *xi += -h * (gi + lambda * *xi) + sd * rng::normal(rng);
    }
    check_divergence(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mazonka_bias_value() {
        assert!((mazonka_bias(1.0, 1.0, 4.0) - 0.188_645).abs() < 1e-5);
    }
}
