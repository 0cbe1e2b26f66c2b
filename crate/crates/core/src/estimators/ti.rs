//! Thermodynamic integration over the quadratic regularization λ‖x‖²/2.
//!
//! Estimates Z₀ = ∫ exp(−V(x) − c‖x‖²) dx by walking λ down a geometric
//! ladder from λ₀ to 0 and multiplying the ratios
//! E_{ρ_k}[exp((λ_k − λ_{k+1})‖x‖²/2)], ρ_k ∝ exp(−V − c‖x‖² − λ_k‖x‖²/2).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::lmc_step_in_place;
use crate::rng::Rng;
use crate::targets::{log_sum_exp, Oracle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiConfig {
    pub lambda0: f64,
    /// Ratio λ_{i+1}/λ_i; defaults to 1.45/(1 + 1/√d).
    pub decay: Option<f64>,
    /// Stop once λ_i ≤ this; defaults to 1/(2√d).
    pub lambda_stop: Option<f64>,
    pub n_particles: usize,
    /// LMC steps per level (after the first).
    pub lmc_steps: usize,
    /// LMC steps at the first level, started from the origin.
    pub burn_in: usize,
    /// Dimensionless step: level k uses h = step_size / (1 + λ_k + 2c).
    pub step_size: f64,
    /// Overrides the smoothness β in the starting Gaussian approximation.
    pub curvature: Option<f64>,
}

impl Default for TiConfig {
    fn default() -> Self {
        Self {
            lambda0: 100.0,
            decay: None,
            lambda_stop: None,
            n_particles: 32,
            lmc_steps: 100,
            burn_in: 500,
            step_size: 0.01,
            curvature: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiOutput {
    pub log_z0_hat: f64,
    /// λ ladder including the final 0.
    pub levels: Vec<f64>,
    /// log of each ratio estimate.
    pub log_ratios: Vec<f64>,
    /// Particles after a final pass at λ = 0, row-major.
    pub particles: Vec<f64>,
}

/// λ₀, decay·λ₀, … down to the first value ≤ λ_stop, then 0.
pub fn ti_levels(cfg: &TiConfig, dim: usize) -> Result<Vec<f64>> {
    let sd = (dim as f64).sqrt();
    let decay = cfg.decay.unwrap_or(1.45 / (1.0 + 1.0 / sd));
    let stop = cfg.lambda_stop.unwrap_or(1.0 / (2.0 * sd));
    if !(decay > 0.0 && decay < 1.0) {
        return invalid(format!("TI decay factor {decay} must lie in (0, 1)"));
    }
    if !(cfg.lambda0 > 0.0) || !(stop > 0.0) {
        return invalid("TI needs λ₀ > 0 and a positive stopping level");
    }
    let mut levels = vec![cfg.lambda0];
    let mut lam = cfg.lambda0;
    while lam > stop {
        lam *= decay;
        levels.push(lam);
    }
    levels.push(0.0);
    Ok(levels)
}

/// Runs TI for V₀ = V + c‖x‖² with one RNG stream per particle.
///
/// The ladder starts from the Gaussian approximation with curvature β + 2c + λ₀,
/// where β is the smoothness of V (or `cfg.curvature`).
pub fn estimate_ti(oracle: &Oracle<'_>, cfg: &TiConfig, beta: f64, c: f64, rngs: &mut [Rng]) -> Result<TiOutput> {
    if cfg.n_particles == 0 || rngs.len() != cfg.n_particles {
        return invalid("TI needs N ≥ 1 particles and one stream per particle");
    }
    if !(cfg.step_size > 0.0) || !(c >= 0.0) || !(cfg.curvature.unwrap_or(beta) >= 0.0) {
        return invalid("TI needs a positive step size and c ≥ 0");
    }
    let d = oracle.dim();
    let levels = ti_levels(cfg, d)?;

    let zero = vec![0.0; d];
    let mut g0 = vec![0.0; d];
    oracle.grad(&zero, &mut g0)?;
    let v0 = oracle.value(&zero);
    let kappa = cfg.curvature.unwrap_or(beta) + 2.0 * c + cfg.lambda0;
    let g2: f64 = g0.iter().map(|v| v * v).sum();
    let mut log_z = -v0 + g2 / (2.0 * kappa) + 0.5 * d as f64 * (2.0 * std::f64::consts::PI / kappa).ln();

    let mut particles = vec![0.0; cfg.n_particles * d];
    let mut log_ratios = Vec::with_capacity(levels.len() - 1);
    for k in 0..levels.len() {
        let lam = levels[k];
        let h = cfg.step_size / (1.0 + lam + 2.0 * c);
        let steps = if k == 0 { cfg.burn_in } else { cfg.lmc_steps };
        let rate = lam + 2.0 * c;
        particles
            .par_chunks_exact_mut(d)
            .zip(rngs.par_iter_mut())
            .try_for_each(|(x, rng)| -> Result<()> {
                let mut g = vec![0.0; d];
                let mut grad = |y: &[f64], out: &mut [f64]| -> Result<()> {
                    oracle.grad(y, out)?;
                    for (o, v) in out.iter_mut().zip(y) {
                        *o += rate * v;
                    }
                    Ok(())
                };
                for _ in 0..steps {
                    lmc_step_in_place(&mut grad, x, &mut g, h, rng)?;
                }
                Ok(())
            })?;
        if k + 1 == levels.len() {
            break;
        }
        let dl = lam - levels[k + 1];
        let logs: Vec<f64> = particles
            .chunks_exact(d)
            .map(|x| 0.5 * dl * x.iter().map(|v| v * v).sum::<f64>())
            .collect();
        let r = log_sum_exp(&logs) - (cfg.n_particles as f64).ln();
        log_ratios.push(r);
        log_z += r;
    }
    Ok(TiOutput { log_z0_hat: log_z, levels, log_ratios, particles })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ladder() {
        let cfg = TiConfig::default();
        let l = ti_levels(&cfg, 2).unwrap();
        let decay = 1.45 / (1.0 + 1.0 / 2f64.sqrt());
        assert_eq!(l[0], 100.0);
        assert!((l[1] - 100.0 * decay).abs() < 1e-12);
        assert_eq!(*l.last().unwrap(), 0.0);
        let stop = 1.0 / (2.0 * 2f64.sqrt());
        assert!(l[l.len() - 2] <= stop && l[l.len() - 3] > stop);
        // decay ≥ 1 once d ≥ 5
        assert!(ti_levels(&cfg, 5).is_err());
    }
}
