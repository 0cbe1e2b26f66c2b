//! Annealed importance sampling along π_θ ∝ exp(−V − λ(θ)‖x‖²/2).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{run_particles, ParticleOutcome, ReportBuilder, EstimateReport, TiConfig};
use crate::curves::AnnealingSchedule;
use crate::error::{invalid, Result};
use crate::kernels::{lmc_step_in_place, AlmcTable};
use crate::rng::{Rng, RunSeed};
use crate::targets::{Oracle, OracleCounter, Target};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AisConfig {
    /// LMC steps used to draw the starting point from π₀.
    pub init_steps: usize,
}

impl Default for AisConfig {
    fn default() -> Self {
        Self { init_steps: 200 }
    }
}

/// Approximate draw from π₀ ∝ exp(−V − β‖x‖²): LMC from the origin with step 1/(4β).
pub fn initialize_pi0(oracle: &Oracle<'_>, beta: f64, steps: usize, x: &mut [f64], g: &mut [f64], rng: &mut Rng) -> Result<()> {
    x.iter_mut().for_each(|v| *v = 0.0);
    let h = 1.0 / (4.0 * beta);
    let mut grad = |y: &[f64], out: &mut [f64]| -> Result<()> {
        oracle.grad(y, out)?;
        for (o, v) in out.iter_mut().zip(y) {
            *o += 2.0 * beta * v;
        }
        Ok(())
    };
    for _ in 0..steps {
        lmc_step_in_place(&mut grad, x, g, h, rng)?;
    }
    Ok(())
}

/// One round of AIS: TI for Z₀ on auxiliary streams, then `n_particles`
/// independent annealed trajectories. The schedule's β sets λ(0) = 2β.
pub fn estimate_ais(
    target: &Target,
    schedule: &AnnealingSchedule,
    ti_cfg: &TiConfig,
    ais_cfg: &AisConfig,
    n_particles: usize,
    seed: RunSeed,
    counter: &OracleCounter,
) -> Result<EstimateReport> {
    if n_particles == 0 {
        return invalid("AIS needs at least one particle");
    }
    let start = Instant::now();
    let oracle = Oracle::new(target, counter);
    let beta = schedule.beta;
    let mut ti_rngs: Vec<Rng> = (0..ti_cfg.n_particles as u64).map(|i| seed.auxiliary(i)).collect();
    let log_z0 = super::estimate_ti(&oracle, ti_cfg, beta, beta, &mut ti_rngs)?.log_z0_hat;
    let table = AlmcTable::new(*schedule)?;
    let m = schedule.steps;
    let d = target.dim();
    let outcomes = run_particles(n_particles, seed, |rng| {
        let mut x = vec![0.0; d];
        let mut g = vec![0.0; d];
        initialize_pi0(&oracle, beta, ais_cfg.init_steps, &mut x, &mut g, rng)?;
        let mut w = -0.5 * (schedule.lambda_l(0) - schedule.lambda_l(1)) * norm2(&x);
        for l in 1..m {
            table.step(&oracle, l, &mut x, &mut g, rng)?;
            w -= 0.5 * (schedule.lambda_l(l) - schedule.lambda_l(l + 1)) * norm2(&x);
        }
        table.step(&oracle, m, &mut x, &mut g, rng)?;
        Ok(ParticleOutcome { log_z_hat: log_z0 - w, work: w, sample: x })
    });
    ReportBuilder {
        method: "ais",
        target: &target.name,
        dim: d,
        seed,
        counter,
        start,
        log_z0_hat: Some(log_z0),
    }
    .finish(outcomes)
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}
