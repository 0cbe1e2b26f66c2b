//! One-step Markov kernels: LMC, the exponential-integrator ALMC step, the
//! exact OU transition, the reverse-diffusion step and the rejection sampler
//! for the OU posterior.

use serde::Serialize;

use crate::curves::AnnealingSchedule;
use crate::error::{invalid, Error, Result};
use crate::quadrature::gl_checked;
use crate::rng::{self, Rng};
use crate::targets::Oracle;

pub const DIVERGENCE_NORM: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelStepOutput {
    pub x_next: Vec<f64>,
    pub path_noise: Option<Vec<f64>>,
    pub oracle_calls_used: u64,
}

#[inline]
pub fn check_divergence(x: &[f64]) -> Result<()> {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    if !(n2 <= DIVERGENCE_NORM * DIVERGENCE_NORM) {
        return Err(Error::Divergence(format!("|x| = {} exceeds {DIVERGENCE_NORM:e}", n2.sqrt())));
    }
    Ok(())
}

/// x ← x − h∇U(x) + √(2h)ξ, with `g` as gradient scratch.
pub fn lmc_step_in_place<F>(grad: &mut F, x: &mut [f64], g: &mut [f64], h: f64, rng: &mut Rng) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    grad(x, g)?;
    let sd = (2.0 * h).sqrt();
    for (xi, gi) in x.iter_mut().zip(g.iter()) {
        *xi += -h * gi + sd * rng::normal(rng);
    }
    check_divergence(x)
}

pub fn lmc_step<F>(mut grad: F, x: &[f64], h: f64, rng: &mut Rng) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if !(h > 0.0) {
        return invalid("LMC step size must be positive");
    }
    let mut out = x.to_vec();
    let mut g = vec![0.0; x.len()];
    lmc_step_in_place(&mut grad, &mut out, &mut g, h, rng)?;
    Ok(out)
}

/// The three scalars of the exponential-integrator step over one segment:
/// x' = decay·x − drift·∇V(x) + noise_sd·ξ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlmcCoefficients {
    pub decay: f64,
    pub drift: f64,
    pub noise_sd: f64,
}

impl AlmcCoefficients {
    /// From a cumulative rate Λ on [0, t_len], by checked Gauss–Legendre.
    pub fn from_cumulative_rate(rate: impl Fn(f64) -> f64, t_len: f64) -> Result<Self> {
        let total = rate(t_len);
        let drift = gl_checked(|t| (-(total - rate(t))).exp(), 0.0, t_len, 1e-9)?;
        let second = gl_checked(|t| (-2.0 * (total - rate(t))).exp(), 0.0, t_len, 1e-9)?;
        Ok(Self { decay: (-total).exp(), drift, noise_sd: (2.0 * second).sqrt() })
    }

    /// Closed form for a constant rate c ≥ 0.
    pub fn constant(c: f64, t_len: f64) -> Self {
        if c == 0.0 {
            return Self { decay: 1.0, drift: t_len, noise_sd: (2.0 * t_len).sqrt() };
        }
        Self {
            decay: (-c * t_len).exp(),
            drift: -(-c * t_len).exp_m1() / c,
            noise_sd: (-(-2.0 * c * t_len).exp_m1() / c).sqrt(),
        }
    }

    #[inline]
    pub fn apply(&self, x: &mut [f64], g: &[f64], rng: &mut Rng) -> Result<()> {
        for (xi, gi) in x.iter_mut().zip(g) {
            *xi = self.decay * *xi - self.drift * gi + self.noise_sd * rng::normal(rng);
        }
        check_divergence(x)
    }
}

/// Precomputed ALMC coefficients for every segment ℓ = 1..=M of a schedule.
#[derive(Debug, Clone)]
pub struct AlmcTable {
    pub schedule: AnnealingSchedule,
    coeffs: Vec<AlmcCoefficients>,
}

impl AlmcTable {
    pub fn new(schedule: AnnealingSchedule) -> Result<Self> {
        let t_len = schedule.segment_time();
        let coeffs = (1..=schedule.steps)
            .map(|l| AlmcCoefficients::from_cumulative_rate(|t| schedule.cumulative_rate(l, t), t_len))
            .collect::<Result<_>>()?;
        Ok(Self { schedule, coeffs })
    }

    pub fn coefficients(&self, l: usize) -> AlmcCoefficients {
        self.coeffs[l - 1]
    }

    /// One ALMC move over segment ℓ; exactly one gradient call.
    pub fn step(&self, oracle: &Oracle<'_>, l: usize, x: &mut [f64], g: &mut [f64], rng: &mut Rng) -> Result<()> {
        if l == 0 || l > self.coeffs.len() {
            return invalid(format!("segment {l} outside 1..={}", self.coeffs.len()));
        }
        oracle.grad(x, g)?;
        self.coeffs[l - 1].apply(x, g, rng)
    }
}

/// Allocating form of [`AlmcTable::step`].
pub fn almc_step(oracle: &Oracle<'_>, table: &AlmcTable, l: usize, x: &[f64], rng: &mut Rng) -> Result<KernelStepOutput> {
    let mut out = x.to_vec();
    let mut g = vec![0.0; x.len()];
    table.step(oracle, l, &mut out, &mut g, rng)?;
    Ok(KernelStepOutput { x_next: out, path_noise: None, oracle_calls_used: 1 })
}

/// Exact OU transition from t0 to t1.
pub fn ou_forward_step(x: &[f64], t0: f64, t1: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    if !(0.0 <= t0 && t0 <= t1) {
        return invalid("OU step needs 0 ≤ t0 ≤ t1");
    }
    let dt = t1 - t0;
    let a = (-dt).exp();
    let b = (-(-2.0 * dt).exp_m1()).sqrt();
    Ok(x.iter().map(|v| a * v + b * rng::normal(rng)).collect())
}

/// Coefficients of the reverse step of length h with the score frozen at the left end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RdsCoefficients {
    pub h: f64,
    pub growth: f64,
    pub drift: f64,
    pub noise_sd: f64,
    /// Correlation between the driving noise and the standardized Brownian increment.
    pub rho: f64,
}

impl RdsCoefficients {
    pub fn new(h: f64) -> Self {
        let em1 = h.exp_m1();
        let e2m1 = (2.0 * h).exp_m1();
        Self {
            h,
            growth: 1.0 + em1,
            drift: 2.0 * em1,
            noise_sd: e2m1.sqrt(),
            rho: std::f64::consts::SQRT_2 * em1 / (e2m1 * h).sqrt(),
        }
    }
}

/// x ← e^h x + 2(e^h−1)s(x) + √(e^{2h}−1)ξ₁, ξ₂ = ρξ₁ + √(1−ρ²)ξ̃.
///
/// The score at x is left in `score`, the path noise ξ₂ in `xi2`.
pub fn rds_step_in_place<F>(
    score_fn: &mut F,
    x: &mut [f64],
    coeffs: &RdsCoefficients,
    score: &mut [f64],
    xi2: &mut [f64],
    rng: &mut Rng,
) -> Result<()>
where
    F: FnMut(&[f64], &mut [f64], &mut Rng) -> Result<()>,
{
    score_fn(x, score, rng)?;
    let perp = (1.0 - coeffs.rho * coeffs.rho).max(0.0).sqrt();
    for ((xi, si), x2) in x.iter_mut().zip(score.iter()).zip(xi2.iter_mut()) {
        let n1 = rng::normal(rng);
        let n2 = rng::normal(rng);
        *xi = coeffs.growth * *xi + coeffs.drift * si + coeffs.noise_sd * n1;
        *x2 = coeffs.rho * n1 + perp * n2;
    }
    check_divergence(x)
}

/// Allocating form of [`rds_step_in_place`] for the step [t_k, t_k1].
pub fn rds_step<F>(mut score_fn: F, x: &[f64], t_k: f64, t_k1: f64, rng: &mut Rng) -> Result<KernelStepOutput>
where
    F: FnMut(&[f64], &mut [f64], &mut Rng) -> Result<()>,
{
    if !(0.0 <= t_k && t_k < t_k1) {
        return invalid("RDS step needs 0 ≤ t_k < t_k1");
    }
    let coeffs = RdsCoefficients::new(t_k1 - t_k);
    let mut out = x.to_vec();
    let mut s = vec![0.0; x.len()];
    let mut xi2 = vec![0.0; x.len()];
    rds_step_in_place(&mut score_fn, &mut out, &coeffs, &mut s, &mut xi2, rng)?;
    Ok(KernelStepOutput { x_next: out, path_noise: Some(xi2), oracle_calls_used: 1 })
}

/// Exact draw from π̄_{0|t}(·|x) ∝ e^{−V(x₀)}N(x₀ | e^t x, (e^{2t}−1)I) by
/// rejection from the Gaussian factor. Returns the number of proposals used.
pub fn rejection_sample_posterior(
    oracle: &Oracle<'_>,
    t: f64,
    x: &[f64],
    v_lower_bound: f64,
    rng: &mut Rng,
    max_tries: u64,
    out: &mut [f64],
) -> Result<u64> {
    if !(t > 0.0) {
        return invalid("posterior sampling needs t > 0");
    }
    let scale = t.exp();
    let sd = (2.0 * t).exp_m1().sqrt();
    for tries in 1..=max_tries {
        for (o, v) in out.iter_mut().zip(x) {
            *o = scale * v + sd * rng::normal(rng);
        }
        let v = oracle.value(out);
        if rng::uniform(rng) < (-(v - v_lower_bound)).exp() {
            return Ok(tries);
        }
    }
    Err(Error::RejectionBudget(max_tries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RunSeed;
    use approx::assert_relative_eq;

    #[test]
    fn constant_rate_quadrature_matches_closed_form() {
        for (c, t) in [(0.0, 0.01), (3.0, 0.01), (100.0, 0.01), (0.7, 0.5)] {
            let q = AlmcCoefficients::from_cumulative_rate(|s| c * s, t).unwrap();
            let e = AlmcCoefficients::constant(c, t);
            assert!((q.decay - e.decay).abs() < 1e-10);
            assert!((q.drift - e.drift).abs() < 1e-10);
            assert!((q.noise_sd - e.noise_sd).abs() < 1e-10);
        }
    }

    #[test]
    fn final_segment_reduces_to_lmc_in_the_limit() {
        let s = AnnealingSchedule::new(1.0, 2.0, 1000, 10.0).unwrap();
        let tab = AlmcTable::new(s).unwrap();
        let c = tab.coefficients(1000);
        let tl = s.segment_time();
        assert!((c.decay - 1.0).abs() < 1e-6);
        assert!((c.drift - tl).abs() < 1e-8);
        assert!((c.noise_sd - (2.0 * tl).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn lmc_deterministic_part() {
        let mut rng = RunSeed::new(1, 0).particle(0);
        let mut n = 0;
        let x = lmc_step(|x: &[f64], g: &mut [f64]| { g[0] = x[0]; n += 1; Ok(()) }, &[1.0], 1e-30, &mut rng).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_eq!(n, 1);
    }

    #[test]
    fn rho_example() {
        assert_relative_eq!(RdsCoefficients::new(0.1).rho, 0.999_583_6, epsilon = 5e-7);
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = RunSeed::new(1, 0).particle(0);
        let r = lmc_step(|_: &[f64], g: &mut [f64]| { g[0] = -1e12; Ok(()) }, &[0.0], 1.0, &mut rng);
        assert!(matches!(r, Err(Error::Divergence(_))));
    }
}
