//! Estimators of the OU-path score ∇log π̄_t used by the reverse-diffusion sampler.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::kernels::{check_divergence, rejection_sample_posterior};
use crate::rng::{self, Rng};
use crate::targets::{Oracle, Target};

type Buf = SmallVec<[f64; 8]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PosteriorLmc {
    /// Posterior samples averaged in Tweedie's formula.
    pub n_samples: usize,
    pub lmc_steps: usize,
    pub step_size: f64,
    /// Proposal draws for the importance-sampling initialization.
    pub is_proposals: usize,
}

impl Default for PosteriorLmc {
    fn default() -> Self {
        Self { n_samples: 64, lmc_steps: 16, step_size: 0.01, is_proposals: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecursiveLmc {
    pub depth: usize,
    pub n_samples: usize,
    pub lmc_steps: usize,
    pub step_size: f64,
    pub is_proposals: usize,
}

impl Default for RecursiveLmc {
    fn default() -> Self {
        Self { depth: 2, n_samples: 16, lmc_steps: 10, step_size: 0.01, is_proposals: 64 }
    }
}

impl RecursiveLmc {
    fn base(&self) -> PosteriorLmc {
        PosteriorLmc {
            n_samples: self.n_samples,
            lmc_steps: self.lmc_steps,
            step_size: self.step_size,
            is_proposals: self.is_proposals,
        }
    }
}

/// Envelope constant for the ZODMC rejection sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VLowerBound {
    /// The target's own lower bound on V (exact sampling guaranteed).
    #[default]
    TargetMinimum,
    /// 50 descent steps from the proposal mean, minus 10% of the observed drop.
    DescentHeuristic,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rejection {
    pub n_samples: usize,
    pub max_tries: u64,
    pub v_lower_bound: VLowerBound,
}

impl Default for Rejection {
    fn default() -> Self {
        Self { n_samples: 1024, max_tries: 100_000_000, v_lower_bound: VLowerBound::TargetMinimum }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelfNormalized {
    pub n_samples: usize,
}

impl Default for SelfNormalized {
    fn default() -> Self {
        Self { n_samples: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreConfig {
    Exact,
    Rdmc(PosteriorLmc),
    Rsdmc(RecursiveLmc),
    Zodmc(Rejection),
    Sndmc(SelfNormalized),
}

impl ScoreConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreConfig::Exact => "exact",
            ScoreConfig::Rdmc(_) => "rdmc",
            ScoreConfig::Rsdmc(_) => "rsdmc",
            ScoreConfig::Zodmc(_) => "zodmc",
            ScoreConfig::Sndmc(_) => "sndmc",
        }
    }
}

/// A configured score estimator bound to a target.
#[derive(Debug, Clone)]
pub struct ScoreEstimator {
    pub config: ScoreConfig,
    v_lower_bound: Option<f64>,
}

impl ScoreEstimator {
    pub fn new(target: &Target, config: ScoreConfig) -> Result<Self> {
        let mut v_lower_bound = None;
        match &config {
            ScoreConfig::Exact => {
                target.require_mixture()?;
            }
            ScoreConfig::Rdmc(c) => check_lmc(&c.clone())?,
            ScoreConfig::Rsdmc(c) => {
                if c.depth == 0 {
                    return invalid("recursion depth must be at least 1");
                }
                check_lmc(&c.base())?
            }
            ScoreConfig::Zodmc(c) => {
                if c.n_samples == 0 || c.max_tries == 0 {
                    return invalid("zodmc needs n_samples ≥ 1 and max_tries ≥ 1");
                }
                v_lower_bound = match c.v_lower_bound {
                    VLowerBound::TargetMinimum => Some(target.v_min.ok_or_else(|| {
                        Error::Config(format!("target {} has no known minimum of V; set v_lower_bound", target.name))
                    })?),
                    VLowerBound::Fixed(v) => Some(v),
                    VLowerBound::DescentHeuristic => None,
                };
            }
            ScoreConfig::Sndmc(c) => {
                if c.n_samples == 0 {
                    return invalid("sndmc needs n_samples ≥ 1");
                }
            }
        }
        Ok(Self { config, v_lower_bound })
    }

    pub fn name(&self) -> &'static str {
        self.config.name()
    }

    /// Writes an estimate of ∇log π̄_t(x) into `out`.
    pub fn score(&self, oracle: &Oracle<'_>, t: f64, x: &[f64], out: &mut [f64], rng: &mut Rng) -> Result<()> {
        match &self.config {
            ScoreConfig::Exact => score_exact_mog(oracle.target, t, x, out),
            ScoreConfig::Rdmc(c) => score_rdmc(oracle, t, x, c, rng, out),
            ScoreConfig::Rsdmc(c) => score_rsdmc(oracle, t, x, c.depth, &c.base(), rng, out),
            ScoreConfig::Zodmc(c) => {
                let vlb = match self.v_lower_bound {
                    Some(v) => v,
                    None => descent_lower_bound(oracle, t, x)?,
                };
                score_zodmc(oracle, t, x, c.n_samples, c.max_tries, vlb, rng, out)
            }
            ScoreConfig::Sndmc(c) => score_sndmc(oracle, t, x, c.n_samples, rng, out),
        }
    }
}

fn check_lmc(c: &PosteriorLmc) -> Result<()> {
    if c.n_samples == 0 || c.lmc_steps == 0 || c.is_proposals == 0 {
        return invalid("posterior LMC needs n_samples, lmc_steps and is_proposals ≥ 1");
    }
    if !(c.step_size > 0.0) {
        return invalid("posterior LMC step size must be positive");
    }
    Ok(())
}

/// Closed-form score of the OU marginal of a mixture target.
pub fn score_exact_mog(target: &Target, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
    let mix = target.require_mixture()?.ou_marginal(t)?;
    mix.grad_log_density(x, out);
    Ok(())
}

#[inline]
fn tweedie_accumulate(out: &mut [f64], x0: &[f64], x: &[f64], decay: f64, var: f64, weight: f64) {
    for ((o, a), b) in out.iter_mut().zip(x0).zip(x) {
        *o += weight * (decay * a - b) / var;
    }
}

/// Multinomial draw from normalized-on-the-fly weights; falls back to the
/// max-weight index when every weight vanishes.
fn draw_index(weights: &[f64], total: f64, rng: &mut Rng) -> usize {
    if !(total > 0.0) || !total.is_finite() {
        return weights
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, w)| if *w > acc.1 { (i, *w) } else { acc })
            .0;
    }
    let u = rng::uniform(rng) * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Self-normalized importance sampling from N(e^t x, (e^{2t}−1)I) with weights e^{−V}.
fn is_initialize(oracle: &Oracle<'_>, t: f64, x: &[f64], n_prop: usize, n_out: usize, rng: &mut Rng) -> Vec<f64> {
    let d = x.len();
    let scale = t.exp();
    let sd = (2.0 * t).exp_m1().sqrt();
    let mut props = vec![0.0; n_prop * d];
    let mut lw = vec![0.0; n_prop];
    for (row, w) in props.chunks_exact_mut(d).zip(lw.iter_mut()) {
        for (r, v) in row.iter_mut().zip(x) {
            *r = scale * v + sd * rng::normal(rng);
        }
        let v = oracle.value(row);
        *w = if v.is_nan() { f64::NEG_INFINITY } else { -v };
    }
    let m = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = lw.iter().map(|l| if m.is_finite() { (l - m).exp() } else { 0.0 }).collect();
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(n_out * d);
    for _ in 0..n_out {
        let k = draw_index(&weights, total, rng);
        out.extend_from_slice(&props[k * d..(k + 1) * d]);
    }
    out
}

/// Tweedie average over LMC samples of the posterior π̄_{0|t}(·|x).
pub fn score_rdmc(oracle: &Oracle<'_>, t: f64, x: &[f64], cfg: &PosteriorLmc, rng: &mut Rng, out: &mut [f64]) -> Result<()> {
    if !(t > 0.0) {
        return invalid("score estimation needs t > 0");
    }
    let d = x.len();
    let var_post = (2.0 * t).exp_m1();
    let center: Buf = x.iter().map(|v| t.exp() * v).collect();
    let h = cfg.step_size.min(0.5 * var_post);
    let sd = (2.0 * h).sqrt();
    let mut samples = is_initialize(oracle, t, x, cfg.is_proposals, cfg.n_samples, rng);
    let mut g: Buf = SmallVec::from_elem(0.0, d);
    for y in samples.chunks_exact_mut(d) {
        for _ in 0..cfg.lmc_steps {
            oracle.grad(y, &mut g)?;
            for ((yi, gi), ci) in y.iter_mut().zip(&g).zip(&center) {
                *yi += -h * (gi + (*yi - ci) / var_post) + sd * rng::normal(rng);
            }
            check_divergence(y).map_err(score_error)?;
        }
    }
    finish_tweedie(&samples, x, (-t).exp(), -(-2.0 * t).exp_m1(), out);
    Ok(())
}

fn finish_tweedie(samples: &[f64], x: &[f64], decay: f64, var: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let n = samples.len() / x.len();
    for y in samples.chunks_exact(x.len()) {
        tweedie_accumulate(out, y, x, decay, var, 1.0 / n as f64);
    }
}

fn score_error(e: Error) -> Error {
    match e {
        Error::Divergence(m) => Error::Divergence(format!("posterior LMC: {m}")),
        other => other,
    }
}

/// Recursive score: at depth k the posterior of Y_s given Y_t = x, s = t(k−1)/k,
/// is sampled by LMC driven by depth-(k−1) scores at time s.
pub fn score_rsdmc(
    oracle: &Oracle<'_>,
    t: f64,
    x: &[f64],
    depth: usize,
    cfg: &PosteriorLmc,
    rng: &mut Rng,
    out: &mut [f64],
) -> Result<()> {
    if depth == 0 {
        return invalid("recursion depth must be at least 1");
    }
    if depth == 1 {
        return score_rdmc(oracle, t, x, cfg, rng, out);
    }
    if !(t > 0.0) {
        return invalid("score estimation needs t > 0");
    }
    let d = x.len();
    let k = depth as f64;
    let s = t * (k - 1.0) / k;
    let gap = t - s;
    let c = (-gap).exp();
    let var_gap = -(-2.0 * gap).exp_m1();
    let var_s = -(-2.0 * s).exp_m1();
    let decay_s = (-s).exp();

    // Gaussian bridge Y_s | Y_0 = x0, Y_t = x.
    let x0s = is_initialize(oracle, t, x, cfg.is_proposals, cfg.n_samples, rng);
    let prec = 1.0 / var_s + c * c / var_gap;
    let bridge_sd = (1.0 / prec).sqrt();
    let mut ys = vec![0.0; x0s.len()];
    for (y, x0) in ys.chunks_exact_mut(d).zip(x0s.chunks_exact(d)) {
        for ((yi, a), b) in y.iter_mut().zip(x0).zip(x) {
            *yi = (decay_s * a / var_s + c * b / var_gap) / prec + bridge_sd * rng::normal(rng);
        }
    }

    let h = cfg.step_size.min(0.5 * var_gap / (c * c));
    let sd = (2.0 * h).sqrt();
    let mut inner: Buf = SmallVec::from_elem(0.0, d);
    for y in ys.chunks_exact_mut(d) {
        for _ in 0..cfg.lmc_steps {
            score_rsdmc(oracle, s, y, depth - 1, cfg, rng, &mut inner)?;
            for ((yi, si), xi) in y.iter_mut().zip(&inner).zip(x) {
                let g = -si + c * (c * *yi - xi) / var_gap;
                *yi += -h * g + sd * rng::normal(rng);
            }
            check_divergence(y).map_err(score_error)?;
        }
    }
    finish_tweedie(&ys, x, c, var_gap, out);
    Ok(())
}

/// 50 backtracking descent steps on V from the proposal mean; the bound is the
/// final value minus 10% of the observed decrease. Not a certified bound.
fn descent_lower_bound(oracle: &Oracle<'_>, t: f64, x: &[f64]) -> Result<f64> {
    let mut y: Vec<f64> = x.iter().map(|v| t.exp() * v).collect();
    let mut g = vec![0.0; y.len()];
    let v0 = oracle.value(&y);
    let mut v = v0;
    let mut h = 1.0 / oracle.target.beta.max(1e-12);
    for _ in 0..50 {
        oracle.grad(&y, &mut g)?;
        let trial: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - h * b).collect();
        let vt = oracle.value(&trial);
        if vt <= v {
            y = trial;
            v = vt;
            h *= 2.0;
        } else {
            h *= 0.5;
        }
    }
    Ok(v - 0.1 * (v0 - v).abs())
}

/// Tweedie average over exact posterior draws obtained by rejection.
#[allow(clippy::too_many_arguments)]
pub fn score_zodmc(
    oracle: &Oracle<'_>,
    t: f64,
    x: &[f64],
    n_samples: usize,
    max_tries: u64,
    v_lower_bound: f64,
    rng: &mut Rng,
    out: &mut [f64],
) -> Result<()> {
    if !(t > 0.0) {
        return invalid("score estimation needs t > 0");
    }
    let decay = (-t).exp();
    let var = -(-2.0 * t).exp_m1();
    let mut y: Buf = SmallVec::from_elem(0.0, x.len());
    out.iter_mut().for_each(|v| *v = 0.0);
    for _ in 0..n_samples {
        rejection_sample_posterior(oracle, t, x, v_lower_bound, rng, max_tries, &mut y)?;
        tweedie_accumulate(out, &y, x, decay, var, 1.0 / n_samples as f64);
    }
    Ok(())
}

/// −E[ξ e^{−V(e^t(x−ξ))}] / (σ² E[e^{−V(e^t(x−ξ))}]), ξ ∼ N(0, σ²I), σ² = 1−e^{−2t},
/// with the exponent shifted by min V over the batch.
pub fn score_sndmc(oracle: &Oracle<'_>, t: f64, x: &[f64], n_samples: usize, rng: &mut Rng, out: &mut [f64]) -> Result<()> {
    if !(t > 0.0) {
        return invalid("score estimation needs t > 0");
    }
    let d = x.len();
    let var = -(-2.0 * t).exp_m1();
    let sd = var.sqrt();
    let scale = t.exp();
    let mut xis = vec![0.0; n_samples * d];
    let mut vs = vec![0.0; n_samples];
    let mut y: Buf = SmallVec::from_elem(0.0, d);
    for (xi, v) in xis.chunks_exact_mut(d).zip(vs.iter_mut()) {
        for ((e, yi), xv) in xi.iter_mut().zip(y.iter_mut()).zip(x) {
            *e = sd * rng::normal(rng);
            *yi = scale * (xv - *e);
        }
        *v = oracle.value(&y);
    }
    let vmin = vs.iter().cloned().fold(f64::INFINITY, f64::min);
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut den = 0.0;
    for (xi, v) in xis.chunks_exact(d).zip(&vs) {
        let w = (-(v - vmin)).exp();
        if w.is_nan() {
            continue;
        }
        den += w;
        for (o, e) in out.iter_mut().zip(xi) {
            *o += w * e;
        }
    }
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    out.iter_mut().for_each(|o| *o = -*o / (den * var));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RunSeed;
    use crate::targets::{make_gaussian, make_mog1d, OracleCounter};
    use approx::assert_relative_eq;

    #[test]
    fn exact_score_of_standard_gaussian_is_minus_x() {
        let t = make_gaussian(2, &[], 1.0).unwrap();
        let mut out = [0.0; 2];
        for time in [0.0, 0.3, 4.0] {
            score_exact_mog(&t, time, &[0.7, -1.2], &mut out).unwrap();
            assert_relative_eq!(out[0], -0.7, epsilon = 1e-12);
            assert_relative_eq!(out[1], 1.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_score_matches_finite_differences() {
        let t = make_mog1d(4.0).unwrap();
        let mix = t.mixture().unwrap().ou_marginal(2f64.ln()).unwrap();
        let h = 1e-5;
        let fd = (mix.log_density(&[1.0 + h]) - mix.log_density(&[1.0 - h])) / (2.0 * h);
        let mut out = [0.0];
        score_exact_mog(&t, 2f64.ln(), &[1.0], &mut out).unwrap();
        assert_relative_eq!(out[0], fd, epsilon = 1e-6);
    }

    #[test]
    fn rdmc_oracle_budget_is_exact() {
        let t = make_mog1d(4.0).unwrap();
        let counter = OracleCounter::new();
        let o = Oracle::new(&t, &counter);
        let cfg = PosteriorLmc { n_samples: 7, lmc_steps: 5, step_size: 0.01, is_proposals: 11 };
        let mut rng = RunSeed::new(3, 0).particle(0);
        let mut out = [0.0];
        score_rdmc(&o, 0.5, &[1.0], &cfg, &mut rng, &mut out).unwrap();
        assert_eq!(counter.grad_calls(), 35);
        assert_eq!(counter.value_calls(), 11);
    }

    #[test]
    fn sndmc_and_zodmc_use_no_gradients() {
        let t = make_mog1d(4.0).unwrap();
        let counter = OracleCounter::new();
        let o = Oracle::new(&t, &counter);
        let mut rng = RunSeed::new(3, 0).particle(0);
        let mut out = [0.0];
        score_sndmc(&o, 0.5, &[1.0], 64, &mut rng, &mut out).unwrap();
        score_zodmc(&o, 0.5, &[1.0], 4, 100_000, t.v_min.unwrap(), &mut rng, &mut out).unwrap();
        assert_eq!(counter.grad_calls(), 0);
        assert!(counter.value_calls() >= 68);
    }
}
