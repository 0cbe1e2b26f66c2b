//! Annealing curves: the geometric schedule λ(θ) = 2β(1−θ)^r and the OU path.

pub mod wasserstein;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::targets::{GaussianMixture, Oracle, Target};

pub use wasserstein::{
    action_1d, metric_derivative_sq_1d, metric_derivative_sq_quantile, ou_action_and_bound,
    w1_metric_derivative_1d, ActionReport, Curve1D, LocationFamily, MetricDerivative,
    MetricOptions, MogCurve, OuActionReport, ScaleFamily, StationaryCurve, fmt_g,
};

/// λ(θ) = 2β(1−θ)^r on the uniform grid θ_ℓ = ℓ/M, with segment lengths T_ℓ = T/M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub r: f64,
    pub beta: f64,
    pub steps: usize,
    pub total_time: f64,
}

impl AnnealingSchedule {
    pub fn new(beta: f64, r: f64, steps: usize, total_time: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return invalid("schedule beta must be positive");
        }
        if !(r >= 1.0) || !r.is_finite() {
            return invalid("schedule exponent r must be at least 1");
        }
        if steps == 0 {
            return invalid("schedule needs at least one step");
        }
        if !(total_time > 0.0) || !total_time.is_finite() {
            return invalid("total time must be positive");
        }
        Ok(Self { r, beta, steps, total_time })
    }

    #[inline]
    pub fn lambda(&self, theta: f64) -> f64 {
        2.0 * self.beta * (1.0 - theta).max(0.0).powf(self.r)
    }

    pub fn lambda_at(&self, theta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, 1]")));
        }
        Ok(self.lambda(theta))
    }

    /// dλ/dθ.
    pub fn lambda_prime(&self, theta: f64) -> f64 {
        -2.0 * self.beta * self.r * (1.0 - theta).max(0.0).powf(self.r - 1.0)
    }

    #[inline]
    pub fn theta(&self, l: usize) -> f64 {
        if l >= self.steps {
            1.0
        } else {
            l as f64 / self.steps as f64
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..=self.steps).map(|l| self.theta(l)).collect()
    }

    /// λ(θ_ℓ).
    #[inline]
    pub fn lambda_l(&self, l: usize) -> f64 {
        self.lambda(self.theta(l))
    }

    pub fn segment_time(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    /// Λ(t) = ∫₀ᵗ λ(θ_{ℓ−1} + τ/T) dτ on segment ℓ, closed form for any r.
    pub fn cumulative_rate(&self, l: usize, t: f64) -> f64 {
        let u0 = 1.0 - self.theta(l - 1);
        let rp = self.r + 1.0;
        let scale = 2.0 * self.beta * self.total_time / rp * u0.powf(rp);
        // 1 − θ_{M−1} can round below 1/M; λ vanishes there anyway.
        let frac = (t / (self.total_time * u0)).min(1.0);
        scale * -(rp * (-frac).ln_1p()).exp_m1()
    }
}

/// ∇V(x) + λx, one oracle call.
pub fn annealed_grad(oracle: &Oracle<'_>, lambda: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
    if !(lambda >= 0.0) {
        return invalid("lambda must be non-negative");
    }
    oracle.grad(x, out)?;
    for (o, v) in out.iter_mut().zip(x) {
        *o += lambda * v;
    }
    Ok(())
}

/// Closed-form OU marginal of a mixture target at time t.
pub fn ou_marginal_mog(target: &Target, t: f64) -> Result<GaussianMixture> {
    target.require_mixture()?.ou_marginal(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gl_checked;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_examples() {
        let s = AnnealingSchedule::new(1.0, 1.0, 10, 1.0).unwrap();
        assert_eq!(s.lambda_at(0.0).unwrap(), 2.0);
        assert_eq!(s.lambda_at(1.0).unwrap(), 0.0);
        assert!(s.lambda_at(1.5).is_err());
        let s = AnnealingSchedule::new(50.0, 2.0, 10, 1.0).unwrap();
        assert_relative_eq!(s.lambda_at(0.5).unwrap(), 25.0, epsilon = 1e-12);
    }

    #[test]
    fn r1_cumulative_rate_matches_antiderivative() {
        let s = AnnealingSchedule::new(3.0, 1.0, 40, 2.0).unwrap();
        let tl = s.segment_time();
        for l in [1, 17, 40] {
            let (a, b) = (s.theta(l - 1), s.theta(l));
            for t in [0.3 * tl, tl] {
                let closed = 2.0 * s.beta * (1.0 - a) * t - s.beta * (b - a) * t * t / tl;
                assert_relative_eq!(s.cumulative_rate(l, t), closed, epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cumulative_rate_matches_quadrature_for_fractional_r() {
        let s = AnnealingSchedule::new(5.0, 2.5, 8, 3.0).unwrap();
        for l in 1..=8 {
            let tl = s.segment_time();
            let a = s.theta(l - 1);
            let q = gl_checked(|tau| s.lambda(a + tau / s.total_time), 0.0, tl, 1e-12).unwrap();
            assert_relative_eq!(s.cumulative_rate(l, tl), q, epsilon = 1e-12, max_relative = 1e-10);
        }
    }

    #[test]
    fn last_segment_is_finite_for_every_grid_size() {
        for m in [3, 7, 10, 49, 2000, 15_000, 60_000] {
            let s = AnnealingSchedule::new(50.0, 1.0, m, 0.01 * m as f64).unwrap();
            let tl = s.segment_time();
            for t in [0.0, 0.5 * tl, tl, tl * (1.0 + 1e-15)] {
                assert!(s.cumulative_rate(m, t).is_finite(), "M = {m}, t = {t}");
            }
        }
    }

    #[test]
    fn ou_marginal_examples() {
        let t = crate::targets::make_mog1d(4.0).unwrap();
        let m = ou_marginal_mog(&t, 2f64.ln()).unwrap();
        assert_relative_eq!(m.means()[0][0], 0.0);
        assert_relative_eq!(m.means()[1][0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(m.covs()[1][0], 1.0, epsilon = 1e-14);
        let far = ou_marginal_mog(&t, 40.0).unwrap();
        assert!(far.means()[1][0].abs() < 1e-15);
        let same = ou_marginal_mog(&t, 0.0).unwrap();
        assert_eq!(same.means(), t.mixture().unwrap().means());
        assert!(ou_marginal_mog(&crate::targets::make_mueller_brown(), 1.0).is_err());
    }
}
