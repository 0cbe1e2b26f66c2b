//! One-dimensional metric derivatives and actions of curves of measures.
//!
//! In 1-D the W₂ speed of s ↦ μ_s is |μ̇|² = ∫ (∂_s F_s)² / f_s dx and the
//! W₁ speed is ∫ |∂_s F_s| dx.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};
use crate::quadrature::trapezoid;
use crate::rng::{self, Rng};
use crate::targets::{GaussianMixture, Target};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

#[inline]
fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

#[inline]
fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

#[inline]
fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub trait Curve1D: Sync {
    fn pdf(&self, s: f64, x: f64) -> f64;
    fn cdf(&self, s: f64, x: f64) -> f64;

    fn sf(&self, s: f64, x: f64) -> f64 {
        1.0 - self.cdf(s, x)
    }

    /// Mean and standard deviation of μ_s, used to place the x window.
    fn moments(&self, s: f64) -> (f64, f64);

    fn quantile(&self, s: f64, y: f64) -> f64 {
        let (m, sd) = self.moments(s);
        let (mut lo, mut hi) = (m - 40.0 * sd, m + 40.0 * sd);
        let upper = y > 0.5;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let below = if upper { self.sf(s, mid) > 1.0 - y } else { self.cdf(s, mid) < y };
            if below {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// N(s, 1).
#[derive(Debug, Clone, Copy)]
pub struct LocationFamily;

impl Curve1D for LocationFamily {
    fn pdf(&self, s: f64, x: f64) -> f64 {
        norm_pdf(x - s)
    }
    fn cdf(&self, s: f64, x: f64) -> f64 {
        norm_cdf(x - s)
    }
    fn sf(&self, s: f64, x: f64) -> f64 {
        norm_sf(x - s)
    }
    fn moments(&self, s: f64) -> (f64, f64) {
        (s, 1.0)
    }
}

/// N(0, s²) for s > 0.
#[derive(Debug, Clone, Copy)]
pub struct ScaleFamily;

impl Curve1D for ScaleFamily {
    fn pdf(&self, s: f64, x: f64) -> f64 {
        norm_pdf(x / s) / s
    }
    fn cdf(&self, s: f64, x: f64) -> f64 {
        norm_cdf(x / s)
    }
    fn sf(&self, s: f64, x: f64) -> f64 {
        norm_sf(x / s)
    }
    fn moments(&self, s: f64) -> (f64, f64) {
        (0.0, s)
    }
}

/// N(0, 1) for every s.
#[derive(Debug, Clone, Copy)]
pub struct StationaryCurve;

impl Curve1D for StationaryCurve {
    fn pdf(&self, _: f64, x: f64) -> f64 {
        norm_pdf(x)
    }
    fn cdf(&self, _: f64, x: f64) -> f64 {
        norm_cdf(x)
    }
    fn sf(&self, _: f64, x: f64) -> f64 {
        norm_sf(x)
    }
    fn moments(&self, _: f64) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Geometric annealing of ½N(0,1)+½N(m,1) toward N(0,·), parameterized by
/// s = 1/(1+λ): μ_s = w(s)N(0,s) + (1−w(s))N(sm,s) with w(s) = 1/(1+e^{−(1−s)m²/2}).
#[derive(Debug, Clone, Copy)]
pub struct MogCurve {
    pub m: f64,
}

impl MogCurve {
    pub fn weight(&self, s: f64) -> f64 {
        1.0 / (1.0 + (-(1.0 - s) * self.m * self.m / 2.0).exp())
    }

    /// s(θ) = 1/(1 + λ(θ)) for λ(θ) = m²(1−θ)^r, i.e. β = m²/2.
    pub fn s_of_theta(&self, theta: f64, r: f64) -> f64 {
        1.0 / (1.0 + self.m * self.m * (1.0 - theta).powf(r))
    }

    pub fn theta_of_s(&self, s: f64, r: f64) -> f64 {
        1.0 - ((1.0 / s - 1.0) / (self.m * self.m)).powf(1.0 / r)
    }

    /// ds/dθ at the θ matching s.
    pub fn ds_dtheta(&self, s: f64, r: f64) -> f64 {
        let u = 1.0 - self.theta_of_s(s, r);
        let m2 = self.m * self.m;
        s * s * m2 * r * u.powf(r - 1.0)
    }
}

impl Curve1D for MogCurve {
    fn pdf(&self, s: f64, x: f64) -> f64 {
        let w = self.weight(s);
        let sd = s.sqrt();
        (w * norm_pdf(x / sd) + (1.0 - w) * norm_pdf((x - s * self.m) / sd)) / sd
    }
    fn cdf(&self, s: f64, x: f64) -> f64 {
        let w = self.weight(s);
        let sd = s.sqrt();
        w * norm_cdf(x / sd) + (1.0 - w) * norm_cdf((x - s * self.m) / sd)
    }
    fn sf(&self, s: f64, x: f64) -> f64 {
        let w = self.weight(s);
        let sd = s.sqrt();
        w * norm_sf(x / sd) + (1.0 - w) * norm_sf((x - s * self.m) / sd)
    }
    fn moments(&self, s: f64) -> (f64, f64) {
        let w = self.weight(s);
        let mu2 = s * self.m;
        let mean = (1.0 - w) * mu2;
        let var = s + w * (1.0 - w) * mu2 * mu2;
        (mean, var.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricOptions {
    /// Points in the x grid.
    pub n_x: usize,
    /// Half-width of the x window in standard deviations.
    pub width_sd: f64,
    /// Central-difference step in s.
    pub h_s: f64,
    pub density_floor: f64,
}

impl MetricOptions {
    pub fn for_range(s_lo: f64, s_hi: f64) -> Self {
        Self { n_x: 20_001, width_sd: 10.0, h_s: 1e-4 * (s_hi - s_lo), density_floor: 1e-300 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricDerivative {
    pub value: f64,
    /// Same quadrature on every other grid point.
    pub coarse_value: f64,
    pub warning: Option<String>,
}

fn ds_cdf(curve: &dyn Curve1D, s: f64, h: f64, x: f64) -> f64 {
    if curve.cdf(s, x) <= 0.5 {
        (curve.cdf(s + h, x) - curve.cdf(s - h, x)) / (2.0 * h)
    } else {
        -(curve.sf(s + h, x) - curve.sf(s - h, x)) / (2.0 * h)
    }
}

fn grid_quadrature(
    curve: &dyn Curve1D,
    s: f64,
    opts: &MetricOptions,
    integrand: impl Fn(f64, f64) -> Option<f64>,
) -> Result<MetricDerivative> {
    if opts.n_x < 5 {
        return invalid("x grid needs at least 5 points");
    }
    if !(opts.h_s > 0.0) {
        return invalid("s step must be positive");
    }
    let (mean, sd) = curve.moments(s);
    let (lo, hi) = (mean - opts.width_sd * sd, mean + opts.width_sd * sd);
    let n = opts.n_x | 1;
    let dx = (hi - lo) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let x = lo + dx * i as f64;
            let f = curve.pdf(s, x);
            if f < opts.density_floor {
                0.0
            } else {
                integrand(x, f).unwrap_or(0.0)
            }
        })
        .collect();
    let value = trapezoid(&vals, dx);
    let coarse: Vec<f64> = vals.iter().step_by(2).copied().collect();
    let coarse_value = trapezoid(&coarse, 2.0 * dx);
    let warning = ((value - coarse_value).abs() > 0.1 * value.abs().max(1e-300)).then(|| {
        format!("grid too coarse at s = {s}: {value} vs {coarse_value} on the half grid")
    });
    Ok(MetricDerivative { value, coarse_value, warning })
}

/// |μ̇|²_s = ∫ (∂_s F_s)² / f_s dx.
pub fn metric_derivative_sq_1d(curve: &dyn Curve1D, s: f64, opts: &MetricOptions) -> Result<MetricDerivative> {
    let h = opts.h_s;
    grid_quadrature(curve, s, opts, |x, f| {
        let d = ds_cdf(curve, s, h, x);
        Some(d * d / f)
    })
}

/// W₁ speed ∫ |∂_s F_s| dx.
pub fn w1_metric_derivative_1d(curve: &dyn Curve1D, s: f64, opts: &MetricOptions) -> Result<MetricDerivative> {
    let h = opts.h_s;
    grid_quadrature(curve, s, opts, |x, _| Some(ds_cdf(curve, s, h, x).abs()))
}

/// |μ̇|²_s = ∫₀¹ (∂_s F_s⁻¹(y))² dy by the midpoint rule on a uniform y grid.
pub fn metric_derivative_sq_quantile(curve: &dyn Curve1D, s: f64, h: f64, n_y: usize) -> f64 {
    (0..n_y)
        .into_par_iter()
        .map(|i| {
            let y = (i as f64 + 0.5) / n_y as f64;
            let d = (curve.quantile(s + h, y) - curve.quantile(s - h, y)) / (2.0 * h);
            d * d
        })
        .sum::<f64>()
        / n_y as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionReport {
    pub s: Vec<f64>,
    pub w2_deriv_sq: Vec<f64>,
    pub w1_deriv: Vec<f64>,
    pub action: f64,
    pub warnings: Vec<String>,
}

/// Trapezoid action ∫ |μ̇|²_s ds over `n_s` uniform points of [s_lo, s_hi].
pub fn action_1d(curve: &dyn Curve1D, s_lo: f64, s_hi: f64, n_s: usize, opts: &MetricOptions) -> Result<ActionReport> {
    if !(s_lo < s_hi) {
        return invalid("action needs s_lo < s_hi");
    }
    if n_s < 2 {
        return invalid("action needs at least two s points");
    }
    let ds = (s_hi - s_lo) / (n_s - 1) as f64;
    let s: Vec<f64> = (0..n_s).map(|i| s_lo + ds * i as f64).collect();
    let rows: Vec<(MetricDerivative, MetricDerivative)> = s
        .par_iter()
        .map(|&si| Ok((metric_derivative_sq_1d(curve, si, opts)?, w1_metric_derivative_1d(curve, si, opts)?)))
        .collect::<Result<_>>()?;
    let w2_deriv_sq: Vec<f64> = rows.iter().map(|r| r.0.value).collect();
    let w1_deriv = rows.iter().map(|r| r.1.value).collect();
    let warnings = rows
        .iter()
        .flat_map(|r| r.0.warning.iter().chain(r.1.warning.iter()).cloned())
        .collect();
    Ok(ActionReport { action: trapezoid(&w2_deriv_sq, ds), s, w2_deriv_sq, w1_deriv, warnings })
}

impl ActionReport {
    /// Action of the same curve in θ for λ(θ) = m²(1−θ)^r: ∫ |μ̇|²_s (ds/dθ) ds.
    pub fn theta_action(&self, curve: &MogCurve, r: f64) -> f64 {
        let ds = self.s[1] - self.s[0];
        let vals: Vec<f64> = self
            .s
            .iter()
            .zip(&self.w2_deriv_sq)
            .map(|(s, v)| v * curve.ds_dtheta(*s, r))
            .collect();
        trapezoid(&vals, ds)
    }

    pub fn to_csv(&self, theta_action: f64) -> String {
        let mut out = String::from("s,w2_deriv_sq,w1_deriv\n");
        for ((s, a), b) in self.s.iter().zip(&self.w2_deriv_sq).zip(&self.w1_deriv) {
            out.push_str(&format!("{},{},{}\n", fmt_g(*s), fmt_g(*a), fmt_g(*b)));
        }
        out.push_str(&format!("action,{},{}\n", fmt_g(self.action), fmt_g(theta_action)));
        out
    }
}

/// `%g`-style formatting with 6 significant digits.
pub fn fmt_g(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mant, e) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = e.parse().unwrap_or(0);
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuActionReport {
    pub action: f64,
    pub bound: f64,
    pub fisher_at_t_max: f64,
    pub warning: Option<String>,
}

/// Fisher divergence E_p ‖∇log p(x) + x‖² of p from N(0, I).
fn fisher_vs_standard(mix: &GaussianMixture, rng: &mut Rng, mc_samples: usize) -> f64 {
    let d = mix.dim();
    let mut g = vec![0.0; d];
    let integrand = |x: &[f64], g: &mut [f64]| {
        mix.grad_log_density(x, g);
        g.iter().zip(x).map(|(a, b)| (a + b) * (a + b)).sum::<f64>()
    };
    if d <= 2 {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut min_sd = f64::INFINITY;
        for (mu, cov) in mix.means().iter().zip(mix.covs()) {
            for j in 0..d {
                let sd = cov[j * d + j].sqrt();
                lo[j] = lo[j].min(mu[j] - 9.0 * sd);
                hi[j] = hi[j].max(mu[j] + 9.0 * sd);
                min_sd = min_sd.min(sd);
            }
        }
        let n: Vec<usize> = (0..d)
            .map(|j| (((hi[j] - lo[j]) / (0.2 * min_sd)).ceil() as usize + 1).clamp(101, 1601))
            .collect();
        let h: Vec<f64> = (0..d).map(|j| (hi[j] - lo[j]) / (n[j] - 1) as f64).collect();
        let mut x = vec![0.0; d];
        let mut total = 0.0;
        if d == 1 {
            for i in 0..n[0] {
                x[0] = lo[0] + h[0] * i as f64;
                total += mix.log_density(&x).exp() * integrand(&x, &mut g);
            }
            return total * h[0];
        }
        for i in 0..n[0] {
            x[0] = lo[0] + h[0] * i as f64;
            for k in 0..n[1] {
                x[1] = lo[1] + h[1] * k as f64;
                let p = mix.log_density(&x).exp();
                if p > 0.0 {
                    total += p * integrand(&x, &mut g);
                }
            }
        }
        total * h[0] * h[1]
    } else {
        let mut x = vec![0.0; d];
        let mut total = 0.0;
        for _ in 0..mc_samples {
            mix.sample(rng, &mut x);
            total += integrand(&x, &mut g);
        }
        total / mc_samples as f64
    }
}

/// ∫₀^{t_max} Fisher(π̄_t ‖ φ) dt with exact mixture scores, against dβ + m².
///
/// The t grid is quadratic in the index so the fast initial transient is resolved.
pub fn ou_action_and_bound(target: &Target, t_max: f64, n_t: usize, rng: &mut Rng) -> Result<OuActionReport> {
    let mix = target.require_mixture()?;
    if !(t_max > 0.0) || n_t < 2 {
        return invalid("OU action needs t_max > 0 and at least two time points");
    }
    let ts: Vec<f64> = (0..n_t).map(|i| t_max * (i as f64 / (n_t - 1) as f64).powi(2)).collect();
    let seeds: Vec<u64> = (0..n_t).map(|_| rand::Rng::random::<u64>(rng)).collect();
    let fisher: Vec<f64> = ts
        .par_iter()
        .zip(seeds)
        .map(|(&t, seed)| {
            let mut r = rng::stream(seed, 0, 0, rng::Domain::Auxiliary);
            Ok(fisher_vs_standard(&mix.ou_marginal(t)?, &mut r, 20_000))
        })
        .collect::<Result<_>>()?;
    let action = ts
        .windows(2)
        .zip(fisher.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum();
    let m2 = target.second_moment.unwrap_or_else(|| mix.second_moment());
    let bound = target.dim() as f64 * target.beta + m2;
    let last = *fisher.last().unwrap_or(&0.0);
    let warning = (last >= 1e-6).then(|| format!("Fisher divergence at t_max is {last}; increase t_max"));
    Ok(OuActionReport { action, bound, fisher_at_t_max: last, warning })
}
