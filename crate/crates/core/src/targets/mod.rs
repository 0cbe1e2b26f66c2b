//! Target distributions e^{-V} with hand-coded gradients.

mod mixture;
mod mueller;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use mixture::{log_sum_exp, GaussianMixture};
pub use mueller::{global_minimum as mueller_global_minimum, sampled_smoothness as mueller_smoothness, MuellerBrown, MUELLER_Z, SUPPORT as MUELLER_SUPPORT};

use crate::error::{invalid, Error, Result};
use crate::rng::Rng;

pub trait Potential: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64], out: &mut [f64]);

    fn value_grad(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.grad(x, out);
        self.value(x)
    }
}

/// V(x) = ‖x − μ‖² / (2c).
#[derive(Debug, Clone)]
pub struct IsoGaussian {
    mean: Vec<f64>,
    scale: f64,
}

impl Potential for IsoGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * self.scale)
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(x).zip(&self.mean) {
            *o = (a - b) / self.scale;
        }
    }
}

/// V = −log p with p a normalized Gaussian mixture.
#[derive(Debug, Clone)]
pub struct MixturePotential(pub Arc<GaussianMixture>);

impl Potential for MixturePotential {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        -self.0.log_density(x)
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        self.0.grad_log_density(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }

    fn value_grad(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let lp = self.0.grad_log_density(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
        -lp
    }
}

/// x ↦ V(x + shift).
#[derive(Debug, Clone)]
pub struct Shifted {
    inner: Arc<dyn Potential>,
    shift: Vec<f64>,
}

impl Shifted {
    fn moved(&self, x: &[f64]) -> smallvec::SmallVec<[f64; 8]> {
        x.iter().zip(&self.shift).map(|(a, b)| a + b).collect()
    }
}

impl Potential for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.moved(x))
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        self.inner.grad(&self.moved(x), out)
    }
}

/// A target density e^{-V}.
///
/// When `mixture` is present, e^{-V(x)} = e^{known_log_z}·p(x) with p the mixture density.
#[derive(Debug, Clone)]
pub struct Target {
    pub name: String,
    potential: Arc<dyn Potential>,
    pub beta: f64,
    pub known_log_z: Option<f64>,
    pub second_moment: Option<f64>,
    /// A lower bound on inf V, when one is known.
    pub v_min: Option<f64>,
    mixture: Option<Arc<GaussianMixture>>,
}

impl Target {
    pub fn new(name: impl Into<String>, potential: Arc<dyn Potential>, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return invalid("beta must be finite and non-negative");
        }
        Ok(Self {
            name: name.into(),
            potential,
            beta,
            known_log_z: None,
            second_moment: None,
            v_min: None,
            mixture: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.potential.dim()
    }

    pub fn potential(&self) -> &Arc<dyn Potential> {
        &self.potential
    }

    /// Uncounted evaluation of V.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.potential.value(x)
    }

    /// Uncounted evaluation of ∇V.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        self.potential.grad(x, out)
    }

    pub fn mixture(&self) -> Option<&Arc<GaussianMixture>> {
        self.mixture.as_ref()
    }

    pub fn require_mixture(&self) -> Result<&Arc<GaussianMixture>> {
        self.mixture
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("{} is not a Gaussian mixture", self.name)))
    }

    pub fn has_exact_sampler(&self) -> bool {
        self.mixture.is_some()
    }

    pub fn sample_exact(&self, rng: &mut Rng, n: usize, meta: SampleMeta) -> Result<SampleSet> {
        let mix = self.require_mixture()?;
        SampleSet::new(self.dim(), mix.sample_n(rng, n), meta)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return invalid("beta must be positive and finite");
        }
        self.beta = beta;
        Ok(self)
    }

    /// Translate so that a stationary point found by gradient descent sits at the origin.
    pub fn recentered(&self, steps: usize) -> Result<Self> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        let mut g = vec![0.0; d];
        let mut h = 1.0 / self.beta.max(1e-12);
        let mut v = self.value(&x);
        for _ in 0..steps {
            self.grad(&x, &mut g);
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - h * b).collect();
            let vt = self.value(&trial);
            if vt <= v {
                x = trial;
                v = vt;
                h *= 1.2;
            } else {
                h *= 0.5;
            }
        }
        let mut out = self.clone();
        out.potential = Arc::new(Shifted { inner: self.potential.clone(), shift: x.clone() });
        if let Some(mix) = &self.mixture {
            let means = mix
                .means()
                .iter()
                .map(|m| m.iter().zip(&x).map(|(a, b)| a - b).collect())
                .collect();
            let shifted = GaussianMixture::new(mix.weights().to_vec(), means, mix.covs().to_vec())?;
            out.second_moment = Some(shifted.second_moment());
            out.mixture = Some(Arc::new(shifted));
        } else {
            out.second_moment = None;
        }
        Ok(out)
    }
}

pub fn make_gaussian(dim: usize, mean: &[f64], cov_scale: f64) -> Result<Target> {
    if dim == 0 {
        return invalid("dimension must be at least 1");
    }
    if !(cov_scale > 0.0) || !cov_scale.is_finite() {
        return invalid(format!("cov_scale must be positive, got {cov_scale}"));
    }
    let mean = match mean.len() {
        0 => vec![0.0; dim],
        n if n == dim => mean.to_vec(),
        n => return invalid(format!("mean has length {n}, expected {dim}")),
    };
    let mix = GaussianMixture::isotropic(vec![1.0], vec![mean.clone()], &[cov_scale])?;
    let d = dim as f64;
    let mut t = Target::new("gaussian", Arc::new(IsoGaussian { mean: mean.clone(), scale: cov_scale }), 1.0 / cov_scale)?;
    t.known_log_z = Some(0.5 * d * (2.0 * std::f64::consts::PI * cov_scale).ln());
    t.second_moment = Some(d * cov_scale + mean.iter().map(|v| v * v).sum::<f64>());
    t.v_min = Some(0.0);
    t.mixture = Some(Arc::new(mix));
    Ok(t)
}

/// Normalized mixture target with the conservative mixture smoothness bound.
pub fn make_gaussian_mixture(weights: Vec<f64>, means: Vec<Vec<f64>>, covs: Vec<Vec<f64>>) -> Result<Target> {
    let mix = Arc::new(GaussianMixture::new(weights, means, covs)?);
    let mut t = Target::new("gaussian_mixture", Arc::new(MixturePotential(mix.clone())), mix.beta_bound())?;
    t.known_log_z = Some(0.0);
    t.second_moment = Some(mix.second_moment());
    t.v_min = Some(mix.neg_log_density_lower_bound());
    t.mixture = Some(mix);
    Ok(t)
}

/// The four-component planar mixture used in the benchmarks.
pub fn make_paper_gmm() -> Target {
    let mut t = make_gaussian_mixture(
        vec![0.1, 0.2, 0.3, 0.4],
        vec![vec![0.0, 0.0], vec![0.0, 11.0], vec![9.0, 9.0], vec![11.0, 0.0]],
        vec![
            vec![1.0, 0.5, 0.5, 1.0],
            vec![0.3, -0.2, -0.2, 0.3],
            vec![1.0, 0.3, 0.3, 1.0],
            vec![1.2, -1.0, -1.0, 1.2],
        ],
    )
    .expect("built-in mixture is valid");
    t.name = "gmm2d_paper".into();
    t
}

/// ½N(0,1) + ½N(m,1) with β = max(m²/2, 1).
pub fn make_mog1d(m: f64) -> Result<Target> {
    if !m.is_finite() {
        return invalid("mode separation must be finite");
    }
    let mut t = make_gaussian_mixture(vec![0.5, 0.5], vec![vec![0.0], vec![m]], vec![vec![1.0], vec![1.0]])?;
    t.name = format!("mog1d({m})");
    t.beta = (0.5 * m * m).max(1.0);
    Ok(t)
}

/// Default smoothness of the Müller-Brown target: sampled Hessian norm.
pub fn mueller_default_beta() -> f64 {
    static BETA: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *BETA.get_or_init(mueller::sampled_smoothness)
}

fn mueller_v_min() -> f64 {
    static VMIN: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *VMIN.get_or_init(|| mueller::global_minimum().0 - 1e-6)
}

pub fn make_mueller_brown() -> Target {
    let mut t = Target::new("mueller_brown", Arc::new(MuellerBrown), mueller_default_beta())
        .expect("positive smoothness");
    t.known_log_z = Some(MUELLER_Z.ln());
    t.v_min = Some(mueller_v_min());
    t
}

/// Separate counts of ∇V and V evaluations.
#[derive(Debug, Default)]
pub struct OracleCounter {
    grad: AtomicU64,
    value: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    pub grad: u64,
    pub value: u64,
}

impl OracleCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn grad_calls(&self) -> u64 {
        self.grad.load(Ordering::Relaxed)
    }

    pub fn value_calls(&self) -> u64 {
        self.value.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> OracleCounts {
        OracleCounts { grad: self.grad_calls(), value: self.value_calls() }
    }

    #[inline]
    pub fn add_grad(&self, n: u64) {
        self.grad.fetch_add(n, Ordering::Relaxed);
    }

    #[inline]
    pub fn add_value(&self, n: u64) {
        self.value.fetch_add(n, Ordering::Relaxed);
    }
}

/// A target paired with a counter; every V or ∇V evaluation goes through here.
#[derive(Debug, Clone, Copy)]
pub struct Oracle<'a> {
    pub target: &'a Target,
    pub counter: &'a OracleCounter,
}

impl<'a> Oracle<'a> {
    pub fn new(target: &'a Target, counter: &'a OracleCounter) -> Self {
        Self { target, counter }
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    #[inline]
    pub fn grad(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("gradient requested at a non-finite point".into()));
        }
        self.counter.add_grad(1);
        self.target.potential.grad(x, out);
        Ok(())
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        self.counter.add_value(1);
        self.target.potential.value(x)
    }
}

pub fn grad_counted(target: &Target, counter: &OracleCounter, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != target.dim() {
        return invalid(format!("point has length {}, expected {}", x.len(), target.dim()));
    }
    let mut g = vec![0.0; x.len()];
    Oracle::new(target, counter).grad(x, &mut g)?;
    Ok(g)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub estimator: String,
    pub round: u64,
    pub seed: u64,
}

/// An n×d batch of points, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn new(dim: usize, points: Vec<f64>, meta: SampleMeta) -> Result<Self> {
        if dim == 0 || points.is_empty() || points.len() % dim != 0 {
            return invalid("sample set needs n ≥ 1 rows of length d ≥ 1");
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sample set contains non-finite points".into()));
        }
        Ok(Self { dim, points, meta })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, b) in m.iter_mut().zip(r) {
                *a += b;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Row-major sample covariance (divisor n − 1).
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let m = self.mean();
        let mut c = vec![0.0; d * d];
        for r in self.rows() {
            for i in 0..d {
                for j in 0..d {
                    c[i * d + j] += (r[i] - m[i]) * (r[j] - m[j]);
                }
            }
        }
        let n = (self.len().max(2) - 1) as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }
}
