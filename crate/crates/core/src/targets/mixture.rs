//! Gaussian mixtures with dense covariances.

use nalgebra::{DMatrix, SymmetricEigen};
use smallvec::SmallVec;

use crate::error::{invalid, Result};
use crate::rng::{self, Rng};

type Buf = SmallVec<[f64; 8]>;
type Bufs = SmallVec<[Buf; 4]>;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone)]
pub struct GaussianMixture {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covs: Vec<Vec<f64>>,
    precs: Vec<Vec<f64>>,
    chols: Vec<Vec<f64>>,
    log_norms: Vec<f64>,
    max_prec_eig: f64,
}

impl GaussianMixture {
    /// `covs` are row-major d×d matrices.
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, covs: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || covs.len() != k {
            return invalid("mixture needs matching non-empty weights, means and covs");
        }
        let dim = means[0].len();
        if dim == 0 {
            return invalid("mixture dimension must be positive");
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return invalid("mixture weights must be positive");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("mixture weights sum to {total}, not 1"));
        }
        let mut precs = Vec::with_capacity(k);
        let mut chols = Vec::with_capacity(k);
        let mut log_norms = Vec::with_capacity(k);
        let mut max_prec_eig: f64 = 0.0;
        for i in 0..k {
            if means[i].len() != dim || covs[i].len() != dim * dim {
                return invalid(format!("component {i} has wrong shape"));
            }
            if means[i].iter().chain(&covs[i]).any(|v| !v.is_finite()) {
                return invalid(format!("component {i} has non-finite entries"));
            }
            let m = DMatrix::from_row_slice(dim, dim, &covs[i]);
            if (&m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
                return invalid(format!("covariance {i} is not symmetric"));
            }
            let eig = SymmetricEigen::new(m.clone());
            let min_eig = eig.eigenvalues.min();
            if !(min_eig > 0.0) {
                return invalid(format!("covariance {i} is not positive definite"));
            }
            max_prec_eig = max_prec_eig.max(1.0 / min_eig);
            let chol = m
                .clone()
                .cholesky()
                .ok_or_else(|| crate::Error::InvalidParameter(format!("covariance {i} is not positive definite")))?;
            let l = chol.l();
            let logdet: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
            let inv = chol.inverse();
            precs.push(row_major(&inv));
            chols.push(row_major(&l));
            log_norms.push(weights[i].ln() - 0.5 * (dim as f64 * LN_2PI + logdet));
        }
        Ok(Self { dim, weights, means, covs, precs, chols, log_norms, max_prec_eig })
    }

    /// Mixture of isotropic components N(μ_i, s_i I).
    pub fn isotropic(weights: Vec<f64>, means: Vec<Vec<f64>>, scales: &[f64]) -> Result<Self> {
        let dim = means.first().map_or(0, Vec::len);
        let covs = scales
            .iter()
            .map(|s| {
                let mut c = vec![0.0; dim * dim];
                for j in 0..dim {
                    c[j * dim + j] = *s;
                }
                c
            })
            .collect();
        Self::new(weights, means, covs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn covs(&self) -> &[Vec<f64>] {
        &self.covs
    }

    fn component_log_densities(&self, x: &[f64], out: &mut Buf, diffs: Option<&mut Bufs>) {
        let d = self.dim;
        out.clear();
        let mut diffs = diffs;
        for i in 0..self.weights.len() {
            let diff: Buf = x.iter().zip(&self.means[i]).map(|(a, b)| a - b).collect();
            let p = &self.precs[i];
            let mut pd: Buf = SmallVec::from_elem(0.0, d);
            let mut quad = 0.0;
            for r in 0..d {
                let row = &p[r * d..(r + 1) * d];
                let v: f64 = row.iter().zip(&diff).map(|(a, b)| a * b).sum();
                pd[r] = v;
                quad += diff[r] * v;
            }
            out.push(self.log_norms[i] - 0.5 * quad);
            if let Some(ds) = diffs.as_deref_mut() {
                ds.push(pd);
            }
        }
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let mut lds = Buf::new();
        self.component_log_densities(x, &mut lds, None);
        log_sum_exp(&lds)
    }

    /// Writes ∇ log p(x) into `out` and returns log p(x).
    pub fn grad_log_density(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let mut lds = Buf::new();
        let mut pds = Bufs::new();
        self.component_log_densities(x, &mut lds, Some(&mut pds));
        let lse = log_sum_exp(&lds);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (ld, pd) in lds.iter().zip(&pds) {
            let r = (ld - lse).exp();
            for (o, p) in out.iter_mut().zip(pd) {
                *o -= r * p;
            }
        }
        lse
    }

    pub fn sample(&self, rng: &mut Rng, out: &mut [f64]) {
        let u = rng::uniform(rng);
        let mut acc = 0.0;
        let mut k = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                k = i;
                break;
            }
        }
        let d = self.dim;
        let mut z: Buf = SmallVec::from_elem(0.0, d);
        rng::fill_normal(rng, &mut z);
        let l = &self.chols[k];
        for r in 0..d {
            out[r] = self.means[k][r] + (0..=r).map(|c| l[r * d + c] * z[c]).sum::<f64>();
        }
    }

    pub fn sample_n(&self, rng: &mut Rng, n: usize) -> Vec<f64> {
        let mut pts = vec![0.0; n * self.dim];
        for row in pts.chunks_exact_mut(self.dim) {
            self.sample(rng, row);
        }
        pts
    }

    /// Law of e^{-t}Y₀ + √(1−e^{-2t})ξ for Y₀ drawn from this mixture.
    pub fn ou_marginal(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return invalid("OU time must be non-negative");
        }
        let a = (-t).exp();
        let b = -(-2.0 * t).exp_m1();
        let d = self.dim;
        let means = self.means.iter().map(|m| m.iter().map(|v| a * v).collect()).collect();
        let covs = self
            .covs
            .iter()
            .map(|c| {
                let mut c: Vec<f64> = c.iter().map(|v| a * a * v).collect();
                for j in 0..d {
                    c[j * d + j] += b;
                }
                c
            })
            .collect();
        Self::new(self.weights.clone(), means, covs)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (w, mu) in self.weights.iter().zip(&self.means) {
            for (a, b) in m.iter_mut().zip(mu) {
                *a += w * b;
            }
        }
        m
    }

    /// Row-major covariance of the mixture.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let mean = self.mean();
        let mut c = vec![0.0; d * d];
        for ((w, mu), cov) in self.weights.iter().zip(&self.means).zip(&self.covs) {
            for r in 0..d {
                for s in 0..d {
                    c[r * d + s] += w * (cov[r * d + s] + (mu[r] - mean[r]) * (mu[s] - mean[s]));
                }
            }
        }
        c
    }

    /// E‖X‖².
    pub fn second_moment(&self) -> f64 {
        let d = self.dim;
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.covs)
            .map(|((w, mu), cov)| {
                w * ((0..d).map(|j| cov[j * d + j]).sum::<f64>() + mu.iter().map(|v| v * v).sum::<f64>())
            })
            .sum()
    }

    /// max λ_max(Σ_i⁻¹) + (max separation)²·max λ_max(Σ_i⁻¹)².
    pub fn beta_bound(&self) -> f64 {
        let mut sep2: f64 = 0.0;
        for (i, a) in self.means.iter().enumerate() {
            for b in &self.means[i + 1..] {
                sep2 = sep2.max(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum());
            }
        }
        self.max_prec_eig + sep2 * self.max_prec_eig * self.max_prec_eig
    }

    /// Lower bound on −log p: p(x) ≤ Σ_i w_i·(peak density of component i).
    pub fn neg_log_density_lower_bound(&self) -> f64 {
        -log_sum_exp(&self.log_norms)
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
