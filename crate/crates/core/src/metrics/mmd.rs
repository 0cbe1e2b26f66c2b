use std::cmp::Ordering;

use crate::error::{invalid, Result};
use crate::targets::SampleSet;

/// Bandwidths σ = 2^{e/2} for e ∈ {−4, −2, …, 14}.
pub fn default_sigmas() -> Vec<f64> {
    (-2..=7).map(|k| 2f64.powi(k)).collect()
}

fn kernel_sum(a: &SampleSet, b: &SampleSet, inv2s2: &[f64]) -> f64 {
    let mut total = 0.0;
    for x in a.rows() {
        for y in b.rows() {
            let d2: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
            total += inv2s2.iter().map(|c| (-d2 * c).exp()).sum::<f64>();
        }
    }
    total / inv2s2.len() as f64
}

fn canonical_order(a: &SampleSet, b: &SampleSet) -> Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| {
            a.points
                .iter()
                .zip(&b.points)
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Biased (V-statistic) MMD with the averaged multiscale RBF kernel,
/// square-rooted after clamping at zero. Symmetric in its arguments bit for bit.
pub fn mmd(x: &SampleSet, y: &SampleSet, sigmas: &[f64]) -> Result<f64> {
    if sigmas.is_empty() || sigmas.iter().any(|s| *s == 0.0 || !s.is_finite()) {
        return invalid("MMD bandwidths must be finite and non-zero");
    }
    if x.dim != y.dim {
        return invalid("MMD sample sets differ in dimension");
    }
    let (x, y) = if canonical_order(x, y) == Ordering::Greater { (y, x) } else { (x, y) };
    let inv2s2: Vec<f64> = sigmas.iter().map(|s| 1.0 / (2.0 * s * s)).collect();
    let (n, m) = (x.len() as f64, y.len() as f64);
    let kxx = kernel_sum(x, x, &inv2s2) / (n * n);
    let kyy = kernel_sum(y, y, &inv2s2) / (m * m);
    let kxy = kernel_sum(x, y, &inv2s2) / (n * m);
    Ok((kxx + kyy - 2.0 * kxy).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::SampleMeta;

    fn set(d: usize, v: Vec<f64>) -> SampleSet {
        SampleSet::new(d, v, SampleMeta::default()).unwrap()
    }

    #[test]
    fn default_bandwidth_grid() {
        let s = default_sigmas();
        assert_eq!(s.len(), 10);
        for (sig, e) in s.iter().zip((-4..=14).step_by(2)) {
            assert!((sig - 2f64.powf(e as f64 / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_expanded_single_points() {
        let (c, sigma) = (1.3_f64, 0.7_f64);
        let v = mmd(&set(1, vec![0.0]), &set(1, vec![c]), &[sigma]).unwrap();
        let expect = (2.0 * (1.0 - (-c * c / (2.0 * sigma * sigma)).exp())).sqrt();
        assert!((v - expect).abs() < 1e-14);
        assert!(mmd(&set(1, vec![0.0]), &set(1, vec![c]), &[0.0]).is_err());
    }
}
