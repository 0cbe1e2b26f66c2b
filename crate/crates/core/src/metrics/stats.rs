use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelErrorStats {
    pub mean_ratio: f64,
    pub std_ratio: f64,
    /// (ε, fraction of estimates with |Ẑ/Z − 1| ≤ ε).
    pub coverage: Vec<(f64, f64)>,
}

/// Mean and sample standard deviation of Ẑ/Z, plus coverage at each ε.
pub fn relative_error_stats(z_hats: &[f64], z_true: f64, eps: &[f64]) -> Result<RelErrorStats> {
    if z_hats.is_empty() {
        return invalid("relative error of an empty list");
    }
    if !(z_true > 0.0) {
        return invalid("true normalizing constant must be positive");
    }
    let ratios: Vec<f64> = z_hats.iter().map(|z| z / z_true).collect();
    let (mean, var) = mean_var(&ratios);
    let coverage = eps
        .iter()
        .map(|e| (*e, ratios.iter().filter(|r| (*r - 1.0).abs() <= *e).count() as f64 / ratios.len() as f64))
        .collect();
    Ok(RelErrorStats { mean_ratio: mean, std_ratio: var.unwrap_or(0.0).sqrt(), coverage })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkStats {
    pub mean: f64,
    /// Unbiased variance; absent for fewer than two samples.
    pub var: Option<f64>,
}

pub fn work_stats(works: &[f64]) -> Result<WorkStats> {
    if works.is_empty() {
        return invalid("work statistics of an empty list");
    }
    let (mean, var) = mean_var(works);
    Ok(WorkStats { mean, var })
}

fn mean_var(v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = (v.len() >= 2).then(|| v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0));
    (mean, var)
}

/// Mean and its standard error.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let (mean, var) = mean_var(v);
    (mean, (var.unwrap_or(0.0) / v.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function Q(λ) = 2Σ(−1)^{k−1}e^{−2k²λ²}.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return invalid("KS test of an empty sample");
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = relative_error_stats(&[3.0], 3.0, &[0.01, 0.5]).unwrap();
        assert_eq!((s.mean_ratio, s.std_ratio), (1.0, 0.0));
        assert!(s.coverage.iter().all(|c| c.1 == 1.0));
        let s = relative_error_stats(&[1.0, 3.0], 2.0, &[0.4]).unwrap();
        assert_eq!(s.coverage[0].1, 0.0);
        assert_eq!(work_stats(&[0.0, 0.0, 0.0]).unwrap(), WorkStats { mean: 0.0, var: Some(0.0) });
        assert_eq!(work_stats(&[1.0, 3.0]).unwrap(), WorkStats { mean: 2.0, var: Some(2.0) });
        assert_eq!(work_stats(&[1.0]).unwrap().var, None);
        assert!(relative_error_stats(&[], 1.0, &[]).is_err());
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Q(1.3581) ≈ 0.05, Q(1.6276) ≈ 0.01
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-3);
    }
}
