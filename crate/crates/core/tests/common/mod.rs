#![allow(dead_code)]

use annealz::rng::{Rng, RunSeed};
use annealz::targets::{SampleMeta, SampleSet};

pub fn rng(tag: u64) -> Rng {
    RunSeed::new(0xA11CE, tag).auxiliary(0)
}

pub fn set(d: usize, v: Vec<f64>) -> SampleSet {
    SampleSet::new(d, v, SampleMeta::default()).unwrap()
}

/// Sample mean and standard error.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Central finite-difference gradient with step 1e-5·(‖x‖+1).
pub fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 1e-5 * (norm + 1.0);
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let scale = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    diff / scale
}
