mod common;

use std::sync::Arc;

use annealz::curves::AnnealingSchedule;
use annealz::kernels::{
    almc_step, check_divergence, lmc_step, ou_forward_step, rds_step, rejection_sample_posterior, AlmcCoefficients,
    AlmcTable, RdsCoefficients,
};
use annealz::metrics::ks_one_sample;
use annealz::targets::{make_gaussian, make_paper_gmm, Oracle, OracleCounter, Potential, Target};
use annealz::Error;
use common::{mean_se, rng};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug)]
struct Flat(usize, f64);

impl Potential for Flat {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _: &[f64]) -> f64 {
        self.1
    }
    fn grad(&self, _: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
    }
}

fn flat(d: usize, c: f64) -> Target {
    Target::new("flat", Arc::new(Flat(d, c)), 1.0).unwrap()
}

fn sq(v: &[f64], m: f64) -> Vec<f64> {
    v.iter().map(|x| (x - m) * (x - m)).collect()
}

#[test]
fn lmc_with_zero_gradient_is_pure_diffusion() {
    let h = 0.03;
    let mut r = rng(1);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| lmc_step(|_: &[f64], g: &mut [f64]| { g[0] = 0.0; Ok(()) }, &[0.0], h, &mut r).unwrap()[0])
        .collect();
    let (var, se) = mean_se(&sq(&xs, 0.0));
    assert!((var - 2.0 * h).abs() < 4.0 * se, "{var}");
}

#[test]
fn lmc_drift_on_a_gaussian() {
    let t = make_gaussian(1, &[], 1.0).unwrap();
    let mut r = rng(2);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| lmc_step(|x: &[f64], g: &mut [f64]| { t.grad(x, g); Ok(()) }, &[1.0], 0.01, &mut r).unwrap()[0])
        .collect();
    let (m, se) = mean_se(&xs);
    assert!((m - 0.99).abs() < 4.0 * se, "{m}");
    assert!(lmc_step(|_: &[f64], _: &mut [f64]| Ok(()), &[0.0], 0.0, &mut r).is_err());
}

#[test]
fn long_lmc_chains_keep_the_gaussian_invariant() {
    // Stationary variance of LMC on x²/2 is 1/(1 − h/2).
    let h = 1e-3;
    let mut r = rng(3);
    let n = 10_000;
    let ends: Vec<f64> = (0..n)
        .map(|_| {
            let mut x = vec![annealz::rng::normal(&mut r)];
            for _ in 0..1000 {
                x = lmc_step(|x: &[f64], g: &mut [f64]| { g[0] = x[0]; Ok(()) }, &x, h, &mut r).unwrap();
            }
            x[0]
        })
        .collect();
    let (var, se) = mean_se(&sq(&ends, 0.0));
    assert!((var - 1.0).abs() < 4.0 * se + h, "{var}");
}

#[test]
fn almc_constant_rate_coefficients_match_closed_form() {
    for c in [1e-8, 0.5, 3.0, 50.0, 1e3] {
        for t_len in [1e-4, 0.01, 0.3] {
            let q = AlmcCoefficients::from_cumulative_rate(|s| c * s, t_len).unwrap();
            let decay = (-c * t_len).exp();
            let drift = -(-c * t_len).exp_m1() / c;
            let noise = (-(-2.0 * c * t_len).exp_m1() / c).sqrt();
            assert!((q.decay - decay).abs() < 1e-10);
            assert!((q.drift - drift).abs() < 1e-10, "c = {c}: {} vs {drift}", q.drift);
            assert!((q.noise_sd - noise).abs() < 1e-10);
            let e = AlmcCoefficients::constant(c, t_len);
            assert!((e.drift - drift).abs() < 1e-10 && (e.noise_sd - noise).abs() < 1e-10);
        }
    }
}

#[test]
fn linear_schedule_rate_has_the_quadratic_antiderivative() {
    let (beta, m, total) = (3.0, 40, 0.4);
    let s = AnnealingSchedule::new(beta, 1.0, m, total).unwrap();
    let tl = s.segment_time();
    for l in [1, 7, 20, 40] {
        let (a, b) = (s.theta(l - 1), s.theta(l));
        for t in [0.3 * tl, tl] {
            let closed = 2.0 * beta * (1.0 - a) * t - beta * (b - a) * t * t / tl;
            assert!((s.cumulative_rate(l, t) - closed).abs() < 1e-10, "l = {l}");
        }
    }
}

#[test]
fn almc_step_uses_one_gradient_and_approaches_lmc_at_the_end() {
    let t = make_gaussian(2, &[], 1.0).unwrap();
    let sched = AnnealingSchedule::new(1.0, 2.0, 10_000, 100.0).unwrap();
    let table = AlmcTable::new(sched).unwrap();
    let counter = OracleCounter::new();
    let o = Oracle::new(&t, &counter);
    let out = almc_step(&o, &table, 10_000, &[0.5, -0.5], &mut rng(4)).unwrap();
    assert_eq!(out.oracle_calls_used, 1);
    assert_eq!(counter.grad_calls(), 1);
    assert!(out.path_noise.is_none());
    let c = table.coefficients(10_000);
    let tl = sched.segment_time();
    assert!((c.decay - 1.0).abs() < 1e-9);
    assert!((c.drift - tl).abs() < 1e-9);
    assert!((c.noise_sd - (2.0 * tl).sqrt()).abs() < 1e-9);
}

#[test]
fn ou_forward_step_examples() {
    let mut r = rng(5);
    assert!(ou_forward_step(&[1.0], 1.0, 0.5, &mut r).is_err());
    let tiny = ou_forward_step(&[1.5, -2.0], 0.0, 1e-14, &mut r).unwrap();
    assert!((tiny[0] - 1.5).abs() < 1e-6 && (tiny[1] + 2.0).abs() < 1e-6);

    let xs: Vec<f64> = (0..100_000).map(|_| ou_forward_step(&[0.0], 0.0, 2f64.ln(), &mut r).unwrap()[0]).collect();
    let (var, se) = mean_se(&sq(&xs, 0.0));
    assert!((var - 0.75).abs() < 4.0 * se, "{var}");

    let far: Vec<f64> = (0..20_000).map(|_| ou_forward_step(&[50.0], 0.0, 40.0, &mut r).unwrap()[0]).collect();
    let (m, se) = mean_se(&far);
    assert!(m.abs() < 4.0 * se);
}

#[test]
fn rds_step_noise_statistics() {
    let h: f64 = 0.1;
    let n = 100_000;
    let mut r = rng(6);
    let coeffs = RdsCoefficients::new(h);
    let (mut x1, mut x2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut calls = 0;
    for _ in 0..n {
        let out = rds_step(
            |_: &[f64], s: &mut [f64], _: &mut annealz::rng::Rng| {
                calls += 1;
                s[0] = 0.0;
                Ok(())
            },
            &[0.0],
            1.0,
            1.0 + h,
            &mut r,
        )
        .unwrap();
        x1.push(out.x_next[0]);
        x2.push(out.path_noise.unwrap()[0]);
    }
    assert_eq!(calls, n);
    let (var, se) = mean_se(&sq(&x1, 0.0));
    assert!((var - (2.0 * h).exp_m1()).abs() < 4.0 * se);

    let xi1: Vec<f64> = x1.iter().map(|v| v / coeffs.noise_sd).collect();
    let prod: Vec<f64> = xi1.iter().zip(&x2).map(|(a, b)| a * b).collect();
    let corr = mean_se(&prod).0 / (mean_se(&sq(&xi1, 0.0)).0 * mean_se(&sq(&x2, 0.0)).0).sqrt();
    let rho = coeffs.rho;
    assert!((rho - 0.999_583_6).abs() < 5e-7);
    let se_corr = (1.0 - rho * rho) / ((n - 1) as f64).sqrt();
    assert!((corr - rho).abs() < 4.0 * se_corr, "{corr} vs {rho}");
}

#[test]
fn rejection_on_a_flat_potential_accepts_immediately() {
    let t = flat(2, 3.0);
    let counter = OracleCounter::new();
    let o = Oracle::new(&t, &counter);
    let mut y = [0.0; 2];
    for _ in 0..50 {
        assert_eq!(rejection_sample_posterior(&o, 0.5, &[1.0, 2.0], 3.0, &mut rng(7), 10, &mut y).unwrap(), 1);
    }
    assert_eq!(counter.value_calls(), 50);
}

fn gaussian_posterior(t: f64, x: f64) -> (f64, f64) {
    let s2 = (2.0 * t).exp_m1();
    let prec = 1.0 + 1.0 / s2;
    (t.exp() * x / s2 / prec, 1.0 / prec)
}

#[test]
fn rejection_matches_the_gaussian_posterior() {
    let target = make_gaussian(1, &[], 1.0).unwrap();
    let counter = OracleCounter::new();
    let o = Oracle::new(&target, &counter);
    let (t, x) = (0.7, 1.3);
    let (mean, var) = gaussian_posterior(t, x);
    let mut r = rng(8);
    let mut y = [0.0];
    let mut tries = 0;
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            tries += rejection_sample_posterior(&o, t, &[x], 0.0, &mut r, 1_000_000, &mut y).unwrap();
            y[0]
        })
        .collect();
    assert_eq!(counter.value_calls(), tries);
    let (m, se) = mean_se(&draws);
    assert!((m - mean).abs() < 4.0 * se, "{m} vs {mean}");
    let (v, vse) = mean_se(&sq(&draws, mean));
    assert!((v - var).abs() < 4.0 * vse, "{v} vs {var}");

    let normal = Normal::new(mean, var.sqrt()).unwrap();
    let ks = ks_one_sample(&draws[..4000], |z| normal.cdf(z)).unwrap();
    assert!(ks.p_value >= 0.01, "{ks:?}");
}

#[test]
fn rejection_acceptance_rate_matches_brute_force() {
    let target = make_paper_gmm();
    let vlb = target.v_min.unwrap();
    let counter = OracleCounter::new();
    let o = Oracle::new(&target, &counter);
    let (t, x) = (1.0f64, [0.0, 0.0]);
    let mut r = rng(9);

    // Brute force: E[e^{−(V−v_lb)}] under the proposal N(e^t x, (e^{2t}−1)I).
    let sd = (2.0 * t).exp_m1().sqrt();
    let probs: Vec<f64> = (0..400_000)
        .map(|_| {
            let y = [sd * annealz::rng::normal(&mut r), sd * annealz::rng::normal(&mut r)];
            (-(target.value(&y) - vlb)).exp()
        })
        .collect();
    let (p_bf, se_bf) = mean_se(&probs);

    let n = 4000;
    let mut y = [0.0; 2];
    let total: u64 = (0..n).map(|_| rejection_sample_posterior(&o, t, &x, vlb, &mut r, 100_000_000, &mut y).unwrap()).sum();
    let p = n as f64 / total as f64;
    // Tries per acceptance are geometric with variance (1−p)/p².
    let se = p * ((1.0 - p) / n as f64).sqrt();
    let tol = 3.0 * (se * se + se_bf * se_bf).sqrt();
    assert!((p - p_bf).abs() < tol, "{p} vs {p_bf} ± {tol}");
}

#[test]
fn rejection_budget_is_enforced() {
    let target = make_gaussian(1, &[], 1.0).unwrap();
    let counter = OracleCounter::new();
    let o = Oracle::new(&target, &counter);
    let mut y = [0.0];
    let r = rejection_sample_posterior(&o, 0.5, &[0.0], -50.0, &mut rng(10), 5, &mut y);
    assert!(matches!(r, Err(Error::RejectionBudget(5))));
    assert_eq!(counter.value_calls(), 5);
}

#[test]
fn divergence_guard() {
    assert!(check_divergence(&[1e7, 1e7]).is_ok());
    assert!(matches!(check_divergence(&[1e8, 1e5]), Err(Error::Divergence(_))));
    assert!(check_divergence(&[f64::NAN]).is_err());
}
