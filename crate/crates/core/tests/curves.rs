mod common;

use annealz::curves::{
    action_1d, metric_derivative_sq_1d, metric_derivative_sq_quantile, ou_action_and_bound, ou_marginal_mog,
    w1_metric_derivative_1d, AnnealingSchedule, Curve1D, LocationFamily, MetricOptions, MogCurve, ScaleFamily,
    StationaryCurve,
};
use annealz::kernels::ou_forward_step;
use annealz::targets::{make_gaussian, make_mog1d, make_paper_gmm, SampleMeta};
use common::rng;
use proptest::prelude::*;

proptest! {
    #[test]
    fn lambda_is_non_increasing_with_exact_endpoints(
        beta in 0.01..1e4f64, r in 1.0..6.0f64, steps in 1usize..500, a in 0.0..1.0f64, b in 0.0..1.0f64,
    ) {
        let s = AnnealingSchedule::new(beta, r, steps, 1.0).unwrap();
        prop_assert_eq!(s.lambda(0.0), 2.0 * beta);
        prop_assert_eq!(s.lambda(1.0), 0.0);
        prop_assert_eq!(s.lambda_l(steps), 0.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(s.lambda(lo) >= s.lambda(hi));
        for l in 0..steps {
            prop_assert!(s.lambda_l(l) >= s.lambda_l(l + 1));
        }
    }

    #[test]
    fn cumulative_rate_is_finite_and_increasing(beta in 0.1..1e3f64, r in 1.0..4.0f64, steps in 1usize..200) {
        let s = AnnealingSchedule::new(beta, r, steps, 0.01 * steps as f64).unwrap();
        for l in 1..=steps {
            let tl = s.segment_time();
            let a = s.cumulative_rate(l, 0.5 * tl);
            let b = s.cumulative_rate(l, tl);
            prop_assert!(a.is_finite() && b.is_finite());
            prop_assert!(0.0 <= a && a <= b);
        }
    }

    #[test]
    fn mog_cdf_is_monotone_in_x(m in 0.5..8.0f64, s in 0.05..1.0f64, x in -10.0..10.0f64, dx in 0.0..3.0f64) {
        let c = MogCurve { m };
        prop_assert!(c.cdf(s, x) <= c.cdf(s, x + dx));
        prop_assert!((c.cdf(s, x) + c.sf(s, x) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn schedule_rejects_bad_parameters() {
    assert!(AnnealingSchedule::new(0.0, 1.0, 10, 1.0).is_err());
    assert!(AnnealingSchedule::new(1.0, 0.5, 10, 1.0).is_err());
    assert!(AnnealingSchedule::new(1.0, 1.0, 0, 1.0).is_err());
    assert!(AnnealingSchedule::new(1.0, 1.0, 10, -1.0).is_err());
    let s = AnnealingSchedule::new(1.0, 1.0, 10, 1.0).unwrap();
    assert!(s.lambda_at(1.5).is_err());
}

#[test]
fn location_family_has_unit_speed_and_action() {
    let opts = MetricOptions::for_range(0.0, 1.0);
    let rep = action_1d(&LocationFamily, 0.0, 1.0, 21, &opts).unwrap();
    assert!((rep.action - 1.0).abs() < 1e-4, "{}", rep.action);
    let w1 = w1_metric_derivative_1d(&LocationFamily, 0.3, &opts).unwrap();
    assert!((w1.value - 1.0).abs() < 1e-4, "{}", w1.value);
}

#[test]
fn scale_family_has_unit_speed() {
    // W₂(N(0,a²), N(0,b²)) = |a − b|.
    let opts = MetricOptions::for_range(0.5, 2.0);
    for s in [0.5, 1.0, 2.0] {
        let v = metric_derivative_sq_1d(&ScaleFamily, s, &opts).unwrap().value;
        assert!((v - 1.0).abs() < 1e-4, "s = {s}: {v}");
    }
}

#[test]
fn stationary_curve_has_zero_action() {
    let opts = MetricOptions::for_range(0.0, 1.0);
    let rep = action_1d(&StationaryCurve, 0.0, 1.0, 11, &opts).unwrap();
    assert_eq!(rep.action, 0.0);
    assert_eq!(w1_metric_derivative_1d(&StationaryCurve, 0.5, &opts).unwrap().value, 0.0);
}

#[test]
fn quantile_and_density_forms_agree() {
    let cases: [(&dyn Curve1D, f64); 4] = [
        (&LocationFamily, 0.4),
        (&ScaleFamily, 1.3),
        (&MogCurve { m: 4.0 }, 0.95),
        (&MogCurve { m: 6.0 }, 0.7),
    ];
    for (curve, s) in cases {
        let opts = MetricOptions::for_range(0.9, 0.99);
        let dens = metric_derivative_sq_1d(curve, s, &opts).unwrap().value;
        let quant = metric_derivative_sq_quantile(curve, s, 1e-5, 20_000);
        assert!((dens - quant).abs() <= 0.05 * dens, "s = {s}: {dens} vs {quant}");
    }
}

fn mog_action(m: f64, s_lo: f64, s_hi: f64) -> f64 {
    action_1d(&MogCurve { m }, s_lo, s_hi, 46, &MetricOptions::for_range(s_lo, s_hi)).unwrap().action
}

#[test]
fn mog_action_grows_with_separation() {
    let a4 = mog_action(4.0, 0.9, 0.99);
    let a6 = mog_action(6.0, 0.9, 0.99);
    assert!(a6 / a4 >= 0.5f64.exp(), "{a6} / {a4}");
}

#[test]
fn log_action_is_superlinear_in_m_squared() {
    let logs: Vec<f64> = [2.0, 4.0, 6.0, 8.0].iter().map(|&m| mog_action(m, 0.1, 0.99).ln()).collect();
    let inc: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(inc.iter().all(|d| *d > 0.0), "{logs:?}");
    for w in inc.windows(2) {
        assert!(w[1] / w[0] >= 1.0, "log-increments {inc:?}");
    }
}

#[test]
fn mog_curve_reparameterization_round_trips() {
    let c = MogCurve { m: 4.0 };
    for r in [1.0, 2.0, 3.0] {
        for theta in [0.1, 0.5, 0.9] {
            let s = c.s_of_theta(theta, r);
            assert!((c.theta_of_s(s, r) - theta).abs() < 1e-12);
            let h = 1e-6;
            let fd = (c.s_of_theta(theta + h, r) - c.s_of_theta(theta - h, r)) / (2.0 * h);
            assert!((c.ds_dtheta(s, r) - fd).abs() < 1e-6 * fd.abs().max(1.0));
        }
    }
}

#[test]
fn mog_curve_endpoints() {
    // s = 1 is the target ½N(0,1)+½N(m,1).
    let c = MogCurve { m: 3.0 };
    assert!((c.weight(1.0) - 0.5).abs() < 1e-15);
    let t = make_mog1d(3.0).unwrap();
    let p = t.mixture().unwrap().log_density(&[1.2]).exp();
    assert!((c.pdf(1.0, 1.2) - p).abs() < 1e-14);
}

#[test]
fn ou_marginal_matches_pushforward_moments() {
    let target = make_paper_gmm();
    let t = 0.4;
    let mix = ou_marginal_mog(&target, t).unwrap();
    let mut r = rng(11);
    let n = 100_000;
    let y0 = target.sample_exact(&mut r, n, SampleMeta::default()).unwrap();
    let mut pts = Vec::with_capacity(2 * n);
    for row in y0.rows() {
        pts.extend(ou_forward_step(row, 0.0, t, &mut r).unwrap());
    }
    let (m_exact, c_exact) = (mix.mean(), mix.covariance());
    for j in 0..2 {
        let col: Vec<f64> = pts.iter().skip(j).step_by(2).copied().collect();
        let (m, se) = common::mean_se(&col);
        assert!((m - m_exact[j]).abs() < 4.0 * se, "mean {j}: {m} vs {}", m_exact[j]);
        let v: Vec<f64> = col.iter().map(|x| (x - m_exact[j]).powi(2)).collect();
        let (var, var_se) = common::mean_se(&v);
        assert!((var - c_exact[3 * j]).abs() < 4.0 * var_se, "var {j}: {var} vs {}", c_exact[3 * j]);
    }
}

#[test]
fn ou_action_of_standard_gaussian_is_zero() {
    let target = make_gaussian(2, &[], 1.0).unwrap();
    let rep = ou_action_and_bound(&target, 10.0, 41, &mut rng(1)).unwrap();
    assert!(rep.action.abs() < 1e-20);
    assert_eq!(rep.bound, 4.0);
}

#[test]
fn ou_action_obeys_bound_for_mixtures() {
    // 1-D with β = m²/2.
    let target = make_mog1d(4.0).unwrap();
    let rep = ou_action_and_bound(&target, 12.0, 241, &mut rng(2)).unwrap();
    assert!(rep.warning.is_none());
    assert!(rep.action > 0.0 && rep.action < rep.bound, "{rep:?}");
    // m² = E x² = ½·1 + ½·(16 + 1).
    assert_eq!(rep.bound, 8.0 + 9.0);
}

#[test]
fn ou_action_requires_a_mixture() {
    let target = annealz::targets::make_mueller_brown();
    assert!(ou_action_and_bound(&target, 10.0, 11, &mut rng(3)).is_err());
}
