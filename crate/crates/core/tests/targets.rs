mod common;

use annealz::targets::{
    grad_counted, make_gaussian, make_gaussian_mixture, make_mog1d, make_mueller_brown, make_paper_gmm, Oracle,
    OracleCounter, SampleMeta, Target, MUELLER_Z,
};
use common::{fd_grad, mean_se, rel_err, rng};
use proptest::prelude::*;

fn grad_of(t: &Target, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; t.dim()];
    t.grad(x, &mut g);
    g
}

fn check_fd(t: &Target, x: &[f64]) {
    let fd = fd_grad(|y| t.value(y), x);
    let g = grad_of(t, x);
    assert!(rel_err(&g, &fd) < 1e-5, "{} at {x:?}: {g:?} vs {fd:?}", t.name);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gaussian_gradient_matches_fd(x in prop::collection::vec(-5.0..5.0f64, 3), s in 0.2..3.0f64) {
        check_fd(&make_gaussian(3, &[0.5, -1.0, 2.0], s).unwrap(), &x);
    }

    #[test]
    fn planar_mixture_gradient_matches_fd(a in -4.0..15.0f64, b in -4.0..15.0f64) {
        check_fd(&make_paper_gmm(), &[a, b]);
    }

    #[test]
    fn mog1d_gradient_matches_fd(x in -5.0..13.0f64, m in 1.0..8.0f64) {
        check_fd(&make_mog1d(m).unwrap(), &[x]);
    }

    #[test]
    fn mueller_gradient_matches_fd(a in -4.0..9.5f64, b in -9.0..3.5f64) {
        check_fd(&make_mueller_brown(), &[a, b]);
    }

    #[test]
    fn mueller_smoothness_holds_on_nearby_pairs(
        a in -4.0..9.5f64, b in -9.0..3.5f64, da in -0.5..0.5f64, db in -0.5..0.5f64,
    ) {
        let t = make_mueller_brown();
        let (x, y) = ([a, b], [a + da, b + db]);
        let (gx, gy) = (grad_of(&t, &x), grad_of(&t, &y));
        let dg = ((gx[0] - gy[0]).powi(2) + (gx[1] - gy[1]).powi(2)).sqrt();
        let dx = (da * da + db * db).sqrt();
        prop_assert!(dg <= t.beta * dx * (1.0 + 1e-9) + 1e-12, "{dg} > {} · {dx}", t.beta);
    }

    #[test]
    fn mixture_smoothness_bound_holds(a in -4.0..15.0f64, b in -4.0..15.0f64, da in -1.0..1.0f64, db in -1.0..1.0f64) {
        let t = make_paper_gmm();
        let (gx, gy) = (grad_of(&t, &[a, b]), grad_of(&t, &[a + da, b + db]));
        let dg = ((gx[0] - gy[0]).powi(2) + (gx[1] - gy[1]).powi(2)).sqrt();
        prop_assert!(dg <= t.beta * (da * da + db * db).sqrt() + 1e-12);
    }
}

#[test]
fn gaussian_examples() {
    let t = make_gaussian(2, &[], 1.0).unwrap();
    assert!((t.known_log_z.unwrap() - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
    let t = make_gaussian(1, &[], 1.0).unwrap();
    assert_eq!(t.value(&[3.0]), 4.5);
    assert_eq!(grad_of(&t, &[3.0]), vec![3.0]);
    let t = make_gaussian(2, &[1.0, 1.0], 2.0).unwrap();
    assert!((t.known_log_z.unwrap() - (4.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    assert_eq!(t.beta, 0.5);
    assert!(make_gaussian(2, &[], 0.0).is_err());
    assert!(make_gaussian(2, &[], -1.0).is_err());
    assert!(make_gaussian(2, &[1.0], 1.0).is_err());
}

#[test]
fn mixture_construction_and_examples() {
    let gm = make_paper_gmm();
    assert_eq!(gm.known_log_z, Some(0.0));
    // Bound: max precision eigenvalue + (max separation)²·(max precision eigenvalue)².
    // Component 2 has covariance eigenvalues 0.1 and 0.5; largest separation is (0,11)–(11,0).
    let expect = 10.0 + 242.0 * 100.0;
    assert!((gm.beta - expect).abs() < 1e-6 * expect, "{}", gm.beta);

    let m4 = make_mog1d(4.0).unwrap();
    let p = (-m4.value(&[2.0])).exp();
    let expect = (-2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
    assert!((p - expect).abs() < 1e-15);
    assert_eq!(m4.beta, 8.0);
    assert_eq!(make_mog1d(1.0).unwrap().beta, 1.0);

    let single = make_gaussian_mixture(vec![1.0], vec![vec![0.0, 0.0]], vec![vec![1.0, 0.0, 0.0, 1.0]]).unwrap();
    let g = make_gaussian(2, &[], 1.0).unwrap();
    for x in [[0.3, -1.2], [2.0, 0.5]] {
        let lz = g.known_log_z.unwrap();
        assert!((single.value(&x) - (g.value(&x) + lz)).abs() < 1e-12);
        assert!(rel_err(&grad_of(&single, &x), &grad_of(&g, &x)) < 1e-14);
    }

    assert!(make_gaussian_mixture(vec![0.5, 0.6], vec![vec![0.0], vec![1.0]], vec![vec![1.0], vec![1.0]]).is_err());
    assert!(make_gaussian_mixture(vec![1.0], vec![vec![0.0, 0.0]], vec![vec![1.0, 2.0, 2.0, 1.0]]).is_err());
    assert!(make_gaussian_mixture(vec![1.0], vec![vec![0.0, 0.0]], vec![vec![1.0, 0.5, 0.4, 1.0]]).is_err());
}

/// Independent transcription of the modified Müller-Brown formula.
fn mueller_by_hand(x1: f64, x2: f64) -> f64 {
    let (u, v) = (0.2 * (x1 - 3.5), 0.2 * (x2 + 6.5));
    let a = [-200.0, -100.0, -170.0, 15.0];
    let aa = [-1.0, -1.0, -6.5, 0.7];
    let bb = [0.0, 0.0, 11.0, 0.6];
    let cc = [-10.0, -10.0, -6.5, 0.7];
    let xx = [1.0, 0.0, -0.5, -1.0];
    let yy = [0.0, 0.5, 1.5, 1.0];
    let vq = 35.0136 * (u + 0.033923f64).powi(2) + 59.8399 * (v - 0.465694f64).powi(2);
    let vm: f64 = (0..4)
        .map(|i| {
            let (p, q) = (u - xx[i], v - yy[i]);
            a[i] * (aa[i] * p * p + bb[i] * p * q + cc[i] * q * q).exp()
        })
        .sum();
    0.1 * (vq + vm)
}

#[test]
fn mueller_values_and_counting() {
    let t = make_mueller_brown();
    assert!((t.known_log_z.unwrap() - MUELLER_Z.ln()).abs() < 1e-15);
    for x in [[3.5, -6.5], [0.0, 0.0], [-2.0, 2.5], [8.0, -8.0]] {
        assert!((t.value(&x) - mueller_by_hand(x[0], x[1])).abs() < 1e-12 * mueller_by_hand(x[0], x[1]).abs().max(1.0));
    }
    let c = OracleCounter::new();
    let g = grad_counted(&t, &c, &[3.5, -6.5]).unwrap();
    let fd = fd_grad(|y| mueller_by_hand(y[0], y[1]), &[3.5, -6.5]);
    assert!(rel_err(&g, &fd) < 1e-6);
    assert_eq!(c.grad_calls(), 1);
    assert!(t.v_min.unwrap() <= t.value(&[3.5, -6.5]));
}

#[test]
fn oracle_counts_and_rejects_non_finite_input() {
    let t = make_gaussian(1, &[], 1.0).unwrap();
    let c = OracleCounter::new();
    assert_eq!(grad_counted(&t, &c, &[2.0]).unwrap(), vec![2.0]);
    assert_eq!(c.grad_calls(), 1);
    grad_counted(&t, &c, &[1.0]).unwrap();
    assert_eq!(c.grad_calls(), 2);
    assert!(matches!(grad_counted(&t, &c, &[f64::NAN]), Err(annealz::Error::Domain(_))));
    assert_eq!(c.grad_calls(), 2);
    let o = Oracle::new(&t, &c);
    o.value(&[0.0]);
    assert_eq!((c.grad_calls(), c.value_calls()), (2, 1));
}

#[test]
fn concurrent_counting_loses_nothing() {
    use rayon::prelude::*;
    let t = make_paper_gmm();
    let c = OracleCounter::new();
    (0..10_000).into_par_iter().for_each(|i| {
        grad_counted(&t, &c, &[i as f64 * 1e-3, 1.0]).unwrap();
    });
    assert_eq!(c.grad_calls(), 10_000);
}

#[test]
fn exact_sampler_moments_match() {
    for t in [make_paper_gmm(), make_mog1d(4.0).unwrap(), make_gaussian(3, &[1.0, -2.0, 0.5], 2.0).unwrap()] {
        let mix = t.mixture().unwrap().clone();
        let d = t.dim();
        let s = t.sample_exact(&mut rng(7), 100_000, SampleMeta::default()).unwrap();
        let mean = mix.mean();
        let cov = mix.covariance();
        for j in 0..d {
            let col: Vec<f64> = s.rows().map(|r| r[j]).collect();
            let (m, se) = mean_se(&col);
            assert!((m - mean[j]).abs() < 4.0 * se, "{} mean[{j}] {m} vs {}", t.name, mean[j]);
            let sq: Vec<f64> = col.iter().map(|v| (v - mean[j]).powi(2)).collect();
            let (v, se) = mean_se(&sq);
            assert!((v - cov[j * d + j]).abs() < 4.0 * se, "{} var[{j}] {v} vs {}", t.name, cov[j * d + j]);
        }
        let m2 = s.rows().map(|r| r.iter().map(|v| v * v).sum::<f64>()).collect::<Vec<_>>();
        let (m, se) = mean_se(&m2);
        assert!((m - t.second_moment.unwrap_or_else(|| mix.second_moment())).abs() < 4.0 * se);
    }
}

#[test]
fn mueller_has_no_exact_sampler() {
    let t = make_mueller_brown();
    assert!(!t.has_exact_sampler());
    assert!(t.sample_exact(&mut rng(1), 4, SampleMeta::default()).is_err());
}

#[test]
fn recentering_moves_a_stationary_point_to_the_origin() {
    let t = make_gaussian(2, &[1.5, -0.5], 1.0).unwrap().recentered(500).unwrap();
    assert!(grad_of(&t, &[0.0, 0.0]).iter().all(|g| g.abs() < 1e-8));
    assert!((t.known_log_z.unwrap() - (2.0 * std::f64::consts::PI).ln()).abs() < 1e-15);
    let mb = make_mueller_brown().recentered(3000).unwrap();
    assert!(grad_of(&mb, &[0.0, 0.0]).iter().all(|g| g.abs() < 1e-6));
}
