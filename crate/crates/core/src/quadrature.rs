//! Small deterministic quadrature helpers.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const GL_POINTS: usize = 32;

/// Nodes and weights of the 32-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre_32() -> &'static ([f64; GL_POINTS], [f64; GL_POINTS]) {
    static RULE: OnceLock<([f64; GL_POINTS], [f64; GL_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre::<GL_POINTS>())
}

fn gauss_legendre<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let n = N as f64;
    for i in 0..N.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=N {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[N - 1 - i] = z;
        weights[i] = w;
        weights[N - 1 - i] = w;
    }
    (nodes, weights)
}

/// Single 32-point Gauss–Legendre panel on [a, b].
pub fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_32();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(z, w)| w * f(mid + half * z))
        .sum::<f64>()
        * half
}

/// Gauss–Legendre on [a, b] checked against the two-half refinement; panels
/// that fail the check are bisected (up to 30 levels) with the tolerance split.
pub fn gl_checked(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let coarse = gl_panel(&f, a, b);
    gl_refine(&f, a, b, coarse, tol, 30)
}

fn gl_refine(f: &impl Fn(f64) -> f64, a: f64, b: f64, coarse: f64, tol: f64, depth: u32) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let (left, right) = (gl_panel(f, a, mid), gl_panel(f, mid, b));
    let fine = left + right;
    let scale = fine.abs().max(f64::MIN_POSITIVE);
    if (fine - coarse).abs() <= tol * scale.max(1.0) {
        return Ok(fine);
    }
    if depth == 0 {
        return Err(Error::Accuracy(format!(
            "Gauss-Legendre refinement disagrees on [{a}, {b}]: {coarse} vs {fine}"
        )));
    }
    Ok(gl_refine(f, a, mid, left, 0.5 * tol, depth - 1)? + gl_refine(f, mid, b, right, 0.5 * tol, depth - 1)?)
}

/// Trapezoid rule on a uniform grid of values with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Adaptive Simpson on [a, b].
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Iterated adaptive Simpson over a rectangle.
pub fn adaptive_simpson_2d(
    f: impl Fn(f64, f64) -> f64,
    x: (f64, f64),
    y: (f64, f64),
    tol: f64,
) -> f64 {
    let inner = |u: f64| adaptive_simpson(&|v| f(u, v), y.0, y.1, tol);
    adaptive_simpson(&inner, x.0, x.1, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_weights_sum_to_two_and_integrate_polynomials() {
        let (nodes, weights) = gauss_legendre_32();
        assert_relative_eq!(weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // exact up to degree 63
        let v = gl_panel(&|x: f64| x.powi(62), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 63.0, max_relative = 1e-12);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn checked_gl_bisects_peaked_integrands() {
        let c = 1000.0;
        let v = gl_checked(|t| (-c * (0.3 - t)).exp(), 0.0, 0.3, 1e-9).unwrap();
        assert_relative_eq!(v, -(-c * 0.3f64).exp_m1() / c, max_relative = 1e-10);
    }

    #[test]
    fn checked_gl_reports_non_convergence() {
        let step = |x: f64| if x < 1.0 / 3.0 { 0.0 } else { 1.0 };
        assert!(matches!(gl_checked(step, 0.0, 1.0, 1e-15), Err(Error::Accuracy(_))));
    }

    #[test]
    fn simpson_2d_gaussian() {
        let v = adaptive_simpson_2d(
            |x, y| (-(x * x + y * y) / 2.0).exp(),
            (-10.0, 10.0),
            (-10.0, 10.0),
            1e-10,
        );
        assert_relative_eq!(v, 2.0 * std::f64::consts::PI, max_relative = 1e-8);
    }
}
