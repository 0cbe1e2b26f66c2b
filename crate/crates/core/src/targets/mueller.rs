//! Rescaled Müller-Brown potential.

use super::Potential;

const A: [f64; 4] = [-200.0, -100.0, -170.0, 15.0];
const AA: [f64; 4] = [-1.0, -1.0, -6.5, 0.7];
const BB: [f64; 4] = [0.0, 0.0, 11.0, 0.6];
const CC: [f64; 4] = [-10.0, -10.0, -6.5, 0.7];
const XX: [f64; 4] = [1.0, 0.0, -0.5, -1.0];
const YY: [f64; 4] = [0.0, 0.5, 1.5, 1.0];

pub const MUELLER_Z: f64 = 22340.9983;

/// Box that holds essentially all of the mass.
pub const SUPPORT: [(f64, f64); 2] = [(-4.0, 9.5), (-9.0, 3.5)];

#[derive(Debug, Clone, Copy, Default)]
pub struct MuellerBrown;

#[inline]
fn rescale(x: &[f64]) -> (f64, f64) {
    (0.2 * (x[0] - 3.5), 0.2 * (x[1] + 6.5))
}

impl MuellerBrown {
    fn parts(u: f64, v: f64) -> (f64, f64, f64) {
        let du = u + 0.033923;
        let dv = v - 0.465694;
        let mut val = 35.0136 * du * du + 59.8399 * dv * dv;
        let mut gu = 2.0 * 35.0136 * du;
        let mut gv = 2.0 * 59.8399 * dv;
        for i in 0..4 {
            let p = u - XX[i];
            let q = v - YY[i];
            let e = A[i] * (AA[i] * p * p + BB[i] * p * q + CC[i] * q * q).exp();
            val += e;
            gu += e * (2.0 * AA[i] * p + BB[i] * q);
            gv += e * (BB[i] * p + 2.0 * CC[i] * q);
        }
        (val, gu, gv)
    }
}

impl Potential for MuellerBrown {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (u, v) = rescale(x);
        0.1 * Self::parts(u, v).0
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        let (u, v) = rescale(x);
        let (_, gu, gv) = Self::parts(u, v);
        out[0] = 0.02 * gu;
        out[1] = 0.02 * gv;
    }

    fn value_grad(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let (u, v) = rescale(x);
        let (val, gu, gv) = Self::parts(u, v);
        out[0] = 0.02 * gu;
        out[1] = 0.02 * gv;
        0.1 * val
    }
}

/// Largest Hessian spectral norm seen by central differences of the gradient
/// on a 61×61 grid over [`SUPPORT`].
pub fn sampled_smoothness() -> f64 {
    let mb = MuellerBrown;
    let h = 1e-4;
    let n = 61;
    let mut worst: f64 = 0.0;
    let (mut gp, mut gm) = ([0.0; 2], [0.0; 2]);
    for i in 0..n {
        for j in 0..n {
            let x = [
                SUPPORT[0].0 + (SUPPORT[0].1 - SUPPORT[0].0) * i as f64 / (n - 1) as f64,
                SUPPORT[1].0 + (SUPPORT[1].1 - SUPPORT[1].0) * j as f64 / (n - 1) as f64,
            ];
            let mut hess = [[0.0; 2]; 2];
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                mb.grad(&xp, &mut gp);
                mb.grad(&xm, &mut gm);
                hess[k] = [(gp[0] - gm[0]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * h)];
            }
            let a = hess[0][0];
            let d = hess[1][1];
            let b = 0.5 * (hess[0][1] + hess[1][0]);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            worst = worst.max((mid + rad).abs()).max((mid - rad).abs());
        }
    }
    worst
}

/// Global minimum by a grid scan followed by gradient descent.
pub fn global_minimum() -> (f64, [f64; 2]) {
    let mb = MuellerBrown;
    let n = 271;
    let mut best = (f64::INFINITY, [0.0; 2]);
    for i in 0..n {
        for j in 0..n {
            let x = [
                SUPPORT[0].0 + (SUPPORT[0].1 - SUPPORT[0].0) * i as f64 / (n - 1) as f64,
                SUPPORT[1].0 + (SUPPORT[1].1 - SUPPORT[1].0) * j as f64 / (n - 1) as f64,
            ];
            let v = mb.value(&x);
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    let mut x = best.1;
    let mut g = [0.0; 2];
    let mut step = 0.05;
    let mut v = best.0;
    for _ in 0..20_000 {
        mb.grad(&x, &mut g);
        let trial = [x[0] - step * g[0], x[1] - step * g[1]];
        let vt = mb.value(&trial);
        if vt <= v {
            x = trial;
            v = vt;
            step *= 1.1;
        } else {
            step *= 0.5;
        }
        if step < 1e-14 {
            break;
        }
    }
    (v, x)
}
