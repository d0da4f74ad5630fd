//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use magsweep::rude::TrajectoryMatrix;

/// Cyclic Jacobi rotations on a dense symmetric matrix; returns all eigenvalues, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    a[p][k] = c * rp[k] - s * rq[k];
                    a[q][k] = s * rp[k] + c * rq[k];
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn covariance(m: &TrajectoryMatrix) -> Vec<Vec<f64>> {
    let (l, r) = (m.window(), m.n_intervals());
    let mean: Vec<f64> = (0..l).map(|i| (0..r).map(|j| m.get(i, j)).sum::<f64>() / r as f64).collect();
    (0..l)
        .map(|a| {
            (0..l)
                .map(|b| (0..r).map(|j| (m.get(a, j) - mean[a]) * (m.get(b, j) - mean[b])).sum::<f64>() / (r - 1) as f64)
                .collect()
        })
        .collect()
}

/// Solves the one-class dual by accelerated projected gradient, independent of SMO.
pub struct QpOracle {
    pub alpha: Vec<f64>,
    pub decision: Vec<f64>,
}

/// Euclidean projection onto {0 ≤ α ≤ 1, Σα = total} by bisection on the shift.
pub fn project_capped_simplex(y: &[f64], total: f64) -> Vec<f64> {
    let sum_at = |t: f64| y.iter().map(|v| (v - t).clamp(0.0, 1.0)).sum::<f64>();
    let (mut lo, mut hi) = (
        y.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0,
        y.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) > total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    y.iter().map(|v| (v - t).clamp(0.0, 1.0)).collect()
}

pub fn qp_oracle(points: &[[f64; 2]], nu: f64, gamma: f64) -> QpOracle {
    let n = points.len();
    let k = |a: &[f64; 2], b: &[f64; 2]| (-gamma * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))).exp();
    let q: Vec<Vec<f64>> = points.iter().map(|a| points.iter().map(|b| k(a, b)).collect()).collect();
    let grad = |a: &[f64]| -> Vec<f64> { q.iter().map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum()).collect() };
    // Lipschitz bound: Gershgorin
    let lip = q.iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
    let total = nu * n as f64;
    let mut x = vec![total / n as f64; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..40_000 {
        let g = grad(&y);
        let step: Vec<f64> = y.iter().zip(&g).map(|(v, gi)| v - gi / lip).collect();
        let xn = project_capped_simplex(&step, total);
        let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = xn.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / tn * (a - b)).collect();
        x = xn;
        t = tn;
    }
    let g = grad(&x);
    // ρ over free variables, else the midpoint of the KKT interval
    let free: Vec<f64> = x.iter().zip(&g).filter(|(a, _)| **a > 1e-6 && **a < 1.0 - 1e-6).map(|(_, g)| *g).collect();
    let rho = if free.is_empty() {
        let lb = x
            .iter()
            .zip(&g)
            .filter(|(a, _)| **a >= 1.0 - 1e-6)
            .map(|(_, g)| *g)
            .fold(f64::NEG_INFINITY, f64::max);
        let ub = x.iter().zip(&g).filter(|(a, _)| **a <= 1e-6).map(|(_, g)| *g).fold(f64::INFINITY, f64::min);
        0.5 * (lb + ub)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    QpOracle {
        decision: g.iter().map(|v| v - rho).collect(),
        alpha: x,
    }
}

pub fn objective(points: &[[f64; 2]], alpha: &[f64], gamma: f64) -> f64 {
    let mut s = 0.0;
    for (a, p) in alpha.iter().zip(points) {
        for (b, q) in alpha.iter().zip(points) {
            s += a * b * (-gamma * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))).exp();
        }
    }
    0.5 * s
}

pub const FS: f64 = 100.0;

pub fn rel_l2(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = want.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Hann-tapered tone of `n` samples. Untapered tones are not spectrally
/// disjoint: their edge discontinuities spread energy over every scale.
pub fn tapered(n: usize, f: f64, amp: f64, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|i| amp * (2.0 * PI * f * i as f64 / FS + phase).sin() * (PI * i as f64 / (n - 1) as f64).sin().powi(2))
        .collect()
}
