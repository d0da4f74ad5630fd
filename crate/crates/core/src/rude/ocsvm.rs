//! One-class SVM (Schölkopf ν formulation) with an RBF kernel, solved by SMO.
//!
//! Dual: minimise ½αᵀQα subject to 0 ≤ αᵢ ≤ 1 and Σαᵢ = νl, with
//! Qᵢⱼ = exp(−γ‖xᵢ − xⱼ‖²). Working-set selection and the two-variable
//! update follow the second-order scheme of Fan, Chen and Lin (2005).

use crate::error::{invalid, Error, Result};

/// KKT violation at which SMO stops.
pub const STOP_EPS: f64 = 1e-6;
/// Decision values below this count as non-positive. Margin support vectors
/// have a decision value of exactly zero, up to solver precision.
pub const LABEL_TOL: f64 = 1e-5;

const TAU: f64 = 1e-12;

/// Solved dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OcSvmSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    /// Decision value Σⱼ αⱼ K(xⱼ, xᵢ) − ρ for each training point.
    pub decision: Vec<f64>,
    pub iterations: usize,
}

impl OcSvmSolution {
    /// A point is anomalous unless it lies strictly inside the boundary, so
    /// margin support vectors are anomalous too (libsvm's sign convention).
    /// An isolated point typically ends up exactly on the margin with
    /// αᵢ = ρ, which a strict `f < 0` rule would never flag.
    pub fn labels(&self) -> Vec<bool> {
        self.decision.iter().map(|f| *f < LABEL_TOL).collect()
    }
}

fn sq_dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// RBF kernel matrix, row-major.
pub fn rbf_kernel(points: &[[f64; 2]], gamma: f64) -> Vec<f64> {
    let n = points.len();
    let mut q = vec![1.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let k = (-gamma * sq_dist(&points[i], &points[j])).exp();
            q[i * n + j] = k;
            q[j * n + i] = k;
        }
    }
    q
}

/// γ = 1 / (2·median pairwise squared distance). Falls back to the median of
/// the non-zero distances when more than half the pairs coincide; `None`
/// when all points are identical.
pub fn median_heuristic_gamma(points: &[[f64; 2]]) -> Option<f64> {
    let mut d: Vec<f64> = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for (i, a) in points.iter().enumerate() {
        for b in &points[..i] {
            d.push(sq_dist(a, b));
        }
    }
    let mut med = median_in_place(&mut d)?;
    if med == 0.0 {
        d.retain(|v| *v > 0.0);
        med = median_in_place(&mut d)?;
    }
    (med > 0.0 && med.is_finite()).then(|| 0.5 / med)
}

fn median_in_place(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let odd = v.len() % 2 == 1;
    let mid = v.len() / 2;
    let (lo, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let m = *m;
    if odd {
        Some(m)
    } else {
        let below = lo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(0.5 * (below + m))
    }
}

pub fn ocsvm_solve(points: &[[f64; 2]], nu: f64, gamma: f64) -> Result<OcSvmSolution> {
    let n = points.len();
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(invalid("nu", format!("{nu} is outside (0, 1]")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", format!("{gamma} must be positive and finite")));
    }
    if n < 3 {
        return Err(invalid("points", "one-class SVM needs at least 3 points"));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::NonFinite);
    }
    let q = rbf_kernel(points, gamma);

    // feasible start: the first ⌊νl⌋ at the bound, the next takes the fraction
    let total = nu * n as f64;
    let mut alpha = vec![0.0; n];
    let full = (total.floor() as usize).min(n);
    alpha[..full].fill(1.0);
    if full < n {
        alpha[full] = total - full as f64;
    }
    let mut grad = vec![0.0; n];
    for (j, &a) in alpha.iter().enumerate() {
        if a != 0.0 {
            for (i, g) in grad.iter_mut().enumerate() {
                *g += q[i * n + j] * a;
            }
        }
    }

    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    loop {
        // i maximises −G over those that can still increase
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if alpha[t] < 1.0 && -grad[t] >= g_max {
                g_max = -grad[t];
                i_sel = t;
            }
        }
        // j: second-order choice among those that can decrease
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if alpha[t] > 0.0 {
                g_max2 = g_max2.max(grad[t]);
                let b = g_max + grad[t];
                if b > 0.0 && i_sel != usize::MAX {
                    let a = q[i_sel * n + i_sel] + q[t * n + t] - 2.0 * q[i_sel * n + t];
                    let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                    if obj <= best {
                        best = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if g_max + g_max2 < STOP_EPS || j_sel == usize::MAX {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::SolverNotConverged { iterations });
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let quad = (q[i * n + i] + q[j * n + j] - 2.0 * q[i * n + j]).max(TAU);
        let delta = (grad[i] - grad[j]) / quad;
        let sum = alpha[i] + alpha[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut ai = old_i - delta;
        let mut aj = old_j + delta;
        if sum > 1.0 {
            if ai > 1.0 {
                ai = 1.0;
                aj = sum - 1.0;
            }
        } else if aj < 0.0 {
            aj = 0.0;
            ai = sum;
        }
        if sum > 1.0 {
            if aj > 1.0 {
                aj = 1.0;
                ai = sum - 1.0;
            }
        } else if ai < 0.0 {
            ai = 0.0;
            aj = sum;
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }

    let rho = compute_rho(&alpha, &grad);
    let decision = grad.iter().map(|g| g - rho).collect();
    Ok(OcSvmSolution {
        alpha,
        rho,
        decision,
        iterations,
    })
}

/// ρ from the KKT conditions: the mean gradient over free variables, or the
/// midpoint of the feasible interval when none are free.
pub fn compute_rho(alpha: &[f64], grad: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for (&a, &g) in alpha.iter().zip(grad) {
        if a >= 1.0 {
            lb = lb.max(g);
        } else if a <= 0.0 {
            ub = ub.min(g);
        } else {
            sum_free += g;
            n_free += 1;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        0.5 * (ub + lb)
    }
}

/// Fit on `points` and label each one; `true` marks an anomaly.
///
/// When every point is identical there is nothing to separate and all
/// points are nominal.
pub fn ocsvm_fit_predict(points: &[[f64; 2]], nu: f64, gamma: f64) -> Result<Vec<bool>> {
    if points.len() >= 3 && points.iter().all(|p| p == &points[0]) && nu > 0.0 && nu <= 1.0 {
        return Ok(vec![false; points.len()]);
    }
    ocsvm_solve(points, nu, gamma).map(|s| s.labels())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize, r: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 2.399_963;
                let rr = r * ((i % 7) as f64 / 7.0 + 0.1);
                [rr * a.cos(), rr * a.sin()]
            })
            .collect()
    }

    #[test]
    fn far_point_is_anomalous() {
        let mut pts = ring(100, 1.0);
        pts.push([50.0, 0.0]);
        let gamma = median_heuristic_gamma(&pts).unwrap();
        let labels = ocsvm_fit_predict(&pts, 0.1, gamma).unwrap();
        assert!(labels[100]);
        // margin support vectors count, so the bound is ν + 0.05 rather than ν
        assert!(labels.iter().filter(|l| **l).count() <= 15);
    }

    #[test]
    fn kkt_holds_at_solution() {
        let pts = ring(60, 2.0);
        let s = ocsvm_solve(&pts, 0.2, 0.5).unwrap();
        let sum: f64 = s.alpha.iter().sum();
        assert!((sum - 12.0).abs() < 1e-9);
        for (a, f) in s.alpha.iter().zip(&s.decision) {
            assert!((0.0..=1.0).contains(a));
            if *a <= 0.0 {
                assert!(*f > -1e-5, "{a} {f}");
            } else if *a >= 1.0 {
                assert!(*f < 1e-5);
            } else {
                assert!(f.abs() < 1e-5);
            }
        }
    }

    #[test]
    fn identical_points_are_nominal() {
        let pts = vec![[1.0, 2.0]; 10];
        assert!(median_heuristic_gamma(&pts).is_none());
        assert_eq!(ocsvm_fit_predict(&pts, 0.1, 1.0).unwrap(), vec![false; 10]);
    }

    #[test]
    fn median_gamma() {
        // squared distances 1, 4, 1 → median 1
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert_eq!(median_heuristic_gamma(&pts), Some(0.5));
        // mostly coincident: falls back to non-zero distances
        let pts = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [3.0, 0.0]];
        assert_eq!(median_heuristic_gamma(&pts), Some(0.5 / 9.0));
    }

    #[test]
    fn bad_parameters() {
        let pts = ring(10, 1.0);
        assert!(ocsvm_fit_predict(&pts, 0.0, 1.0).is_err());
        assert!(ocsvm_fit_predict(&pts, 1.5, 1.0).is_err());
        assert!(ocsvm_fit_predict(&pts, 0.5, -1.0).is_err());
        assert!(ocsvm_fit_predict(&pts[..2], 0.5, 1.0).is_err());
    }
}
