//! Two-component PCA of trajectory-matrix intervals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Result};

use super::TrajectoryMatrix;

/// Each interval projected onto the two leading principal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPoints {
    pub points: Vec<[f64; 2]>,
    /// Leading covariance eigenvalues, descending; equal to the sample variance of each coordinate.
    pub eigenvalues: [f64; 2],
}

/// Sorted (descending) eigenpairs of a symmetric matrix.
fn leading_eigenpairs(m: DMatrix<f64>, count: usize) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(count)
        .map(|i| (eig.eigenvalues[i].max(0.0), eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

/// Flip so the largest-magnitude entry is positive; returns whether it flipped.
fn fix_sign(v: &mut [f64]) -> bool {
    let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

/// Feature-centred PCA over intervals; uses whichever of the L×L covariance or
/// R×R Gram matrix is smaller.
pub fn pca2(matrix: &TrajectoryMatrix) -> Result<ReducedPoints> {
    let use_gram = matrix.window() > matrix.n_intervals();
    pca2_route(matrix, use_gram)
}

fn pca2_route(matrix: &TrajectoryMatrix, use_gram: bool) -> Result<ReducedPoints> {
    let (l, r) = (matrix.window(), matrix.n_intervals());
    if r < 3 {
        return Err(invalid("n_intervals", "PCA needs at least 3 intervals"));
    }
    let mut mean = vec![0.0; l];
    for col in matrix.columns() {
        for (m, v) in mean.iter_mut().zip(col) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= r as f64);
    // centred data, one row per interval
    let centred = DMatrix::from_fn(r, l, |i, k| matrix.get(k, i) - mean[k]);
    let dof = (r - 1) as f64;
    let scale = centred.amax();
    let magnitude = matrix.columns().flatten().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut points = vec![[0.0; 2]; r];
    let mut eigenvalues = [0.0; 2];
    // centring a constant leaves only roundoff of the mean
    if scale <= magnitude * f64::EPSILON * r as f64 {
        return Ok(ReducedPoints { points, eigenvalues });
    }
    // negligible eigenvalues are treated as exact zeros
    let floor = scale * scale * 1e-24 * (l * r) as f64;

    if use_gram {
        let gram = &centred * centred.transpose() / dof;
        for (c, (lambda, u)) in leading_eigenpairs(gram, 2).into_iter().enumerate() {
            if lambda <= floor {
                continue;
            }
            // principal axis v = Xcᵀ u / sqrt(dof·λ); projections are sqrt(dof·λ)·u
            let norm = (dof * lambda).sqrt();
            let u = DVector::from_vec(u);
            let mut v: Vec<f64> = (0..l).map(|k| centred.column(k).dot(&u) / norm).collect();
            let sign = if fix_sign(&mut v) { -1.0 } else { 1.0 };
            eigenvalues[c] = lambda;
            for (p, ui) in points.iter_mut().zip(u.iter()) {
                p[c] = sign * norm * ui;
            }
        }
    } else {
        let cov = centred.transpose() * &centred / dof;
        for (c, (lambda, mut v)) in leading_eigenpairs(cov, 2).into_iter().enumerate() {
            if lambda <= floor {
                continue;
            }
            fix_sign(&mut v);
            eigenvalues[c] = lambda;
            for (i, p) in points.iter_mut().enumerate() {
                p[c] = centred.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
            }
        }
    }
    Ok(ReducedPoints { points, eigenvalues })
}
