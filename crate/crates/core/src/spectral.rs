//! Symmetric eigendecomposition and the spectral quantities built on it.

use ndarray::{Array1, Array2, Axis};

use crate::error::{invalid, Error, Result};
use crate::{Matrix, Vector};

const SYMMETRY_TOL: f64 = 1e-10;
const OFF_DIAG_REL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
/// Eigenvalues smaller than this in magnitude are stored as exactly zero.
pub const ZERO_EIGEN_TOL: f64 = 1e-10;

/// `A = U diag(lambda) U^T` with eigenvalues ascending and orthonormal
/// eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vector,
    eigenvectors: Matrix,
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Sweeps over all `(p, q)` pairs until the off-diagonal Frobenius norm
/// drops below `1e-12 * ||A||_F`, with at most 100 sweeps. Each eigenvector
/// is signed so that its largest-magnitude entry is positive.
pub fn sym_eig(a: &Matrix) -> Result<SpectralDecomposition> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return invalid(format!("matrix must be square, got {rows}x{cols}"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return invalid("matrix has non-finite entries");
    }
    let n = rows;
    for i in 0..n {
        for j in i + 1..n {
            if (a[[i, j]] - a[[j, i]]).abs() > SYMMETRY_TOL {
                return invalid(format!(
                    "matrix is not symmetric at ({i},{j}): {} vs {}",
                    a[[i, j]],
                    a[[j, i]]
                ));
            }
        }
    }

    let mut w = (a + &a.t()) * 0.5;
    let mut v = Array2::<f64>::eye(n);
    let threshold = OFF_DIAG_REL_TOL * frobenius(&w);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&w) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&w) > threshold {
        return Err(Error::NumericalFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[[i, i]].total_cmp(&w[[j, j]]));

    let eigenvalues = Array1::from_iter(order.iter().map(|&i| {
        let lambda = w[[i, i]];
        if lambda.abs() < ZERO_EIGEN_TOL {
            0.0
        } else {
            lambda
        }
    }));
    let mut eigenvectors = v.select(Axis(1), &order);
    for mut col in eigenvectors.columns_mut() {
        let mut pivot = 0;
        for (k, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = k;
            }
        }
        if col[pivot] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = w[[p, q]];
    if apq == 0.0 {
        return;
    }
    let n = w.nrows();
    let tau = (w[[q, q]] - w[[p, p]]) / (2.0 * apq);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let (akp, akq) = (w[[k, p]], w[[k, q]]);
        w[[k, p]] = c * akp - s * akq;
        w[[k, q]] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (w[[p, k]], w[[q, k]]);
        w[[p, k]] = c * apk - s * aqk;
        w[[q, k]] = s * apk + c * aqk;
    }
    w[[p, q]] = 0.0;
    w[[q, p]] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
        v[[k, p]] = c * vkp - s * vkq;
        v[[k, q]] = s * vkp + c * vkq;
    }
}

pub(crate) fn frobenius(a: &Matrix) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let mut acc = 0.0;
    for ((i, j), x) in a.indexed_iter() {
        if i != j {
            acc += x * x;
        }
    }
    acc.sqrt()
}

impl SpectralDecomposition {
    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    /// Column `i` is the unit eigenvector for `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `U diag(f(lambda_i)) U^T`, symmetrized so the result is exactly symmetric.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        self.with_weights(&self.eigenvalues.mapv(f))
    }

    /// `U diag(weights) U^T`, exactly symmetric.
    pub fn with_weights(&self, weights: &Vector) -> Matrix {
        let u = &self.eigenvectors;
        let scaled = u * &weights.view().insert_axis(Axis(0));
        let m = scaled.dot(&u.t());
        (&m + &m.t()) * 0.5
    }

    pub fn reconstruct(&self) -> Matrix {
        self.spectral_map(|l| l)
    }

    /// `exp(-A t) = sum_i exp(-lambda_i t) u_i u_i^T`.
    pub fn matrix_exp_neg(&self, t: f64) -> Result<Matrix> {
        if !(t >= 0.0) {
            return invalid(format!("time must be nonnegative, got {t}"));
        }
        Ok(self.spectral_map(|l| (-l * t).exp()))
    }

    /// Second-smallest eigenvalue.
    pub fn algebraic_connectivity(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// Errors unless every eigenvalue after the first is positive.
    pub fn require_connected(&self) -> Result<()> {
        let lambda2 = self.algebraic_connectivity();
        if self.dim() < 2 || lambda2 <= ZERO_EIGEN_TOL {
            return Err(Error::DisconnectedGraph { lambda2 });
        }
        Ok(())
    }

    /// `sum_{i >= 2} 1 / lambda_i`.
    pub fn inverse_eigenvalue_sum(&self) -> Result<f64> {
        self.require_connected()?;
        Ok(self.eigenvalues.iter().skip(1).map(|l| 1.0 / l).sum())
    }
}
