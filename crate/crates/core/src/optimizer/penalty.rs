//! Quadratic penalties for the Laplacian constraints and their gradients.
//!
//! Both problems share the symmetry, row-sum and off-graph terms:
//!
//! ```text
//! rho1 ||L - L^T||_F^2 + rho2 ||L 1||^2 + rho4 ||L o M||_F^2
//! ```
//!
//! Problem A adds `rho3 ||diag(L) - d||^2`, problem B adds
//! `rho3 (tr L - D)^2`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::DegreeSequence;
use crate::Matrix;

/// Weights of the four penalty terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub rho4: f64,
}

impl PenaltyWeights {
    pub fn uniform(rho: f64) -> Self {
        Self {
            rho1: rho,
            rho2: rho,
            rho3: rho,
            rho4: rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
            ("rho4", self.rho4),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self::uniform(10.0)
    }
}

/// Target for the diagonal of the learned Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// Problem A: `||diag(L) - d||_2 < theta`.
    Degree(DegreeSequence),
    /// Problem B: `|tr L - D| < theta`.
    DegreeSum(f64),
}

fn check_dims(l: &Matrix, mask: &Matrix) -> Result<usize> {
    let n = l.nrows();
    if l.ncols() != n || mask.dim() != (n, n) {
        return invalid("penalty inputs must be square and of equal size");
    }
    Ok(n)
}

fn shared_terms(l: &Matrix, rho: &PenaltyWeights, mask: &Matrix) -> f64 {
    let n = l.nrows();
    let mut asym = 0.0;
    let mut off_graph = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = l[[i, j]] - l[[j, i]];
            asym += d * d;
            let m = mask[[i, j]] * l[[i, j]];
            off_graph += m * m;
        }
    }
    let row_sums: f64 = l.rows().into_iter().map(|r| r.sum().powi(2)).sum();
    rho.rho1 * asym + rho.rho2 * row_sums + rho.rho4 * off_graph
}

fn shared_gradient(l: &Matrix, rho: &PenaltyWeights, mask: &Matrix) -> Matrix {
    let n = l.nrows();
    let row_sums: Vec<f64> = l.rows().into_iter().map(|r| r.sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        4.0 * rho.rho1 * (l[[i, j]] - l[[j, i]])
            + 2.0 * rho.rho2 * row_sums[i]
            + 2.0 * rho.rho4 * mask[[i, j]] * mask[[i, j]] * l[[i, j]]
    })
}

pub fn penalty_a(
    l: &Matrix,
    d: &DegreeSequence,
    rho: &PenaltyWeights,
    mask: &Matrix,
) -> Result<f64> {
    let n = check_dims(l, mask)?;
    if d.len() != n {
        return invalid("degree sequence length does not match the Laplacian");
    }
    let degree: f64 = (0..n).map(|i| (l[[i, i]] - d.values()[i]).powi(2)).sum();
    Ok(shared_terms(l, rho, mask) + rho.rho3 * degree)
}

pub fn penalty_b(l: &Matrix, degree_sum: f64, rho: &PenaltyWeights, mask: &Matrix) -> Result<f64> {
    check_dims(l, mask)?;
    let gap = l.diag().sum() - degree_sum;
    Ok(shared_terms(l, rho, mask) + rho.rho3 * gap * gap)
}

pub fn penalty_a_gradient(
    l: &Matrix,
    d: &DegreeSequence,
    rho: &PenaltyWeights,
    mask: &Matrix,
) -> Result<Matrix> {
    let n = check_dims(l, mask)?;
    if d.len() != n {
        return invalid("degree sequence length does not match the Laplacian");
    }
    let mut g = shared_gradient(l, rho, mask);
    for i in 0..n {
        g[[i, i]] += 2.0 * rho.rho3 * (l[[i, i]] - d.values()[i]);
    }
    Ok(g)
}

pub fn penalty_b_gradient(
    l: &Matrix,
    degree_sum: f64,
    rho: &PenaltyWeights,
    mask: &Matrix,
) -> Result<Matrix> {
    let n = check_dims(l, mask)?;
    let mut g = shared_gradient(l, rho, mask);
    let gap = l.diag().sum() - degree_sum;
    for i in 0..n {
        g[[i, i]] += 2.0 * rho.rho3 * gap;
    }
    Ok(g)
}

/// Penalty for whichever problem `constraint` describes.
pub fn penalty(
    l: &Matrix,
    constraint: &Constraint,
    rho: &PenaltyWeights,
    mask: &Matrix,
) -> Result<f64> {
    match constraint {
        Constraint::Degree(d) => penalty_a(l, d, rho, mask),
        Constraint::DegreeSum(s) => penalty_b(l, *s, rho, mask),
    }
}

pub fn penalty_gradient(
    l: &Matrix,
    constraint: &Constraint,
    rho: &PenaltyWeights,
    mask: &Matrix,
) -> Result<Matrix> {
    match constraint {
        Constraint::Degree(d) => penalty_a_gradient(l, d, rho, mask),
        Constraint::DegreeSum(s) => penalty_b_gradient(l, *s, rho, mask),
    }
}
