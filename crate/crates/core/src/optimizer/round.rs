//! Projection of a learned matrix onto the exactly feasible set.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{DegreeSequence, Graph};
use crate::spectral::frobenius;
use crate::Matrix;

use super::penalty::Constraint;

/// Symmetrizes and removes off-graph weights, leaving the diagonal as is.
fn symmetrize_on_graph(l_in: &Matrix, g: &Graph) -> Result<Matrix> {
    let n = g.node_count();
    if l_in.dim() != (n, n) {
        return invalid(format!("matrix is {:?}, graph has {n} nodes", l_in.dim()));
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j || g.has_edge(i, j) {
            (l_in[[i, j]] + l_in[[j, i]]) * 0.5
        } else {
            0.0
        }
    }))
}

/// `L_ii <- L_ii - (L 1)_i`, evaluated as minus the off-diagonal row sum.
fn absorb_row_sums(l: &mut Matrix) {
    let n = l.nrows();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| l[[i, j]]).sum();
        l[[i, i]] = -off;
    }
}

/// Round function for the degree-sequence problem.
///
/// Symmetrize, pin the diagonal to `d`, zero non-edges, then move each row
/// sum into the diagonal. Fails when the final diagonal is `theta` or more
/// away from `d`.
pub fn round_a(l_in: &Matrix, d: &DegreeSequence, theta: f64, g: &Graph) -> Result<Matrix> {
    if d.len() != g.node_count() {
        return invalid("degree sequence length does not match the graph");
    }
    let mut l = symmetrize_on_graph(l_in, g)?;
    for (i, &di) in d.values().iter().enumerate() {
        l[[i, i]] = di;
    }
    absorb_row_sums(&mut l);
    let residual = degree_gap(&l, d);
    if !(residual < theta) {
        return Err(Error::OptimizationFailed { residual, theta });
    }
    Ok(l)
}

/// Round function for the degree-sum problem. Fails when
/// `|tr L - D| >= theta`.
pub fn round_b(l_in: &Matrix, degree_sum: f64, theta: f64, g: &Graph) -> Result<Matrix> {
    let mut l = symmetrize_on_graph(l_in, g)?;
    absorb_row_sums(&mut l);
    let residual = (l.diag().sum() - degree_sum).abs();
    if !(residual < theta) {
        return Err(Error::OptimizationFailed { residual, theta });
    }
    Ok(l)
}

pub fn round(l_in: &Matrix, constraint: &Constraint, theta: f64, g: &Graph) -> Result<Matrix> {
    match constraint {
        Constraint::Degree(d) => round_a(l_in, d, theta, g),
        Constraint::DegreeSum(s) => round_b(l_in, *s, theta, g),
    }
}

fn degree_gap(l: &Matrix, d: &DegreeSequence) -> f64 {
    l.diag()
        .iter()
        .zip(d.values())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Constraint residuals of a candidate Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `||L - L^T||_F`
    pub asymmetry: f64,
    /// `||L 1||_2`
    pub row_sum_norm: f64,
    /// `||L o M||_F`
    pub off_graph_norm: f64,
    /// `||diag(L) - d||_2` or `|tr L - D|`.
    pub degree_gap: f64,
    pub trace: f64,
}

impl FeasibilityReport {
    pub fn evaluate(l: &Matrix, constraint: &Constraint, g: &Graph) -> Self {
        let mask = g.mask_matrix();
        let asymmetry = frobenius(&(l - &l.t()));
        let row_sum_norm = l
            .rows()
            .into_iter()
            .map(|r| r.sum().powi(2))
            .sum::<f64>()
            .sqrt();
        let off_graph_norm = frobenius(&(l * &mask));
        let degree_gap = match constraint {
            Constraint::Degree(d) => degree_gap(l, d),
            Constraint::DegreeSum(s) => (l.diag().sum() - s).abs(),
        };
        Self {
            asymmetry,
            row_sum_norm,
            off_graph_norm,
            degree_gap,
            trace: l.diag().sum(),
        }
    }
}
