//! Exact moments of the residual error `e(k) = x(k) - gamma 1` and the
//! closed-form mean squared error.
//!
//! With `c ~ N(0, I)` the MSE at time `t` splits into three terms:
//!
//! ```text
//! MSE(t) = alpha^2 t                                    (drift of the average)
//!        + alpha^2/2 sum_{i>=2} (1 - exp(-2 lambda_i t)) / lambda_i
//!        + tr(Q(t) Q(t)^T),     Q(t) = exp(-L t) (I - 11^T / n)
//! ```
//!
//! and for large `t` it approaches `AMSE(t) = alpha^2 t + alpha^2/2 sum 1/lambda_i`.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::SpectralDecomposition;
use crate::{Matrix, Vector};

/// Mean and covariance of the residual error after `step` EM iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub mean: Vector,
    pub covariance: Matrix,
    pub step: usize,
}

impl MomentState {
    /// `mu(0) = c - gamma 1`, `Sigma(0) = 0`.
    pub fn initial(c: &Vector) -> Self {
        let n = c.len();
        let gamma = c.mean().unwrap_or(0.0);
        Self {
            mean: c.mapv(|x| x - gamma),
            covariance: Array2::zeros((n, n)),
            step: 0,
        }
    }

    /// Advances one EM step:
    /// `mu' = (I - eta L) mu`, `Sigma' = (I - eta L) Sigma (I - eta L)^T + alpha^2 eta I`.
    pub fn step(&self, l: &Matrix, eta: f64, alpha: f64) -> Result<Self> {
        let n = self.mean.len();
        if l.dim() != (n, n) || self.covariance.dim() != (n, n) {
            return invalid("moment state and Laplacian dimensions disagree");
        }
        let a = Array2::<f64>::eye(n) - l * eta;
        let mean = a.dot(&self.mean);
        let mut covariance = a.dot(&self.covariance).dot(&a.t());
        covariance
            .diag_mut()
            .mapv_inplace(|v| v + alpha * alpha * eta);
        Ok(Self {
            mean,
            covariance,
            step: self.step + 1,
        })
    }

    /// Iterates [`MomentState::step`] `steps` times.
    pub fn advance(&self, l: &Matrix, eta: f64, alpha: f64, steps: usize) -> Result<Self> {
        let mut s = self.clone();
        for _ in 0..steps {
            s = s.step(l, eta, alpha)?;
        }
        Ok(s)
    }
}

/// `exp(-L T) (c - gamma 1)`: the EM mean in the limit `N -> inf`.
pub fn asymptotic_mean(decomp: &SpectralDecomposition, c: &Vector, t: f64) -> Result<Vector> {
    if c.len() != decomp.dim() {
        return invalid("initial vector dimension does not match the Laplacian");
    }
    let gamma = c.mean().unwrap_or(0.0);
    Ok(decomp.matrix_exp_neg(t)?.dot(&c.mapv(|x| x - gamma)))
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("time must be finite and >= 0, got {t}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return invalid(format!("alpha must be finite and >= 0, got {alpha}"));
    }
    Ok(())
}

/// `(alpha^2 / 2 lambda) (1 - exp(-2 lambda t))`, evaluated with `expm1`.
fn theta(lambda: f64, t: f64, alpha: f64) -> f64 {
    0.5 * alpha * alpha * (-(-2.0 * lambda * t).exp_m1()) / lambda
}

/// Per-mode variances `(alpha^2 t, theta_2, ..., theta_n)` of the limiting
/// covariance in the eigenbasis.
pub fn covariance_spectrum(decomp: &SpectralDecomposition, t: f64, alpha: f64) -> Result<Vector> {
    check_time(t)?;
    check_alpha(alpha)?;
    decomp.require_connected()?;
    Ok(Array1::from_iter(
        decomp.eigenvalues().iter().enumerate().map(|(i, &l)| {
            if i == 0 {
                alpha * alpha * t
            } else {
                theta(l, t, alpha)
            }
        }),
    ))
}

/// `U diag(alpha^2 T, theta_2, ..., theta_n) U^T`.
pub fn asymptotic_covariance(decomp: &SpectralDecomposition, t: f64, alpha: f64) -> Result<Matrix> {
    Ok(decomp.with_weights(&covariance_spectrum(decomp, t, alpha)?))
}

/// `Q(t) = exp(-L t) (I - 11^T / n)`.
pub fn q_matrix(decomp: &SpectralDecomposition, t: f64) -> Result<Matrix> {
    let n = decomp.dim();
    let e = decomp.matrix_exp_neg(t)?;
    let centering = Array2::<f64>::eye(n) - Array2::<f64>::from_elem((n, n), 1.0 / n as f64);
    Ok(e.dot(&centering))
}

/// The three additive parts of `MSE(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseTerms {
    /// `alpha^2 t`: diffusion of the network average.
    pub drift: f64,
    /// `alpha^2/2 sum_{i>=2} (1 - exp(-2 lambda_i t)) / lambda_i`.
    pub fluctuation: f64,
    /// `tr(Q(t) Q(t)^T) = sum_{i>=2} exp(-2 lambda_i t)`.
    pub transient: f64,
}

impl MseTerms {
    pub fn total(&self) -> f64 {
        self.drift + self.fluctuation + self.transient
    }
}

pub fn theoretical_mse_terms(
    decomp: &SpectralDecomposition,
    t: f64,
    alpha: f64,
) -> Result<MseTerms> {
    let spectrum = covariance_spectrum(decomp, t, alpha)?;
    let transient = decomp
        .eigenvalues()
        .iter()
        .skip(1)
        .map(|l| (-2.0 * l * t).exp())
        .sum();
    Ok(MseTerms {
        drift: spectrum[0],
        fluctuation: spectrum.iter().skip(1).sum(),
        transient,
    })
}

pub fn theoretical_mse(decomp: &SpectralDecomposition, t: f64, alpha: f64) -> Result<f64> {
    Ok(theoretical_mse_terms(decomp, t, alpha)?.total())
}

/// Large-`t` asymptote `alpha^2 t + alpha^2/2 sum_{i>=2} 1/lambda_i`.
pub fn amse(decomp: &SpectralDecomposition, t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    check_alpha(alpha)?;
    Ok(alpha * alpha * t + 0.5 * alpha * alpha * decomp.inverse_eigenvalue_sum()?)
}

/// Theory and asymptote sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseCurve {
    pub times: Vec<f64>,
    pub mse: Vec<f64>,
    pub amse: Vec<f64>,
    pub components: Vec<MseTerms>,
}

impl MseCurve {
    pub fn evaluate(decomp: &SpectralDecomposition, times: &[f64], alpha: f64) -> Result<Self> {
        let mut curve = Self {
            times: times.to_vec(),
            mse: Vec::with_capacity(times.len()),
            amse: Vec::with_capacity(times.len()),
            components: Vec::with_capacity(times.len()),
        };
        for &t in times {
            let terms = theoretical_mse_terms(decomp, t, alpha)?;
            curve.mse.push(terms.total());
            curve.amse.push(amse(decomp, t, alpha)?);
            curve.components.push(terms);
        }
        Ok(curve)
    }
}

/// Evenly spaced grid `0, tmax/(points-1), ..., tmax`.
pub fn time_grid(tmax: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| tmax * k as f64 / (points - 1) as f64)
            .collect(),
    }
}
