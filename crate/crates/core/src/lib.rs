//! Noisy average consensus on undirected graphs.
//!
//! The consensus dynamics are the linear SDE `dx = -L x dt + alpha db`,
//! discretized with the Euler-Maruyama recursion
//! `x(k+1) = x(k) - eta L x(k) + alpha sqrt(eta) z(k)`.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | benchmark graphs, unweighted Laplacians, masks |
//! | [`io`] | edge-list and CSV matrix formats |
//! | [`spectral`] | Jacobi eigensolver, `exp(-Lt)`, inverse eigenvalue sum |
//! | [`em`] | Euler-Maruyama sampling and Monte Carlo MSE |
//! | [`moments`] | exact moment recursion and closed-form MSE / AMSE |
//! | [`optimizer`] | deep-unfolded gradient optimization of the Laplacian |

// `!(x > 0.0)` style guards are intentional so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod em;
pub mod error;
pub mod graph;
pub mod io;
pub mod moments;
pub mod optimizer;
pub mod spectral;

pub use em::{monte_carlo_mse, simulate, simulate_ensemble, SimConfig, TrajectoryEnsemble};
pub use error::{Error, Result};
pub use graph::{DegreeSequence, Graph};
pub use moments::{MomentState, MseCurve, MseTerms};
pub use optimizer::{
    optimize, AdamConfig, AdamState, Constraint, IterationRecord, MiniBatch, OptimizeOutcome,
    PenaltyWeights, ProblemSpec,
};
pub use spectral::{sym_eig, SpectralDecomposition};

/// Dense row-major real matrix.
pub type Matrix = ndarray::Array2<f64>;
/// Dense real vector.
pub type Vector = ndarray::Array1<f64>;
