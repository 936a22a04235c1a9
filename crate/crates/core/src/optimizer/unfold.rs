//! The unrolled Euler-Maruyama loss and its exact reverse-mode gradient.
//!
//! The batch is carried as an `n x K` matrix whose columns are the sample
//! states, so every step of the recursion is one matrix product:
//!
//! ```text
//! X(k+1) = X(k) - eta L X(k) + alpha sqrt(eta) Z(k)
//! loss   = (1/K) ||X(N) - 1 gamma^T||_F^2 + P(L)
//! ```
//!
//! The noise `Z(k)` is treated as a constant of the forward pass. The
//! adjoint runs backwards with `A(N) = (2/K)(X(N) - 1 gamma^T)`,
//! `A(k) = (I - eta L)^T A(k+1)`, and the gradient is
//! `-eta sum_k A(k+1) X(k)^T` plus the penalty gradient.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, Array3, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::Matrix;

use super::batch::MiniBatch;
use super::penalty::{penalty, penalty_gradient};
use super::ProblemSpec;

/// Gaussian draws used by one forward pass, shape `(N, n, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRecord {
    noise: Array3<f64>,
}

impl NoiseRecord {
    pub fn draw<R: Rng + ?Sized>(steps: usize, n: usize, k: usize, rng: &mut R) -> Self {
        Self {
            noise: Array3::from_shape_simple_fn((steps, n, k), || {
                rng.sample::<f64, _>(StandardNormal)
            }),
        }
    }

    pub fn from_array(noise: Array3<f64>) -> Self {
        Self { noise }
    }

    /// `(steps, n, K)`.
    pub fn dim(&self) -> (usize, usize, usize) {
        self.noise.dim()
    }

    pub fn as_array(&self) -> &Array3<f64> {
        &self.noise
    }
}

/// Loss split into its data-fit and penalty parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossValue {
    pub data: f64,
    pub penalty: f64,
}

impl LossValue {
    pub fn total(&self) -> f64 {
        self.data + self.penalty
    }
}

/// Precomputed per-spec quantities shared by every loss evaluation.
pub(crate) struct Unrolled<'a> {
    spec: &'a ProblemSpec,
    mask: Matrix,
    eta: f64,
}

impl<'a> Unrolled<'a> {
    pub(crate) fn new(spec: &'a ProblemSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            mask: spec.graph.mask_matrix(),
            eta: spec.eta(),
        })
    }

    fn check(&self, l: &Matrix, batch: &MiniBatch, noise: &NoiseRecord) -> Result<()> {
        let n = self.spec.graph.node_count();
        if l.dim() != (n, n) {
            return invalid(format!("matrix is {:?}, graph has {n} nodes", l.dim()));
        }
        if batch.dim() != n {
            return invalid("mini-batch dimension does not match the graph");
        }
        if noise.dim() != (self.spec.unfold_steps, n, batch.len()) {
            return invalid(format!(
                "noise record {:?} does not match (N, n, K) = {:?}",
                noise.dim(),
                (self.spec.unfold_steps, n, batch.len())
            ));
        }
        Ok(())
    }

    /// States `X(0..=N)` stored side by side: block `k` is columns
    /// `k*K .. (k+1)*K`.
    fn forward(&self, l: &Matrix, batch: &MiniBatch, noise: &NoiseRecord) -> Matrix {
        let n = l.nrows();
        let k = batch.len();
        let steps = self.spec.unfold_steps;
        let scale = self.spec.alpha * self.eta.sqrt();
        let mut states = Array2::zeros((n, (steps + 1) * k));
        states.slice_mut(s![.., 0..k]).assign(&batch.initials.t());
        let mut lx = Array2::zeros((n, k));
        for step in 0..steps {
            let (done, mut rest) = states.view_mut().split_at(Axis(1), (step + 1) * k);
            let x = done.slice(s![.., step * k..]);
            general_mat_mul(1.0, l, &x, 0.0, &mut lx);
            let z = noise.noise.index_axis(Axis(0), step);
            ndarray::Zip::from(rest.slice_mut(s![.., 0..k]))
                .and(&x)
                .and(&lx)
                .and(&z)
                .for_each(|next, &xi, &lxi, &zi| *next = xi - self.eta * lxi + scale * zi);
        }
        states
    }

    /// `X(N) - 1 gamma^T`.
    fn residual(&self, states: &Matrix, batch: &MiniBatch) -> Matrix {
        let k = batch.len();
        let steps = self.spec.unfold_steps;
        let mut r = states.slice(s![.., steps * k..]).to_owned();
        for (mut col, g) in r.columns_mut().into_iter().zip(batch.gammas.iter()) {
            col.mapv_inplace(|v| v - g);
        }
        r
    }

    pub(crate) fn loss(
        &self,
        l: &Matrix,
        batch: &MiniBatch,
        noise: &NoiseRecord,
    ) -> Result<LossValue> {
        self.check(l, batch, noise)?;
        let states = self.forward(l, batch, noise);
        let r = self.residual(&states, batch);
        Ok(LossValue {
            data: r.iter().map(|v| v * v).sum::<f64>() / batch.len() as f64,
            penalty: penalty(l, &self.spec.constraint, &self.spec.penalty, &self.mask)?,
        })
    }

    pub(crate) fn loss_and_gradient(
        &self,
        l: &Matrix,
        batch: &MiniBatch,
        noise: &NoiseRecord,
    ) -> Result<(LossValue, Matrix)> {
        self.check(l, batch, noise)?;
        let n = l.nrows();
        let k = batch.len();
        let steps = self.spec.unfold_steps;
        let states = self.forward(l, batch, noise);
        let r = self.residual(&states, batch);
        let value = LossValue {
            data: r.iter().map(|v| v * v).sum::<f64>() / k as f64,
            penalty: penalty(l, &self.spec.constraint, &self.spec.penalty, &self.mask)?,
        };

        // adjoints A(1..=N), block j holds A(j+1)
        let mut adjoints = Array2::zeros((n, steps * k));
        let mut a = r * (2.0 / k as f64);
        let mut lt_a = Array2::zeros((n, k));
        for step in (1..=steps).rev() {
            adjoints
                .slice_mut(s![.., (step - 1) * k..step * k])
                .assign(&a);
            if step > 1 {
                general_mat_mul(1.0, &l.t(), &a, 0.0, &mut lt_a);
                a.scaled_add(-self.eta, &lt_a);
            }
        }

        let mut grad = penalty_gradient(l, &self.spec.constraint, &self.spec.penalty, &self.mask)?;
        let inputs = states.slice(s![.., 0..steps * k]);
        general_mat_mul(-self.eta, &adjoints, &inputs.t(), 1.0, &mut grad);
        Ok((value, grad))
    }
}

/// Draws fresh noise, evaluates the mini-batch loss, and returns the noise
/// so the same realization can be replayed by [`loss_gradient`].
pub fn unfolded_loss<R: Rng + ?Sized>(
    l: &Matrix,
    batch: &MiniBatch,
    spec: &ProblemSpec,
    rng: &mut R,
) -> Result<(LossValue, NoiseRecord)> {
    let unrolled = Unrolled::new(spec)?;
    let noise = NoiseRecord::draw(spec.unfold_steps, batch.dim(), batch.len(), rng);
    let value = unrolled.loss(l, batch, &noise)?;
    Ok((value, noise))
}

/// Loss with a given noise realization.
pub fn unfolded_loss_with_noise(
    l: &Matrix,
    batch: &MiniBatch,
    spec: &ProblemSpec,
    noise: &NoiseRecord,
) -> Result<LossValue> {
    Unrolled::new(spec)?.loss(l, batch, noise)
}

/// Exact gradient of the loss with the recorded noise held fixed.
pub fn loss_gradient(
    l: &Matrix,
    batch: &MiniBatch,
    spec: &ProblemSpec,
    noise: &NoiseRecord,
) -> Result<Matrix> {
    Ok(Unrolled::new(spec)?.loss_and_gradient(l, batch, noise)?.1)
}
