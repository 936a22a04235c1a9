use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::{Matrix, Vector};

/// `K` initial vectors `c_i ~ N(0, I)` and their averages `gamma_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniBatch {
    /// Shape `(K, n)`, one initial vector per row.
    pub initials: Matrix,
    pub gammas: Vector,
}

impl MiniBatch {
    pub fn from_initials(initials: Matrix) -> Result<Self> {
        if initials.nrows() == 0 || initials.ncols() == 0 {
            return invalid("mini-batch needs at least one non-empty vector");
        }
        let gammas = initials.mean_axis(Axis(1)).expect("non-empty rows");
        Ok(Self { initials, gammas })
    }

    pub fn generate<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || n == 0 {
            return invalid(format!(
                "mini-batch needs K >= 1 and n >= 1, got K={k}, n={n}"
            ));
        }
        let initials =
            Array2::from_shape_simple_fn((k, n), || rng.sample::<f64, _>(StandardNormal));
        Self::from_initials(initials)
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.initials.ncols()
    }
}
