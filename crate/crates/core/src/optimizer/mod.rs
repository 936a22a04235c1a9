//! Deep-unfolded optimization of Laplacian edge weights.
//!
//! Starting from `L = 0`, each iteration draws a fresh mini-batch of
//! initial vectors and fresh Euler-Maruyama noise, back-propagates the
//! penalized loss through the `N` unrolled steps and applies one Adam
//! update. The final matrix is projected onto the exactly feasible set by
//! [`round_a`] or [`round_b`].

mod adam;
mod batch;
mod penalty;
mod round;
mod unfold;

pub use adam::{AdamConfig, AdamState};
pub use batch::MiniBatch;
pub use penalty::{
    penalty, penalty_a, penalty_a_gradient, penalty_b, penalty_b_gradient, penalty_gradient,
    Constraint, PenaltyWeights,
};
pub use round::{round, round_a, round_b, FeasibilityReport};
pub use unfold::{loss_gradient, unfolded_loss, unfolded_loss_with_noise, LossValue, NoiseRecord};

use ndarray::Array2;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::{DegreeSequence, Graph};
use crate::Matrix;

use unfold::Unrolled;

/// Everything needed to run one optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub graph: Graph,
    pub constraint: Constraint,
    /// Feasibility tolerance used by the round function.
    pub theta: f64,
    /// Target time; also the unfolded horizon `T`.
    pub t_star: f64,
    pub alpha: f64,
    /// Number of unrolled EM steps `N`.
    pub unfold_steps: usize,
    /// Mini-batch size `K`.
    pub batch_size: usize,
    /// Number of Adam iterations `I`.
    pub iterations: usize,
    pub adam: AdamConfig,
    pub penalty: PenaltyWeights,
}

impl ProblemSpec {
    /// Degree-sequence problem with the Petersen experiment's settings:
    /// `K = 25`, `alpha = 0.3`, `rho = 10`, `T = 4`, `N = 250`,
    /// `I = 3000`, `theta = 0.1`, `lr = 0.01`.
    pub fn problem_a(graph: Graph, degrees: DegreeSequence) -> Self {
        Self {
            graph,
            constraint: Constraint::Degree(degrees),
            theta: 0.1,
            t_star: 4.0,
            alpha: 0.3,
            unfold_steps: 250,
            batch_size: 25,
            iterations: 3000,
            adam: AdamConfig::default(),
            penalty: PenaltyWeights::default(),
        }
    }

    /// Degree-sum problem with the house experiment's settings:
    /// `K = 50`, `alpha = 0.3`, `rho = (10, 10, 0.1, 10)`, `T = 2`,
    /// `N = 250`, `I = 5000`, `theta = 0.1`, `lr = 0.01`.
    pub fn problem_b(graph: Graph, degree_sum: f64) -> Self {
        Self {
            graph,
            constraint: Constraint::DegreeSum(degree_sum),
            theta: 0.1,
            t_star: 2.0,
            alpha: 0.3,
            unfold_steps: 250,
            batch_size: 50,
            iterations: 5000,
            adam: AdamConfig::default(),
            penalty: PenaltyWeights {
                rho3: 0.1,
                ..PenaltyWeights::default()
            },
        }
    }

    /// EM step width `t_star / N`.
    pub fn eta(&self) -> f64 {
        self.t_star / self.unfold_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        match &self.constraint {
            Constraint::Degree(d) if d.len() != n => {
                return invalid(format!(
                    "degree target has {} entries, graph {n} nodes",
                    d.len()
                ))
            }
            Constraint::DegreeSum(s) if !s.is_finite() || *s < 0.0 => {
                return invalid(format!("degree sum must be finite and >= 0, got {s}"))
            }
            _ => {}
        }
        if !(self.theta > 0.0) {
            return invalid(format!("theta must be > 0, got {}", self.theta));
        }
        if !(self.t_star > 0.0) || !self.t_star.is_finite() {
            return invalid(format!("t_star must be > 0, got {}", self.t_star));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return invalid(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if self.unfold_steps == 0 || self.batch_size == 0 {
            return invalid("unfold depth and batch size must be >= 1");
        }
        self.adam.validate()?;
        self.penalty.validate()
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Data term plus penalty.
    pub loss: f64,
    pub penalty: f64,
}

/// Result of the gradient phase, before rounding.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub raw: Matrix,
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    /// Feasible Laplacian returned by the round function.
    pub laplacian: Matrix,
    /// Matrix before rounding.
    pub raw: Matrix,
    pub log: Vec<IterationRecord>,
}

/// Runs the `I` Adam iterations from `L = 0` without rounding.
pub fn train<R: Rng + ?Sized>(spec: &ProblemSpec, rng: &mut R) -> Result<TrainOutcome> {
    train_with(spec, rng, |_| {})
}

/// [`train`] with a callback invoked after every iteration.
pub fn train_with<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    rng: &mut R,
    mut on_iteration: impl FnMut(&IterationRecord),
) -> Result<TrainOutcome> {
    let unrolled = Unrolled::new(spec)?;
    let n = spec.graph.node_count();
    let mut l = Array2::zeros((n, n));
    let mut adam = AdamState::new(n, n);
    let mut log = Vec::with_capacity(spec.iterations);
    for iteration in 1..=spec.iterations {
        let batch = MiniBatch::generate(n, spec.batch_size, rng)?;
        let noise = NoiseRecord::draw(spec.unfold_steps, n, spec.batch_size, rng);
        let (value, grad) = unrolled.loss_and_gradient(&l, &batch, &noise)?;
        adam.step(&mut l, &grad, &spec.adam)?;
        let record = IterationRecord {
            iteration,
            loss: value.total(),
            penalty: value.penalty,
        };
        on_iteration(&record);
        log.push(record);
    }
    Ok(TrainOutcome { raw: l, log })
}

/// Trains and rounds. Fails with [`crate::Error::OptimizationFailed`] when
/// the learned matrix is too far from the constraint set.
pub fn optimize<R: Rng + ?Sized>(spec: &ProblemSpec, rng: &mut R) -> Result<OptimizeOutcome> {
    let TrainOutcome { raw, log } = train(spec, rng)?;
    let laplacian = round(&raw, &spec.constraint, spec.theta, &spec.graph)?;
    Ok(OptimizeOutcome {
        laplacian,
        raw,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, house_graph};
    use crate::spectral::sym_eig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_spec() -> ProblemSpec {
        let g = cycle_graph(5).unwrap();
        let d = g.degree_sequence();
        let mut s = ProblemSpec::problem_a(g, d);
        s.t_star = 2.0;
        s.unfold_steps = 40;
        s.batch_size = 10;
        s.iterations = 600;
        s
    }

    #[test]
    fn spec_validation() {
        let mut s = small_spec();
        assert!(s.validate().is_ok());
        s.theta = 0.0;
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.constraint = Constraint::Degree(DegreeSequence::new(ndarray::array![1.0, 2.0]).unwrap());
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.penalty.rho2 = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut s = small_spec();
        s.iterations = 50;
        let a = train(&s, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = train(&s, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.raw, b.raw);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn small_cycle_learns_a_feasible_laplacian() {
        let s = small_spec();
        let out = optimize(&s, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(out.log.len(), 600);
        let first: f64 = out.log[..20].iter().map(|r| r.loss).sum::<f64>() / 20.0;
        let last: f64 = out.log[580..].iter().map(|r| r.loss).sum::<f64>() / 20.0;
        assert!(last < 0.5 * first, "loss {first} -> {last}");
        let report = FeasibilityReport::evaluate(&out.laplacian, &s.constraint, &s.graph);
        assert_eq!(report.asymmetry, 0.0);
        assert_eq!(report.off_graph_norm, 0.0);
        assert!(report.degree_gap < s.theta);
        assert!(sym_eig(&out.laplacian).unwrap().algebraic_connectivity() > 0.0);
    }

    #[test]
    fn impossible_tolerance_fails() {
        let g = house_graph();
        let mut s = ProblemSpec::problem_b(g, 12.0);
        s.theta = 1e-9;
        s.iterations = 20;
        s.unfold_steps = 20;
        s.batch_size = 4;
        assert!(matches!(
            optimize(&s, &mut ChaCha8Rng::seed_from_u64(1)),
            Err(crate::Error::OptimizationFailed { .. })
        ));
    }
}
