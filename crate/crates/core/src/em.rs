//! Euler-Maruyama sampling of the noisy consensus SDE
//! `dx = -L x dt + alpha db` and Monte Carlo estimates of its MSE.

use ndarray::{Array1, Array2, Array3, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::sym_eig;
use crate::{Matrix, Vector};

/// Samples per reduction chunk in [`monte_carlo_mse`]. Fixed so that the
/// summation order does not depend on the thread pool.
const MC_CHUNK: usize = 64;

/// Time discretization of `[0, horizon]` into `bins` steps of width
/// `eta = horizon / bins`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub bins: usize,
    pub alpha: f64,
}

impl SimConfig {
    pub fn new(horizon: f64, bins: usize, alpha: f64) -> Result<Self> {
        let cfg = Self {
            horizon,
            bins,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return invalid(format!("horizon must be > 0, got {}", self.horizon));
        }
        if self.bins == 0 {
            return invalid("number of bins must be > 0");
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return invalid(format!("alpha must be >= 0, got {}", self.alpha));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.horizon / self.bins as f64
    }

    /// `t_k = k * eta` for `k = 0..=bins`.
    pub fn times(&self) -> Vec<f64> {
        let eta = self.eta();
        (0..=self.bins).map(|k| k as f64 * eta).collect()
    }

    /// `eta * lambda_max` of the symmetric part of `l`. Values `>= 2` mean
    /// `I - eta L` is not a contraction and the recursion can blow up.
    pub fn stability_product(&self, l: &Matrix) -> Result<f64> {
        let sym = (l + &l.t()) * 0.5;
        Ok(self.eta() * sym_eig(&sym)?.max_eigenvalue())
    }

    fn warn_if_unstable(&self, l: &Matrix) -> Result<()> {
        let p = self.stability_product(l)?;
        if p >= 2.0 {
            log::warn!(
                "eta * lambda_max = {p:.3} >= 2: Euler-Maruyama recursion is unstable; increase N"
            );
        }
        Ok(())
    }
}

fn check_square(l: &Matrix, n: usize) -> Result<()> {
    if l.nrows() != n || l.ncols() != n {
        return invalid(format!(
            "Laplacian is {}x{}, state has dimension {n}",
            l.nrows(),
            l.ncols()
        ));
    }
    Ok(())
}

/// One Euler-Maruyama step `x - eta L x + alpha sqrt(eta) z`.
pub fn em_step(x: &Vector, l: &Matrix, eta: f64, alpha: f64, z: &Vector) -> Result<Vector> {
    let n = x.len();
    check_square(l, n)?;
    if z.len() != n {
        return invalid(format!("noise has dimension {}, state {n}", z.len()));
    }
    if !(eta > 0.0) {
        return invalid(format!("step must be > 0, got {eta}"));
    }
    let mut out = Array1::zeros(n);
    step_into(l, x.view(), eta, alpha * eta.sqrt(), z.view(), &mut out);
    Ok(out)
}

#[inline]
fn step_into(
    l: &Matrix,
    x: ArrayView1<f64>,
    eta: f64,
    noise_scale: f64,
    z: ArrayView1<f64>,
    out: &mut Vector,
) {
    for (i, row) in l.rows().into_iter().enumerate() {
        let lx: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        out[i] = x[i] - eta * lx + noise_scale * z[i];
    }
}

fn standard_normal_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// One sampled path from `x(0) = c`. Row `k` of the result is `x(k)`.
pub fn simulate<R: Rng + ?Sized>(
    l: &Matrix,
    c: &Vector,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Matrix> {
    cfg.validate()?;
    let n = c.len();
    check_square(l, n)?;
    cfg.warn_if_unstable(l)?;
    Ok(run_path(l, c.view(), cfg, rng))
}

fn run_path<R: Rng + ?Sized>(
    l: &Matrix,
    c: ArrayView1<f64>,
    cfg: &SimConfig,
    rng: &mut R,
) -> Matrix {
    let n = c.len();
    let eta = cfg.eta();
    let scale = cfg.alpha * eta.sqrt();
    let mut states = Array2::zeros((cfg.bins + 1, n));
    states.row_mut(0).assign(&c);
    let mut next = Array1::zeros(n);
    for k in 0..cfg.bins {
        let z = standard_normal_vector(n, rng);
        step_into(l, states.row(k), eta, scale, z.view(), &mut next);
        states.row_mut(k + 1).assign(&next);
    }
    states
}

/// A batch of sampled paths together with their starting points.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    /// Shape `(samples, bins + 1, n)`.
    pub states: Array3<f64>,
    /// Shape `(samples, n)`.
    pub initials: Matrix,
    /// Consensus target of each sample, `mean(initials[k])`.
    pub gammas: Vector,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

/// Draws `samples` initial vectors `c ~ N(0, I)` and one path for each.
pub fn simulate_ensemble<R: Rng + ?Sized>(
    l: &Matrix,
    cfg: &SimConfig,
    samples: usize,
    rng: &mut R,
) -> Result<TrajectoryEnsemble> {
    cfg.validate()?;
    let n = l.nrows();
    check_square(l, n)?;
    cfg.warn_if_unstable(l)?;
    let mut states = Array3::zeros((samples, cfg.bins + 1, n));
    let mut initials = Array2::zeros((samples, n));
    for s in 0..samples {
        let c = standard_normal_vector(n, rng);
        let path = run_path(l, c.view(), cfg, rng);
        states.index_axis_mut(Axis(0), s).assign(&path);
        initials.row_mut(s).assign(&c);
    }
    let gammas = initials
        .mean_axis(Axis(1))
        .unwrap_or_else(|| Array1::zeros(0));
    Ok(TrajectoryEnsemble {
        states,
        initials,
        gammas,
    })
}

/// Squared residual `||x(k) - gamma 1||^2` along one path with a fresh
/// `c ~ N(0, I)`.
fn sample_squared_errors(l: &Matrix, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = l.nrows();
    let eta = cfg.eta();
    let scale = cfg.alpha * eta.sqrt();
    let mut x = standard_normal_vector(n, rng);
    let gamma = x.mean().unwrap_or(0.0);
    let mut next = Array1::zeros(n);
    let mut out = Vec::with_capacity(cfg.bins + 1);
    let sq = |v: &Vector| v.iter().map(|xi| (xi - gamma).powi(2)).sum::<f64>();
    out.push(sq(&x));
    for _ in 0..cfg.bins {
        let z = standard_normal_vector(n, rng);
        step_into(l, x.view(), eta, scale, z.view(), &mut next);
        std::mem::swap(&mut x, &mut next);
        out.push(sq(&x));
    }
    out
}

/// Monte Carlo estimate of `MSE(t_k) = E ||x(t_k) - gamma 1||^2` with
/// `c ~ N(0, I)` and fresh noise per sample.
///
/// One base seed is drawn from `rng`; sample `i` runs on its own ChaCha
/// stream `i`, and partial sums are combined in index order, so the result
/// does not depend on the number of worker threads.
pub fn monte_carlo_mse<R: Rng + ?Sized>(
    l: &Matrix,
    cfg: &SimConfig,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    check_square(l, l.nrows())?;
    if samples == 0 {
        return invalid("need at least one Monte Carlo sample");
    }
    cfg.warn_if_unstable(l)?;
    let base: u64 = rng.random();

    let chunk_sums: Vec<Vec<f64>> = (0..samples.div_ceil(MC_CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![0.0; cfg.bins + 1];
            let end = ((chunk + 1) * MC_CHUNK).min(samples);
            for i in chunk * MC_CHUNK..end {
                let mut r = ChaCha8Rng::seed_from_u64(base);
                r.set_stream(i as u64);
                for (a, e) in acc.iter_mut().zip(sample_squared_errors(l, cfg, &mut r)) {
                    *a += e;
                }
            }
            acc
        })
        .collect();

    let mut total = vec![0.0; cfg.bins + 1];
    for part in &chunk_sums {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(cfg
        .times()
        .into_iter()
        .zip(total)
        .map(|(t, s)| (t, s / samples as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, karate_graph};
    use crate::spectral::sym_eig;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn step_identity_cases() {
        let x = array![0.3, -1.2, 2.0];
        let z = array![1.0, 1.0, 1.0];
        let zero = Array2::zeros((3, 3));
        assert_eq!(em_step(&x, &zero, 0.1, 0.0, &z).unwrap(), x);

        let l = cycle_graph(3).unwrap().unweighted_laplacian();
        let consensus = array![0.7, 0.7, 0.7];
        assert_eq!(em_step(&consensus, &l, 0.1, 0.0, &z).unwrap(), consensus);
    }

    #[test]
    fn step_two_node_hand_value() {
        let l = array![[1.0, -1.0], [-1.0, 1.0]];
        let out = em_step(&array![1.0, -1.0], &l, 0.1, 0.0, &array![5.0, -3.0]).unwrap();
        assert_abs_diff_eq!(out[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], -0.8, epsilon = 1e-15);
        // alpha sqrt(eta) z
        let out = em_step(&array![0.0, 0.0], &l, 0.25, 2.0, &array![1.0, -3.0]).unwrap();
        assert_eq!(out, array![1.0, -3.0]);
    }

    #[test]
    fn step_dimension_errors() {
        let l = Array2::zeros((3, 3));
        assert!(em_step(&array![1.0, 2.0], &l, 0.1, 0.0, &array![0.0, 0.0]).is_err());
        assert!(em_step(&array![1.0, 2.0, 3.0], &l, 0.1, 0.0, &array![0.0]).is_err());
        assert!(em_step(&array![1.0, 2.0, 3.0], &l, 0.0, 0.0, &array![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 10, 0.1).is_err());
        assert!(SimConfig::new(1.0, 0, 0.1).is_err());
        assert!(SimConfig::new(1.0, 10, -0.1).is_err());
        let cfg = SimConfig::new(10.0, 250, 0.2).unwrap();
        assert_eq!(cfg.eta(), 10.0 / 250.0);
        assert_eq!(cfg.times().len(), 251);
    }

    #[test]
    fn stability_product_flags_coarse_grid() {
        let l = karate_graph().unweighted_laplacian();
        let coarse = SimConfig::new(10.0, 10, 0.0).unwrap();
        assert!(coarse.stability_product(&l).unwrap() >= 2.0);
        let fine = SimConfig::new(10.0, 1000, 0.0).unwrap();
        assert!(fine.stability_product(&l).unwrap() < 2.0);
    }

    #[test]
    fn noiseless_contraction() {
        let l = cycle_graph(10).unwrap().unweighted_laplacian();
        let lambda2 = sym_eig(&l).unwrap().algebraic_connectivity();
        let cfg = SimConfig::new(10.0, 100, 0.0).unwrap();
        let c = standard_normal_vector(10, &mut rng(3));
        let gamma = c.mean().unwrap();
        let path = simulate(&l, &c, &cfg, &mut rng(4)).unwrap();
        assert_eq!(path.nrows(), 101);
        assert_eq!(path.row(0), c);
        let dist = |v: ArrayView1<f64>| v.iter().map(|x| (x - gamma).powi(2)).sum::<f64>().sqrt();
        let bound = (-lambda2 * 10.0).exp() * dist(c.view());
        assert!(dist(path.row(100)) <= bound + 1e-12);
    }

    #[test]
    fn simulate_is_deterministic() {
        let l = cycle_graph(10).unwrap().unweighted_laplacian();
        let cfg = SimConfig::new(5.0, 50, 0.1).unwrap();
        let c = Array1::linspace(-1.0, 1.0, 10);
        let a = simulate(&l, &c, &cfg, &mut rng(9)).unwrap();
        let b = simulate(&l, &c, &cfg, &mut rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noisy_paths_stay_near_average() {
        // alpha = 0.1 on cycle(10), T = 10: the deviation from gamma has
        // standard deviation about sqrt(0.01 * 10 / 10 + small) ~ 0.1 per node.
        let l = cycle_graph(10).unwrap().unweighted_laplacian();
        let cfg = SimConfig::new(10.0, 250, 0.1).unwrap();
        let mut within = 0;
        for seed in 0..200 {
            let mut r = rng(seed);
            let c = standard_normal_vector(10, &mut r);
            let gamma = c.mean().unwrap();
            let path = simulate(&l, &c, &cfg, &mut r).unwrap();
            if path.row(cfg.bins).iter().all(|x| (x - gamma).abs() < 1.0) {
                within += 1;
            }
        }
        assert!(within >= 198, "{within}/200 seeds within band");
    }

    #[test]
    fn ensemble_bookkeeping() {
        let l = cycle_graph(5).unwrap().unweighted_laplacian();
        let cfg = SimConfig::new(1.0, 20, 0.3).unwrap();
        let ens = simulate_ensemble(&l, &cfg, 7, &mut rng(1)).unwrap();
        assert_eq!(ens.states.dim(), (7, 21, 5));
        for k in 0..7 {
            assert_eq!(
                ens.states.index_axis(Axis(0), k).row(0),
                ens.initials.row(k)
            );
            assert_abs_diff_eq!(
                ens.gammas[k],
                ens.initials.row(k).mean().unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn mc_initial_mse_is_n_minus_one() {
        let l = cycle_graph(10).unwrap().unweighted_laplacian();
        let cfg = SimConfig::new(1.0, 10, 0.2).unwrap();
        let curve = monte_carlo_mse(&l, &cfg, 4000, &mut rng(5)).unwrap();
        assert_eq!(curve[0].0, 0.0);
        // ||c - gamma 1||^2 ~ chi^2_9: sd sqrt(18) / sqrt(4000) ~ 0.067
        assert!((curve[0].1 - 9.0).abs() < 0.3, "{}", curve[0].1);
    }

    #[test]
    fn mc_independent_of_thread_count() {
        let l = cycle_graph(6).unwrap().unweighted_laplacian();
        let cfg = SimConfig::new(2.0, 40, 0.3).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_mse(&l, &cfg, 300, &mut rng(11)).unwrap())
        };
        assert_eq!(run(1), run(4));
        assert!(monte_carlo_mse(&l, &cfg, 0, &mut rng(1)).is_err());
    }
}
