use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use duem_core::em::{monte_carlo_mse, simulate, SimConfig};
use duem_core::io::{
    format_edge_list, format_matrix_csv, graph_from_laplacian, read_square_matrix,
};
use duem_core::moments::{time_grid, MseCurve};
use duem_core::optimizer::{round, train_with, FeasibilityReport};
use duem_core::spectral::sym_eig;
use duem_core::{moments::theoretical_mse, Matrix, MiniBatch};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{CompareCmd, GraphCmd, MseCmd, OptimizeCmd, SimulateCmd, Source, SourceOnly};
use crate::output::{Csv, Run};
use crate::recipe::Recipe;
use crate::source::{read_vector, usage};
use crate::DEFAULT_SEED;

fn source_json(s: &Source) -> serde_json::Value {
    json!({ "graph": s.graph, "n": s.n, "m": s.m, "laplacian": s.laplacian })
}

fn frobenius(a: &Matrix) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn graph(cmd: &GraphCmd, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut run = Run::start("graph");
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let resolved = cmd.source.resolve(seed)?;
    run.emit(out, &format_edge_list(&resolved.graph))?;
    let lap_path: Option<PathBuf> = cmd.laplacian_out.clone().or_else(|| {
        out.map(|p| {
            let stem = p.file_stem().unwrap_or_default().to_string_lossy();
            p.with_file_name(format!("{stem}_laplacian.csv"))
        })
    });
    if let Some(p) = &lap_path {
        run.emit(Some(p), &format_matrix_csv(&resolved.laplacian))?;
    }
    run.finish(json!({ "source": source_json(&cmd.source) }), Some(seed))
}

pub fn spectrum(cmd: &SourceOnly, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut run = Run::start("spectrum");
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let resolved = cmd.source.resolve(seed)?;
    let decomp = sym_eig(&resolved.laplacian)?;
    let mut csv = Csv::new(["quantity", "value"]);
    for (k, v) in decomp.eigenvalues().iter().enumerate() {
        csv.row([format!("eigenvalue_{}", k + 1), v.to_string()]);
    }
    csv.row([
        "algebraic_connectivity".to_string(),
        decomp.algebraic_connectivity().to_string(),
    ]);
    csv.row([
        "inverse_eigenvalue_sum".to_string(),
        decomp.inverse_eigenvalue_sum()?.to_string(),
    ]);
    run.emit(out, &csv.finish())?;
    run.finish(json!({ "source": source_json(&cmd.source) }), Some(seed))
}

pub fn simulate_cmd(cmd: &SimulateCmd, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut run = Run::start("simulate");
    let seed_value = seed.unwrap_or(DEFAULT_SEED);
    let resolved = cmd.source.resolve(seed_value)?;
    let n = resolved.graph.node_count();
    let cfg = SimConfig::new(cmd.horizon, cmd.bins, cmd.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    let c = match &cmd.init {
        Some(p) => read_vector(p)?,
        None => MiniBatch::generate(n, 1, &mut rng)?
            .initials
            .row(0)
            .to_owned(),
    };
    if c.len() != n {
        return usage(format!(
            "initial state has {} entries, graph {n} nodes",
            c.len()
        ));
    }
    let path = simulate(&resolved.laplacian, &c, &cfg, &mut rng)?;
    let mut header = vec!["k".to_string(), "t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    let mut csv = Csv::new(header);
    for (k, (t, row)) in cfg.times().iter().zip(path.rows()).enumerate() {
        let mut values = vec![k.to_string(), t.to_string()];
        values.extend(row.iter().map(|v| v.to_string()));
        csv.row(values);
    }
    run.emit(out, &csv.finish())?;
    run.finish(
        json!({
            "source": source_json(&cmd.source),
            "T": cmd.horizon, "N": cmd.bins, "alpha": cmd.alpha, "init": cmd.init,
        }),
        Some(seed_value),
    )
}

pub fn mse(cmd: &MseCmd, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut run = Run::start("mse");
    let seed_value = seed.unwrap_or(DEFAULT_SEED);
    let resolved = cmd.source.resolve(seed_value)?;
    let decomp = sym_eig(&resolved.laplacian)?;
    if cmd.points == 0 {
        return usage("--points must be >= 1");
    }
    let times = time_grid(cmd.tmax, cmd.points);
    let curve = MseCurve::evaluate(&decomp, &times, cmd.alpha)?;

    let mc = if cmd.mc {
        if cmd.points < 2 || !cmd.bins.is_multiple_of(cmd.points - 1) {
            return usage(format!(
                "--N ({}) must be a multiple of --points - 1 ({}) so every grid time is an EM step",
                cmd.bins,
                cmd.points.saturating_sub(1)
            ));
        }
        let cfg = SimConfig::new(cmd.tmax, cmd.bins, cmd.alpha)?;
        let est = monte_carlo_mse(
            &resolved.laplacian,
            &cfg,
            cmd.samples,
            &mut ChaCha8Rng::seed_from_u64(seed_value),
        )?;
        let stride = cmd.bins / (cmd.points - 1);
        Some(
            (0..cmd.points)
                .map(|k| est[k * stride].1)
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let mut header = vec!["t", "mse_theory", "amse"];
    if mc.is_some() {
        header.push("mse_mc");
    }
    let mut csv = Csv::new(header);
    for k in 0..times.len() {
        let mut row = vec![curve.times[k], curve.mse[k], curve.amse[k]];
        if let Some(m) = &mc {
            row.push(m[k]);
        }
        csv.row(row);
    }
    run.emit(out, &csv.finish())?;
    run.finish(
        json!({
            "source": source_json(&cmd.source),
            "tmax": cmd.tmax, "points": cmd.points, "alpha": cmd.alpha,
            "mc": cmd.mc, "N": cmd.bins, "samples": cmd.samples,
        }),
        Some(seed_value),
    )
}

pub fn optimize(
    cmd: &OptimizeCmd,
    seed: Option<u64>,
    out: Option<&Path>,
    recipe: Option<&Path>,
) -> Result<()> {
    let mut run = Run::start("optimize");
    let base = match recipe {
        Some(p) => Recipe::load(p)?,
        None => Recipe::default(),
    };
    let merged = base.overlay(&Recipe::from_flags(cmd, seed));
    let (spec, baseline, resolved) = merged.resolve()?;
    let seed_value = resolved.seed.expect("resolved seed");

    let every = (spec.iterations / 10).max(1);
    let trained = train_with(&spec, &mut ChaCha8Rng::seed_from_u64(seed_value), |r| {
        if r.iteration % every == 0 {
            info!(
                "iteration {} loss {:.6} penalty {:.6}",
                r.iteration, r.loss, r.penalty
            );
        }
    })?;

    if let Some(log_path) = &cmd.log {
        let mut csv = Csv::new(["iter", "loss", "penalty"]);
        for r in &trained.log {
            csv.row([r.iteration as f64, r.loss, r.penalty]);
        }
        run.emit(Some(log_path), &csv.finish())?;
    }
    let rounded = round(&trained.raw, &spec.constraint, spec.theta, &spec.graph);
    let laplacian = match rounded {
        Ok(l) => l,
        Err(e) => {
            run.finish(&resolved, Some(seed_value))?;
            return Err(e.into());
        }
    };

    let report = FeasibilityReport::evaluate(&laplacian, &spec.constraint, &spec.graph);
    let d_opt = sym_eig(&laplacian)?;
    let d_base = sym_eig(&baseline)?;
    eprintln!("degree gap: {:e}", report.degree_gap);
    eprintln!("row sum norm: {:e}", report.row_sum_norm);
    eprintln!("asymmetry: {:e}", report.asymmetry);
    eprintln!("off-graph norm: {:e}", report.off_graph_norm);
    eprintln!("diagonal sum: {}", report.trace);
    eprintln!(
        "distance to baseline: {}",
        frobenius(&(&laplacian - &baseline))
    );
    eprintln!(
        "inverse eigenvalue sum: {} (baseline {})",
        d_opt.inverse_eigenvalue_sum()?,
        d_base.inverse_eigenvalue_sum()?
    );
    eprintln!(
        "mse at t*={}: {} (baseline {})",
        spec.t_star,
        theoretical_mse(&d_opt, spec.t_star, spec.alpha)?,
        theoretical_mse(&d_base, spec.t_star, spec.alpha)?
    );

    run.emit(out, &format_matrix_csv(&laplacian))?;
    run.finish(&resolved, Some(seed_value))
}

pub fn compare(cmd: &CompareCmd, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut run = Run::start("compare");
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let optimized = read_square_matrix(&cmd.optimized)
        .with_context(|| format!("reading {}", cmd.optimized.display()))?;
    let baseline = match (&cmd.baseline, cmd.source.is_set()) {
        (Some(p), _) => {
            read_square_matrix(p).with_context(|| format!("reading {}", p.display()))?
        }
        (None, true) => cmd.source.resolve(seed)?.laplacian,
        (None, false) => graph_from_laplacian(&optimized)?.unweighted_laplacian(),
    };
    if baseline.dim() != optimized.dim() {
        return usage(format!(
            "baseline is {}x{}, optimized {}x{}",
            baseline.nrows(),
            baseline.ncols(),
            optimized.nrows(),
            optimized.ncols()
        ));
    }
    let d_base = sym_eig(&baseline)?;
    let d_opt = sym_eig(&optimized)?;
    let mut csv = Csv::new(["t", "mse_baseline", "mse_optimized"]);
    for t in time_grid(cmd.tmax, cmd.points) {
        csv.row([
            t,
            theoretical_mse(&d_base, t, cmd.alpha)?,
            theoretical_mse(&d_opt, t, cmd.alpha)?,
        ]);
    }
    eprintln!(
        "inverse eigenvalue sum: baseline {} optimized {}",
        d_base.inverse_eigenvalue_sum()?,
        d_opt.inverse_eigenvalue_sum()?
    );
    run.emit(out, &csv.finish())?;
    run.finish(
        json!({
            "source": source_json(&cmd.source), "baseline": cmd.baseline, "optimized": cmd.optimized,
            "alpha": cmd.alpha, "tmax": cmd.tmax, "points": cmd.points,
        }),
        Some(seed),
    )
}
