use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use duem_core::graph::{
    barabasi_albert, complete_graph, cycle_graph, house_graph, karate_graph, petersen_graph,
};
use duem_core::io::{graph_from_laplacian, parse_matrix_csv, read_square_matrix};
use duem_core::{Graph, Matrix, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::{GraphName, Source};

/// Bad flag combination or value. Exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

/// A topology with the Laplacian used as the baseline for it.
pub struct Resolved {
    pub graph: Graph,
    pub laplacian: Matrix,
}

pub fn named_graph(
    name: GraphName,
    n: Option<usize>,
    m: Option<usize>,
    seed: u64,
) -> Result<Graph> {
    Ok(match name {
        GraphName::Cycle => cycle_graph(n.unwrap_or(10))?,
        GraphName::Complete => complete_graph(n.unwrap_or(10))?,
        GraphName::Petersen => petersen_graph(),
        GraphName::House => house_graph(),
        GraphName::Karate => karate_graph(),
        GraphName::Ba => barabasi_albert(
            n.unwrap_or(50),
            m.unwrap_or(5),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )?,
    })
}

impl Source {
    pub fn is_set(&self) -> bool {
        self.graph.is_some() || self.laplacian.is_some()
    }

    pub fn resolve(&self, seed: u64) -> Result<Resolved> {
        match (self.graph, &self.laplacian) {
            (Some(name), None) => {
                let graph = named_graph(name, self.n, self.m, seed)?;
                let laplacian = graph.unweighted_laplacian();
                Ok(Resolved { graph, laplacian })
            }
            (None, Some(path)) => {
                let laplacian = read_square_matrix(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let graph = graph_from_laplacian(&laplacian)?;
                Ok(Resolved { graph, laplacian })
            }
            (None, None) => usage("one of --graph or --laplacian is required"),
            (Some(_), Some(_)) => usage("--graph and --laplacian are mutually exclusive"),
        }
    }
}

/// Reads a vector stored as a single CSV row or column.
pub fn read_vector(path: &Path) -> Result<Vector> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let a = parse_matrix_csv(&text)?;
    if a.nrows() == 1 || a.ncols() == 1 {
        Ok(a.iter().copied().collect())
    } else {
        usage(format!(
            "{} holds a {}x{} matrix, expected a vector",
            path.display(),
            a.nrows(),
            a.ncols()
        ))
    }
}
