//! Text formats for graphs and matrices.
//!
//! Edge list: a header line `n m` followed by `m` lines `i j` (0-based).
//! Matrix CSV: one row per line, comma-separated, no header. Values are
//! written with Rust's shortest round-trip `Display` for `f64`, so a
//! write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::Matrix;

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.node_count(), g.edge_count());
    for &(i, j) in g.edges() {
        writeln!(out, "{i} {j}").unwrap();
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))?;
    let (n, m) = parse_pair(header)?;
    let edges = lines.map(parse_pair).collect::<Result<Vec<_>>>()?;
    if edges.len() != m {
        return Err(Error::Parse(format!(
            "header announces {m} edges, found {}",
            edges.len()
        )));
    }
    Graph::new(n, edges)
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it
            .next()
            .ok_or_else(|| Error::Parse(format!("expected two integers in {line:?}")))?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("bad integer {tok:?} in {line:?}")))
    };
    let pair = (next()?, next()?);
    if it.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in {line:?}")));
    }
    Ok(pair)
}

pub fn format_matrix_csv(a: &Matrix) -> String {
    let mut out = String::new();
    for row in a.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("line {}: bad number {:?}", lineno + 1, c.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Array2::from_shape_vec((n, cols), rows.into_iter().flatten().collect())
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a square matrix from a CSV file.
pub fn read_square_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let a = parse_matrix_csv(&std::fs::read_to_string(path)?)?;
    if a.nrows() != a.ncols() {
        return Err(Error::Parse(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a)
}

/// Recovers the topology of a weighted Laplacian from its nonzero
/// off-diagonal entries.
pub fn graph_from_laplacian(l: &Matrix) -> Result<Graph> {
    let n = l.nrows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if l[[i, j]] != 0.0 || l[[j, i]] != 0.0 {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}
