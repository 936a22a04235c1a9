//! Benchmark graphs and the matrices derived from their topology.
//!
//! Nodes are 0-based. Edges are stored once as `(i, j)` with `i < j`.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{invalid, Result};
use crate::{Matrix, Vector};

/// Connected simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<bool>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates,
    /// out-of-range endpoints and disconnected topologies.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let g = Self::from_edges_unchecked(n, edges)?;
        if !g.is_connected() {
            return invalid(format!("graph with {n} nodes is not connected"));
        }
        Ok(g)
    }

    /// Like [`Graph::new`] but skips the connectivity check. Used for test
    /// inputs that are deliberately disconnected.
    pub fn from_edges_unchecked(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n == 0 {
            return invalid("graph needs at least one node");
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a},{b}) out of range for {n} nodes"));
            }
            if a == b {
                return invalid(format!("self-loop at node {a}"));
            }
            let key = (a.min(b), a.max(b));
            if !set.insert(key) {
                return invalid(format!("duplicate edge ({},{})", key.0, key.1));
            }
        }
        let mut adjacency = vec![false; n * n];
        for &(i, j) in &set {
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.adjacency[i * self.n + j])
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).count()
    }

    /// Unweighted degree sequence.
    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence(Array1::from_iter(
            (0..self.n).map(|i| self.degree(i) as f64),
        ))
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `L = D - A`.
    pub fn unweighted_laplacian(&self) -> Matrix {
        let n = self.n;
        let mut l = Array2::zeros((n, n));
        for &(i, j) in &self.edges {
            l[[i, j]] = -1.0;
            l[[j, i]] = -1.0;
            l[[i, i]] += 1.0;
            l[[j, j]] += 1.0;
        }
        l
    }

    /// Indicator of non-edges: `M_ij = 1` iff `i != j` and `(i,j)` is not an
    /// edge. The diagonal is zero.
    pub fn mask_matrix(&self) -> Matrix {
        let n = self.n;
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i != j && !self.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Weighted degree sequence, one nonnegative entry per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSequence(Vector);

impl DegreeSequence {
    pub fn new(values: Vector) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return invalid(format!("degree entries must be finite and >= 0, got {v}"));
        }
        Ok(Self(values))
    }

    /// Diagonal of a (weighted) Laplacian.
    pub fn from_laplacian(l: &Matrix) -> Result<Self> {
        Self::new(l.diag().to_owned())
    }

    pub fn values(&self) -> &Vector {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.sum()
    }
}

pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return invalid(format!("cycle graph needs n >= 3, got {n}"));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return invalid(format!("complete graph needs n >= 2, got {n}"));
    }
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// The Petersen graph: outer 5-cycle, inner pentagram, five spokes.
pub fn petersen_graph() -> Graph {
    let outer = (0..5).map(|i| (i, (i + 1) % 5));
    let spokes = (0..5).map(|i| (i, i + 5));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
    Graph::new(10, outer.chain(spokes).chain(inner)).expect("static Petersen data is valid")
}

/// The 5-node house graph: a square 0-1-3-2 with roof node 4 on edge 2-3.
pub fn house_graph() -> Graph {
    Graph::new(5, [(0, 1), (0, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
        .expect("static house data is valid")
}

// Zachary karate club, 1-based as usually published.
const KARATE_EDGES: [(usize, usize); 78] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (1, 5),
    (1, 6),
    (1, 7),
    (1, 8),
    (1, 9),
    (1, 11),
    (1, 12),
    (1, 13),
    (1, 14),
    (1, 18),
    (1, 20),
    (1, 22),
    (1, 32),
    (2, 3),
    (2, 4),
    (2, 8),
    (2, 14),
    (2, 18),
    (2, 20),
    (2, 22),
    (2, 31),
    (3, 4),
    (3, 8),
    (3, 9),
    (3, 10),
    (3, 14),
    (3, 28),
    (3, 29),
    (3, 33),
    (4, 8),
    (4, 13),
    (4, 14),
    (5, 7),
    (5, 11),
    (6, 7),
    (6, 11),
    (6, 17),
    (7, 17),
    (9, 31),
    (9, 33),
    (9, 34),
    (10, 34),
    (14, 34),
    (15, 33),
    (15, 34),
    (16, 33),
    (16, 34),
    (19, 33),
    (19, 34),
    (20, 34),
    (21, 33),
    (21, 34),
    (23, 33),
    (23, 34),
    (24, 26),
    (24, 28),
    (24, 30),
    (24, 33),
    (24, 34),
    (25, 26),
    (25, 28),
    (25, 32),
    (26, 32),
    (27, 30),
    (27, 34),
    (28, 34),
    (29, 32),
    (29, 34),
    (30, 33),
    (30, 34),
    (31, 33),
    (31, 34),
    (32, 33),
    (32, 34),
    (33, 34),
];

/// Zachary's karate club network (34 nodes, 78 edges).
pub fn karate_graph() -> Graph {
    Graph::new(34, KARATE_EDGES.iter().map(|&(a, b)| (a - 1, b - 1)))
        .expect("static karate data is valid")
}

/// Barabási-Albert preferential attachment.
///
/// Starts from `m` isolated nodes. The first arriving node links to all of
/// them; every later node picks `m` distinct existing targets, each draw
/// proportional to current degree among the not-yet-chosen nodes.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    if m < 1 {
        return invalid("barabasi_albert needs m >= 1");
    }
    if n <= m {
        return invalid(format!("barabasi_albert needs n > m, got n={n}, m={m}"));
    }
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(m * (n - m));
    for v in m..n {
        let mut weight: Vec<f64> = degree[..v].iter().map(|&d| d as f64).collect();
        for _ in 0..m {
            let total: f64 = weight.iter().filter(|w| **w > 0.0).sum();
            let target = if total > 0.0 {
                let mut u = rng.random::<f64>() * total;
                let mut pick = None;
                for (i, &w) in weight.iter().enumerate() {
                    if w > 0.0 {
                        pick = Some(i);
                        if u < w {
                            break;
                        }
                        u -= w;
                    }
                }
                pick.expect("positive total weight")
            } else {
                // only the isolated seed nodes remain
                let free: Vec<usize> = (0..v).filter(|&i| weight[i] >= 0.0).collect();
                free[rng.random_range(0..free.len())]
            };
            // -1 marks "already chosen" for the uniform branch
            weight[target] = -1.0;
            edges.push((target, v));
        }
        for &(t, _) in &edges[edges.len() - m..] {
            degree[t] += 1;
        }
        degree[v] += m;
    }
    Graph::new(n, edges)
}
