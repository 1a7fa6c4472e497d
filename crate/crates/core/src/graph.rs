//! Undirected communication graphs, state-dependent Laplacians, and the
//! spectral / combinatorial queries the consensus criteria rest on.
//!
//! A [`WeightedGraph`] separates the link indicator (which pairs may talk)
//! from the state-derived weights (how strongly they talk right now). In
//! `StateDependentLinks` mode the indicator is all-ones off the diagonal:
//! a pair is effectively linked exactly where the weight function is
//! positive, so the live edge set follows the agents' positions.

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::weight::WeightFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyMode {
    FixedLinks,
    StateDependentLinks,
}

/// Symmetric link indicator plus topology mode. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    links: Vec<bool>,
    mode: TopologyMode,
}

impl WeightedGraph {
    /// Complete graph on `n` vertices with fixed links.
    pub fn complete(n: usize) -> Self {
        let mut links = vec![true; n * n];
        for i in 0..n {
            links[i * n + i] = false;
        }
        WeightedGraph {
            n,
            links,
            mode: TopologyMode::FixedLinks,
        }
    }

    /// Path graph 0-1-...-(n-1).
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        WeightedGraph::from_edges(n, &edges).expect("path edges are valid")
    }

    /// Fixed-link graph from an explicit edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut links = vec![false; n * n];
        for &(i, j) in edges {
            if i == j {
                return Err(Error::SameVertex(i));
            }
            for v in [i, j] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            links[i * n + j] = true;
            links[j * n + i] = true;
        }
        Ok(WeightedGraph {
            n,
            links,
            mode: TopologyMode::FixedLinks,
        })
    }

    /// Graph whose links are decided by the support of the weight function;
    /// the indicator is treated as all-ones off the diagonal.
    pub fn state_dependent(n: usize) -> Self {
        let mut g = WeightedGraph::complete(n);
        g.mode = TopologyMode::StateDependentLinks;
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> TopologyMode {
        self.mode
    }

    #[inline]
    pub fn has_link(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        match self.mode {
            TopologyMode::StateDependentLinks => true,
            TopologyMode::FixedLinks => self.links[i * self.n + j],
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_link(i, j)).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_link(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Fixed-link graph induced by the weight support at the given state:
    /// a link where the graph allows one and `alpha(||x_i - x_j||^2) > 0`
    /// exactly (not merely above a tolerance).
    pub fn support_graph(&self, weight: &WeightFunction, state: &SystemState) -> Result<Self> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: state.n(),
            });
        }
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_link(i, j) && weight.evaluate(state.dist2(i, j))? > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        WeightedGraph::from_edges(self.n, &edges)
    }

    /// Component label per vertex, labels numbered from 0 in discovery order.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(u) = stack.pop() {
                for v in 0..self.n {
                    if label[v] == usize::MAX && self.has_link(u, v) {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_labels().iter().all(|&l| l == 0)
    }

    /// Parse a fixed-link graph from "i j" pairs, one per line, 0-indexed.
    /// Blank lines and `#` comments are skipped.
    pub fn from_edge_list_str(n: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|t| t.parse().ok()).ok_or_else(|| {
                    Error::Config(format!("edge list line {}: expected `i j`", lineno + 1))
                })
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Config(format!(
                    "edge list line {}: trailing tokens",
                    lineno + 1
                )));
            }
            edges.push((i, j));
        }
        WeightedGraph::from_edges(n, &edges)
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

/// A Laplacian built from a graph and a snapshot of state-derived weights.
///
/// Off-diagonal entries are `-G_ij alpha(||x_i - x_j||^2)`, diagonals make
/// every row sum to zero, so the matrix is symmetric positive semi-definite.
#[derive(Clone, Debug)]
pub struct LaplacianMatrix {
    entries: Matrix,
    weights: Matrix,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// The `a_ij` snapshot the Laplacian was assembled from.
    pub fn weight_snapshot(&self) -> &Matrix {
        &self.weights
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.entries)
    }
}

/// Assemble the Laplacian of `graph` at `state` under `weight`.
pub fn build_laplacian(
    graph: &WeightedGraph,
    state: &SystemState,
    weight: &WeightFunction,
) -> Result<LaplacianMatrix> {
    let n = graph.n();
    if state.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: state.n(),
        });
    }
    let mut weights = Matrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if graph.has_link(i, j) {
                let a = weight.evaluate(state.dist2(i, j))?;
                weights.set(i, j, a);
                weights.set(j, i, a);
            }
        }
    }
    let mut entries = Matrix::zeros(n);
    for i in 0..n {
        let mut degree = 0.0;
        for j in 0..n {
            if i != j {
                let a = weights.at(i, j);
                degree += a;
                entries.set(i, j, -a);
            }
        }
        entries.set(i, i, degree);
    }
    Ok(LaplacianMatrix { entries, weights })
}

/// Second-smallest eigenvalue of the Laplacian (algebraic connectivity).
pub fn algebraic_connectivity(laplacian: &LaplacianMatrix) -> f64 {
    let eigs = laplacian.eigenvalues();
    if eigs.len() < 2 {
        0.0
    } else {
        eigs[1]
    }
}

/// Lower bound `alpha(B^2) * lambda2(unit-weight Laplacian)` valid whenever
/// every pairwise distance stays at most `B`.
///
/// Only meaningful for weights that are positive everywhere; compact-support
/// families are rejected because the bound degenerates to zero once `B`
/// reaches the confidence radius.
pub fn lambda2_lower_bound(
    graph: &WeightedGraph,
    weight: &WeightFunction,
    distance_bound: f64,
) -> Result<f64> {
    if distance_bound < 0.0 {
        return Err(Error::NegativeInput {
            what: "distance bound",
            value: distance_bound,
        });
    }
    if weight.has_compact_support() {
        return Err(Error::CompactSupportBound);
    }
    let n = graph.n();
    let mut unit = Matrix::zeros(n);
    for i in 0..n {
        let mut degree = 0.0;
        for j in 0..n {
            if i != j && graph.has_link(i, j) {
                degree += 1.0;
                unit.set(i, j, -1.0);
            }
        }
        unit.set(i, i, degree);
    }
    let eigs = symmetric_eigenvalues(&unit);
    let lambda2_bar = if eigs.len() < 2 { 0.0 } else { eigs[1] };
    // The distance bound caps ||x_i - x_j||, so alpha sees its square.
    Ok(weight.evaluate(distance_bound * distance_bound)? * lambda2_bar)
}

/// Number of unordered vertex pairs with no connecting path; zero exactly
/// when the graph is connected.
pub fn count_disconnected_pairs(graph: &WeightedGraph) -> usize {
    let labels = graph.component_labels();
    let components = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; components];
    for &l in &labels {
        sizes[l] += 1;
    }
    let n = graph.n();
    let total = n * (n - 1) / 2;
    let within: usize = sizes.iter().map(|s| s * (s - 1) / 2).sum();
    total - within
}

/// Maximum number of internally vertex-disjoint paths between `i` and `j`,
/// by unit-capacity maximum flow on the vertex-split digraph.
pub fn count_disjoint_paths(graph: &WeightedGraph, i: usize, j: usize) -> Result<usize> {
    let n = graph.n();
    for v in [i, j] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    if i == j {
        return Err(Error::SameVertex(i));
    }
    Ok(max_vertex_disjoint_flow(graph, i, j))
}

/// Vertex connectivity: minimum number of vertices whose removal disconnects
/// the graph (or leaves a single vertex). Computed as the minimum over
/// non-adjacent pairs of the vertex-split max flow; a complete graph has no
/// such pair and returns `n - 1` (a single vertex returns 0).
pub fn vertex_connectivity(graph: &WeightedGraph) -> usize {
    let n = graph.n();
    if n <= 1 {
        return 0;
    }
    let mut best: Option<usize> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            if !graph.has_link(i, j) {
                let flow = max_vertex_disjoint_flow(graph, i, j);
                best = Some(best.map_or(flow, |b| b.min(flow)));
                if best == Some(0) {
                    return 0;
                }
            }
        }
    }
    best.unwrap_or(n - 1)
}

/// Edmonds-Karp on the standard vertex-split network: every vertex becomes
/// an in/out pair joined by a unit-capacity arc, every link becomes a pair
/// of unit arcs out -> in. Source is out(i), sink is in(j); the direct link
/// (i, j), when present, is the unit arc that represents the trivial path.
fn max_vertex_disjoint_flow(graph: &WeightedGraph, source: usize, sink: usize) -> usize {
    let n = graph.n();
    let nodes = 2 * n;
    let node_in = |v: usize| 2 * v;
    let node_out = |v: usize| 2 * v + 1;

    let mut heads: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<i32> = Vec::new();
    let add_arc = |heads: &mut Vec<Vec<usize>>,
                   to: &mut Vec<usize>,
                   cap: &mut Vec<i32>,
                   u: usize,
                   v: usize,
                   c: i32| {
        heads[u].push(to.len());
        to.push(v);
        cap.push(c);
        heads[v].push(to.len());
        to.push(u);
        cap.push(0);
    };

    for v in 0..n {
        add_arc(&mut heads, &mut to, &mut cap, node_in(v), node_out(v), 1);
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && graph.has_link(u, v) {
                add_arc(&mut heads, &mut to, &mut cap, node_out(u), node_in(v), 1);
            }
        }
    }

    let s = node_out(source);
    let t = node_in(sink);
    let mut flow = 0usize;
    loop {
        // BFS for an augmenting path in the residual network.
        let mut parent_arc = vec![usize::MAX; nodes];
        let mut seen = vec![false; nodes];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &e in &heads[u] {
                let v = to[e];
                if !seen[v] && cap[e] > 0 {
                    seen[v] = true;
                    parent_arc[v] = e;
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return flow;
        }
        // Unit capacities: each augmentation adds exactly one path.
        let mut v = t;
        while v != s {
            let e = parent_arc[v];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            v = to[e ^ 1];
        }
        flow += 1;
    }
}

/// Seeded Erdos-Renyi style graph, shared by test suites across modules.
#[cfg(test)]
pub(crate) fn random_graph(n: usize, p: f64, rng: &mut crate::rng::SplitMix64) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges).unwrap()
}
