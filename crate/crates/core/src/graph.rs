//! Finite multigraphs, twice-marked graphs and integer divisors.
//!
//! Vertices are dense ids `0..n`. Parallel edges are stored as
//! multiplicities in a dense adjacency matrix; loop edges are rejected.

use std::collections::BTreeMap;
use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a connected loopless multigraph from `(u, v, multiplicity)`
    /// triples. Repeated pairs accumulate.
    pub fn new(vertex_count: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adj = vec![vec![0u32; vertex_count]; vertex_count];
        for &(u, v, mult) in edges {
            if u >= vertex_count {
                return Err(Error::VertexOutOfRange(u));
            }
            if v >= vertex_count {
                return Err(Error::VertexOutOfRange(v));
            }
            if u == v {
                return Err(Error::LoopEdge(u));
            }
            if mult == 0 {
                return Err(Error::ZeroMultiplicity);
            }
            adj[u][v] += mult;
            adj[v][u] += mult;
        }
        let g = Graph { adj };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Cycle on `n ≥ 2` vertices `0 - 1 - ... - (n-1) - 0`. For `n = 2` this is a double edge.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::EmptyGraph);
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        Graph::new(n, &edges)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1)).collect();
        Graph::new(n, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        self.adj[u][v]
    }

    pub fn valence(&self, u: usize) -> i64 {
        self.adj[u].iter().map(|&m| m as i64).sum()
    }

    pub fn edge_count(&self) -> i64 {
        (0..self.vertex_count()).map(|u| self.valence(u)).sum::<i64>() / 2
    }

    pub fn genus(&self) -> i64 {
        self.edge_count() - self.vertex_count() as i64 + 1
    }

    /// Neighbours of `u` with edge multiplicities.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.adj[u]
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(v, &m)| (v, m))
    }

    /// Edge list as `(u, v, multiplicity)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let n = self.vertex_count();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if self.adj[u][v] > 0 {
                    out.push((u, v, self.adj[u][v]));
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (v, _) in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Breadth-first distances from `q`.
    pub fn distances_from(&self, q: usize) -> Vec<usize> {
        let n = self.vertex_count();
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[q] = 0;
        queue.push_back(q);
        while let Some(u) = queue.pop_front() {
            for (v, _) in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// `K(u) = valence(u) - 2`.
    pub fn canonical_divisor(&self) -> Divisor {
        Divisor::new((0..self.vertex_count()).map(|u| self.valence(u) - 2).collect())
    }

    /// Number of spanning trees, by the matrix-tree theorem. This is also the
    /// order of the Jacobian.
    pub fn spanning_tree_count(&self) -> u128 {
        let n = self.vertex_count();
        if n == 1 {
            return 1;
        }
        // reduced Laplacian: delete row and column 0
        let m = n - 1;
        let mut a: Vec<Vec<i128>> = (1..n)
            .map(|i| {
                (1..n)
                    .map(|j| {
                        if i == j {
                            self.valence(i) as i128
                        } else {
                            -(self.adj[i][j] as i128)
                        }
                    })
                    .collect()
            })
            .collect();
        bareiss_determinant(&mut a, m) as u128
    }

    /// Replaces one copy of the edge `{u, v}` by a path of `parts` unit edges
    /// through fresh vertices `n, n+1, ...` (ordered from `u` to `v`).
    pub fn subdivide(&self, u: usize, v: usize, parts: usize) -> Result<Graph> {
        let n = self.vertex_count();
        if u >= n || v >= n || self.adj[u][v] == 0 {
            return Err(Error::UnknownEdge(u, v));
        }
        if parts == 0 {
            return Err(Error::ZeroParts);
        }
        if parts == 1 {
            return Ok(self.clone());
        }
        let mut edges = self.edges();
        for e in edges.iter_mut() {
            if (e.0, e.1) == (u.min(v), u.max(v)) {
                e.2 -= 1;
            }
        }
        edges.retain(|e| e.2 > 0);
        let fresh = parts - 1;
        let mut prev = u;
        for i in 0..fresh {
            edges.push((prev, n + i, 1));
            prev = n + i;
        }
        edges.push((prev, v, 1));
        Graph::new(n + fresh, &edges)
    }
}

/// Determinant of an integer matrix by fraction-free elimination.
fn bareiss_determinant(a: &mut [Vec<i128>], n: usize) -> i128 {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// A graph with two distinct marked vertices `v` and `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedGraph {
    pub graph: Graph,
    pub v: usize,
    pub w: usize,
}

impl MarkedGraph {
    pub fn new(graph: Graph, v: usize, w: usize) -> Result<Self> {
        let n = graph.vertex_count();
        if v >= n {
            return Err(Error::VertexOutOfRange(v));
        }
        if w >= n {
            return Err(Error::VertexOutOfRange(w));
        }
        if v == w {
            return Err(Error::SameMarks);
        }
        Ok(MarkedGraph { graph, v, w })
    }

    /// Cycle of length `l1 + l2` with `v = 0` and `w = l1`: the arc through
    /// `1..l1` has length `l1`, the other arc has length `l2`.
    pub fn cycle_with_arcs(l1: usize, l2: usize) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::InvalidChain("arc lengths must be positive".into()));
        }
        MarkedGraph::new(Graph::cycle(l1 + l2)?, 0, l1)
    }

    pub fn genus(&self) -> i64 {
        self.graph.genus()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn zero(&self) -> Divisor {
        Divisor::zero(self.vertex_count())
    }

    /// `d + a·v - b·w`
    pub fn twist(&self, d: &Divisor, a: i64, b: i64) -> Divisor {
        let mut out = d.clone();
        out.0[self.v] += a;
        out.0[self.w] -= b;
        out
    }
}

/// Integer chip configuration on vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Divisor(Vec<i64>);

impl Divisor {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Divisor(coeffs)
    }

    pub fn zero(n: usize) -> Self {
        Divisor(vec![0; n])
    }

    /// `c · u`
    pub fn point(n: usize, u: usize, c: i64) -> Self {
        let mut d = Divisor::zero(n);
        d.0[u] = c;
        d
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<i64> {
        self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    /// Returns `self + c·u`.
    pub fn plus(&self, u: usize, c: i64) -> Divisor {
        let mut out = self.clone();
        out.0[u] += c;
        out
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn check_size(&self, g: &Graph) -> Result<()> {
        if self.len() != g.vertex_count() {
            return Err(Error::DivisorSize {
                expected: g.vertex_count(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Divisor {
    type Output = i64;
    fn index(&self, u: usize) -> &i64 {
        &self.0[u]
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        Divisor(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        Divisor(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        Divisor(self.0.iter().map(|a| -a).collect())
    }
}

// ---- JSON file formats ----

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct MarksJson {
    pub v: usize,
    pub w: usize,
}

/// `{"vertices": n, "edges": [[u, v, multiplicity], ...], "marks": {"v": id, "w": id}}`
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marks: Option<MarksJson>,
}

impl GraphJson {
    pub fn graph(&self) -> Result<Graph> {
        Graph::new(self.vertices, &self.edges)
    }

    pub fn marked(&self) -> Result<MarkedGraph> {
        let marks = self
            .marks
            .ok_or_else(|| Error::Json("graph file has no \"marks\"".into()))?;
        MarkedGraph::new(self.graph()?, marks.v, marks.w)
    }

    pub fn from_graph(g: &Graph, marks: Option<(usize, usize)>) -> Self {
        GraphJson {
            vertices: g.vertex_count(),
            edges: g.edges(),
            marks: marks.map(|(v, w)| MarksJson { v, w }),
        }
    }
}

/// `{"coeffs": {"vertexId": int, ...}}`, absent ids meaning 0.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct DivisorJson {
    pub coeffs: BTreeMap<String, i64>,
}

impl DivisorJson {
    pub fn divisor(&self, n: usize) -> Result<Divisor> {
        let mut d = Divisor::zero(n);
        for (key, &c) in &self.coeffs {
            let u: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Json(format!("bad vertex id {key:?}")))?;
            if u >= n {
                return Err(Error::VertexOutOfRange(u));
            }
            d.0[u] += c;
        }
        Ok(d)
    }

    pub fn from_divisor(d: &Divisor) -> Self {
        DivisorJson {
            coeffs: d
                .0
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(u, &c)| (u.to_string(), c))
                .collect(),
        }
    }
}
