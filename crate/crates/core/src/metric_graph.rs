//! Finite unit-edge graphs and their hop metric.
//!
//! Every space in the crate (Cayley balls, horoballs, cusped and coned
//! spaces, sphere graphs) is carried by a [`MetricGraph`]. Vertex ids are
//! dense `0..n`; insertion order is preserved so that every derived output
//! is reproducible.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};

pub type VertexId = usize;

/// Undirected simple graph with unit edge lengths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetricGraph {
    adj: Vec<Vec<VertexId>>,
    edge_count: usize,
    labels: BTreeMap<VertexId, String>,
}

impl MetricGraph {
    pub fn new(n: usize) -> Self {
        MetricGraph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
            labels: BTreeMap::new(),
        }
    }

    /// Builds a graph from an edge list. Duplicate edges are merged; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let mut g = MetricGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds a vertex and returns its id.
    pub fn add_vertex(&mut self) -> VertexId {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Inserts `{u, v}`. Returns `false` if the edge was already present.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(input(format!("self-loop at vertex {u}")));
        }
        match self.adj[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adj[u].insert(pos, v);
                let pos_v = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[v].insert(pos_v, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.n()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(input(format!("vertex {v} not in graph of order {}", self.n())))
        }
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, String> {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    pub fn set_label(&mut self, v: VertexId, label: impl Into<String>) -> Result<()> {
        self.check_vertex(v)?;
        self.labels.insert(v, label.into());
        Ok(())
    }

    /// Subgraph induced on `vertices`; vertex `vertices[i]` becomes `i`.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> MetricGraph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut sub = MetricGraph::new(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = local[w];
                if j != usize::MAX && i < j {
                    sub.add_edge(i, j).expect("induced edge is valid");
                }
            }
            if let Some(l) = self.labels.get(&v) {
                sub.labels.insert(i, l.clone());
            }
        }
        sub
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || components_after_removal(self, &[]).len() == 1
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        components_after_removal(self, &[])
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            edges: self.edges().map(|(u, v)| vec![u, v]).collect(),
            labels: if self.labels.is_empty() {
                None
            } else {
                Some(self.labels.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
            },
        }
    }

    pub fn from_json(doc: &GraphJson) -> Result<Self> {
        let mut g = MetricGraph::new(doc.n);
        for e in &doc.edges {
            if e.len() != 2 {
                return Err(input(format!(
                    "edge {e:?}: expected [i, j]; weighted edges are not supported"
                )));
            }
            g.add_edge(e[0], e[1])?;
        }
        if let Some(labels) = &doc.labels {
            for (k, v) in labels {
                let id: VertexId = k
                    .parse()
                    .map_err(|_| input(format!("label key {k:?} is not a vertex id")))?;
                g.set_label(id, v.clone())?;
            }
        }
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(s)?;
        Self::from_json(&doc)
    }

    /// Graphviz rendering. `attrs` supplies extra per-vertex attributes.
    pub fn to_dot_with(&self, name: &str, attrs: impl Fn(VertexId) -> Option<String>) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.n() {
            let mut parts = Vec::new();
            if let Some(l) = self.label(v) {
                parts.push(format!("label=\"{}\"", l.replace('"', "\\\"")));
            }
            if let Some(extra) = attrs(v) {
                parts.push(extra);
            }
            if parts.is_empty() {
                out.push_str(&format!("  {v};\n"));
            } else {
                out.push_str(&format!("  {v} [{}];\n", parts.join(", ")));
            }
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("  {u} -- {v};\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_dot(&self, name: &str) -> String {
        self.to_dot_with(name, |_| None)
    }
}

/// Serialized form: `{"n": int, "edges": [[i, j], ...], "labels": {id: string}}`.
/// Edges are emitted sorted, which is the canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<String, String>>,
}

/// Hop distances from `source`; `None` marks unreachable vertices.
pub fn bfs_distances(g: &MetricGraph, source: VertexId) -> Result<Vec<Option<u32>>> {
    g.check_vertex(source)?;
    Ok(bfs_avoiding(g, source, None))
}

/// BFS that never enters vertices flagged in `blocked`. The source itself is
/// always explored.
pub(crate) fn bfs_avoiding(g: &MetricGraph, source: VertexId, blocked: Option<&[bool]>) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in g.neighbors(u) {
            if dist[w].is_none() && !blocked.is_some_and(|b| b[w]) {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// All-pairs hop distances of a graph.
///
/// Stored densely; unreachable entries are reported as `None` by every
/// accessor, never as a large finite number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

const UNREACHABLE: u32 = u32::MAX;

impl DistanceMatrix {
    /// Builds the matrix from per-source rows; rows are computed in parallel.
    pub fn from_graph(g: &MetricGraph) -> Self {
        Self::from_rows(g.n(), |s| bfs_avoiding(g, s, None))
    }

    /// Distances in `g` restricted to paths that avoid `blocked` vertices
    /// (blocked endpoints only reach themselves).
    pub fn avoiding(g: &MetricGraph, blocked: &[bool]) -> Self {
        Self::from_rows(g.n(), |s| {
            if blocked[s] {
                let mut row = vec![None; g.n()];
                row[s] = Some(0);
                row
            } else {
                bfs_avoiding(g, s, Some(blocked))
            }
        })
    }

    fn from_rows(n: usize, row: impl Fn(usize) -> Vec<Option<u32>> + Sync) -> Self {
        let mut data = vec![UNREACHABLE; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(s, chunk)| {
            if s < n {
                for (t, d) in row(s).into_iter().enumerate() {
                    chunk[t] = d.unwrap_or(UNREACHABLE);
                }
            }
        });
        DistanceMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> Option<u32> {
        let d = self.data[u * self.n + v];
        (d != UNREACHABLE).then_some(d)
    }

    pub fn row(&self, u: VertexId) -> impl Iterator<Item = Option<u32>> + '_ {
        self.data[u * self.n..(u + 1) * self.n]
            .iter()
            .map(|&d| (d != UNREACHABLE).then_some(d))
    }

    pub fn is_connected(&self) -> bool {
        !self.data.contains(&UNREACHABLE)
    }

    /// Largest finite distance, or `None` if some pair is unreachable.
    pub fn diameter(&self) -> Option<u32> {
        if self.is_connected() {
            Some(self.data.iter().copied().max().unwrap_or(0))
        } else {
            None
        }
    }

    /// Dense copy of a connected matrix, row-major.
    pub fn finite_entries(&self) -> Result<Vec<u32>> {
        if self.is_connected() {
            Ok(self.data.clone())
        } else {
            Err(domain("distance matrix has unreachable pairs"))
        }
    }
}

/// All-pairs hop distances.
pub fn distance_matrix(g: &MetricGraph) -> DistanceMatrix {
    DistanceMatrix::from_graph(g)
}

/// An exact half-integer, stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct HalfInteger {
    pub doubled: i64,
}

impl HalfInteger {
    pub fn from_doubled(doubled: i64) -> Self {
        HalfInteger { doubled }
    }

    pub fn from_integer(v: i64) -> Self {
        HalfInteger { doubled: 2 * v }
    }

    pub fn as_f64(self) -> f64 {
        self.doubled as f64 / 2.0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.doubled % 2 == 0 {
            write!(f, "{}", self.doubled / 2)
        } else {
            let sign = if self.doubled < 0 { "-" } else { "" };
            write!(f, "{sign}{}.5", self.doubled.abs() / 2)
        }
    }
}

/// Gromov product `(x|y)_base = (d(b,x) + d(b,y) - d(x,y)) / 2`.
pub fn gromov_product(d: &DistanceMatrix, x: VertexId, y: VertexId, base: VertexId) -> Result<HalfInteger> {
    for v in [x, y, base] {
        if v >= d.n() {
            return Err(input(format!("vertex {v} not in matrix of order {}", d.n())));
        }
    }
    let get = |u, v| {
        d.get(u, v)
            .map(i64::from)
            .ok_or_else(|| domain(format!("vertices {u} and {v} are not connected")))
    };
    Ok(HalfInteger::from_doubled(get(base, x)? + get(base, y)? - get(x, y)?))
}

/// Connected components of `g` minus `removed`, each sorted ascending and
/// ordered by smallest member.
pub fn components_after_removal(g: &MetricGraph, removed: &[VertexId]) -> Vec<Vec<VertexId>> {
    let mut blocked = vec![false; g.n()];
    for &r in removed {
        if r < g.n() {
            blocked[r] = true;
        }
    }
    let mut comp = vec![usize::MAX; g.n()];
    let mut out: Vec<Vec<VertexId>> = Vec::new();
    let mut stack = Vec::new();
    for s in 0..g.n() {
        if blocked[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !blocked[w] && comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Small graph families used throughout tests and examples.
pub mod families {
    use super::{MetricGraph, VertexId};

    pub fn path(n: usize) -> MetricGraph {
        MetricGraph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> MetricGraph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        MetricGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> MetricGraph {
        MetricGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    pub fn star(leaves: usize) -> MetricGraph {
        MetricGraph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    /// Hub `0` joined to every vertex of the rim cycle `1..=rim`.
    pub fn wheel(rim: usize) -> MetricGraph {
        let mut g = MetricGraph::new(rim + 1);
        for i in 0..rim {
            g.add_edge(0, i + 1).unwrap();
            g.add_edge(i + 1, (i + 1) % rim + 1).unwrap();
        }
        g
    }

    /// Three internally disjoint paths of `arm_len` edges between vertex 0
    /// (`a`) and vertex 1 (`b`). Arm `k` has interior vertices
    /// `2 + k*(arm_len-1) ..`, listed from the `a` end.
    pub fn theta(arm_len: usize) -> MetricGraph {
        assert!(arm_len >= 2);
        let inner = arm_len - 1;
        let mut g = MetricGraph::new(2 + 3 * inner);
        for k in 0..3 {
            let ids: Vec<VertexId> = std::iter::once(0)
                .chain((0..inner).map(|i| 2 + k * inner + i))
                .chain(std::iter::once(1))
                .collect();
            for w in ids.windows(2) {
                g.add_edge(w[0], w[1]).unwrap();
            }
        }
        g
    }

    /// Two triangles sharing vertex 0.
    pub fn bowtie() -> MetricGraph {
        MetricGraph::from_edges(5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)]).unwrap()
    }
}
