use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::blocks::block_cut_tree;
use super::pairs::{analyze_block_excluding, SeparatorPair};
use crate::error::{domain, input, Result};
use crate::metric_graph::{MetricGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    #[serde(rename = "cutpoint")]
    CutPoint,
    Pair,
    Necklace,
    Rigid,
}

impl NodeKind {
    /// Cut points and inseparable pairs separate; necklaces and rigid sets
    /// are the pieces between them.
    pub fn is_separator(self) -> bool {
        matches!(self, NodeKind::CutPoint | NodeKind::Pair)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub kind: NodeKind,
    /// Sorted underlying graph vertices.
    pub set: Vec<VertexId>,
    /// Block the node came from; `None` for cut points.
    pub block: Option<usize>,
}

/// The tree of cut points, inseparable cut pairs, necklaces and rigid sets.
/// Nodes are in canonical order (kind, then vertex set); edges are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinedTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<(usize, usize)>,
    pub pairs: Vec<SeparatorPair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub vertices: Vec<TreeVertexJson>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeVertexJson {
    #[serde(rename = "type")]
    pub kind: NodeKind,
    pub set: Vec<VertexId>,
}

/// Builds the combined tree of a connected graph with at least two vertices.
pub fn combined_tree(g: &MetricGraph) -> Result<CombinedTree> {
    if g.n() < 2 {
        return Err(domain("combined tree needs at least two vertices"));
    }
    let bct = block_cut_tree(g)?;
    let is_cut: BTreeSet<VertexId> = bct.cut_vertices.iter().copied().collect();
    let mut nodes: Vec<TreeNode> = bct
        .cut_vertices
        .iter()
        .map(|&v| TreeNode { kind: NodeKind::CutPoint, set: vec![v], block: None })
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut all_pairs = Vec::new();

    for block in &bct.blocks {
        let local_cuts: Vec<VertexId> =
            (0..block.vertices.len()).filter(|&v| is_cut.contains(&block.vertices[v])).collect();
        let a = analyze_block_excluding(&block.graph(g), &local_cuts)?;
        let glob = |v: VertexId| block.vertices[v];
        let mut class_nodes = Vec::new();
        for (c, set) in a.necklaces.iter().enumerate() {
            class_nodes.push(nodes.len());
            nodes.push(TreeNode { kind: NodeKind::Necklace, set: set.iter().map(|&v| glob(v)).collect(), block: Some(block.id) });
            for &i in &a.necklace_classes[c] {
                let (x, y) = a.pairs[i];
                all_pairs.push(pair(glob(x), glob(y), block.id, Some(c), false));
            }
        }
        for set in &a.rigid {
            class_nodes.push(nodes.len());
            nodes.push(TreeNode { kind: NodeKind::Rigid, set: set.iter().map(|&v| glob(v)).collect(), block: Some(block.id) });
        }
        for &i in &a.inseparable {
            let (x, y) = (glob(a.pairs[i].0), glob(a.pairs[i].1));
            all_pairs.push(pair(x, y, block.id, None, true));
            let p = nodes.len();
            nodes.push(TreeNode { kind: NodeKind::Pair, set: vec![x.min(y), x.max(y)], block: Some(block.id) });
            for &c in &class_nodes {
                if contains(&nodes[c].set, x) && contains(&nodes[c].set, y) {
                    edges.insert((p, c));
                }
            }
        }
        for (cp, &v) in bct.cut_vertices.iter().enumerate() {
            for &c in &class_nodes {
                if contains(&nodes[c].set, v) {
                    edges.insert((cp, c));
                }
            }
        }
    }
    all_pairs.sort();
    Ok(canonicalize(nodes, edges.into_iter().collect(), all_pairs))
}

fn pair(a: VertexId, b: VertexId, block: usize, class: Option<usize>, inseparable: bool) -> SeparatorPair {
    SeparatorPair { a: a.min(b), b: a.max(b), block, class, inseparable }
}

fn contains(set: &[VertexId], v: VertexId) -> bool {
    set.binary_search(&v).is_ok()
}

fn canonicalize(nodes: Vec<TreeNode>, edges: Vec<(usize, usize)>, pairs: Vec<SeparatorPair>) -> CombinedTree {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&i, &j| (nodes[i].kind, &nodes[i].set).cmp(&(nodes[j].kind, &nodes[j].set)));
    let mut new_id = vec![0; nodes.len()];
    for (k, &i) in order.iter().enumerate() {
        new_id[i] = k;
    }
    let mut edges: Vec<(usize, usize)> = edges
        .into_iter()
        .map(|(a, b)| {
            let (x, y) = (new_id[a], new_id[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut nodes_sorted: Vec<Option<TreeNode>> = nodes.into_iter().map(Some).collect();
    let nodes = order.iter().map(|&i| nodes_sorted[i].take().unwrap()).collect();
    CombinedTree { nodes, edges, pairs }
}

impl CombinedTree {
    /// A single node covering the whole vertex set, used where the tree of a
    /// one-vertex graph is needed.
    pub fn singleton(vertices: Vec<VertexId>) -> Self {
        CombinedTree { nodes: vec![TreeNode { kind: NodeKind::Rigid, set: vertices, block: None }], edges: vec![], pairs: vec![] }
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            vertices: self.nodes.iter().map(|n| TreeVertexJson { kind: n.kind, set: n.set.clone() }).collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("tree JSON serializes")
    }

    pub fn is_tree(&self) -> bool {
        let n = self.nodes.len();
        if n == 0 || self.edges.len() != n - 1 {
            return false;
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Every edge joins a separator node to a piece node.
    pub fn is_bipartite_by_kind(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.nodes[a].kind.is_separator() != self.nodes[b].kind.is_separator())
    }

    pub fn covered_vertices(&self) -> BTreeSet<VertexId> {
        self.nodes.iter().flat_map(|n| n.set.iter().copied()).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph combined_tree {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = match n.kind {
                NodeKind::CutPoint => "circle",
                NodeKind::Pair => "diamond",
                NodeKind::Necklace => "doublecircle",
                NodeKind::Rigid => "box",
            };
            let set: Vec<String> = n.set.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("  {i} [shape={shape}, label=\"{}\"];\n", set.join(",")));
        }
        for &(a, b) in &self.edges {
            s.push_str(&format!("  {a} -- {b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// The permutation of tree nodes induced by a graph automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMap {
    /// Image of each node; `None` when the mapped set is not a node.
    pub image: Vec<Option<usize>>,
    /// True iff every node maps to a node of the same kind and edges map to edges.
    pub verdict: bool,
}

/// Applies `sigma` to each node's set and looks the result up among nodes of
/// the same kind.
pub fn induced_tree_map(g: &MetricGraph, sigma: &[VertexId], t: &CombinedTree) -> Result<TreeMap> {
    check_automorphism(g, sigma)?;
    let index: BTreeMap<(NodeKind, &[VertexId]), usize> =
        t.nodes.iter().enumerate().map(|(i, n)| ((n.kind, n.set.as_slice()), i)).collect();
    let image: Vec<Option<usize>> = t
        .nodes
        .iter()
        .map(|n| {
            let mut s: Vec<VertexId> = n.set.iter().map(|&v| sigma[v]).collect();
            s.sort_unstable();
            index.get(&(n.kind, s.as_slice())).copied()
        })
        .collect();
    let edge_set: BTreeSet<(usize, usize)> = t.edges.iter().copied().collect();
    let verdict = image.iter().all(Option::is_some)
        && t.edges.iter().all(|&(a, b)| {
            let (x, y) = (image[a].unwrap(), image[b].unwrap());
            edge_set.contains(&(x.min(y), x.max(y)))
        });
    Ok(TreeMap { image, verdict })
}

pub fn check_automorphism(g: &MetricGraph, sigma: &[VertexId]) -> Result<()> {
    let n = g.n();
    if sigma.len() != n {
        return Err(input("permutation length differs from vertex count"));
    }
    let mut seen = vec![false; n];
    for &v in sigma {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(input("not a permutation of the vertices"));
        }
    }
    for (u, v) in g.edges() {
        if !g.has_edge(sigma[u], sigma[v]) {
            return Err(input(format!("edge ({u}, {v}) is not preserved")));
        }
    }
    Ok(())
}
