use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::metric_graph::{MetricGraph, VertexId};

/// A maximal 2-connected subgraph, or a bridge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: usize,
    /// Sorted global vertex ids.
    pub vertices: Vec<VertexId>,
    pub is_bridge: bool,
}

impl Block {
    /// The block as a graph on local ids `0..vertices.len()`.
    pub fn graph(&self, g: &MetricGraph) -> MetricGraph {
        g.induced_subgraph(&self.vertices)
    }

    pub fn local(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }
}

/// Blocks and articulation points with their incidence tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCutTree {
    pub cut_vertices: Vec<VertexId>,
    pub blocks: Vec<Block>,
    /// `(block id, cut vertex)` incidences.
    pub incidences: Vec<(usize, VertexId)>,
}

/// Articulation points of a connected graph, ascending.
pub fn cut_vertices(g: &MetricGraph) -> Result<Vec<VertexId>> {
    Ok(block_cut_tree(g)?.cut_vertices)
}

/// Block decomposition by the Hopcroft–Tarjan low-point DFS. Blocks are
/// ordered by their sorted vertex lists.
pub fn block_cut_tree(g: &MetricGraph) -> Result<BlockCutTree> {
    let n = g.n();
    if n == 0 {
        return Err(domain("empty graph"));
    }
    if !g.is_connected() {
        return Err(domain("graph is disconnected"));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut edge_stack: Vec<(VertexId, VertexId)> = Vec::new();
    let mut raw_blocks: Vec<Vec<VertexId>> = Vec::new();
    let mut time = 0;

    // Explicit stack of (vertex, parent, next neighbor index).
    let root = 0;
    let mut stack: Vec<(VertexId, Option<VertexId>, usize)> = vec![(root, None, 0)];
    disc[root] = time;
    low[root] = time;
    time += 1;
    let mut root_children = 0;
    while let Some(top) = stack.last_mut() {
        let (v, parent) = (top.0, top.1);
        let next = g.neighbors(v).get(top.2).copied();
        top.2 += 1;
        if let Some(w) = next {
            if disc[w] == usize::MAX {
                edge_stack.push((v, w));
                disc[w] = time;
                low[w] = time;
                time += 1;
                if v == root {
                    root_children += 1;
                }
                stack.push((w, Some(v), 0));
            } else if Some(w) != parent && disc[w] < disc[v] {
                edge_stack.push((v, w));
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(p) = parent {
                low[p] = low[p].min(low[v]);
                if low[v] >= disc[p] {
                    if p != root {
                        is_cut[p] = true;
                    }
                    let mut verts = BTreeSet::new();
                    while let Some((a, b)) = edge_stack.pop() {
                        verts.insert(a);
                        verts.insert(b);
                        if (a, b) == (p, v) {
                            break;
                        }
                    }
                    raw_blocks.push(verts.into_iter().collect());
                }
            }
        }
    }
    if root_children > 1 {
        is_cut[root] = true;
    }
    raw_blocks.sort();
    let blocks: Vec<Block> = raw_blocks
        .into_iter()
        .enumerate()
        .map(|(id, vertices)| {
            let is_bridge = vertices.len() == 2;
            Block { id, vertices, is_bridge }
        })
        .collect();
    let cut_vertices: Vec<VertexId> = (0..n).filter(|&v| is_cut[v]).collect();
    let incidences = blocks
        .iter()
        .flat_map(|b| b.vertices.iter().filter(|&&v| is_cut[v]).map(move |&v| (b.id, v)))
        .collect();
    Ok(BlockCutTree { cut_vertices, blocks, incidences })
}
