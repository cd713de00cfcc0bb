//! Cut points, cut pairs and the combined tree of a finite connected graph.
//!
//! Blocks come from a low-point DFS. Inside each block, cut pairs are found
//! by exhaustive removal; mutually separating ("crossing") pairs are grouped
//! into necklaces, pairs that cross nothing are inseparable, and maximal sets
//! no cut pair can split become rigid pieces. The tree joins each separator
//! (cut point or inseparable pair) to the pieces containing it.

mod blocks;
mod pairs;
mod tree;

pub use blocks::{block_cut_tree, cut_vertices, Block, BlockCutTree};
pub use pairs::{analyze_block, analyze_block_excluding, enumerate_cut_pairs, separates, BlockAnalysis, SeparatorPair};
pub use tree::{
    check_automorphism, combined_tree, induced_tree_map, CombinedTree, NodeKind, TreeJson, TreeMap, TreeNode,
    TreeVertexJson,
};

use crate::error::Result;
use crate::metric_graph::{components_after_removal, MetricGraph, VertexId};

/// Pairs of non-articulation vertices whose removal disconnects `g`.
pub fn graph_cut_pairs(g: &MetricGraph) -> Result<Vec<(VertexId, VertexId)>> {
    let cuts = cut_vertices(g)?;
    let n = g.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if cuts.binary_search(&a).is_err()
                && cuts.binary_search(&b).is_err()
                && components_after_removal(g, &[a, b]).len() > 1
            {
                out.push((a, b));
            }
        }
    }
    Ok(out)
}
