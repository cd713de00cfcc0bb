use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::metric_graph::{MetricGraph, VertexId};

/// A cut pair of one block, in global vertex ids (`a < b`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeparatorPair {
    pub a: VertexId,
    pub b: VertexId,
    pub block: usize,
    /// Index of the necklace this pair belongs to, within its block.
    pub class: Option<usize>,
    pub inseparable: bool,
}

/// Component label of every vertex of `g` after deleting `removed`
/// (`usize::MAX` on deleted vertices), and the number of components.
fn labels_without(g: &MetricGraph, removed: [VertexId; 2]) -> (Vec<usize>, usize) {
    let n = g.n();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX || removed.contains(&s) {
            continue;
        }
        label[s] = count;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if label[w] == usize::MAX && !removed.contains(&w) {
                    label[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    for r in removed {
        label[r] = usize::MAX;
    }
    (label, count)
}

/// All vertex pairs of a block whose removal leaves at least two
/// components, by exhaustive removal. Ids are those of `block`.
pub fn enumerate_cut_pairs(block: &MetricGraph) -> Vec<(VertexId, VertexId)> {
    let n = block.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if labels_without(block, [a, b]).1 >= 2 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Whether the vertices of `q` fall in different components once `p` is
/// removed from `block`.
pub fn separates(block: &MetricGraph, p: (VertexId, VertexId), q: (VertexId, VertexId)) -> Result<bool> {
    for v in [p.0, p.1, q.0, q.1] {
        block.check_vertex(v)?;
    }
    if q.0 == p.0 || q.0 == p.1 || q.1 == p.0 || q.1 == p.1 {
        return Err(input(format!("pair {q:?} overlaps separator {p:?}")));
    }
    let (label, _) = labels_without(block, [p.0, p.1]);
    Ok(label[q.0] != label[q.1])
}

/// Cut-pair structure of a single 2-connected block (or bridge), in local ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockAnalysis {
    pub pairs: Vec<(VertexId, VertexId)>,
    /// Pair indices of each necklace class.
    pub necklace_classes: Vec<Vec<usize>>,
    /// Sorted vertex set of each necklace, aligned with `necklace_classes`.
    pub necklaces: Vec<Vec<VertexId>>,
    /// Pair indices of inseparable pairs.
    pub inseparable: Vec<usize>,
    /// Maximal inseparable sets not absorbed into a necklace or a pair.
    pub rigid: Vec<Vec<VertexId>>,
}

/// Crossing classes, inseparable pairs and rigid sets of a block.
pub fn analyze_block(block: &MetricGraph) -> Result<BlockAnalysis> {
    analyze_block_excluding(block, &[])
}

/// As [`analyze_block`], but cut pairs touching a vertex listed in `excluded`
/// (local ids, typically cut vertices of the ambient graph) are ignored.
pub fn analyze_block_excluding(block: &MetricGraph, excluded: &[VertexId]) -> Result<BlockAnalysis> {
    let n = block.n();
    if n <= 1 {
        return Ok(BlockAnalysis::default());
    }
    if n == 2 {
        return Ok(BlockAnalysis { rigid: vec![vec![0, 1]], ..Default::default() });
    }
    let pairs: Vec<(VertexId, VertexId)> = enumerate_cut_pairs(block)
        .into_iter()
        .filter(|(a, b)| !excluded.contains(a) && !excluded.contains(b))
        .collect();
    let labels: Vec<Vec<usize>> = pairs.iter().map(|&(a, b)| labels_without(block, [a, b]).0).collect();
    let disjoint = |p: (usize, usize), q: (usize, usize)| p.0 != q.0 && p.0 != q.1 && p.1 != q.0 && p.1 != q.1;
    let splits = |i: usize, q: (usize, usize)| labels[i][q.0] != labels[i][q.1];

    let m = pairs.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut crosses_any = vec![false; m];
    let mut separated = vec![false; m];
    for i in 0..m {
        for j in 0..m {
            if i == j || !disjoint(pairs[i], pairs[j]) {
                continue;
            }
            let ij = splits(i, pairs[j]);
            if ij {
                separated[j] = true;
                if splits(j, pairs[i]) {
                    crosses_any[i] = true;
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                } else {
                    return Err(Error::Internal(format!(
                        "separation of {:?} by {:?} is not symmetric",
                        pairs[j], pairs[i]
                    )));
                }
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_class = vec![usize::MAX; m];
    let mut inseparable = Vec::new();
    for i in 0..m {
        if !crosses_any[i] {
            if separated[i] {
                return Err(Error::Internal(format!("pair {:?} is separated but crosses nothing", pairs[i])));
            }
            inseparable.push(i);
            continue;
        }
        let r = find(&mut parent, i);
        if root_class[r] == usize::MAX {
            root_class[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[root_class[r]].push(i);
    }
    let necklaces: Vec<Vec<VertexId>> = classes
        .iter()
        .map(|c| c.iter().flat_map(|&i| [pairs[i].0, pairs[i].1]).collect::<BTreeSet<_>>().into_iter().collect())
        .collect();

    // u ~ v when no cut pair avoiding both separates them.
    let mut related = vec![vec![true; n]; n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for u in 0..n {
            for v in u + 1..n {
                if u != a && u != b && v != a && v != b && labels[i][u] != labels[i][v] {
                    related[u][v] = false;
                    related[v][u] = false;
                }
            }
        }
    }
    let pair_sets: BTreeSet<Vec<VertexId>> = pairs.iter().map(|&(a, b)| vec![a, b]).collect();
    let mut rigid: Vec<Vec<VertexId>> = maximal_cliques(n, &related)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .filter(|c| !pair_sets.contains(c))
        .filter(|c| !necklaces.iter().any(|nk| c.iter().all(|v| nk.binary_search(v).is_ok())))
        .collect();
    rigid.sort();

    Ok(BlockAnalysis { pairs, necklace_classes: classes, necklaces, inseparable, rigid })
}

/// Maximal cliques by Bron–Kerbosch with pivoting; each clique sorted.
fn maximal_cliques(n: usize, adj: &[Vec<bool>]) -> Vec<Vec<VertexId>> {
    fn bk(adj: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() {
            if x.is_empty() {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(c);
            }
            return;
        }
        let pivot = *p.iter().chain(&x).max_by_key(|&&u| p.iter().filter(|&&v| v != u && adj[u][v]).count()).unwrap();
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| v == pivot || !adj[pivot][v]).collect();
        let mut p = p;
        for v in candidates {
            let np = p.iter().copied().filter(|&w| w != v && adj[v][w]).collect();
            let nx = x.iter().copied().filter(|&w| w != v && adj[v][w]).collect();
            r.push(v);
            bk(adj, r, np, nx, out);
            r.pop();
            p.retain(|&w| w != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    bk(adj, &mut Vec::new(), (0..n).collect(), Vec::new(), &mut out);
    out.sort();
    out
}
