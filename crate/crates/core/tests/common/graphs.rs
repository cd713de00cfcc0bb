//! Graph generators for property tests: exhaustive enumeration up to
//! isomorphism, seeded random graphs and brute-force automorphism groups.

use std::collections::HashSet;

use cusptree::metric_graph::MetricGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adjacency as bitmasks; `n ≤ 16`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Small {
    pub n: usize,
    pub adj: Vec<u16>,
}

impl Small {
    pub fn to_graph(&self) -> MetricGraph {
        let mut g = MetricGraph::new(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u] >> v & 1 == 1 {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    }

    fn has(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    /// Upper-triangle adjacency bits under the vertex order `order`.
    fn code(&self, order: &[usize]) -> u128 {
        let mut c = 0u128;
        for i in 0..self.n {
            for j in i + 1..self.n {
                c = c << 1 | self.has(order[i], order[j]) as u128;
            }
        }
        c
    }

    /// Refines an ordered partition until every vertex in a cell has the
    /// same number of neighbours in each cell.
    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        loop {
            let mut cell_of = vec![0; self.n];
            for (i, c) in cells.iter().enumerate() {
                for &v in c {
                    cell_of[v] = i;
                }
            }
            let mut next = Vec::new();
            for c in &cells {
                let mut keyed: Vec<(Vec<u8>, usize)> = c
                    .iter()
                    .map(|&v| {
                        let mut counts = vec![0u8; cells.len()];
                        for w in 0..self.n {
                            if self.has(v, w) {
                                counts[cell_of[w]] += 1;
                            }
                        }
                        (counts, v)
                    })
                    .collect();
                keyed.sort();
                let mut start = 0;
                for i in 1..=keyed.len() {
                    if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                        next.push(keyed[start..i].iter().map(|x| x.1).collect());
                        start = i;
                    }
                }
            }
            if next.len() == cells.len() {
                return next;
            }
            cells = next;
        }
    }

    /// Canonical code by individualization and refinement.
    pub fn canonical(&self) -> (usize, u128) {
        fn search(g: &Small, cells: Vec<Vec<usize>>, best: &mut Option<u128>) {
            let cells = g.refine(cells);
            match cells.iter().position(|c| c.len() > 1) {
                None => {
                    let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
                    let code = g.code(&order);
                    if best.map_or(true, |b| code < b) {
                        *best = Some(code);
                    }
                }
                Some(i) => {
                    for &v in &cells[i] {
                        let mut next = cells[..i].to_vec();
                        next.push(vec![v]);
                        next.push(cells[i].iter().copied().filter(|&w| w != v).collect());
                        next.extend_from_slice(&cells[i + 1..]);
                        search(g, next, best);
                    }
                }
            }
        }
        let mut best = None;
        search(self, vec![(0..self.n).collect()], &mut best);
        (self.n, best.unwrap_or(0))
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen: u16 = 1;
        let mut frontier: u16 = 1;
        while frontier != 0 {
            let mut next = 0u16;
            for v in 0..self.n {
                if frontier >> v & 1 == 1 {
                    next |= self.adj[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == self.n
    }

    /// All automorphisms by backtracking over degree-compatible images.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let deg: Vec<u32> = self.adj.iter().map(|a| a.count_ones()).collect();
        let mut out = Vec::new();
        let mut image = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        fn go(g: &Small, deg: &[u32], v: usize, image: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if v == g.n {
                out.push(image.clone());
                return;
            }
            for w in 0..g.n {
                if used[w] || deg[w] != deg[v] {
                    continue;
                }
                if (0..v).any(|u| g.has(u, v) != g.has(image[u], w)) {
                    continue;
                }
                image[v] = w;
                used[w] = true;
                go(g, deg, v + 1, image, used, out);
                used[w] = false;
            }
            image[v] = usize::MAX;
        }
        go(self, &deg, 0, &mut image, &mut used, &mut out);
        out
    }
}

/// One representative of every isomorphism class of graphs on `n` vertices,
/// for `n = 1..=max_n`.
pub fn all_graphs_up_to(max_n: usize) -> Vec<Vec<Small>> {
    let mut levels: Vec<Vec<Small>> = vec![vec![Small { n: 1, adj: vec![0] }]];
    for n in 2..=max_n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in levels.last().unwrap() {
            for mask in 0u16..(1 << (n - 1)) {
                let mut adj = g.adj.clone();
                for (u, a) in adj.iter_mut().enumerate() {
                    if mask >> u & 1 == 1 {
                        *a |= 1 << (n - 1);
                    }
                }
                adj.push(mask);
                let h = Small { n, adj };
                if seen.insert(h.canonical()) {
                    next.push(h);
                }
            }
        }
        levels.push(next);
    }
    levels
}

/// Random connected graph: a random labelled tree plus extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> MetricGraph {
    let mut g = MetricGraph::new(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        g.add_edge(order[i], parent).unwrap();
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

/// Random 2-connected graph from a cycle by adding ears (paths between
/// distinct existing vertices); total vertex count is exactly `n`.
pub fn random_biconnected(rng: &mut ChaCha8Rng, n: usize) -> MetricGraph {
    let start = rng.gen_range(3..=n.min(6));
    let mut g = MetricGraph::new(start);
    for i in 0..start {
        g.add_edge(i, (i + 1) % start).unwrap();
    }
    while g.n() < n {
        let u = rng.gen_range(0..g.n());
        let mut v = rng.gen_range(0..g.n());
        while v == u {
            v = rng.gen_range(0..g.n());
        }
        let interior = rng.gen_range(0..=(n - g.n()).min(3));
        if interior == 0 {
            if !g.has_edge(u, v) {
                g.add_edge(u, v).unwrap();
            }
            continue;
        }
        let mut prev = u;
        for _ in 0..interior {
            let w = g.add_vertex();
            g.add_edge(prev, w).unwrap();
            prev = w;
        }
        g.add_edge(prev, v).unwrap();
    }
    for _ in 0..rng.gen_range(0..3) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random labelled tree on `n` vertices.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> MetricGraph {
    random_connected(rng, n, 0)
}
