//! Combinatorial horoballs, cusped spaces and coned spaces over finite graphs.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::group_models::CosetPiece;
use crate::metric_graph::{bfs_distances, DistanceMatrix, GraphJson, MetricGraph, VertexId};

/// Combinatorial horoball over a base graph, truncated at `max_depth`.
/// Vertex `(t, n)` has id `n·|V_T| + t`.
#[derive(Clone, Debug)]
pub struct Horoball {
    pub base: MetricGraph,
    pub max_depth: u32,
    pub graph: MetricGraph,
}

impl Horoball {
    pub fn base_len(&self) -> usize {
        self.base.n()
    }

    pub fn id(&self, t: VertexId, n: u32) -> VertexId {
        n as usize * self.base.n() + t
    }

    pub fn coords(&self, v: VertexId) -> (VertexId, u32) {
        (v % self.base.n(), (v / self.base.n()) as u32)
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.coords(v).1
    }

    /// Exact hop distance between two horoball vertices.
    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<u32> {
        self.graph.check_vertex(v)?;
        bfs_distances(&self.graph, u)?[v]
            .ok_or_else(|| Error::Domain(format!("vertices {u} and {v} are in different components")))
    }
}

pub fn build_horoball(base: &MetricGraph, max_depth: u32) -> Result<Horoball> {
    if base.is_empty() {
        return Err(input("horoball base is empty"));
    }
    let m = base.n();
    let levels = max_depth as usize + 1;
    let mut graph = MetricGraph::new(m * levels);
    let d = DistanceMatrix::from_graph(base);
    for n in 0..levels {
        let reach = 1u64 << n.min(63);
        for a in 0..m {
            if n + 1 < levels {
                graph.add_edge(n * m + a, (n + 1) * m + a)?;
            }
            for b in a + 1..m {
                if let Some(dist) = d.get(a, b) {
                    if dist as u64 <= reach {
                        graph.add_edge(n * m + a, n * m + b)?;
                    }
                }
            }
        }
    }
    for (&t, l) in base.labels() {
        graph.set_label(t, l.clone())?;
    }
    Ok(Horoball { base: base.clone(), max_depth, graph })
}

/// Smallest `m ≥ 0` with `2^m ≥ x`, for `x ≥ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Upper estimate for the horoball distance between `(t₁,n₁)` and `(t₂,n₂)`
/// with `d_T(t₁,t₂) = d_t`: `⌈2·log₂ d_t⌉ + 3 − n₁ − n₂`, but never below
/// `|n₁−n₂| + 1` (the cost of climbing to the deeper level and stepping
/// across). Valid whenever the horoball reaches depth `⌈log₂ d_t⌉`.
pub fn upper_bound_estimate(d_t: u64, n1: u32, n2: u32) -> i64 {
    let vertical = (n1 as i64 - n2 as i64).abs();
    if d_t == 0 {
        return vertical;
    }
    let two_log = ceil_log2(d_t.saturating_mul(d_t)) as i64;
    (two_log + 3 - n1 as i64 - n2 as i64).max(vertical + 1)
}

/// Per-piece bookkeeping in a cusped or coned space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceInfo {
    pub peripheral: String,
    /// Vertex id of the representative in the depth-0 graph.
    pub rep: VertexId,
    pub members: Vec<VertexId>,
    /// The horoball base is the induced subgraph rather than the piece's
    /// own generator edges.
    pub induced_fallback: bool,
}

/// Distance with an indication of whether truncation could have shortened it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncatedDistance {
    pub hops: Option<u32>,
    /// True iff some geodesic avoids the deepest level, so the value equals
    /// the distance in any deeper truncation of the same space.
    pub truncation_safe: bool,
}

/// A graph whose far end (deepest horoball level) is an artifact of
/// truncation.
pub struct TruncatedMetric {
    full: DistanceMatrix,
    shallow: Option<DistanceMatrix>,
    deep: Vec<bool>,
}

impl TruncatedMetric {
    pub fn new(graph: &MetricGraph, deep: Vec<bool>) -> Self {
        let full = DistanceMatrix::from_graph(graph);
        let shallow = deep.iter().any(|&b| b).then(|| DistanceMatrix::avoiding(graph, &deep));
        TruncatedMetric { full, shallow, deep }
    }

    pub fn full(&self) -> &DistanceMatrix {
        &self.full
    }

    pub fn query(&self, u: VertexId, v: VertexId) -> TruncatedDistance {
        let hops = self.full.get(u, v);
        let truncation_safe = match &self.shallow {
            None => true,
            Some(s) => !self.deep[u] && !self.deep[v] && s.get(u, v) == hops,
        };
        TruncatedDistance { hops, truncation_safe }
    }

    pub fn is_safe(&self, u: VertexId, v: VertexId) -> bool {
        self.query(u, v).truncation_safe
    }
}

/// Cayley ball with a truncated horoball glued along each coset piece.
///
/// Depth-0 vertices keep their base ids; horoball vertices follow, grouped by
/// piece, then level, then member order.
#[derive(Clone, Debug)]
pub struct CuspedSpace {
    pub graph: MetricGraph,
    pub depth: Vec<u32>,
    pub horoball_of: Vec<Option<usize>>,
    pub pieces: Vec<PieceInfo>,
    pub max_depth: u32,
    pub base_len: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    /// Every vertex at depth 0.
    I1,
    /// Runs through a horoball between depth-0 visits.
    I2,
}

/// A sub-path `path[start..=end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

fn piece_base(base: &MetricGraph, piece: &CosetPiece) -> Result<(MetricGraph, bool)> {
    for &v in &piece.members {
        base.check_vertex(v)?;
    }
    if let Some(edges) = &piece.base_edges {
        let g = MetricGraph::from_edges(piece.members.len(), edges.iter().copied())?;
        if g.is_connected() {
            return Ok((g, false));
        }
    }
    Ok((base.induced_subgraph(&piece.members), true))
}

/// `⌈log₂(max base diameter)⌉ + 2`.
pub fn default_max_depth(bases: &[MetricGraph]) -> u32 {
    let diam = bases
        .iter()
        .filter_map(|g| DistanceMatrix::from_graph(g).row_max())
        .max()
        .unwrap_or(0);
    ceil_log2(diam.max(1) as u64) + 2
}

impl DistanceMatrix {
    fn row_max(&self) -> Option<u32> {
        (0..self.n()).flat_map(|u| self.row(u).flatten()).max()
    }
}

pub fn build_cusped_space(base: &MetricGraph, pieces: &[CosetPiece], max_depth: Option<u32>) -> Result<CuspedSpace> {
    let mut warnings = Vec::new();
    let mut kept = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        if p.members.is_empty() {
            let msg = format!("piece {i} ({}) is empty and was skipped", p.peripheral);
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        let (g, fallback) = piece_base(base, p)?;
        if fallback && p.base_edges.is_some() {
            let msg = format!("piece {i} ({}): generator edges disconnected, using induced metric", p.peripheral);
            warn!("{msg}");
            warnings.push(msg);
        }
        if !g.is_connected() {
            let msg = format!("piece {i} ({}) has a disconnected base", p.peripheral);
            warn!("{msg}");
            warnings.push(msg);
        }
        kept.push((p, g, fallback));
    }
    let bases: Vec<MetricGraph> = kept.iter().map(|(_, g, _)| g.clone()).collect();
    let max_depth = max_depth.unwrap_or_else(|| default_max_depth(&bases));

    let n0 = base.n();
    let mut graph = base.clone();
    let mut depth = vec![0u32; n0];
    let mut horoball_of = vec![None; n0];
    let mut infos = Vec::new();
    for (h, (p, pb, fallback)) in kept.iter().enumerate() {
        let ball = build_horoball(pb, max_depth)?;
        let m = pb.n();
        let offset = graph.n();
        let map = |id: VertexId| -> VertexId {
            let (t, n) = (id % m, id / m);
            if n == 0 {
                p.members[t]
            } else {
                offset + (n - 1) * m + t
            }
        };
        for _ in 0..m * max_depth as usize {
            graph.add_vertex();
        }
        for level in 1..=max_depth {
            for t in 0..m {
                depth.push(level);
                horoball_of.push(Some(h));
                if let Some(l) = base.label(p.members[t]) {
                    graph.set_label(map(level as usize * m + t), format!("{l}@{level}"))?;
                }
            }
        }
        for (a, b) in ball.graph.edges() {
            graph.add_edge(map(a), map(b))?;
        }
        infos.push(PieceInfo {
            peripheral: p.peripheral.clone(),
            rep: p.rep,
            members: p.members.clone(),
            induced_fallback: *fallback,
        });
    }
    Ok(CuspedSpace { graph, depth, horoball_of, pieces: infos, max_depth, base_len: n0, warnings })
}

impl CuspedSpace {
    /// Vertices on the deepest level, where truncation can cut geodesics.
    pub fn deepest_level(&self) -> Vec<bool> {
        if self.pieces.is_empty() {
            return vec![false; self.graph.n()];
        }
        let mut deep: Vec<bool> = self.depth.iter().map(|&d| d == self.max_depth).collect();
        if self.max_depth == 0 {
            deep.iter_mut().for_each(|b| *b = false);
            for p in &self.pieces {
                for &v in &p.members {
                    deep[v] = true;
                }
            }
        }
        deep
    }

    pub fn truncated_metric(&self) -> TruncatedMetric {
        TruncatedMetric::new(&self.graph, self.deepest_level())
    }

    /// Id of horoball vertex `(member, level)` of piece `h`.
    pub fn horoball_vertex(&self, h: usize, member: usize, level: u32) -> Option<VertexId> {
        let p = self.pieces.get(h)?;
        if member >= p.members.len() || level > self.max_depth {
            return None;
        }
        if level == 0 {
            return Some(p.members[member]);
        }
        let before: usize = self.pieces[..h].iter().map(|q| q.members.len()).sum::<usize>() * self.max_depth as usize;
        Some(self.base_len + before + (level as usize - 1) * p.members.len() + member)
    }

    /// Splits a path into maximal depth-0 runs (`I1`) and the horoball
    /// excursions between them (`I2`). Consecutive segments share an endpoint.
    pub fn decompose_path(&self, path: &[VertexId]) -> Result<Vec<Segment>> {
        if path.is_empty() {
            return Err(input("empty path"));
        }
        for &v in path {
            self.graph.check_vertex(v)?;
        }
        for w in path.windows(2) {
            if !self.graph.has_edge(w[0], w[1]) {
                return Err(input(format!("{} and {} are not adjacent", w[0], w[1])));
            }
        }
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for (i, &v) in path.iter().enumerate() {
            if self.depth[v] == 0 {
                match runs.last_mut() {
                    Some((_, end)) if *end + 1 == i => *end = i,
                    _ => runs.push((i, i)),
                }
            }
        }
        let last = path.len() - 1;
        if runs.is_empty() {
            return Ok(vec![Segment { kind: SegmentKind::I2, start: 0, end: last }]);
        }
        let mut segs = Vec::new();
        if runs[0].0 > 0 {
            segs.push(Segment { kind: SegmentKind::I2, start: 0, end: runs[0].0 });
        }
        for (k, &(a, b)) in runs.iter().enumerate() {
            segs.push(Segment { kind: SegmentKind::I1, start: a, end: b });
            let next = runs.get(k + 1).map_or(last, |r| r.0);
            if next > b {
                segs.push(Segment { kind: SegmentKind::I2, start: b, end: next });
            }
        }
        Ok(segs)
    }

    pub fn to_json(&self) -> CuspedSpaceJson {
        CuspedSpaceJson {
            graph: self.graph.to_json(),
            depth: self.depth.clone(),
            horoball_of: self.horoball_of.clone(),
            max_depth: self.max_depth,
            pieces: self.pieces_json(),
            warnings: self.warnings.clone(),
        }
    }

    fn pieces_json(&self) -> Vec<PieceJson> {
        pieces_json(&self.graph, &self.pieces)
    }

    /// Rebuilds a space from its JSON form, checking that the vertex layout
    /// matches the one `build_cusped_space` produces.
    pub fn from_json(doc: &CuspedSpaceJson) -> Result<Self> {
        let graph = MetricGraph::from_json(&doc.graph)?;
        let n = graph.n();
        if doc.depth.len() != n || doc.horoball_of.len() != n {
            return Err(input("depth and horoball_of must have one entry per vertex"));
        }
        let base_len = doc.depth.iter().take_while(|&&d| d == 0).count();
        let pieces: Vec<PieceInfo> = doc
            .pieces
            .iter()
            .map(|p| PieceInfo {
                peripheral: p.peripheral.clone(),
                rep: p.rep_vertex,
                members: p.members.clone(),
                induced_fallback: p.induced_fallback,
            })
            .collect();
        let x = CuspedSpace {
            graph,
            depth: doc.depth.clone(),
            horoball_of: doc.horoball_of.clone(),
            pieces,
            max_depth: doc.max_depth,
            base_len,
            warnings: doc.warnings.clone(),
        };
        let expected = base_len + x.pieces.iter().map(|p| p.members.len()).sum::<usize>() * x.max_depth as usize;
        if expected != n {
            return Err(input("vertex count does not match pieces and depth"));
        }
        for (h, p) in x.pieces.iter().enumerate() {
            if p.members.iter().any(|&m| m >= base_len) || !p.members.contains(&p.rep) {
                return Err(input(format!("piece {h} has members outside depth 0")));
            }
            for i in 0..p.members.len() {
                for level in 1..=x.max_depth {
                    let v = x.horoball_vertex(h, i, level).unwrap();
                    if x.depth[v] != level || x.horoball_of[v] != Some(h) {
                        return Err(input(format!("vertex {v} is out of place for piece {h}")));
                    }
                }
            }
        }
        if x.horoball_of[..base_len].iter().any(Option::is_some) {
            return Err(input("depth-0 vertices cannot belong to a horoball"));
        }
        Ok(x)
    }

    /// DOT with vertices shaded by depth.
    pub fn to_dot(&self) -> String {
        let max = self.max_depth.max(1);
        self.graph.to_dot_with("cusped", |v| {
            let shade = 95 - (self.depth[v] * 60 / max);
            Some(format!("style=filled, fillcolor=\"gray{shade}\""))
        })
    }
}

fn pieces_json(graph: &MetricGraph, pieces: &[PieceInfo]) -> Vec<PieceJson> {
    pieces
        .iter()
        .map(|p| PieceJson {
            peripheral: p.peripheral.clone(),
            rep: graph.label(p.rep).map_or_else(|| p.rep.to_string(), str::to_string),
            rep_vertex: p.rep,
            members: p.members.clone(),
            induced_fallback: p.induced_fallback,
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceJson {
    pub peripheral: String,
    /// Label of the representative (its word, for Cayley balls).
    pub rep: String,
    pub rep_vertex: VertexId,
    pub members: Vec<VertexId>,
    pub induced_fallback: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuspedSpaceJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    pub depth: Vec<u32>,
    pub horoball_of: Vec<Option<usize>>,
    pub max_depth: u32,
    pub pieces: Vec<PieceJson>,
    pub warnings: Vec<String>,
}

/// Base graph with one cone vertex per piece, joined to every member.
#[derive(Clone, Debug)]
pub struct ConedSpace {
    pub graph: MetricGraph,
    pub base_len: usize,
    pub pieces: Vec<PieceInfo>,
    pub warnings: Vec<String>,
}

impl ConedSpace {
    /// Vertex id of the cone over piece `i`.
    pub fn cone(&self, i: usize) -> VertexId {
        self.base_len + i
    }

    pub fn is_cone(&self, v: VertexId) -> bool {
        v >= self.base_len
    }

    pub fn to_json(&self) -> ConedSpaceJson {
        ConedSpaceJson {
            graph: self.graph.to_json(),
            cones: (0..self.pieces.len()).map(|i| self.cone(i)).collect(),
            pieces: pieces_json(&self.graph, &self.pieces),
            warnings: self.warnings.clone(),
        }
    }

    pub fn to_dot(&self) -> String {
        self.graph
            .to_dot_with("coned", |v| self.is_cone(v).then(|| "shape=box, style=filled".to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConedSpaceJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    pub cones: Vec<VertexId>,
    pub pieces: Vec<PieceJson>,
    pub warnings: Vec<String>,
}

pub fn build_coned_space(base: &MetricGraph, pieces: &[CosetPiece]) -> Result<ConedSpace> {
    let mut graph = base.clone();
    let mut infos = Vec::new();
    let mut warnings = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        if p.members.is_empty() {
            let msg = format!("piece {i} ({}) is empty and was skipped", p.peripheral);
            warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        let c = graph.add_vertex();
        graph.set_label(c, format!("cone:{}", infos.len()))?;
        for &v in &p.members {
            base.check_vertex(v)?;
            graph.add_edge(c, v)?;
        }
        infos.push(PieceInfo {
            peripheral: p.peripheral.clone(),
            rep: p.rep,
            members: p.members.clone(),
            induced_fallback: false,
        });
    }
    Ok(ConedSpace { graph, base_len: base.n(), pieces: infos, warnings })
}

/// Largest cycle length `fineness_profile` will enumerate.
pub const FINENESS_MAX_LEN: usize = 12;
const FINENESS_STEP_BUDGET: u64 = 200_000_000;

/// Number of simple cycles of length at most `max_len` through edge `(u, v)`.
pub fn fineness_profile(g: &MetricGraph, edge: (VertexId, VertexId), max_len: usize) -> Result<u64> {
    let (u, v) = edge;
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if !g.has_edge(u, v) {
        return Err(input(format!("({u}, {v}) is not an edge")));
    }
    if max_len > FINENESS_MAX_LEN {
        return Err(Error::Budget(format!("cycle length {max_len} exceeds limit {FINENESS_MAX_LEN}")));
    }
    if max_len < 3 {
        return Ok(0);
    }
    // Count simple v → u paths of 2..=max_len-1 edges that avoid the edge itself.
    let dist_to_u = bfs_distances(g, u)?;
    let mut on_path = vec![false; g.n()];
    on_path[v] = true;
    let mut state = Dfs { g, target: u, limit: max_len - 1, on_path, count: 0, steps: 0, dist: &dist_to_u };
    state.go(v, 0)?;
    Ok(state.count)
}

struct Dfs<'a> {
    g: &'a MetricGraph,
    target: VertexId,
    limit: usize,
    on_path: Vec<bool>,
    count: u64,
    steps: u64,
    dist: &'a [Option<u32>],
}

impl Dfs<'_> {
    fn go(&mut self, x: VertexId, len: usize) -> Result<()> {
        self.steps += 1;
        if self.steps > FINENESS_STEP_BUDGET {
            return Err(Error::Budget("cycle enumeration exceeded its step budget".into()));
        }
        for &y in self.g.neighbors(x) {
            if y == self.target {
                if len + 1 >= 2 {
                    self.count += 1;
                }
                continue;
            }
            if self.on_path[y] {
                continue;
            }
            match self.dist[y] {
                Some(d) if len + 1 + d as usize <= self.limit => {}
                _ => continue,
            }
            self.on_path[y] = true;
            self.go(y, len + 1)?;
            self.on_path[y] = false;
        }
        Ok(())
    }
}

/// Group vertices by horoball; depth-0 vertices map to `None`.
pub fn horoball_members(space: &CuspedSpace) -> BTreeMap<usize, Vec<VertexId>> {
    let mut out: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for (v, h) in space.horoball_of.iter().enumerate() {
        if let Some(h) = h {
            out.entry(*h).or_default().push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_models::{cayley_ball, coset_pieces, GroupModel, PeripheralSpec};
    use crate::metric_graph::families::{complete, cycle, path, star};

    #[test]
    fn horoball_over_p5() {
        let h = build_horoball(&path(5), 2).unwrap();
        assert_eq!(h.graph.n(), 15);
        for n in 0..=2u32 {
            for a in 0..5 {
                for b in a + 1..5 {
                    let expected = (b - a) as u64 <= 1 << n;
                    assert_eq!(h.graph.has_edge(h.id(a, n), h.id(b, n)), expected, "level {n} pair {a},{b}");
                }
            }
        }
    }

    #[test]
    fn horoball_over_point_is_a_ray() {
        let h = build_horoball(&MetricGraph::new(1), 3).unwrap();
        assert_eq!(h.graph.n(), 4);
        assert_eq!(h.graph.edge_count(), 3);
        assert_eq!(h.distance(0, 3).unwrap(), 3);
    }

    #[test]
    fn deep_level_of_c8_is_a_clique() {
        let h = build_horoball(&cycle(8), 3).unwrap();
        let level: Vec<_> = (0..8).map(|t| h.id(t, 3)).collect();
        assert!(level.iter().all(|&a| level.iter().all(|&b| a == b || h.graph.has_edge(a, b))));
    }

    #[test]
    fn horoball_distances_and_estimate() {
        let h = build_horoball(&path(17), 5).unwrap();
        assert_eq!(h.distance(h.id(0, 0), h.id(16, 0)).unwrap(), 8);
        for t in 0..17 {
            for n in 0..=5 {
                assert_eq!(h.distance(h.id(t, 0), h.id(t, n)).unwrap(), n);
            }
        }
        assert_eq!(upper_bound_estimate(16, 0, 0), 11);
        for a in 0..17 {
            for b in 0..17 {
                let dt = (a as i64 - b as i64).unsigned_abs();
                for n1 in 0..=5 {
                    for n2 in 0..=5 {
                        let exact = h.distance(h.id(a, n1), h.id(b, n2)).unwrap() as i64;
                        assert!(upper_bound_estimate(dt, n1, n2) >= exact, "{a},{n1} {b},{n2}");
                    }
                }
            }
        }
    }

    #[test]
    fn ceil_log2_values() {
        let got: Vec<u32> = [1, 2, 3, 4, 5, 8, 9, 256, 257].iter().map(|&x| ceil_log2(x)).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 8, 9]);
    }

    fn z2_space(radius: u32, depth: u32) -> (CuspedSpace, crate::group_models::CayleyBall) {
        let m = GroupModel::free_abelian(2).unwrap();
        let ball = cayley_ball(&m, radius);
        let p = PeripheralSpec::parse(&m, "A", &["a"]).unwrap();
        let pieces = coset_pieces(&ball, &m, &p).unwrap();
        (build_cusped_space(&ball.graph, &pieces, Some(depth)).unwrap(), ball)
    }

    #[test]
    fn z2_cusped_space_structure() {
        let (x, _) = z2_space(2, 2);
        let mut sizes: Vec<usize> = x.pieces.iter().map(|p| p.members.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 3, 3, 5]);
        assert_eq!(x.graph.n(), 13 + 2 * 13);
        for v in 0..x.graph.n() {
            assert_eq!(x.depth[v] == 0, x.horoball_of[v].is_none());
        }
        // removing depth 0 separates the horoballs
        let depth0: Vec<VertexId> = (0..x.base_len).collect();
        for comp in crate::metric_graph::components_after_removal(&x.graph, &depth0) {
            let hs: std::collections::BTreeSet<_> = comp.iter().map(|&v| x.horoball_of[v]).collect();
            assert_eq!(hs.len(), 1);
        }
        assert!(x.pieces.iter().all(|p| !p.induced_fallback));
    }

    #[test]
    fn z2_geodesic_decomposition() {
        let (x, ball) = z2_space(3, 3);
        let m = GroupModel::free_abelian(2).unwrap();
        let s = ball.vertex_of(&m.parse_word("a-a-a-").unwrap()).unwrap();
        let t = ball.vertex_of(&m.parse_word("aaa").unwrap()).unwrap();
        let path = shortest_path(&x.graph, s, t);
        assert_eq!(path.len() - 1, 5);
        let segs = x.decompose_path(&path).unwrap();
        let kinds: Vec<_> = segs.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![SegmentKind::I1, SegmentKind::I2, SegmentKind::I1]);
        assert_eq!(segs.iter().map(Segment::len).sum::<usize>(), path.len() - 1);
    }

    #[test]
    fn decomposition_edge_cases() {
        let (x, _) = z2_space(2, 2);
        let whole = x.decompose_path(&[0, 1]).unwrap();
        assert_eq!(whole, vec![Segment { kind: SegmentKind::I1, start: 0, end: 1 }]);
        let h = x.pieces.iter().position(|p| p.members.contains(&0)).unwrap();
        let i = x.pieces[h].members.iter().position(|&v| v == 0).unwrap();
        let ray: Vec<_> = (0..=2).map(|l| x.horoball_vertex(h, i, l).unwrap()).collect();
        let segs = x.decompose_path(&ray).unwrap();
        assert_eq!(
            segs,
            vec![
                Segment { kind: SegmentKind::I1, start: 0, end: 0 },
                Segment { kind: SegmentKind::I2, start: 0, end: 2 }
            ]
        );
        assert!(x.decompose_path(&[]).is_err());
        assert!(x.decompose_path(&[0, ray[2]]).is_err());
    }

    #[test]
    fn commutator_piece_has_three_vertex_base() {
        let m = GroupModel::free(2).unwrap();
        let ball = cayley_ball(&m, 4);
        let p = PeripheralSpec::parse(&m, "C", &["aba-b-"]).unwrap();
        let pieces = coset_pieces(&ball, &m, &p).unwrap();
        let x = build_cusped_space(&ball.graph, &pieces, Some(2)).unwrap();
        let h = x.pieces.iter().position(|p| p.members.contains(&0)).unwrap();
        assert_eq!(x.pieces[h].members.len(), 3);
        assert!(!x.pieces[h].induced_fallback);
    }

    #[test]
    fn finite_group_single_horoball() {
        let m = GroupModel::finite(crate::group_models::FiniteTable::cyclic(4), None).unwrap();
        let ball = cayley_ball(&m, 3);
        let p = PeripheralSpec::new(&m, "G", m.generators().to_vec()).unwrap();
        let pieces = coset_pieces(&ball, &m, &p).unwrap();
        let x = build_cusped_space(&ball.graph, &pieces, Some(3)).unwrap();
        assert_eq!(x.pieces.len(), 1);
        assert_eq!(x.graph.n(), 16);
    }

    #[test]
    fn default_depth_and_truncation_flags() {
        let pieces = vec![CosetPiece::induced("P", (0..9).collect())];
        let x = build_cusped_space(&path(9), &pieces, None).unwrap();
        assert_eq!(x.max_depth, 5);
        let tm = x.truncated_metric();
        assert!(tm.query(0, 8).truncation_safe);
        let deep = x.horoball_vertex(0, 0, x.max_depth).unwrap();
        assert!(!tm.query(0, deep).truncation_safe);

        // depth 1 is too shallow for a long path
        let y = build_cusped_space(&path(9), &pieces, Some(1)).unwrap();
        let q = y.truncated_metric().query(0, 8);
        assert!(!q.truncation_safe);
        assert_eq!(q.hops, Some(6));
    }

    #[test]
    fn empty_piece_is_skipped_with_warning() {
        let pieces = vec![CosetPiece::induced("P", vec![]), CosetPiece::induced("Q", vec![0, 1])];
        let x = build_cusped_space(&path(3), &pieces, Some(1)).unwrap();
        assert_eq!(x.pieces.len(), 1);
        assert_eq!(x.warnings.len(), 1);
        let c = build_coned_space(&path(3), &pieces).unwrap();
        assert_eq!(c.pieces.len(), 1);
    }

    #[test]
    fn coned_spaces() {
        let all = vec![CosetPiece::induced("G", (0..10).collect())];
        let c = build_coned_space(&path(10), &all).unwrap();
        assert_eq!(DistanceMatrix::from_graph(&c.graph).diameter(), Some(2));
        assert_eq!(c.graph.neighbors(c.cone(0)), (0..10).collect::<Vec<_>>().as_slice());

        let plain = build_coned_space(&cycle(5), &[]).unwrap();
        assert_eq!(plain.graph.edges().collect::<Vec<_>>(), cycle(5).edges().collect::<Vec<_>>());

        let m = GroupModel::free_abelian(2).unwrap();
        let ball = cayley_ball(&m, 2);
        let pieces = coset_pieces(&ball, &m, &PeripheralSpec::parse(&m, "A", &["a"]).unwrap()).unwrap();
        let c = build_coned_space(&ball.graph, &pieces).unwrap();
        assert_eq!(c.graph.n(), 18);
    }

    #[test]
    fn fineness_examples() {
        let c = build_coned_space(&cycle(6), &[CosetPiece::induced("G", (0..6).collect())]).unwrap();
        assert_eq!(fineness_profile(&c.graph, (c.cone(0), 0), 3).unwrap(), 2);
        assert_eq!(fineness_profile(&star(5), (0, 1), 12).unwrap(), 0);
        assert_eq!(fineness_profile(&cycle(6), (0, 1), 6).unwrap(), 1);
        assert_eq!(fineness_profile(&cycle(6), (0, 1), 5).unwrap(), 0);
        // K4: triangles through an edge = 2, 4-cycles = 2
        assert_eq!(fineness_profile(&complete(4), (0, 1), 4).unwrap(), 4);
        assert!(matches!(fineness_profile(&cycle(6), (0, 1), 13), Err(Error::Budget(_))));
        assert!(fineness_profile(&cycle(6), (0, 2), 4).is_err());
    }

    fn shortest_path(g: &MetricGraph, s: VertexId, t: VertexId) -> Vec<VertexId> {
        let d = bfs_distances(g, t).unwrap();
        let mut path = vec![s];
        let mut cur = s;
        while cur != t {
            cur = *g.neighbors(cur).iter().find(|&&w| d[w] == Some(d[cur].unwrap() - 1)).unwrap();
            path.push(cur);
        }
        path
    }

    #[test]
    fn json_roundtrip_has_depth_fields() {
        let (x, _) = z2_space(1, 1);
        let v = serde_json::to_value(x.to_json()).unwrap();
        assert_eq!(v["n"], 10);
        assert_eq!(v["depth"].as_array().unwrap().len(), 10);
        assert_eq!(v["pieces"][0]["rep"], "");
        assert!(x.to_dot().contains("gray"));
        let back = CuspedSpace::from_json(&serde_json::from_value(v).unwrap()).unwrap();
        assert_eq!(back.pieces, x.pieces);
        assert_eq!(back.graph.edges().collect::<Vec<_>>(), x.graph.edges().collect::<Vec<_>>());
        let mut bad = x.to_json();
        bad.depth.pop();
        assert!(CuspedSpace::from_json(&bad).is_err());
    }
}
