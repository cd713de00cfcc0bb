//! Measuring quasi-isometry constants of vertex maps between finite graphs,
//! and extending maps over horoballs, cusped spaces and coned spaces.
//!
//! All constants are exact rationals. A map `f` is a `(k, c)`-quasi-isometric
//! embedding on a set of pairs when `d_X/k − c ≤ d_Y(f·, f·) ≤ k·d_X + c` for
//! every pair.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusp_spaces::{ConedSpace, CuspedSpace, Horoball, TruncatedMetric};
use crate::error::{domain, input, Result};
use crate::metric_graph::{DistanceMatrix, MetricGraph, VertexId};

pub type Rational = Ratio<i64>;

/// A partial map between vertex sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMap(pub Vec<Option<VertexId>>);

impl VertexMap {
    pub fn identity(n: usize) -> Self {
        VertexMap((0..n).map(Some).collect())
    }

    pub fn total(images: Vec<VertexId>) -> Self {
        VertexMap(images.into_iter().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.0.get(v).copied().flatten()
    }

    /// Vertices where the map is defined.
    pub fn domain(&self) -> Vec<VertexId> {
        (0..self.0.len()).filter(|&v| self.0[v].is_some()).collect()
    }

    pub fn image(&self) -> BTreeSet<VertexId> {
        self.0.iter().flatten().copied().collect()
    }

    fn check(&self, dx: &DistanceMatrix, dy: &DistanceMatrix) -> Result<()> {
        if self.0.len() != dx.n() {
            return Err(input(format!("map has {} entries, domain has {} vertices", self.0.len(), dx.n())));
        }
        if let Some(w) = self.0.iter().flatten().find(|&&w| w >= dy.n()) {
            return Err(input(format!("image vertex {w} outside codomain")));
        }
        Ok(())
    }
}

fn pair_excess(dx: u32, dy: u32, k: Rational) -> Rational {
    let (dx, dy) = (Rational::from_integer(dx as i64), Rational::from_integer(dy as i64));
    let upper = dy - k * dx;
    let lower = dx / k - dy;
    upper.max(lower).max(Rational::zero())
}

/// Smallest `c ≥ 0` making `f` a `(k, c)`-embedding over all pairs of its
/// domain accepted by `keep`.
pub fn minimal_additive_where(
    f: &VertexMap,
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    k: Rational,
    keep: impl Fn(VertexId, VertexId) -> bool + Sync,
) -> Result<Rational> {
    if k < Rational::one() {
        return Err(input("multiplicative constant must be at least 1"));
    }
    f.check(dx, dy)?;
    let dom = f.domain();
    dom.par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let mut c = Rational::zero();
            for &v in &dom[i + 1..] {
                if !keep(u, v) {
                    continue;
                }
                let (fu, fv) = (f.0[u].unwrap(), f.0[v].unwrap());
                let (Some(a), Some(b)) = (dx.get(u, v), dy.get(fu, fv)) else {
                    return Err(domain(format!("pair ({u}, {v}) has an infinite distance")));
                };
                c = c.max(pair_excess(a, b, k));
            }
            Ok(c)
        })
        .try_reduce(Rational::zero, |a, b| Ok(a.max(b)))
}

pub fn minimal_additive(f: &VertexMap, dx: &DistanceMatrix, dy: &DistanceMatrix, k: Rational) -> Result<Rational> {
    minimal_additive_where(f, dx, dy, k, |_, _| true)
}

/// Largest distance from a codomain vertex to the image of `f`.
pub fn measure_density(f: &VertexMap, dy: &DistanceMatrix) -> Result<u32> {
    let image: Vec<VertexId> = f.image().into_iter().collect();
    if image.is_empty() {
        return Err(input("map has empty image"));
    }
    if let Some(&w) = image.iter().find(|&&w| w >= dy.n()) {
        return Err(input(format!("image vertex {w} outside codomain")));
    }
    (0..dy.n())
        .map(|y| {
            image
                .iter()
                .filter_map(|&w| dy.get(y, w))
                .min()
                .ok_or_else(|| domain(format!("vertex {y} cannot reach the image")))
        })
        .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
}

/// Among `candidates`, the multiplicative constant minimizing `k + c(k)`,
/// with the smaller `k` on ties.
pub fn best_constants(
    f: &VertexMap,
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    candidates: &[Rational],
) -> Result<(Rational, Rational)> {
    let mut best: Option<(Rational, Rational)> = None;
    for &k in candidates {
        let c = minimal_additive(f, dx, dy, k)?;
        if best.is_none_or(|(bk, bc)| k + c < bk + bc) {
            best = Some((k, c));
        }
    }
    best.ok_or_else(|| input("no candidate multiplicative constants"))
}

/// Default multiplicative candidates: 1, 3/2, 2, 3, 4.
pub fn default_k_candidates() -> Vec<Rational> {
    vec![Rational::from_integer(1), Rational::new(3, 2), Rational::from_integer(2), Rational::from_integer(3), Rational::from_integer(4)]
}

/// `⌈2·log₂ r⌉` for `r ≥ 1`: the least `m` with `2^m ≥ r²`.
pub fn ceil_two_log2(r: Rational) -> Result<i64> {
    if r < Rational::one() {
        return Err(input("argument must be at least 1"));
    }
    let (p, q) = (*r.numer() as i128, *r.denom() as i128);
    let (p2, q2) = (p * p, q * q);
    let mut m = 0i64;
    while q2 << m < p2 {
        m += 1;
    }
    Ok(m)
}

/// The additive constant `⌈2·log₂(k + c)⌉ + 3` for the level-preserving
/// extension of a `(k, c)`-map over horoballs.
pub fn horoball_extension_bound(k: Rational, c: Rational) -> Result<i64> {
    Ok(ceil_two_log2(k + c)? + 3)
}

/// `q̂(t, n) = (q(t), n)`.
pub fn extend_to_horoball(q: &VertexMap, ht: &Horoball, hs: &Horoball) -> Result<VertexMap> {
    if ht.max_depth != hs.max_depth {
        return Err(input(format!("horoball depths differ: {} vs {}", ht.max_depth, hs.max_depth)));
    }
    if q.len() != ht.base_len() {
        return Err(input("map length does not match the domain base"));
    }
    if q.0.iter().flatten().any(|&w| w >= hs.base_len()) {
        return Err(input("map image outside the codomain base"));
    }
    let mut out = vec![None; ht.graph.n()];
    for (v, slot) in out.iter_mut().enumerate() {
        let (t, n) = ht.coords(v);
        *slot = q.get(t).map(|w| hs.id(w, n));
    }
    Ok(VertexMap(out))
}

/// Bijection between horoball-owning pieces of two spaces, source → target.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetCorrespondence(pub BTreeMap<usize, usize>);

impl CosetCorrespondence {
    pub fn identity(n: usize) -> Self {
        CosetCorrespondence((0..n).map(|i| (i, i)).collect())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (a, b) in pairs {
            if map.insert(a, b).is_some() {
                return Err(input(format!("piece {a} is paired twice")));
            }
            if !seen.insert(b) {
                return Err(input(format!("target piece {b} is paired twice")));
            }
        }
        Ok(CosetCorrespondence(map))
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.0.get(&i).copied()
    }

    fn check(&self, sources: usize, targets: usize) -> Result<()> {
        for i in 0..sources {
            match self.get(i) {
                None => return Err(input(format!("no correspondence for piece {i}"))),
                Some(j) if j >= targets => return Err(input(format!("piece {i} paired with missing piece {j}"))),
                _ => {}
            }
        }
        if self.0.len() != sources {
            return Err(input("correspondence mentions pieces that do not exist"));
        }
        Ok(())
    }
}

/// Pairs each source piece `i` with the target piece containing the `q`
/// image of its representative.
pub fn correspondence_by_rep(q: &VertexMap, x: &CuspedSpace, y: &CuspedSpace) -> Result<CosetCorrespondence> {
    let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (j, p) in y.pieces.iter().enumerate() {
        for &m in &p.members {
            owner.insert(m, j);
        }
    }
    CosetCorrespondence::from_pairs(x.pieces.iter().enumerate().map(|(i, p)| {
        let j = q.get(p.rep).and_then(|w| owner.get(&w).copied());
        (i, j.unwrap_or(usize::MAX))
    }))
    .and_then(|c| {
        if c.0.values().any(|&j| j == usize::MAX) {
            Err(input("some representative has no image in a target piece"))
        } else {
            Ok(c)
        }
    })
}

/// For each corresponded piece, the member-level map obtained by moving each
/// `q` image to a nearest member of the target piece, plus the largest such
/// move (the empirical coset offset `T`).
pub fn induced_piece_maps(
    q: &VertexMap,
    corr: &CosetCorrespondence,
    x: &CuspedSpace,
    y: &CuspedSpace,
    dy0: &DistanceMatrix,
) -> Result<(Vec<VertexMap>, u32)> {
    corr.check(x.pieces.len(), y.pieces.len())?;
    let mut offset = 0;
    let mut maps = Vec::new();
    for (i, p) in x.pieces.iter().enumerate() {
        let target = &y.pieces[corr.get(i).unwrap()];
        let mut local = Vec::with_capacity(p.members.len());
        for &m in &p.members {
            let Some(w) = q.get(m) else {
                local.push(None);
                continue;
            };
            let (j, d) = target
                .members
                .iter()
                .enumerate()
                .filter_map(|(j, &t)| dy0.get(w, t).map(|d| (j, d)))
                .min_by_key(|&(j, d)| (d, j))
                .ok_or_else(|| domain(format!("image of {m} cannot reach its target piece")))?;
            offset = offset.max(d);
            local.push(Some(j));
        }
        maps.push(VertexMap(local));
    }
    Ok((maps, offset))
}

/// `Q = q` at depth 0 and `Q(h, i, n) = (corr(h), piece_maps[h](i), n)` at
/// positive depth.
pub fn extend_to_cusped(
    q: &VertexMap,
    corr: &CosetCorrespondence,
    x: &CuspedSpace,
    y: &CuspedSpace,
    piece_maps: &[VertexMap],
) -> Result<VertexMap> {
    corr.check(x.pieces.len(), y.pieces.len())?;
    if x.max_depth != y.max_depth {
        return Err(input("cusped spaces have different depths"));
    }
    if q.len() != x.base_len {
        return Err(input("map length does not match the depth-0 vertex count"));
    }
    if piece_maps.len() != x.pieces.len() {
        return Err(input("one piece map per source piece is required"));
    }
    let mut out = vec![None; x.graph.n()];
    out[..x.base_len].copy_from_slice(&q.0);
    for (h, p) in x.pieces.iter().enumerate() {
        let th = corr.get(h).unwrap();
        if piece_maps[h].len() != p.members.len() {
            return Err(input(format!("piece map {h} has the wrong length")));
        }
        for i in 0..p.members.len() {
            let Some(j) = piece_maps[h].get(i) else { continue };
            for level in 1..=x.max_depth {
                let src = x.horoball_vertex(h, i, level).unwrap();
                out[src] = Some(
                    y.horoball_vertex(th, j, level)
                        .ok_or_else(|| input(format!("piece map {h} sends {i} outside target piece")))?,
                );
            }
        }
    }
    Ok(VertexMap(out))
}

/// Outcome of checking `d_Y(Qx, Qy) ≤ 3Λ·d_X(x, y) + Λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pass: bool,
    pub lambda: Rational,
    /// Largest `d_Y / (3Λ·d_X + Λ)` seen; above 1 exactly when some pair fails.
    pub worst_ratio: Rational,
    pub witness: Option<[VertexId; 2]>,
    pub pairs_checked: u64,
    pub violations: u64,
}

fn check_linear_bound(
    f: &VertexMap,
    dx: &DistanceMatrix,
    dy: &DistanceMatrix,
    lambda: Rational,
    keep: impl Fn(VertexId, VertexId, VertexId, VertexId) -> bool + Sync,
) -> Result<BoundReport> {
    if lambda <= Rational::zero() {
        return Err(input("Λ must be positive"));
    }
    f.check(dx, dy)?;
    let dom = f.domain();
    let three = Rational::from_integer(3);
    type Acc = (Rational, Option<[VertexId; 2]>, u64, u64);
    let merge = |a: Acc, b: Acc| -> Acc {
        let (ratio, wit) = if b.0 > a.0 || (b.0 == a.0 && b.1.is_some() && (a.1.is_none() || b.1 < a.1)) {
            (b.0, b.1)
        } else {
            (a.0, a.1)
        };
        (ratio, wit, a.2 + b.2, a.3 + b.3)
    };
    let (worst, witness, checked, violations) = dom
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let mut acc: Acc = (Rational::zero(), None, 0, 0);
            for &v in &dom[i + 1..] {
                let (fu, fv) = (f.0[u].unwrap(), f.0[v].unwrap());
                if !keep(u, v, fu, fv) {
                    continue;
                }
                let (Some(a), Some(b)) = (dx.get(u, v), dy.get(fu, fv)) else { continue };
                let allowed = three * lambda * Rational::from_integer(a as i64) + lambda;
                let ratio = Rational::from_integer(b as i64) / allowed;
                acc.2 += 1;
                if ratio > Rational::one() {
                    acc.3 += 1;
                }
                if ratio > acc.0 || acc.1.is_none() {
                    acc.0 = ratio;
                    acc.1 = Some([u, v]);
                }
            }
            acc
        })
        .reduce(|| (Rational::zero(), None, 0, 0), merge);
    Ok(BoundReport { pass: violations == 0, lambda, worst_ratio: worst, witness, pairs_checked: checked, violations })
}

/// Checks the linear bound over every pair of the domain.
pub fn check_graph_bound(f: &VertexMap, dx: &DistanceMatrix, dy: &DistanceMatrix, lambda: Rational) -> Result<BoundReport> {
    check_linear_bound(f, dx, dy, lambda, |_, _, _, _| true)
}

/// Checks the linear bound over pairs that are truncation-safe in both spaces.
pub fn check_cusped_bound(
    big_q: &VertexMap,
    xm: &TruncatedMetric,
    ym: &TruncatedMetric,
    lambda: Rational,
) -> Result<BoundReport> {
    check_linear_bound(big_q, xm.full(), ym.full(), lambda, |u, v, fu, fv| {
        xm.is_safe(u, v) && ym.is_safe(fu, fv)
    })
}

/// The coned analogue: `q` on the base, cone `i` to cone `corr(i)`; checks
/// the same linear bound over all pairs.
pub fn cone_extension_check(
    q: &VertexMap,
    corr: &CosetCorrespondence,
    cx: &ConedSpace,
    cy: &ConedSpace,
    lambda: Rational,
) -> Result<(VertexMap, BoundReport)> {
    corr.check(cx.pieces.len(), cy.pieces.len())?;
    if q.len() != cx.base_len {
        return Err(input("map length does not match the base vertex count"));
    }
    let mut out = q.0.clone();
    out.extend((0..cx.pieces.len()).map(|i| Some(cy.cone(corr.get(i).unwrap()))));
    let f = VertexMap(out);
    let report = check_linear_bound(
        &f,
        &DistanceMatrix::from_graph(&cx.graph),
        &DistanceMatrix::from_graph(&cy.graph),
        lambda,
        |_, _, _, _| true,
    )?;
    Ok((f, report))
}

/// Summary of one measured map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QIReport {
    pub k: Rational,
    pub c: Rational,
    pub density: u32,
    pub domain_size: usize,
    pub codomain_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_checked: Option<BoundReport>,
}

/// Constants measured while extending a depth-0 map across two cusped spaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspedMeasurement {
    pub k_base: Rational,
    pub c_base: Rational,
    /// Additive constant at `k = 1` of `Q` on each horoball, truncation-safe pairs.
    pub horoball_constants: Vec<Rational>,
    pub offset_t: u32,
    /// `max(k_base, c_base, 1, horoball constants) + 2T`.
    pub lambda: Rational,
}

fn depth0_graph(x: &CuspedSpace) -> MetricGraph {
    x.graph.induced_subgraph(&(0..x.base_len).collect::<Vec<_>>())
}

/// Builds `Q` from `q` and `corr` and measures the constants entering `Λ`.
pub fn measure_cusped_extension(
    q: &VertexMap,
    corr: &CosetCorrespondence,
    x: &CuspedSpace,
    y: &CuspedSpace,
) -> Result<(VertexMap, CuspedMeasurement)> {
    let dx0 = DistanceMatrix::from_graph(&depth0_graph(x));
    let dy0 = DistanceMatrix::from_graph(&depth0_graph(y));
    let (k_base, c_base) = best_constants(q, &dx0, &dy0, &default_k_candidates())?;
    let (piece_maps, offset_t) = induced_piece_maps(q, corr, x, y, &dy0)?;
    let big_q = extend_to_cusped(q, corr, x, y, &piece_maps)?;

    let horoball_constants = (0..x.pieces.len())
        .map(|h| {
            let (xs, xm) = horoball_subspace(x, h);
            let (ys, ym) = horoball_subspace(y, corr.get(h).unwrap());
            let ypos: BTreeMap<VertexId, usize> = ys.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let local = VertexMap(xs.iter().map(|&v| big_q.get(v).and_then(|w| ypos.get(&w).copied())).collect());
            minimal_additive_where(&local, xm.full(), ym.full(), Rational::one(), |a, b| {
                xm.is_safe(a, b) && ym.is_safe(local.get(a).unwrap(), local.get(b).unwrap())
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut base = k_base.max(c_base).max(Rational::one());
    for &c in &horoball_constants {
        base = base.max(c);
    }
    let lambda = base + Rational::from_integer(2 * offset_t as i64);
    Ok((big_q, CuspedMeasurement { k_base, c_base, horoball_constants, offset_t, lambda }))
}

/// Vertices of horoball `h` (members first, then deeper levels) with the
/// metric of the horoball on its own.
fn horoball_subspace(x: &CuspedSpace, h: usize) -> (Vec<VertexId>, TruncatedMetric) {
    let p = &x.pieces[h];
    let mut vs = p.members.clone();
    for level in 1..=x.max_depth {
        for i in 0..p.members.len() {
            vs.push(x.horoball_vertex(h, i, level).unwrap());
        }
    }
    let g = x.graph.induced_subgraph(&vs);
    let deep = vs.iter().map(|&v| x.depth[v] == x.max_depth).collect();
    (vs, TruncatedMetric::new(&g, deep))
}
