//! Groups with exactly solvable word problems, and the finite pieces of
//! their Cayley graphs that the space constructions are built from.
//!
//! Three families are supported: free groups, free abelian groups and finite
//! groups given by a multiplication table. Words are written as letters with
//! an optional trailing `-` for the formal inverse (`"aba-b-"`); whitespace
//! is ignored.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::metric_graph::{MetricGraph, VertexId};

/// A generator symbol or its formal inverse.
///
/// Ordering is `a < a- < b < b- < ...`, which fixes the shortlex order on words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u16,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: u16, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }
}

/// A word over a model's alphabet. Compared in shortlex order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(gen: u16) -> Self {
        Word(vec![Letter::new(gen, false)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Formal inverse (reverse and invert letters); not reduced.
    pub fn formal_inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multiplication table of a finite group; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTable {
    table: Vec<Vec<usize>>,
    inverses: Vec<usize>,
}

impl FiniteTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(input("multiplication table is empty"));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(input(format!("table row {i} has length {}, expected {n}", row.len())));
            }
            if row.iter().any(|&x| x >= n) {
                return Err(input(format!("table row {i} has an entry out of range")));
            }
            let distinct: BTreeSet<_> = row.iter().collect();
            if distinct.len() != n {
                return Err(input(format!("table row {i} is not a permutation")));
            }
        }
        for i in 0..n {
            if table[0][i] != i || table[i][0] != i {
                return Err(input("element 0 must be the identity"));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(input(format!("table is not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let inverses = (0..n)
            .map(|a| table[a].iter().position(|&x| x == 0).expect("latin rows contain 0"))
            .collect();
        Ok(FiniteTable { table, inverses })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// Cyclic group of order `n`, element `i` = `g^i`.
    pub fn cyclic(n: usize) -> Self {
        FiniteTable::new((0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect()).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Finite(FiniteTable),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Free { .. } => "free",
            Family::FreeAbelian { .. } => "free_abelian",
            Family::Finite(_) => "finite",
        }
    }
}

/// A group together with the generating set used for its Cayley graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupModel {
    family: Family,
    symbols: Vec<char>,
    generators: Vec<Word>,
}

const FREE_SYMBOLS: &str = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

impl GroupModel {
    pub fn free(rank: usize) -> Result<Self> {
        Self::lettered(Family::Free { rank }, rank)
    }

    pub fn free_abelian(rank: usize) -> Result<Self> {
        Self::lettered(Family::FreeAbelian { rank }, rank)
    }

    fn lettered(family: Family, rank: usize) -> Result<Self> {
        if rank == 0 || rank > FREE_SYMBOLS.len() {
            return Err(input(format!("rank must be in 1..={}", FREE_SYMBOLS.len())));
        }
        let symbols: Vec<char> = FREE_SYMBOLS.chars().take(rank).collect();
        let generators = (0..rank as u16).map(Word::letter).collect();
        Ok(GroupModel { family, symbols, generators })
    }

    /// Finite group from its table. `names[i]` is the one-letter symbol of
    /// element `i`; by default the identity is `e` and the others take
    /// `a, b, c, d, f, ...` in order. The default generating set is every
    /// non-identity element.
    pub fn finite(table: FiniteTable, names: Option<Vec<char>>) -> Result<Self> {
        let n = table.order();
        let symbols = match names {
            Some(names) => {
                if names.len() != n {
                    return Err(input(format!("expected {n} element names, got {}", names.len())));
                }
                names
            }
            None => {
                let pool: Vec<char> = FREE_SYMBOLS.chars().filter(|&c| c != 'e').collect();
                if n - 1 > pool.len() {
                    return Err(input("finite group too large for default names"));
                }
                std::iter::once('e').chain(pool.into_iter().take(n - 1)).collect()
            }
        };
        let distinct: BTreeSet<_> = symbols.iter().collect();
        if distinct.len() != symbols.len() || symbols.iter().any(|c| !c.is_ascii_alphabetic()) {
            return Err(input("element names must be distinct ASCII letters"));
        }
        let generators = (1..n as u16).map(Word::letter).collect();
        Ok(GroupModel { family: Family::Finite(table), symbols, generators })
    }

    /// Replaces the generating set. Generators are normalized; identities and
    /// repeats (including inverse repeats) are dropped.
    pub fn with_generators(mut self, generators: Vec<Word>) -> Result<Self> {
        let mut kept: Vec<Word> = Vec::new();
        for g in generators {
            let g = self.normal_form(&g)?;
            if g.is_empty() {
                continue;
            }
            let ginv = self.inverse(&g);
            if !kept.iter().any(|k| *k == g || *k == ginv) {
                kept.push(g);
            }
        }
        if kept.is_empty() {
            return Err(input("generating set is empty after reduction"));
        }
        self.generators = kept;
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    /// Generators and their inverses, normalized, without repeats.
    pub fn moves(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for g in &self.generators {
            for m in [g.clone(), self.inverse(g)] {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        out
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let mut letters = Vec::new();
        let mut chars = s.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let gen = self
                .symbols
                .iter()
                .position(|&x| x == c)
                .ok_or_else(|| input(format!("symbol {c:?} is not in the alphabet")))?;
            let inv = chars.next_if_eq(&'-').is_some();
            letters.push(Letter::new(gen as u16, inv));
        }
        Ok(Word(letters))
    }

    pub fn render(&self, w: &Word) -> String {
        let mut s = String::new();
        for l in &w.0 {
            s.push(self.symbols[l.gen as usize]);
            if l.inv {
                s.push('-');
            }
        }
        s
    }

    fn check_letters(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|l| l.gen as usize >= self.symbols.len()) {
            Some(l) => Err(input(format!("letter index {} outside alphabet", l.gen))),
            None => Ok(()),
        }
    }

    /// Canonical representative: freely reduced word, sorted exponent word,
    /// or single element symbol (empty word for the identity).
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.check_letters(w)?;
        Ok(self.reduce(&w.0))
    }

    fn reduce(&self, letters: &[Letter]) -> Word {
        match &self.family {
            Family::Free { .. } => {
                let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
                for &l in letters {
                    if stack.last() == Some(&l.inverse()) {
                        stack.pop();
                    } else {
                        stack.push(l);
                    }
                }
                Word(stack)
            }
            Family::FreeAbelian { rank } => exponent_word(&exponents(letters, *rank)),
            Family::Finite(t) => {
                let e = letters.iter().fold(0, |acc, l| {
                    let x = if l.inv { t.inv(l.gen as usize) } else { l.gen as usize };
                    t.mul(acc, x)
                });
                if e == 0 {
                    Word::identity()
                } else {
                    Word::letter(e as u16)
                }
            }
        }
    }

    /// `nf(a · b)`; inputs must be over the alphabet.
    pub fn multiply(&self, a: &Word, b: &Word) -> Word {
        let mut v = Vec::with_capacity(a.len() + b.len());
        v.extend_from_slice(&a.0);
        v.extend_from_slice(&b.0);
        self.reduce(&v)
    }

    pub fn inverse(&self, w: &Word) -> Word {
        self.reduce(&w.formal_inverse().0)
    }

    /// `nf(w^k)` for any integer `k`.
    pub fn power(&self, w: &Word, k: i64) -> Word {
        let base = if k < 0 { self.inverse(w) } else { self.reduce(&w.0) };
        let mut acc = Word::identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.multiply(&acc, &base);
        }
        acc
    }
}

fn exponents(letters: &[Letter], rank: usize) -> Vec<i64> {
    let mut e = vec![0i64; rank];
    for l in letters {
        e[l.gen as usize] += if l.inv { -1 } else { 1 };
    }
    e
}

fn exponent_word(e: &[i64]) -> Word {
    let mut letters = Vec::new();
    for (i, &x) in e.iter().enumerate() {
        let l = Letter::new(i as u16, x < 0);
        letters.extend(std::iter::repeat_n(l, x.unsigned_abs() as usize));
    }
    Word(letters)
}

/// A named peripheral subgroup, given by generating words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeripheralSpec {
    pub name: String,
    pub generators: Vec<Word>,
}

impl PeripheralSpec {
    /// Normalizes the generators; a generator that reduces to the identity is
    /// rejected, since a horoball over a trivial coset degenerates.
    pub fn new(model: &GroupModel, name: impl Into<String>, generators: Vec<Word>) -> Result<Self> {
        let name = name.into();
        if generators.is_empty() {
            return Err(input(format!("peripheral {name:?} has no generators")));
        }
        let mut gens = Vec::new();
        for g in &generators {
            let g = model.normal_form(g)?;
            if g.is_empty() {
                return Err(input(format!("peripheral {name:?} has a generator equal to the identity")));
            }
            gens.push(g);
        }
        Ok(PeripheralSpec { name, generators: gens })
    }

    pub fn parse(model: &GroupModel, name: impl Into<String>, generators: &[&str]) -> Result<Self> {
        let words = generators.iter().map(|g| model.parse_word(g)).collect::<Result<Vec<_>>>()?;
        Self::new(model, name, words)
    }
}

/// The ball of a given radius in a Cayley graph, with word labels.
///
/// Vertices are ordered by distance from the identity, then shortlex on
/// normal forms; the identity is vertex 0.
#[derive(Clone, Debug)]
pub struct CayleyBall {
    pub graph: MetricGraph,
    pub words: Vec<Word>,
    pub radius: u32,
    index: HashMap<Word, VertexId>,
}

impl CayleyBall {
    pub fn vertex_of(&self, w: &Word) -> Option<VertexId> {
        self.index.get(w).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Cayley ball of `radius` around the identity. For a finite group whose
/// diameter is below `radius` this is the whole Cayley graph.
pub fn cayley_ball(m: &GroupModel, radius: u32) -> CayleyBall {
    let moves = m.moves();
    let mut words = vec![Word::identity()];
    let mut index: HashMap<Word, VertexId> = HashMap::from([(Word::identity(), 0)]);
    let mut frontier = vec![Word::identity()];
    for _ in 0..radius {
        let mut next: BTreeSet<Word> = BTreeSet::new();
        for u in &frontier {
            for s in &moves {
                let v = m.multiply(u, s);
                if !index.contains_key(&v) {
                    next.insert(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next.into_iter().collect();
        for w in &frontier {
            index.insert(w.clone(), words.len());
            words.push(w.clone());
        }
    }
    let mut graph = MetricGraph::new(words.len());
    for (u, w) in words.iter().enumerate() {
        for s in &moves {
            if let Some(&v) = index.get(&m.multiply(w, s)) {
                if u != v {
                    graph.add_edge(u, v).expect("ball edge is valid");
                }
            }
        }
        graph.set_label(u, m.render(w)).unwrap();
    }
    CayleyBall { graph, words, radius, index }
}

/// The intersection of one coset `gP` with a Cayley ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetPiece {
    pub peripheral: String,
    /// Member whose word is shortlex-least.
    pub rep: VertexId,
    /// Ball vertex ids, ascending.
    pub members: Vec<VertexId>,
    /// Edges between members (local indices) given by right multiplication
    /// by peripheral generators. `None` means "use the induced ambient metric".
    pub base_edges: Option<Vec<(usize, usize)>>,
}

impl CosetPiece {
    /// A piece with no intrinsic structure; horoballs over it fall back to the
    /// induced subgraph metric.
    /// Members are sorted; the representative is the smallest id.
    pub fn induced(peripheral: impl Into<String>, mut members: Vec<VertexId>) -> Self {
        members.sort_unstable();
        members.dedup();
        let rep = members.first().copied().unwrap_or(0);
        CosetPiece { peripheral: peripheral.into(), rep, members, base_edges: None }
    }
}

/// Partitions the ball vertices into pieces of the cosets of `⟨p⟩`. Two
/// vertices share a piece iff `g₂⁻¹g₁ ∈ ⟨p⟩`. Pieces are returned in shortlex
/// order of their representatives.
pub fn coset_pieces(ball: &CayleyBall, m: &GroupModel, p: &PeripheralSpec) -> Result<Vec<CosetPiece>> {
    let n = ball.len();
    let mut uf = UnionFind::new(n);
    match m.family() {
        Family::FreeAbelian { rank } => {
            let lattice = Lattice::new(p.generators.iter().map(|g| exponents(&g.0, *rank)).collect());
            if lattice.rank() == 0 {
                return Err(input(format!("peripheral {:?} is trivial", p.name)));
            }
            let mut first: HashMap<Vec<i64>, VertexId> = HashMap::new();
            for (v, w) in ball.words.iter().enumerate() {
                let key = lattice.reduce(exponents(&w.0, *rank));
                let root = *first.entry(key).or_insert(v);
                uf.union(root, v);
            }
        }
        Family::Finite(t) => {
            let sub = subgroup_closure(t, p.generators.iter().map(|g| g.0.first().map_or(0, |l| l.gen as usize)));
            let mut first: HashMap<usize, VertexId> = HashMap::new();
            for (v, w) in ball.words.iter().enumerate() {
                let g = w.0.first().map_or(0, |l| l.gen as usize);
                let key = sub.iter().map(|&h| t.mul(g, h)).min().unwrap();
                let root = *first.entry(key).or_insert(v);
                uf.union(root, v);
            }
        }
        Family::Free { .. } => {
            if p.generators.len() != 1 {
                return Err(Error::Unsupported(format!(
                    "peripheral {:?}: only cyclic subgroups of free groups are supported",
                    p.name
                )));
            }
            let w = &p.generators[0];
            let core = cyclic_core_len(w);
            let max_len = ball.words.iter().map(Word::len).max().unwrap_or(0);
            // g·w^k in the ball forces |w^k| ≤ 2·max_len, and |w^k| ≥ |k|·|core|.
            let kmax = (2 * max_len / core + 1) as i64;
            let powers: Vec<Word> = (-kmax..=kmax).filter(|&k| k != 0).map(|k| m.power(w, k)).collect();
            for (v, g) in ball.words.iter().enumerate() {
                for pw in &powers {
                    if let Some(u) = ball.vertex_of(&m.multiply(g, pw)) {
                        uf.union(u, v);
                    }
                }
            }
        }
    }

    let mut groups: HashMap<usize, Vec<VertexId>> = HashMap::new();
    for v in 0..n {
        groups.entry(uf.find(v)).or_default().push(v);
    }
    let moves: Vec<Word> = p
        .generators
        .iter()
        .flat_map(|g| [g.clone(), m.inverse(g)])
        .collect();
    let mut pieces: Vec<CosetPiece> = groups
        .into_values()
        .map(|members| {
            let rep = *members.iter().min_by(|&&a, &&b| ball.words[a].cmp(&ball.words[b])).unwrap();
            let local: HashMap<VertexId, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let mut edges = BTreeSet::new();
            for (i, &v) in members.iter().enumerate() {
                for s in &moves {
                    if let Some(u) = ball.vertex_of(&m.multiply(&ball.words[v], s)) {
                        if let Some(&j) = local.get(&u) {
                            if i != j {
                                edges.insert((i.min(j), i.max(j)));
                            }
                        }
                    }
                }
            }
            CosetPiece {
                peripheral: p.name.clone(),
                rep,
                members,
                base_edges: Some(edges.into_iter().collect()),
            }
        })
        .collect();
    pieces.sort_by(|a, b| ball.words[a.rep].cmp(&ball.words[b.rep]));
    Ok(pieces)
}

/// Length of the cyclically reduced core of a freely reduced word.
fn cyclic_core_len(w: &Word) -> usize {
    let l = &w.0;
    let mut i = 0;
    while i < l.len() / 2 && l[i] == l[l.len() - 1 - i].inverse() {
        i += 1;
    }
    (l.len() - 2 * i).max(1)
}

fn subgroup_closure(t: &FiniteTable, gens: impl Iterator<Item = usize>) -> Vec<usize> {
    let gens: Vec<usize> = gens.collect();
    let mut seen = vec![false; t.order()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        for &g in &gens {
            let y = t.mul(x, g);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..t.order()).filter(|&i| seen[i]).collect()
}

/// Integer lattice in echelon form; reduces vectors to canonical coset
/// representatives.
struct Lattice {
    rows: Vec<(usize, Vec<i64>)>,
}

impl Lattice {
    fn new(mut vectors: Vec<Vec<i64>>) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut rows = Vec::new();
        let mut col = 0;
        while col < dim && !vectors.is_empty() {
            // Euclid on column `col` across the remaining vectors.
            loop {
                vectors.retain(|v| v.iter().any(|&x| x != 0));
                let nonzero: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i][col] != 0).collect();
                if nonzero.len() <= 1 {
                    break;
                }
                let pivot = *nonzero.iter().min_by_key(|&&i| vectors[i][col].abs()).unwrap();
                let pv = vectors[pivot].clone();
                for &i in &nonzero {
                    if i != pivot {
                        let q = vectors[i][col].div_euclid(pv[col]);
                        for (x, y) in vectors[i].iter_mut().zip(&pv) {
                            *x -= q * y;
                        }
                    }
                }
            }
            if let Some(i) = (0..vectors.len()).find(|&i| vectors[i][col] != 0) {
                let mut v = vectors.remove(i);
                if v[col] < 0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                rows.push((col, v));
            }
            col += 1;
        }
        Lattice { rows }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<i64>) -> Vec<i64> {
        for (col, row) in &self.rows {
            let q = v[*col].div_euclid(row[*col]);
            for (x, y) in v.iter_mut().zip(row) {
                *x -= q * y;
            }
        }
        v
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Left translation `v ↦ nf(g·v)`, defined where the image stays in the ball.
pub fn left_translate(ball: &CayleyBall, m: &GroupModel, g: &Word) -> Result<Vec<Option<VertexId>>> {
    let g = m.normal_form(g)?;
    Ok(ball.words.iter().map(|w| ball.vertex_of(&m.multiply(&g, w))).collect())
}

/// Group specification file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpecJson {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    #[serde(default)]
    pub peripherals: Vec<PeripheralJson>,
    /// User assertion that no peripheral is properly relatively hyperbolic.
    /// Recorded and echoed; never checked.
    #[serde(default)]
    pub assume_not_properly_relatively_hyperbolic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeripheralJson {
    pub name: String,
    pub generators: Vec<String>,
}

/// A parsed group specification.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub model: GroupModel,
    pub peripherals: Vec<PeripheralSpec>,
    pub assume_not_properly_relatively_hyperbolic: bool,
}

impl GroupSpec {
    pub fn from_json(doc: &GroupSpecJson) -> Result<Self> {
        let mut model = match doc.family.as_str() {
            "free" => GroupModel::free(doc.rank.ok_or_else(|| input("free family needs \"rank\""))?)?,
            "free_abelian" => {
                GroupModel::free_abelian(doc.rank.ok_or_else(|| input("free_abelian family needs \"rank\""))?)?
            }
            "finite" => {
                let table = doc.table.clone().ok_or_else(|| input("finite family needs \"table\""))?;
                let names = match &doc.names {
                    None => None,
                    Some(ns) => Some(
                        ns.iter()
                            .map(|s| {
                                let mut cs = s.chars();
                                match (cs.next(), cs.next()) {
                                    (Some(c), None) => Ok(c),
                                    _ => Err(input(format!("element name {s:?} must be one letter"))),
                                }
                            })
                            .collect::<Result<Vec<char>>>()?,
                    ),
                };
                GroupModel::finite(FiniteTable::new(table)?, names)?
            }
            other => return Err(input(format!("unknown group family {other:?}"))),
        };
        if let Some(gens) = &doc.generators {
            let words = gens.iter().map(|g| model.parse_word(g)).collect::<Result<Vec<_>>>()?;
            model = model.with_generators(words)?;
        }
        let peripherals = doc
            .peripherals
            .iter()
            .map(|p| {
                let gens: Vec<&str> = p.generators.iter().map(String::as_str).collect();
                PeripheralSpec::parse(&model, p.name.clone(), &gens)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupSpec {
            model,
            peripherals,
            assume_not_properly_relatively_hyperbolic: doc.assume_not_properly_relatively_hyperbolic,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    /// Coset pieces of every peripheral, concatenated in peripheral order.
    pub fn all_pieces(&self, ball: &CayleyBall) -> Result<Vec<CosetPiece>> {
        let mut out = Vec::new();
        for p in &self.peripherals {
            out.extend(coset_pieces(ball, &self.model, p)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Free { rank } => write!(f, "Free({rank})"),
            Family::FreeAbelian { rank } => write!(f, "FreeAbelian({rank})"),
            Family::Finite(t) => write!(f, "Finite(order {})", t.order()),
        }
    }
}
