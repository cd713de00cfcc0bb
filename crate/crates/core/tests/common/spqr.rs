//! Triconnected components of a 2-connected graph by repeated splitting
//! at separation pairs, followed by merging of adjacent bonds and adjacent
//! polygons. Quadratic-per-step and only meant for tiny graphs.

use std::collections::BTreeSet;

use cusptree::metric_graph::MetricGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Edge {
    u: usize,
    v: usize,
    id: usize,
    is_virtual: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Bond,
    Polygon,
    Rigid,
}

#[derive(Clone, Debug)]
pub struct Component {
    edges: Vec<Edge>,
}

impl Component {
    pub fn vertices(&self) -> Vec<usize> {
        self.edges.iter().flat_map(|e| [e.u, e.v]).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn kind(&self) -> Kind {
        let vs = self.vertices();
        if vs.len() == 2 {
            return Kind::Bond;
        }
        let cycle = self.edges.len() == vs.len()
            && vs.iter().all(|&x| self.edges.iter().filter(|e| e.u == x || e.v == x).count() == 2);
        if cycle {
            Kind::Polygon
        } else {
            Kind::Rigid
        }
    }
}

/// Separation classes of the component's edges with respect to `{a, b}`.
fn separation_classes(edges: &[Edge], a: usize, b: usize) -> Vec<Vec<usize>> {
    let m = edges.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..m {
        for j in i + 1..m {
            let shared = [edges[i].u, edges[i].v]
                .iter()
                .any(|&x| x != a && x != b && (x == edges[j].u || x == edges[j].v));
            if shared {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; m];
    for i in 0..m {
        let r = find(&mut parent, i);
        if index[r] == usize::MAX {
            index[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[index[r]].push(i);
    }
    classes
}

/// Splits a component at the first separation pair found, if any.
fn try_split(c: &Component, next_id: &mut usize) -> Option<(Component, Component)> {
    if c.edges.len() < 4 {
        return None;
    }
    let vs = c.vertices();
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            let classes = separation_classes(&c.edges, a, b);
            let single = classes.iter().filter(|cl| cl.len() == 1).count();
            let valid = classes.len() >= 2
                && !(classes.len() == 2 && single >= 1)
                && !(classes.len() == 3 && single == 3);
            if !valid {
                continue;
            }
            let largest = classes.iter().max_by_key(|cl| cl.len()).unwrap();
            let side: BTreeSet<usize> = if largest.len() >= 2 && c.edges.len() - largest.len() >= 2 {
                largest.iter().copied().collect()
            } else {
                // only single-edge classes remain: peel two parallel edges off
                classes.iter().filter(|cl| cl.len() == 1).take(2).map(|cl| cl[0]).collect()
            };
            let e = Edge { u: a, v: b, id: *next_id, is_virtual: true };
            *next_id += 1;
            let mut left = vec![e];
            let mut right = vec![e];
            for (k, &edge) in c.edges.iter().enumerate() {
                if side.contains(&k) {
                    left.push(edge);
                } else {
                    right.push(edge);
                }
            }
            return Some((Component { edges: left }, Component { edges: right }));
        }
    }
    None
}

/// Triconnected components of a 2-connected simple graph.
pub fn triconnected_components(g: &MetricGraph) -> Vec<Component> {
    let edges: Vec<Edge> =
        g.edges().enumerate().map(|(id, (u, v))| Edge { u, v, id, is_virtual: false }).collect();
    let mut next_id = edges.len();
    let mut work = vec![Component { edges }];
    let mut done = Vec::new();
    while let Some(c) = work.pop() {
        match try_split(&c, &mut next_id) {
            Some((l, r)) => {
                work.push(l);
                work.push(r);
            }
            None => done.push(c),
        }
    }
    'merge: loop {
        for i in 0..done.len() {
            for j in i + 1..done.len() {
                let ki = done[i].kind();
                if ki == Kind::Rigid || ki != done[j].kind() {
                    continue;
                }
                let shared = done[i]
                    .edges
                    .iter()
                    .find(|e| e.is_virtual && done[j].edges.iter().any(|f| f.id == e.id))
                    .map(|e| e.id);
                if let Some(id) = shared {
                    let other = done.remove(j);
                    done[i].edges.retain(|e| e.id != id);
                    done[i].edges.extend(other.edges.into_iter().filter(|e| e.id != id));
                    continue 'merge;
                }
            }
        }
        break;
    }
    done
}

/// Necklace sets (polygons on at least four vertices) and rigid sets
/// (triangles and 3-connected components), each sorted.
pub fn oracle_classification(g: &MetricGraph) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut necklaces = Vec::new();
    let mut rigid = Vec::new();
    for c in triconnected_components(g) {
        let vs = c.vertices();
        match c.kind() {
            Kind::Bond => {}
            Kind::Polygon if vs.len() >= 4 => necklaces.push(vs),
            Kind::Polygon | Kind::Rigid => rigid.push(vs),
        }
    }
    necklaces.sort();
    rigid.sort();
    (necklaces, rigid)
}
