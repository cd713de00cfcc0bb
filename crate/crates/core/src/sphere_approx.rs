//! Finite approximations of the boundary: the sphere of radius `R` around a
//! basepoint, with two sphere points joined when their Gromov product is at
//! least `R − s`. The output is heuristic and flagged as such.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_tree::{combined_tree, CombinedTree, TreeJson};
use crate::error::{domain, input, Result};
use crate::metric_graph::{bfs_distances, GraphJson, MetricGraph, VertexId};

#[derive(Clone, Debug)]
pub struct SphereGraph {
    /// Graph on sphere points; vertex `i` is `source[i]` in the space.
    pub graph: MetricGraph,
    pub source: Vec<VertexId>,
    pub horoball_of: Vec<Option<usize>>,
    pub base: VertexId,
    pub radius: u32,
    pub threshold: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereGraphJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    pub source: Vec<VertexId>,
    pub horoball_of: Vec<Option<usize>>,
    pub base: VertexId,
    pub radius: u32,
    pub threshold: u32,
    pub diagnostic: bool,
}

impl SphereGraph {
    pub fn to_json(&self) -> SphereGraphJson {
        SphereGraphJson {
            graph: self.graph.to_json(),
            source: self.source.clone(),
            horoball_of: self.horoball_of.clone(),
            base: self.base,
            radius: self.radius,
            threshold: self.threshold,
            diagnostic: true,
        }
    }
}

/// Sphere of radius `radius` about `base`, with edges where
/// `(u|v)_base ≥ radius − threshold`. `horoball_of`, when given, tags each
/// sphere point with the horoball it lies in.
pub fn sphere_graph(
    g: &MetricGraph,
    horoball_of: Option<&[Option<usize>]>,
    base: VertexId,
    radius: u32,
    threshold: u32,
) -> Result<SphereGraph> {
    if radius == 0 {
        return Err(input("sphere radius must be positive"));
    }
    if let Some(tags) = horoball_of {
        if tags.len() != g.n() {
            return Err(input("horoball tags do not match the vertex count"));
        }
    }
    let from_base = bfs_distances(g, base)?;
    let source: Vec<VertexId> = (0..g.n()).filter(|&v| from_base[v] == Some(radius)).collect();
    if source.is_empty() {
        return Err(domain(format!("no vertex at distance {radius} from {base}")));
    }
    let rows: Vec<Vec<Option<u32>>> = source.par_iter().map(|&s| bfs_distances(g, s).unwrap()).collect();
    let need = 2 * radius.saturating_sub(threshold) as i64;
    let m = source.len();
    let edges: Vec<(usize, usize)> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let row = &rows[i];
            let source = &source;
            (i + 1..m).filter_map(move |j| {
                let d = row[source[j]]? as i64;
                // doubled Gromov product at the base: R + R − d(u, v)
                (2 * radius as i64 - d >= need).then_some((i, j))
            })
        })
        .collect();
    let mut graph = MetricGraph::from_edges(m, edges)?;
    for (i, &v) in source.iter().enumerate() {
        graph.set_label(i, g.label(v).map_or_else(|| v.to_string(), str::to_string))?;
    }
    let tags = source.iter().map(|&v| horoball_of.and_then(|t| t[v])).collect();
    Ok(SphereGraph { graph, source, horoball_of: tags, base, radius, threshold })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTree {
    /// Space vertex ids of the component, ascending.
    pub vertices: Vec<VertexId>,
    /// Combined tree with vertex sets in space ids.
    pub tree: TreeJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub radius: u32,
    pub threshold: u32,
    pub sphere_size: usize,
    pub components: Vec<ComponentTree>,
    pub warnings: Vec<String>,
    pub diagnostic: bool,
}

/// Combined tree of each connected component of the sphere graph.
pub fn boundary_pipeline(sphere: &SphereGraph) -> Result<PipelineOutput> {
    let comps = sphere.graph.components();
    let mut warnings = Vec::new();
    if comps.len() > 1 {
        warnings.push(format!("sphere graph has {} components; one tree per component", comps.len()));
    }
    let components = comps
        .iter()
        .map(|comp| {
            let tree = if comp.len() == 1 {
                CombinedTree::singleton(vec![0])
            } else {
                combined_tree(&sphere.graph.induced_subgraph(comp))?
            };
            let mut json = tree.to_json();
            for v in &mut json.vertices {
                for x in &mut v.set {
                    *x = sphere.source[comp[*x]];
                }
                v.set.sort_unstable();
            }
            let mut vertices: Vec<VertexId> = comp.iter().map(|&i| sphere.source[i]).collect();
            vertices.sort_unstable();
            Ok(ComponentTree { vertices, tree: json })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineOutput {
        radius: sphere.radius,
        threshold: sphere.threshold,
        sphere_size: sphere.source.len(),
        components,
        warnings,
        diagnostic: true,
    })
}

/// Default threshold `s = 2δ` from the exhaustive four-point constant of `g`.
pub fn default_threshold(g: &MetricGraph) -> Result<u32> {
    let r = crate::hyperbolicity::graph_delta(g, crate::hyperbolicity::DeltaMode::Exhaustive)?;
    Ok(r.delta_doubled as u32)
}

/// Runs the pipeline for every `(R, s)` combination, in the given order.
pub fn sweep(
    g: &MetricGraph,
    horoball_of: Option<&[Option<usize>]>,
    base: VertexId,
    radii: &[u32],
    thresholds: &[u32],
) -> Result<Vec<PipelineOutput>> {
    let mut out = Vec::new();
    for &r in radii {
        for &s in thresholds {
            out.push(boundary_pipeline(&sphere_graph(g, horoball_of, base, r, s)?)?);
        }
    }
    Ok(out)
}
