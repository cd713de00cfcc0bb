//! Lenient loading of graph and space files.

use anyhow::{bail, Context, Result};
use cusptree::cusp_spaces::{CuspedSpace, CuspedSpaceJson};
use cusptree::metric_graph::{GraphJson, MetricGraph};
use serde_json::Value;

/// A graph file, plus cusped structure when the file carries it.
pub struct Space {
    pub graph: MetricGraph,
    pub cusped: Option<CuspedSpace>,
    pub horoball_of: Option<Vec<Option<usize>>>,
}

/// Accepts any JSON object with `n` and `edges`; cusped spaces are
/// recognised by their `depth`, `horoball_of`, `max_depth` and `pieces`.
pub fn parse_space(text: &str, origin: &str) -> Result<Space> {
    let value: Value = serde_json::from_str(text).with_context(|| format!("{origin}: not JSON"))?;
    if !value.is_object() {
        bail!("{origin}: expected a JSON object");
    }
    let doc: GraphJson =
        serde_json::from_value(value.clone()).with_context(|| format!("{origin}: missing \"n\" or \"edges\""))?;
    let graph = MetricGraph::from_json(&doc).with_context(|| format!("{origin}: bad graph"))?;
    let has = |k: &str| value.get(k).is_some_and(|v| !v.is_null());
    let cusped = if has("depth") && has("max_depth") && has("pieces") {
        let doc: CuspedSpaceJson =
            serde_json::from_value(value.clone()).with_context(|| format!("{origin}: malformed cusped space"))?;
        Some(CuspedSpace::from_json(&doc).with_context(|| format!("{origin}: inconsistent cusped space"))?)
    } else {
        None
    };
    let horoball_of = match value.get("horoball_of") {
        Some(v) if !v.is_null() => Some(serde_json::from_value(v.clone()).context("malformed horoball_of")?),
        _ => None,
    };
    Ok(Space { graph, cusped, horoball_of })
}
