use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cusptree::boundary_tree::combined_tree;
use cusptree::cusp_spaces::{build_coned_space, build_cusped_space};
use cusptree::group_models::{cayley_ball, GroupSpec, GroupSpecJson};
use cusptree::hyperbolicity::{delta_growth_scan, graph_delta, scan_csv, DeltaMode, SpaceRecipe};
use cusptree::metric_graph::DistanceMatrix;
use cusptree::qi_lab::{
    best_constants, check_cusped_bound, check_graph_bound, default_k_candidates, measure_cusped_extension,
    measure_density, minimal_additive, BoundReport, CosetCorrespondence, QIReport, Rational, VertexMap,
};
use cusptree::sphere_approx::{boundary_pipeline, default_threshold, sphere_graph};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::run::{write_atomic, write_dot, write_json, RunConfig};
use crate::space::parse_space;
use crate::{BuildArgs, DeltaArgs, Format, Mode, ModeArgs, Outcome, QiArgs, Recipe, ScanArgs, SpaceKind, SphereArgs, TreeArgs};

fn delta_mode(m: &ModeArgs) -> Result<DeltaMode> {
    match m.mode {
        Mode::Exhaustive => Ok(DeltaMode::Exhaustive),
        Mode::Sampled => {
            let seed = m.seed.ok_or_else(|| anyhow!("sampled mode requires --seed"))?;
            Ok(DeltaMode::Sampled { seed, count: m.samples })
        }
    }
}

fn record_mode(run: &mut RunConfig, m: &ModeArgs) {
    run.param("mode", format!("{:?}", m.mode).to_lowercase()).param("seed", m.seed);
    if matches!(m.mode, Mode::Sampled) {
        run.param("samples", m.samples);
    }
}

fn parse_rational(s: &str, what: &str) -> Result<Rational> {
    s.parse::<Rational>().map_err(|e| anyhow!("bad {what} {s:?}: {e}"))
}

fn load_space(run: &mut RunConfig, path: &Path) -> Result<crate::space::Space> {
    let text = run.read_input(path)?;
    parse_space(&text, &path.display().to_string())
}

pub fn build(a: BuildArgs) -> Result<Outcome> {
    let mut run = RunConfig::new("build", &a.output, a.format.name());
    run.param("kind", format!("{:?}", a.kind).to_lowercase()).param("radius", a.radius).param("depth", a.depth);
    let text = run.read_input(&a.spec)?;
    let doc: GroupSpecJson = serde_json::from_str(&text).context("malformed group specification")?;
    let spec = GroupSpec::from_json(&doc)?;
    let ball = cayley_ball(&spec.model, a.radius);
    let pieces = spec.all_pieces(&ball)?;
    match a.kind {
        SpaceKind::Cusped => {
            let x = build_cusped_space(&ball.graph, &pieces, a.depth)?;
            run.param("resolved_depth", x.max_depth);
            match a.format {
                Format::Json => {
                    let mut v = serde_json::to_value(x.to_json())?;
                    v["group"] = serde_json::to_value(&doc)?;
                    write_json(&a.output, v, &run)?;
                }
                Format::Dot => write_dot(&a.output, &x.to_dot(), &run)?,
            }
        }
        SpaceKind::Coned => {
            if a.depth.is_some() {
                bail!("--depth applies only to cusped spaces");
            }
            let c = build_coned_space(&ball.graph, &pieces)?;
            match a.format {
                Format::Json => {
                    let mut v = serde_json::to_value(c.to_json())?;
                    v["group"] = serde_json::to_value(&doc)?;
                    write_json(&a.output, v, &run)?;
                }
                Format::Dot => write_dot(&a.output, &c.to_dot(), &run)?,
            }
        }
    }
    Ok(Outcome::Ok)
}

pub fn delta(a: DeltaArgs) -> Result<Outcome> {
    let mut run = RunConfig::new("delta", &a.output, "json");
    record_mode(&mut run, &a.mode);
    let mode = delta_mode(&a.mode)?;
    let space = load_space(&mut run, &a.space)?;
    let report = graph_delta(&space.graph, mode)?;
    let mut v = serde_json::to_value(&report)?;
    v["delta"] = json!(report.delta().as_f64());
    v["vertices"] = json!(space.graph.n());
    write_json(&a.output, v, &run)?;
    Ok(Outcome::Ok)
}

pub fn tree(a: TreeArgs) -> Result<Outcome> {
    let mut run = RunConfig::new("tree", &a.output, a.format.name());
    let space = load_space(&mut run, &a.graph)?;
    let t = combined_tree(&space.graph)?;
    match a.format {
        Format::Json => write_json(&a.output, t.to_json(), &run)?,
        Format::Dot => write_dot(&a.output, &t.to_dot(), &run)?,
    }
    Ok(Outcome::Ok)
}

#[derive(Deserialize)]
struct MapFile {
    map: Vec<Option<usize>>,
    #[serde(default)]
    correspondence: Option<Vec<(usize, usize)>>,
}

fn constants(q: &VertexMap, dx: &DistanceMatrix, dy: &DistanceMatrix, k: Option<Rational>) -> Result<(Rational, Rational)> {
    Ok(match k {
        Some(k) => (k, minimal_additive(q, dx, dy, k)?),
        None => best_constants(q, dx, dy, &default_k_candidates())?,
    })
}

fn finish_check(report: Option<&BoundReport>) -> Outcome {
    match report {
        Some(r) if !r.pass => Outcome::CheckFailed(format!(
            "{} of {} pairs exceed 3Λ·d + Λ at Λ = {} (witness {:?})",
            r.violations, r.pairs_checked, r.lambda, r.witness
        )),
        _ => Outcome::Ok,
    }
}

pub fn qi(a: QiArgs) -> Result<Outcome> {
    let mut run = RunConfig::new("qi", &a.output, "json");
    run.param("k", &a.k).param("lambda", &a.lambda);
    let k = a.k.as_deref().map(|s| parse_rational(s, "k")).transpose()?;
    let lambda = a.lambda.as_deref().map(|s| parse_rational(s, "lambda")).transpose()?;
    let mf: MapFile = serde_json::from_str(&run.read_input(&a.map)?).context("malformed map file")?;
    let x = load_space(&mut run, &a.source)?;
    let y = load_space(&mut run, &a.target)?;
    let q = VertexMap(mf.map);
    let dx = DistanceMatrix::from_graph(&x.graph);
    let dy = DistanceMatrix::from_graph(&y.graph);

    if q.len() == x.graph.n() {
        let (k, c) = constants(&q, &dx, &dy, k)?;
        let bound = match lambda {
            None => None,
            Some(l) => Some(match (&x.cusped, &y.cusped) {
                (Some(xc), Some(yc)) => check_cusped_bound(&q, &xc.truncated_metric(), &yc.truncated_metric(), l)?,
                _ => check_graph_bound(&q, &dx, &dy, l)?,
            }),
        };
        let report = QIReport {
            k,
            c,
            density: measure_density(&q, &dy)?,
            domain_size: q.domain().len(),
            codomain_size: y.graph.n(),
            bound_checked: bound,
        };
        let outcome = finish_check(report.bound_checked.as_ref());
        write_json(&a.output, json!({ "mode": "map", "report": report }), &run)?;
        return Ok(outcome);
    }

    let (Some(xc), Some(yc)) = (&x.cusped, &y.cusped) else {
        bail!("map has {} entries but the source has {} vertices", q.len(), x.graph.n());
    };
    if q.len() != xc.base_len {
        bail!("map has {} entries; expected {} (whole space) or {} (depth 0)", q.len(), x.graph.n(), xc.base_len);
    }
    let pairs = mf.correspondence.ok_or_else(|| anyhow!("a depth-0 map needs a \"correspondence\" between pieces"))?;
    let corr = CosetCorrespondence::from_pairs(pairs)?;
    let (big_q, m) = measure_cusped_extension(&q, &corr, xc, yc)?;
    let l = lambda.unwrap_or(m.lambda);
    let bound = check_cusped_bound(&big_q, &xc.truncated_metric(), &yc.truncated_metric(), l)?;
    let (k, c) = constants(&big_q, &dx, &dy, k)?;
    let report = QIReport {
        k,
        c,
        density: measure_density(&big_q, &dy)?,
        domain_size: big_q.domain().len(),
        codomain_size: y.graph.n(),
        bound_checked: Some(bound),
    };
    let outcome = finish_check(report.bound_checked.as_ref());
    write_json(
        &a.output,
        json!({
            "mode": "cusped_extension",
            "report": report,
            "measurement": m,
            "correspondence": corr.0.iter().map(|(i, j)| [*i, *j]).collect::<Vec<_>>(),
            "extended_map": big_q.0,
        }),
        &run,
    )?;
    Ok(outcome)
}

pub fn sphere(a: SphereArgs) -> Result<Outcome> {
    let mut run = RunConfig::new("sphere", &a.output, a.format.name());
    run.param("radius", a.radius).param("threshold", a.threshold).param("base", a.base);
    let space = load_space(&mut run, &a.space)?;
    let s = match a.threshold {
        Some(s) => s,
        None => default_threshold(&space.graph)?,
    };
    run.param("resolved_threshold", s);
    let sg = sphere_graph(&space.graph, space.horoball_of.as_deref(), a.base, a.radius, s)?;
    match a.format {
        Format::Json => {
            let mut v: Value = serde_json::to_value(sg.to_json())?;
            v["pipeline"] = serde_json::to_value(boundary_pipeline(&sg)?)?;
            write_json(&a.output, v, &run)?;
        }
        Format::Dot => write_dot(&a.output, &sg.graph.to_dot("sphere"), &run)?,
    }
    Ok(Outcome::Ok)
}

pub fn scan(a: ScanArgs) -> Result<Outcome> {
    let mut run = RunConfig::new("scan", &a.output, "csv");
    run.param("recipe", format!("{:?}", a.recipe)).param("params", &a.params);
    record_mode(&mut run, &a.mode);
    let mode = delta_mode(&a.mode)?;
    let recipe = match a.recipe {
        Recipe::HoroballCycle => SpaceRecipe::HoroballOverCycle { depth: a.depth },
        Recipe::HoroballPath => SpaceRecipe::HoroballOverPath { depth: a.depth },
        Recipe::FreeAbelian => SpaceRecipe::FreeAbelianBall { rank: a.rank },
        Recipe::Free => SpaceRecipe::FreeBall { rank: a.rank },
    };
    match recipe {
        SpaceRecipe::HoroballOverCycle { .. } | SpaceRecipe::HoroballOverPath { .. } => run.param("depth", a.depth),
        _ => run.param("rank", a.rank),
    };
    let rows = delta_growth_scan(&recipe, &a.params, mode)?;
    write_atomic(&a.output, scan_csv(&recipe, &rows)?.as_bytes())?;
    let sidecar = PathBuf::from(format!("{}.run.json", a.output.display()));
    let mut text = serde_json::to_string_pretty(&json!({ "run": run }))?;
    text.push('\n');
    write_atomic(&sidecar, text.as_bytes())?;
    Ok(Outcome::Ok)
}
