//! Four-point Gromov hyperbolicity of finite connected graphs.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cusp_spaces::build_horoball;
use crate::error::{domain, input, Result};
use crate::group_models::{cayley_ball, GroupModel};
use crate::metric_graph::{families, DistanceMatrix, HalfInteger, MetricGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DeltaMode {
    Exhaustive,
    Sampled { seed: u64, count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// Twice the four-point constant.
    pub delta_doubled: i64,
    pub mode: DeltaMode,
    /// A quadruple attaining `delta_doubled`.
    pub witness: [VertexId; 4],
}

impl DeltaReport {
    pub fn delta(&self) -> HalfInteger {
        HalfInteger::from_doubled(self.delta_doubled)
    }
}

/// `L − M` for the quadruple, where `L ≥ M` are the two largest of the three
/// opposite-pair distance sums.
#[inline]
fn gap(d: &[u32], n: usize, x: usize, y: usize, z: usize, w: usize) -> u32 {
    let s1 = d[x * n + y] + d[z * n + w];
    let s2 = d[x * n + z] + d[y * n + w];
    let s3 = d[x * n + w] + d[y * n + z];
    let (hi, lo) = if s1 >= s2 { (s1, s2) } else { (s2, s1) };
    if s3 >= hi {
        s3 - hi
    } else if s3 >= lo {
        hi - s3
    } else {
        hi - lo
    }
}

/// Four-point δ of a connected graph's distance matrix.
///
/// Exhaustive mode scans every 4-subset; ties resolve to the
/// lexicographically smallest witness, so the result does not depend on
/// scheduling. Sampled mode draws `count` random 4-subsets from a seeded
/// generator and reports the best one seen, which is a lower bound.
pub fn four_point_delta(d: &DistanceMatrix, mode: DeltaMode) -> Result<DeltaReport> {
    let n = d.n();
    if n == 0 {
        return Err(domain("empty graph"));
    }
    let dense = d.finite_entries().map_err(|_| domain("four-point delta needs a connected graph"))?;
    if n < 4 {
        return Ok(DeltaReport { delta_doubled: 0, mode, witness: [0; 4] });
    }
    let best = match mode {
        DeltaMode::Exhaustive => (0..n - 3)
            .into_par_iter()
            .map(|x| {
                let mut best = (0u32, [x, x + 1, x + 2, x + 3]);
                for y in x + 1..n {
                    for z in y + 1..n {
                        for w in z + 1..n {
                            let g = gap(&dense, n, x, y, z, w);
                            if g > best.0 {
                                best = (g, [x, y, z, w]);
                            }
                        }
                    }
                }
                best
            })
            .reduce(|| (0, [0, 1, 2, 3]), better),
        DeltaMode::Sampled { seed, count } => {
            if count == 0 {
                return Err(input("sample count must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = (0u32, [0, 1, 2, 3]);
            for _ in 0..count {
                let mut q = [0usize; 4];
                for (slot, v) in q.iter_mut().zip(sample(&mut rng, n, 4)) {
                    *slot = v;
                }
                q.sort_unstable();
                best = better(best, (gap(&dense, n, q[0], q[1], q[2], q[3]), q));
            }
            best
        }
    };
    Ok(DeltaReport { delta_doubled: best.0 as i64, mode, witness: best.1 })
}

fn better(a: (u32, [usize; 4]), b: (u32, [usize; 4])) -> (u32, [usize; 4]) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

pub fn graph_delta(g: &MetricGraph, mode: DeltaMode) -> Result<DeltaReport> {
    four_point_delta(&DistanceMatrix::from_graph(g), mode)
}

/// A one-parameter family of spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum SpaceRecipe {
    /// Horoball of the given depth over the cycle `C_param`; `None` uses
    /// `⌈log₂ param⌉`.
    HoroballOverCycle { depth: Option<u32> },
    HoroballOverPath { depth: Option<u32> },
    /// Cayley ball of radius `param` in `Z^rank`.
    FreeAbelianBall { rank: usize },
    /// Cayley ball of radius `param` in the free group of `rank`.
    FreeBall { rank: usize },
}

impl SpaceRecipe {
    pub fn name(&self) -> String {
        match self {
            SpaceRecipe::HoroballOverCycle { .. } => "horoball_cycle".into(),
            SpaceRecipe::HoroballOverPath { .. } => "horoball_path".into(),
            SpaceRecipe::FreeAbelianBall { rank } => format!("free_abelian_{rank}_ball"),
            SpaceRecipe::FreeBall { rank } => format!("free_{rank}_ball"),
        }
    }

    pub fn build(&self, param: u32) -> Result<MetricGraph> {
        let depth_for = |len: u32, depth: Option<u32>| {
            depth.unwrap_or_else(|| crate::cusp_spaces::ceil_log2(len.max(1) as u64))
        };
        match *self {
            SpaceRecipe::HoroballOverCycle { depth } => {
                if param < 3 {
                    return Err(input("cycle length must be at least 3"));
                }
                Ok(build_horoball(&families::cycle(param as usize), depth_for(param, depth))?.graph)
            }
            SpaceRecipe::HoroballOverPath { depth } => {
                if param == 0 {
                    return Err(input("path length must be positive"));
                }
                Ok(build_horoball(&families::path(param as usize), depth_for(param, depth))?.graph)
            }
            SpaceRecipe::FreeAbelianBall { rank } => Ok(cayley_ball(&GroupModel::free_abelian(rank)?, param).graph),
            SpaceRecipe::FreeBall { rank } => Ok(cayley_ball(&GroupModel::free(rank)?, param).graph),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub param: u32,
    pub vertices: usize,
    pub report: DeltaReport,
}

pub fn delta_growth_scan(recipe: &SpaceRecipe, params: &[u32], mode: DeltaMode) -> Result<Vec<ScanRow>> {
    params
        .iter()
        .map(|&param| {
            let g = recipe.build(param)?;
            Ok(ScanRow { param, vertices: g.n(), report: graph_delta(&g, mode)? })
        })
        .collect()
}

/// CSV with columns `recipe,param,vertices,delta_doubled,witness,mode,seed`.
pub fn scan_csv(recipe: &SpaceRecipe, rows: &[ScanRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["recipe", "param", "vertices", "delta_doubled", "witness", "mode", "seed"])?;
    for r in rows {
        let (mode, seed) = match r.report.mode {
            DeltaMode::Exhaustive => ("exhaustive".to_string(), String::new()),
            DeltaMode::Sampled { seed, count } => (format!("sampled:{count}"), seed.to_string()),
        };
        let witness = r.report.witness.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        w.write_record([
            recipe.name(),
            r.param.to_string(),
            r.vertices.to_string(),
            r.report.delta_doubled.to_string(),
            witness,
            mode,
            seed,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
