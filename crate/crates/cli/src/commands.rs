use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use troplin::hypercube::{validate_rank_function_with_cap, RankError, DEFAULT_CELL_CAP};
use troplin::io::{self, FunctionJson, GraphJson, MorphismJson, RankJson, SeriesInput, SeriesJson, TermJson};
use troplin::matroidcomplex::coherent_complex_from_rank;
use troplin::metricgraph::{GraphPoint, MetricGraph, Refinement};
use troplin::permarray::{array_from_rank_function, rank_function_from_array, DotArray, PermError};
use troplin::series::{
    classify_g1d, find_unsaturated_cut, module_from_witnesses, prune_generators, pullback_from_tree, tropical_rank, Cut, CutPiece, DependenceLimits,
    SeriesError, TropModule,
};
use troplin::slopes::{
    check_compatible, crude_rank_check, default_cap, enumerate_slope_structures, in_rat_d_s, EnumerationConfig,
    Incompatibility, RowOutcome, SearchLimits, SlopeError, VerdictStatus,
};

use crate::report::{CliError, InputHash, Status};

pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub inputs: Vec<InputHash>,
}

/// Side files requested by flags, written after the report is built.
pub type SideFiles = Vec<(PathBuf, String)>;

fn read(path: &Path) -> Result<(String, InputHash), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let hash = InputHash::new(&path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((text, hash))
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, InputHash), CliError> {
    let (text, hash) = read(path)?;
    let value = io::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((value, hash))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn pretty<T: serde::Serialize>(x: &T) -> String {
    let mut text = serde_json::to_string_pretty(x).expect("serializable");
    text.push('\n');
    text
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn point_value(g: &MetricGraph, p: &GraphPoint) -> Value {
    to_value(&io::point_to_json(g, p))
}

fn divisor_value(g: &MetricGraph, d: &troplin::metricgraph::Divisor) -> Value {
    to_value(&io::divisor_to_json(g, d))
}

fn function_value(f: &troplin::metricgraph::PLFunction) -> Value {
    to_value(&io::function_to_json(None, f))
}

fn bool_status(ok: bool) -> Status {
    if ok {
        Status::Verified
    } else {
        Status::Refuted
    }
}

// Hypercubes, arrays and matroids.

fn checked_rank(j: &RankJson) -> Result<Result<troplin::hypercube::RankFunction, RankError>, CliError> {
    match validate_rank_function_with_cap(j.values.clone(), j.delta, j.r, DEFAULT_CELL_CAP) {
        Err(RankError::TooLarge { cells, cap }) => Err(CliError::Cap(format!("{cells} cells, cap {cap}"))),
        Err(e @ (RankError::DimensionMismatch { .. } | RankError::ZeroDimension)) => Err(input_err(e)),
        other => Ok(other),
    }
}

pub fn validate_rank(path: &Path) -> Result<Outcome, CliError> {
    let (j, h) = load::<RankJson>(path)?;
    let result = match checked_rank(&j)? {
        Ok(rf) => json!({
            "valid": true,
            "jumps": rf.jumps().into_vec(),
            "partition": rf.partition_top_jumps().ok(),
        }),
        Err(e) => json!({ "valid": false, "reason": e.to_string() }),
    };
    let ok = result["valid"] == json!(true);
    Ok(Outcome {
        status: bool_status(ok),
        result,
        inputs: vec![h],
    })
}

pub fn perm_to_rank(path: &Path) -> Result<Outcome, CliError> {
    let (arr, h) = load::<DotArray>(path)?;
    let (status, result) = match rank_function_from_array(&arr) {
        Ok(rf) => (Status::Verified, json!({ "rank": io::rank_to_json(&rf) })),
        Err(e @ PermError::OutOfBounds(_)) => return Err(input_err(e)),
        Err(e) => (Status::Refuted, json!({ "reason": e.to_string() })),
    };
    Ok(Outcome {
        status,
        result,
        inputs: vec![h],
    })
}

pub fn rank_to_perm(path: &Path) -> Result<Outcome, CliError> {
    let (j, h) = load::<RankJson>(path)?;
    let (status, result) = match checked_rank(&j)? {
        Ok(rf) => {
            let arr = array_from_rank_function(&rf);
            let redundant: Vec<_> = arr.redundant_positions().into_iter().collect();
            (Status::Verified, json!({ "array": arr, "redundant": redundant }))
        }
        Err(e) => (Status::Refuted, json!({ "reason": e.to_string() })),
    };
    Ok(Outcome {
        status,
        result,
        inputs: vec![h],
    })
}

pub fn matroid_export(path: &Path) -> Result<Outcome, CliError> {
    let (j, h) = load::<RankJson>(path)?;
    let (status, result) = match checked_rank(&j)? {
        Ok(rf) => (Status::Verified, to_value(&coherent_complex_from_rank(&rf))),
        Err(e) => (Status::Refuted, json!({ "reason": e.to_string() })),
    };
    Ok(Outcome {
        status,
        result,
        inputs: vec![h],
    })
}

// Functions and slope structures.

pub fn divisor_of(path: &Path, dot: Option<&Path>, side: &mut SideFiles) -> Result<Outcome, CliError> {
    let (j, h) = load::<FunctionJson>(path)?;
    let (g, f) = io::standalone_function(&j)?;
    if let Some(p) = dot {
        side.push((p.to_path_buf(), g.to_dot("G")));
    }
    Ok(Outcome {
        status: Status::Verified,
        result: json!({ "divisor": divisor_value(&g, &f.divisor_of(&g)) }),
        inputs: vec![h],
    })
}

fn load_series(path: &Path) -> Result<(SeriesInput, InputHash), CliError> {
    let (j, h) = load::<SeriesJson>(path)?;
    Ok((io::series_from_json(&j)?, h))
}

fn incompatibility_value(g: &MetricGraph, e: &Incompatibility) -> Value {
    match e {
        Incompatibility::SlopeNotAllowed { point, slope } => json!({
            "kind": "slope-not-allowed",
            "point": point_value(g, point),
            "slope": slope,
        }),
        Incompatibility::NotAJump { point, indices } => json!({
            "kind": "not-a-jump",
            "point": point_value(g, point),
            "indices": indices,
        }),
    }
}

pub fn check_compat(path: &Path) -> Result<Outcome, CliError> {
    let (input, h) = load_series(path)?;
    let s = &input.structure;
    let g = s.model();
    let mut all = true;
    let rows: Vec<Value> = input
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let c = check_compatible(s, f);
            all &= c.is_ok();
            json!({
                "function": i,
                "compatible": c.is_ok(),
                "in_rat": in_rat_d_s(s, &input.divisor, f),
                "reason": c.err().map(|e| incompatibility_value(g, &e)),
            })
        })
        .collect();
    Ok(Outcome {
        status: bool_status(all),
        result: json!({ "functions": rows }),
        inputs: vec![h],
    })
}

/// Where the points of a test divisor sit on the input graph: all at
/// vertices, inside one edge, or inside different edges.
fn placement(r: &Refinement, e: &troplin::metricgraph::Divisor) -> &'static str {
    let mut edges = Vec::new();
    for p in e.support() {
        match r.to_original(p) {
            GraphPoint::Vertex(_) => {}
            GraphPoint::Edge { edge, .. } => edges.push(edge),
        }
    }
    edges.sort_unstable();
    edges.dedup();
    match edges.len() {
        0 => "vertices",
        1 if e.support().all(|p| !matches!(r.to_original(p), GraphPoint::Vertex(_))) => "same-edge",
        1 => "edge-and-vertex",
        _ => "cross-edge",
    }
}

pub fn rank_check(
    path: &Path,
    grid: u64,
    max_nodes: u64,
    module_out: Option<&Path>,
    side: &mut SideFiles,
) -> Result<Outcome, CliError> {
    let (input, h) = load_series(path)?;
    let s = &input.structure;
    let g = s.model();
    let limits = SearchLimits {
        max_nodes,
        dedupe: true,
    };
    let verdict = match crude_rank_check(s, &input.divisor, grid, limits) {
        Ok(v) => v,
        Err(e @ SlopeError::ExplosionGuard(_)) => return Err(CliError::Cap(e.to_string())),
        Err(e) => return Err(input_err(e)),
    };
    if let (Some(p), VerdictStatus::Verified) = (module_out, verdict.status) {
        let m = module_from_witnesses(s, &input.divisor, &verdict).map_err(series_err)?;
        let m = prune_generators(&m, grid, limits).map_err(series_err)?;
        side.push((p.to_path_buf(), pretty(&io::module_to_json(&m))));
    }
    let mut placements: BTreeMap<&str, usize> = BTreeMap::new();
    let rows: Vec<Value> = verdict
        .rows
        .iter()
        .map(|row| {
            let place = placement(&input.refinement, &row.e);
            let (outcome, witness) = match &row.outcome {
                RowOutcome::Witness(f) => {
                    *placements.entry(place).or_default() += 1;
                    ("witness", Some(function_value(f)))
                }
                RowOutcome::NoWitness => ("none", None),
                RowOutcome::Budget => ("budget", None),
            };
            json!({
                "e": divisor_value(g, &row.e),
                "placement": place,
                "outcome": outcome,
                "witness": witness,
            })
        })
        .collect();
    Ok(Outcome {
        status: verdict.status.into(),
        result: json!({
            "verdict": verdict.status.as_str(),
            "grid_denominator": grid,
            "r": s.r(),
            "model": io::graph_to_json(g),
            "witnessed_placements": placements,
            "rows": rows,
        }),
        inputs: vec![h],
    })
}

#[derive(Deserialize)]
struct EnumerateInput {
    graph: GraphJson,
    #[serde(default)]
    divisor: Vec<TermJson>,
    r: usize,
}

pub fn enumerate_slopes(path: &Path, bound: i64, subdivision: u64) -> Result<Outcome, CliError> {
    let (j, h) = load::<EnumerateInput>(path)?;
    let g = io::graph_from_json(&j.graph)?;
    let d = io::divisor_from_json(&g, &j.divisor)?;
    let cfg = EnumerationConfig {
        r: j.r,
        bound,
        subdivision_denominator: subdivision,
        cap: default_cap(),
    };
    let found = match enumerate_slope_structures(&g, &d, cfg) {
        Ok(v) => v,
        Err(e @ SlopeError::ExplosionGuard(_)) => return Err(CliError::Cap(e.to_string())),
        Err(e) => return Err(input_err(e)),
    };
    let structures: Vec<Value> = found.iter().map(|s| to_value(&io::structure_to_json(s))).collect();
    Ok(Outcome {
        status: Status::Verified,
        result: json!({ "count": structures.len(), "structures": structures }),
        inputs: vec![h],
    })
}

// Modules.

fn load_module(path: &Path) -> Result<(SeriesInput, TropModule, InputHash), CliError> {
    let (input, h) = load_series(path)?;
    let m = input.module()?;
    Ok((input, m, h))
}

fn cut_value(g: &MetricGraph, c: &Cut) -> Value {
    let region: Vec<Value> = c
        .region
        .iter()
        .map(|p| match p {
            CutPiece::Vertex(v) => json!({ "vertex": g.name(*v) }),
            CutPiece::Point { edge, offset } => json!({ "edge": edge, "offset": io::q_string(offset) }),
            CutPiece::Segment { edge, from, to } => {
                json!({ "edge": edge, "from": io::q_string(from), "to": io::q_string(to) })
            }
        })
        .collect();
    let boundary: Vec<Value> = c
        .boundary
        .iter()
        .map(|b| {
            let out: Vec<Value> = b
                .out
                .iter()
                .map(|(d, s)| json!({ "edge": d.edge, "forward": d.forward, "slope": s }))
                .collect();
            json!({ "point": point_value(g, &b.point), "out": out })
        })
        .collect();
    json!({ "region": region, "boundary": boundary, "components": c.components })
}

fn series_err(e: SeriesError) -> CliError {
    input_err(e)
}

pub fn reduce(path: &Path, at: &str) -> Result<Outcome, CliError> {
    let (input, m, h) = load_module(path)?;
    let g = m.graph();
    let v = input.point(at)?;
    let fv = m.f_v(&v);
    let cut = find_unsaturated_cut(&m, &v).map_err(series_err)?;
    Ok(Outcome {
        status: Status::Verified,
        result: json!({
            "point": point_value(g, &v),
            "reduced_divisor": divisor_value(g, &m.reduced_divisor(&v)),
            "f_v": function_value(&fv),
            "is_reduced": fv.is_constant(),
            "cut": cut.map(|(c, w)| json!({ "cut": cut_value(g, &c), "function": function_value(&w) })),
        }),
        inputs: vec![h],
    })
}

pub fn classify(path: &Path, base: &str, dot: Option<&Path>, side: &mut SideFiles) -> Result<Outcome, CliError> {
    let (input, m, h) = load_module(path)?;
    let g = m.graph();
    let x0 = input.point(base)?;
    let qt = match classify_g1d(&m, &x0) {
        Ok(qt) => qt,
        Err(
            e @ (SeriesError::NotRankOne(_)
            | SeriesError::NotRefined(_)
            | SeriesError::QuotientNotTree(_)
            | SeriesError::NotInRat(_)),
        ) => {
            return Ok(Outcome {
                status: Status::Refuted,
                result: json!({ "reason": e.to_string() }),
                inputs: vec![h],
            })
        }
        Err(e) => return Err(series_err(e)),
    };
    if let Some(p) = dot {
        side.push((p.to_path_buf(), qt.to_dot()));
    }
    let coarse = qt.coarse_tree();
    let images: BTreeMap<String, Value> = (0..g.vertex_count())
        .map(|v| (g.name(v).to_string(), point_value(&qt.tree, &qt.project(&GraphPoint::Vertex(v)))))
        .collect();
    Ok(Outcome {
        status: Status::Verified,
        result: json!({
            "degree": qt.degree,
            "tree_edges": coarse.edge_count(),
            "tree": io::graph_to_json(&coarse),
            "refined_tree": io::graph_to_json(&qt.tree),
            "base_image": point_value(&qt.tree, &qt.base),
            "vertex_images": images,
        }),
        inputs: vec![h],
    })
}

pub fn pullback(
    path: &Path,
    base: Option<&str>,
    tree_grid: u64,
    module_out: Option<&Path>,
    dot: Option<&Path>,
    side: &mut SideFiles,
) -> Result<Outcome, CliError> {
    let (j, h) = load::<MorphismJson>(path)?;
    let psi = io::morphism_from_json(&j)?;
    let x0 = match base {
        Some(b) => io::parse_point_arg(&psi.source, b)?,
        None => GraphPoint::Vertex(0),
    };
    let pb = match pullback_from_tree(&psi, &x0, tree_grid) {
        Ok(pb) => pb,
        Err(e @ SeriesError::NotHarmonic { .. }) => {
            return Ok(Outcome {
                status: Status::Refuted,
                result: json!({ "reason": e.to_string() }),
                inputs: vec![h],
            })
        }
        Err(e) => return Err(series_err(e)),
    };
    let module = io::module_to_json(&pb.module);
    if let Some(p) = module_out {
        side.push((p.to_path_buf(), pretty(&module)));
    }
    if let Some(p) = dot {
        side.push((p.to_path_buf(), pb.module.graph().to_dot("source")));
    }
    Ok(Outcome {
        status: Status::Verified,
        result: json!({
            "degree": pb.degree,
            "base": point_value(pb.module.graph(), &pb.base),
            "generators": pb.module.generators().len(),
            "module": module,
        }),
        inputs: vec![h],
    })
}

pub fn tropical_rank_cmd(path: &Path, r_max: Option<usize>, max_nodes: usize) -> Result<Outcome, CliError> {
    let (_, m, h) = load_module(path)?;
    let r_max = r_max.unwrap_or(m.r() + 1);
    let rep = tropical_rank(&m, r_max, DependenceLimits { max_nodes });
    let status = match rep.rank {
        Some(_) => Status::Verified,
        None => Status::Inconclusive,
    };
    Ok(Outcome {
        status,
        result: json!({
            "rank": rep.rank,
            "structure_r": m.r(),
            "lower_bound": rep.lower_bound,
            "independent": rep.independent,
            "inconclusive": rep.inconclusive,
            "extremals": rep.extremals,
        }),
        inputs: vec![h],
    })
}
