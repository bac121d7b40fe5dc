//! JSON file formats. Rationals are `"p/q"` strings, vertices are referred
//! to by name, and points on edges by edge index and offset from the edge's
//! first endpoint.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypercube::RankFunction;
use crate::metricgraph::rational::{format_q, parse_q};
use crate::metricgraph::{Direction, Divisor, Edge, GraphPoint, MetricGraph, PLFunction, Refinement, Q};
use crate::series::{HarmonicMorphism, TropModule};
use crate::slopes::SlopeStructure;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> IoError {
    IoError::Invalid(e.to_string())
}

/// A rational written as a string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rat(#[serde(with = "crate::metricgraph::rational")] pub Q);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: String,
    pub v: String,
    pub len: Rat,
}

/// A vertex name, or an edge index with an offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointJson {
    Vertex(String),
    Edge { edge: usize, offset: Rat },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub point: PointJson,
    pub coeff: i64,
}

/// Breakpoints `[offset, value]` per edge; the graph is optional when the
/// function sits inside a file that already fixes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
    pub edges: Vec<Vec<(Rat, Rat)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankJson {
    pub delta: usize,
    pub r: usize,
    pub values: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub model: GraphJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Keys `"u->v"`, or `"u->v@k"` for the `k`-th of several edges between
    /// `u` and `v` in input order.
    pub edge_slopes: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    pub vertex_ranks: BTreeMap<String, RankJson>,
}

/// Everything a command may need about one series: the structure, a
/// divisor, loose functions, and generators of a module. Points and
/// functions refer to the structure's model as written in the file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub structure: StructureJson,
    #[serde(default)]
    pub divisor: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<FunctionJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<FunctionJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeImageJson {
    /// Index of the target edge.
    pub edge: usize,
    /// Relative slope, negative when the source edge runs against the
    /// target edge's orientation.
    pub slope: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub source: GraphJson,
    pub target: GraphJson,
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: Vec<EdgeImageJson>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IoError> {
    Ok(serde_json::from_str(text)?)
}

// Graphs and points.

pub fn graph_from_json(j: &GraphJson) -> Result<MetricGraph, IoError> {
    let id = |name: &str| {
        j.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| IoError::Invalid(format!("unknown vertex {name:?}")))
    };
    let edges = j
        .edges
        .iter()
        .map(|e| {
            Ok(Edge {
                u: id(&e.u)?,
                v: id(&e.v)?,
                len: e.len.0,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    MetricGraph::new(j.vertices.clone(), edges).map_err(invalid)
}

pub fn graph_to_json(g: &MetricGraph) -> GraphJson {
    GraphJson {
        vertices: g.names().to_vec(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeJson {
                u: g.name(e.u).to_string(),
                v: g.name(e.v).to_string(),
                len: Rat(e.len),
            })
            .collect(),
    }
}

pub fn point_from_json(g: &MetricGraph, p: &PointJson) -> Result<GraphPoint, IoError> {
    let pt = match p {
        PointJson::Vertex(name) => GraphPoint::Vertex(g.vertex_id(name).map_err(invalid)?),
        PointJson::Edge { edge, offset } => {
            if *edge >= g.edge_count() {
                return Err(IoError::Invalid(format!("no edge {edge}")));
            }
            g.point_on_edge(*edge, offset.0).map_err(invalid)?
        }
    };
    Ok(pt)
}

pub fn point_to_json(g: &MetricGraph, p: &GraphPoint) -> PointJson {
    match p {
        GraphPoint::Vertex(v) => PointJson::Vertex(g.name(*v).to_string()),
        GraphPoint::Edge { edge, offset } => PointJson::Edge {
            edge: *edge,
            offset: Rat(*offset),
        },
    }
}

/// A point on the command line: a vertex name, or `edge:offset`.
pub fn parse_point_arg(g: &MetricGraph, s: &str) -> Result<GraphPoint, IoError> {
    if let Ok(v) = g.vertex_id(s) {
        return Ok(GraphPoint::Vertex(v));
    }
    let (e, t) = s
        .split_once(':')
        .ok_or_else(|| IoError::Invalid(format!("point {s:?} is neither a vertex nor edge:offset")))?;
    let edge: usize = e.trim().parse().map_err(|_| IoError::Invalid(format!("bad edge index in {s:?}")))?;
    let offset = parse_q(t.trim()).map_err(IoError::Invalid)?;
    point_from_json(g, &PointJson::Edge { edge, offset: Rat(offset) })
}

pub fn divisor_from_json(g: &MetricGraph, terms: &[TermJson]) -> Result<Divisor, IoError> {
    let mut d = Divisor::new();
    for t in terms {
        d.add_point(point_from_json(g, &t.point)?, t.coeff);
    }
    Ok(d)
}

pub fn divisor_to_json(g: &MetricGraph, d: &Divisor) -> Vec<TermJson> {
    d.iter()
        .map(|(p, c)| TermJson {
            point: point_to_json(g, p),
            coeff: c,
        })
        .collect()
}

// Functions.

pub fn function_from_json(g: &MetricGraph, f: &FunctionJson) -> Result<PLFunction, IoError> {
    let edges = f
        .edges
        .iter()
        .map(|bps| bps.iter().map(|(t, v)| (t.0, v.0)).collect())
        .collect();
    PLFunction::from_breakpoints(g, edges).map_err(invalid)
}

/// Reads a standalone function file, which must carry its graph.
pub fn standalone_function(f: &FunctionJson) -> Result<(MetricGraph, PLFunction), IoError> {
    let gj = f
        .graph
        .as_ref()
        .ok_or_else(|| IoError::Invalid("function file has no graph".into()))?;
    let g = graph_from_json(gj)?;
    let h = function_from_json(&g, f)?;
    Ok((g, h))
}

pub fn function_to_json(g: Option<&MetricGraph>, f: &PLFunction) -> FunctionJson {
    FunctionJson {
        graph: g.map(graph_to_json),
        edges: f
            .edge_breakpoints()
            .iter()
            .map(|bps| bps.iter().map(|(t, v)| (Rat(*t), Rat(*v))).collect())
            .collect(),
    }
}

// Rank functions.

pub fn rank_from_json(j: &RankJson) -> Result<RankFunction, IoError> {
    RankFunction::new(j.delta, j.r, j.values.clone()).map_err(invalid)
}

pub fn rank_to_json(rf: &RankFunction) -> RankJson {
    RankJson {
        delta: rf.delta(),
        r: rf.r(),
        values: rf.values().to_vec(),
    }
}

// Slope structures.

fn edge_key(g: &MetricGraph, e: usize) -> String {
    let ed = g.edge(e);
    let parallel: Vec<usize> = (0..g.edge_count())
        .filter(|&i| {
            let o = g.edge(i);
            (o.u, o.v) == (ed.u, ed.v) || (o.u, o.v) == (ed.v, ed.u)
        })
        .collect();
    let base = format!("{}->{}", g.name(ed.u), g.name(ed.v));
    if parallel.len() > 1 {
        let k = parallel.iter().position(|&i| i == e).expect("edge is parallel to itself");
        format!("{base}@{k}")
    } else {
        base
    }
}

fn parse_edge_key(g: &MetricGraph, key: &str) -> Result<Direction, IoError> {
    let (a, rest) = key
        .split_once("->")
        .ok_or_else(|| IoError::Invalid(format!("edge key {key:?} is not of the form u->v")))?;
    // Vertex names may themselves contain '@', so a suffix only counts as
    // an index when the whole name is unknown.
    let (b, k) = match g.vertex_id(rest.trim()) {
        Ok(_) => (rest, None),
        Err(_) => match rest.rsplit_once('@') {
            Some((b, k)) => (
                b,
                Some(
                    k.parse::<usize>()
                        .map_err(|_| IoError::Invalid(format!("bad edge index in {key:?}")))?,
                ),
            ),
            None => (rest, None),
        },
    };
    let (a, b) = (g.vertex_id(a.trim()).map_err(invalid)?, g.vertex_id(b.trim()).map_err(invalid)?);
    let parallel: Vec<usize> = (0..g.edge_count())
        .filter(|&i| {
            let o = g.edge(i);
            (o.u, o.v) == (a, b) || (o.u, o.v) == (b, a)
        })
        .collect();
    let e = match (k, parallel.len()) {
        (_, 0) => return Err(IoError::Invalid(format!("no edge {key:?}"))),
        (None, 1) => parallel[0],
        (None, _) => return Err(IoError::Invalid(format!("edge key {key:?} is ambiguous; add @k"))),
        (Some(k), n) if k < n => parallel[k],
        (Some(_), _) => return Err(IoError::Invalid(format!("no edge {key:?}"))),
    };
    Ok(Direction {
        edge: e,
        forward: g.edge(e).u == a,
    })
}

/// The structure on the simple model of the file's graph, together with
/// the refinement from that graph.
pub fn structure_from_json(j: &StructureJson) -> Result<(SlopeStructure, Refinement), IoError> {
    let g = graph_from_json(&j.model)?;
    let mut oriented = Vec::new();
    for (key, list) in &j.edge_slopes {
        oriented.push((parse_edge_key(&g, key)?, list.clone()));
    }
    let r = match j.r {
        Some(r) => r,
        None => oriented
            .first()
            .map(|(_, l)| l.len().saturating_sub(1))
            .ok_or_else(|| IoError::Invalid("no edge slopes".into()))?,
    };
    let mut ranks = vec![None; g.vertex_count()];
    for (name, rj) in &j.vertex_ranks {
        let v = g.vertex_id(name).map_err(invalid)?;
        ranks[v] = Some(rank_from_json(rj)?);
    }
    SlopeStructure::build(&g, r, &oriented, ranks).map_err(invalid)
}

pub fn structure_to_json(s: &SlopeStructure) -> StructureJson {
    let g = s.model();
    StructureJson {
        model: graph_to_json(g),
        r: Some(s.r()),
        edge_slopes: (0..g.edge_count())
            .map(|e| (edge_key(g, e), s.edge_slopes()[e].clone()))
            .collect(),
        vertex_ranks: (0..g.vertex_count())
            .map(|v| (g.name(v).to_string(), rank_to_json(s.vertex_rank(v))))
            .collect(),
    }
}

/// A parsed series file, moved onto the simple model.
#[derive(Debug, Clone)]
pub struct SeriesInput {
    pub structure: SlopeStructure,
    /// From the file's graph to the model of `structure`.
    pub refinement: Refinement,
    pub divisor: Divisor,
    pub functions: Vec<PLFunction>,
    pub generators: Vec<PLFunction>,
}

impl SeriesInput {
    pub fn module(&self) -> Result<TropModule, IoError> {
        TropModule::new(self.structure.clone(), self.divisor.clone(), self.generators.clone()).map_err(invalid)
    }

    /// A point given in the file's coordinates, on the model.
    pub fn point(&self, s: &str) -> Result<GraphPoint, IoError> {
        let p = parse_point_arg(&self.refinement.original, s)?;
        Ok(self.refinement.to_refined(&p))
    }
}

pub fn series_from_json(j: &SeriesJson) -> Result<SeriesInput, IoError> {
    let (structure, refinement) = structure_from_json(&j.structure)?;
    let g = &refinement.original;
    let divisor = refinement.divisor_to_refined(&divisor_from_json(g, &j.divisor)?);
    let lift = |fs: &[FunctionJson]| -> Result<Vec<PLFunction>, IoError> {
        fs.iter()
            .map(|f| Ok(refinement.function_to_refined(&function_from_json(g, f)?)))
            .collect()
    };
    Ok(SeriesInput {
        functions: lift(&j.functions)?,
        generators: lift(&j.generators)?,
        structure,
        refinement: refinement.clone(),
        divisor,
    })
}

pub fn module_to_json(m: &TropModule) -> SeriesJson {
    let g = m.graph();
    SeriesJson {
        structure: structure_to_json(m.structure()),
        divisor: divisor_to_json(g, m.divisor()),
        functions: Vec::new(),
        generators: m.generators().iter().map(|f| function_to_json(None, f)).collect(),
    }
}

// Morphisms.

pub fn morphism_from_json(j: &MorphismJson) -> Result<HarmonicMorphism, IoError> {
    let source = graph_from_json(&j.source)?;
    let target = graph_from_json(&j.target)?;
    let mut vertex_map = vec![usize::MAX; source.vertex_count()];
    for (a, b) in &j.vertex_map {
        vertex_map[source.vertex_id(a).map_err(invalid)?] = target.vertex_id(b).map_err(invalid)?;
    }
    if let Some(v) = vertex_map.iter().position(|&x| x == usize::MAX) {
        return Err(IoError::Invalid(format!("vertex {} has no image", source.name(v))));
    }
    if j.edge_map.len() != source.edge_count() {
        return Err(IoError::Invalid("edge_map needs one entry per source edge".into()));
    }
    let edge_map = j.edge_map.iter().map(|e| (e.edge, e.slope)).collect();
    Ok(HarmonicMorphism {
        source,
        target,
        vertex_map,
        edge_map,
    })
}

pub fn morphism_to_json(m: &HarmonicMorphism) -> MorphismJson {
    MorphismJson {
        source: graph_to_json(&m.source),
        target: graph_to_json(&m.target),
        vertex_map: m
            .vertex_map
            .iter()
            .enumerate()
            .map(|(a, &b)| (m.source.name(a).to_string(), m.target.name(b).to_string()))
            .collect(),
        edge_map: m
            .edge_map
            .iter()
            .map(|&(edge, slope)| EdgeImageJson { edge, slope })
            .collect(),
    }
}

pub fn q_string(x: &Q) -> String {
    format_q(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::metricgraph::q;

    #[test]
    fn graph_and_points_round_trip() {
        let g = examples::first_grd().structure.model().clone();
        let j = graph_to_json(&g);
        assert_eq!(graph_from_json(&j).unwrap(), g);
        let p = GraphPoint::Edge { edge: 1, offset: q(1, 4) };
        assert_eq!(point_from_json(&g, &point_to_json(&g, &p)).unwrap(), p);
        assert_eq!(parse_point_arg(&g, "1:1/4").unwrap(), p);
        assert_eq!(parse_point_arg(&g, "u").unwrap(), GraphPoint::Vertex(0));
        assert!(parse_point_arg(&g, "nowhere").is_err());
    }

    #[test]
    fn rationals_are_strings() {
        let text = serde_json::to_string(&Rat(q(-3, 4))).unwrap();
        assert_eq!(text, "\"-3/4\"");
        let back: Rat = parse(&text).unwrap();
        assert_eq!(back.0, q(-3, 4));
    }

    #[test]
    fn structure_with_parallel_edges() {
        let text = r#"{
            "model": {"vertices": ["u", "v"],
                      "edges": [{"u": "u", "v": "v", "len": "1"}, {"u": "u", "v": "v", "len": "1"}]},
            "edge_slopes": {"u->v@0": [0, 1, 2], "v->u@1": [-2, -1, 0]},
            "vertex_ranks": {"u": {"delta": 2, "r": 2, "values": [2, 1, 0, 1, 1, 0, 0, 0, 0]},
                             "v": {"delta": 2, "r": 2, "values": [2, 1, 0, 1, 1, 0, 0, 0, 0]}}
        }"#;
        let j: StructureJson = parse(text).unwrap();
        let (s, _) = structure_from_json(&j).unwrap();
        assert_eq!(s, examples::first_grd().structure);
        let back = structure_to_json(&s);
        assert_eq!(structure_from_json(&back).unwrap().0, s);
    }

    #[test]
    fn ambiguous_and_malformed_input() {
        let text = r#"{"model": {"vertices": ["u", "v"],
            "edges": [{"u": "u", "v": "v", "len": "1"}, {"u": "u", "v": "v", "len": "1"}]},
            "edge_slopes": {"u->v": [0, 1]}}"#;
        let j: StructureJson = parse(text).unwrap();
        assert!(matches!(structure_from_json(&j), Err(IoError::Invalid(_))));
        let err = parse::<StructureJson>("{\n  \"model\": [").unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }));
    }

    #[test]
    fn module_round_trip() {
        let ex = examples::first_grd();
        let g = ex.structure.model().clone();
        let f = PLFunction::distance_from(&g, &GraphPoint::Vertex(0));
        let m = TropModule::new(ex.structure.clone(), ex.divisor.clone(), vec![PLFunction::zero(&g), f]).unwrap();
        let j = module_to_json(&m);
        let text = serde_json::to_string(&j).unwrap();
        let back = series_from_json(&parse(&text).unwrap()).unwrap();
        assert_eq!(back.module().unwrap(), m);
        assert_eq!(function_from_json(&g, &function_to_json(None, &m.generators()[1])).unwrap(), m.generators()[1]);
        assert_eq!(divisor_from_json(&g, &divisor_to_json(&g, &ex.divisor)).unwrap(), ex.divisor);
        assert_eq!(back.point("0:1/4").unwrap(), GraphPoint::Edge { edge: 0, offset: q(1, 4) });
    }
}
