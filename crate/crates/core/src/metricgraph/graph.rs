//! Metric graphs with rational edge lengths, their points and tangent
//! directions, and subdivisions of a model.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_traits::Zero;
use thiserror::Error;

use super::rational::{format_q, q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("duplicate vertex name {0:?}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("edge {0} has non-positive length")]
    NonPositiveLength(usize),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("offset {offset} outside edge {edge}")]
    OffsetOutOfRange { edge: usize, offset: String },
    #[error("graph is not connected")]
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: Q,
}

/// A point of the metric realization: a vertex, or an interior point of an
/// edge at distance `offset` from its `u` end.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    Vertex(usize),
    Edge { edge: usize, offset: Q },
}

/// A tangent direction: along `edge`, towards its `v` end when `forward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub edge: usize,
    pub forward: bool,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        Direction {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

impl MetricGraph {
    pub fn new(names: Vec<String>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if names.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(n.clone()));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u >= names.len() || e.v >= names.len() {
                return Err(GraphError::EdgeOutOfRange(i));
            }
            if e.len <= Q::zero() {
                return Err(GraphError::NonPositiveLength(i));
            }
        }
        let g = MetricGraph { names, edges, index };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph from vertex names and `(u, v, length)` triples.
    pub fn from_named(vertices: &[&str], edges: &[(&str, &str, Q)]) -> Result<Self, GraphError> {
        let names: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let lookup = |s: &str| {
            vertices
                .iter()
                .position(|v| *v == s)
                .ok_or_else(|| GraphError::UnknownVertex(s.to_string()))
        };
        let edges = edges
            .iter()
            .map(|(u, v, len)| {
                Ok(Edge {
                    u: lookup(u)?,
                    v: lookup(v)?,
                    len: *len,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        MetricGraph::new(names, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn total_length(&self) -> Q {
        self.edges.iter().map(|e| e.len).sum()
    }

    /// Vertex at the end of the edge reached by walking along `d`.
    pub fn head(&self, d: Direction) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.v
        } else {
            e.u
        }
    }

    /// Vertex where a walk along `d` starts when `d` leaves a vertex.
    pub fn tail(&self, d: Direction) -> usize {
        self.head(d.reversed())
    }

    /// Outgoing directions at `v`, in incidence order: edges by index, and
    /// for a loop the forward direction first.
    pub fn incident(&self, v: usize) -> Vec<Direction> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.u == v {
                out.push(Direction { edge: i, forward: true });
            }
            if e.v == v {
                out.push(Direction { edge: i, forward: false });
            }
        }
        out
    }

    pub fn valence(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    pub fn directions_at(&self, p: &GraphPoint) -> Vec<Direction> {
        match p {
            GraphPoint::Vertex(v) => self.incident(*v),
            GraphPoint::Edge { edge, .. } => vec![
                Direction { edge: *edge, forward: true },
                Direction { edge: *edge, forward: false },
            ],
        }
    }

    /// The point at distance `t` from the `u` end of edge `e`, canonicalized.
    pub fn point_on_edge(&self, e: usize, t: Q) -> Result<GraphPoint, GraphError> {
        let edge = self.edges.get(e).ok_or(GraphError::EdgeOutOfRange(e))?;
        if t < Q::zero() || t > edge.len {
            return Err(GraphError::OffsetOutOfRange {
                edge: e,
                offset: format_q(&t),
            });
        }
        Ok(if t.is_zero() {
            GraphPoint::Vertex(edge.u)
        } else if t == edge.len {
            GraphPoint::Vertex(edge.v)
        } else {
            GraphPoint::Edge { edge: e, offset: t }
        })
    }

    pub fn check_point(&self, p: &GraphPoint) -> Result<(), GraphError> {
        match p {
            GraphPoint::Vertex(v) if *v < self.vertex_count() => Ok(()),
            GraphPoint::Vertex(v) => Err(GraphError::UnknownVertex(format!("#{v}"))),
            GraphPoint::Edge { edge, offset } => {
                let e = self.edges.get(*edge).ok_or(GraphError::EdgeOutOfRange(*edge))?;
                if *offset <= Q::zero() || *offset >= e.len {
                    return Err(GraphError::OffsetOutOfRange {
                        edge: *edge,
                        offset: format_q(offset),
                    });
                }
                Ok(())
            }
        }
    }

    /// Offset of `p` on edge `e`, when `p` lies on its closure. Loops report
    /// the `u` end.
    pub fn offset_on(&self, p: &GraphPoint, e: usize) -> Option<Q> {
        let edge = &self.edges[e];
        match p {
            GraphPoint::Edge { edge: f, offset } if *f == e => Some(*offset),
            GraphPoint::Vertex(v) if *v == edge.u => Some(Q::zero()),
            GraphPoint::Vertex(v) if *v == edge.v => Some(edge.len),
            _ => None,
        }
    }

    /// Point at distance `dist` from `p` along `d`, if it stays on the
    /// closed edge.
    pub fn walk(&self, p: &GraphPoint, d: Direction, dist: Q) -> Option<GraphPoint> {
        let start = match p {
            GraphPoint::Vertex(_) => {
                if d.forward {
                    Q::zero()
                } else {
                    self.edges[d.edge].len
                }
            }
            GraphPoint::Edge { offset, .. } => *offset,
        };
        let t = if d.forward { start + dist } else { start - dist };
        self.point_on_edge(d.edge, t).ok()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn is_simple(&self) -> bool {
        let mut pairs = BTreeSet::new();
        self.edges
            .iter()
            .all(|e| e.u != e.v && pairs.insert((e.u.min(e.v), e.u.max(e.v))))
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count()
    }

    /// Shortest-path distances from `p` to every vertex.
    pub fn vertex_distances(&self, p: &GraphPoint) -> Vec<Q> {
        let n = self.vertex_count();
        let mut dist: Vec<Option<Q>> = vec![None; n];
        match p {
            GraphPoint::Vertex(v) => dist[*v] = Some(Q::zero()),
            GraphPoint::Edge { edge, offset } => {
                let e = &self.edges[*edge];
                dist[e.u] = Some(*offset);
                let other = e.len - offset;
                dist[e.v] = Some(match dist[e.v] {
                    Some(d) if d < other => d,
                    _ => other,
                });
            }
        }
        let mut done = vec![false; n];
        loop {
            let next = (0..n)
                .filter(|&i| !done[i] && dist[i].is_some())
                .min_by_key(|&i| dist[i].unwrap());
            let Some(x) = next else { break };
            done[x] = true;
            let dx = dist[x].unwrap();
            for e in &self.edges {
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    if a == x {
                        let cand = dx + e.len;
                        if dist[b].map_or(true, |d| cand < d) {
                            dist[b] = Some(cand);
                        }
                    }
                }
            }
        }
        dist.into_iter().map(|d| d.expect("connected graph")).collect()
    }

    pub fn distance(&self, p: &GraphPoint, x: &GraphPoint) -> Q {
        let dv = self.vertex_distances(p);
        match x {
            GraphPoint::Vertex(v) => dv[*v],
            GraphPoint::Edge { edge, offset } => {
                let e = &self.edges[*edge];
                let mut best = (dv[e.u] + offset).min(dv[e.v] + e.len - offset);
                if let GraphPoint::Edge { edge: pe, offset: po } = p {
                    if pe == edge {
                        let direct = if po > offset { po - offset } else { offset - po };
                        best = best.min(direct);
                    }
                }
                best
            }
        }
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n");
        for n in &self.names {
            let _ = writeln!(s, "  \"{n}\";");
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  \"{}\" -- \"{}\" [label=\"{}\"];",
                self.names[e.u],
                self.names[e.v],
                format_q(&e.len)
            );
        }
        s.push_str("}\n");
        s
    }

    fn fresh_name(&self, used: &BTreeSet<String>, base: String) -> String {
        let mut name = base;
        while self.index.contains_key(&name) || used.contains(&name) {
            name.push('\'');
        }
        name
    }
}

/// A subdivision of a graph at finitely many points, with maps between
/// points and functions of the two models.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub original: MetricGraph,
    pub refined: MetricGraph,
    /// Per original edge, its pieces as `(refined edge, start offset)`.
    pub pieces: Vec<Vec<(usize, Q)>>,
    /// Original location of each refined vertex.
    pub vertex_origin: Vec<GraphPoint>,
}

impl Refinement {
    pub fn identity(g: &MetricGraph) -> Refinement {
        refine_model(g, &[])
    }

    pub fn to_refined(&self, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(v) => GraphPoint::Vertex(*v),
            GraphPoint::Edge { edge, offset } => {
                let pieces = &self.pieces[*edge];
                let k = pieces.partition_point(|(_, s)| s <= offset) - 1;
                let (re, start) = pieces[k];
                self.refined
                    .point_on_edge(re, offset - start)
                    .expect("offset within piece")
            }
        }
    }

    pub fn to_original(&self, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(v) => self.vertex_origin[*v].clone(),
            GraphPoint::Edge { edge, offset } => {
                let (oe, start) = self.piece_origin(*edge);
                GraphPoint::Edge {
                    edge: oe,
                    offset: start + offset,
                }
            }
        }
    }

    /// Original edge and start offset of a refined edge.
    pub fn piece_origin(&self, refined_edge: usize) -> (usize, Q) {
        for (oe, ps) in self.pieces.iter().enumerate() {
            if let Some(&(_, s)) = ps.iter().find(|(re, _)| *re == refined_edge) {
                return (oe, s);
            }
        }
        panic!("refined edge {refined_edge} has no origin")
    }

    pub fn direction_to_refined(&self, p: &GraphPoint, d: Direction) -> Direction {
        let pieces = &self.pieces[d.edge];
        let edge = match p {
            GraphPoint::Vertex(_) => {
                if d.forward {
                    pieces[0].0
                } else {
                    pieces[pieces.len() - 1].0
                }
            }
            GraphPoint::Edge { offset, .. } => {
                if d.forward {
                    pieces[pieces.partition_point(|(_, s)| s <= offset) - 1].0
                } else {
                    pieces[pieces.partition_point(|(_, s)| s < offset) - 1].0
                }
            }
        };
        Direction {
            edge,
            forward: d.forward,
        }
    }
}

/// Subdivides `g` at the given points. Points that are already vertices
/// are ignored, so refining twice at the same points changes nothing.
pub fn refine_model(g: &MetricGraph, points: &[GraphPoint]) -> Refinement {
    let mut cuts: Vec<BTreeSet<Q>> = vec![BTreeSet::new(); g.edge_count()];
    for p in points {
        if let GraphPoint::Edge { edge, offset } = p {
            cuts[*edge].insert(*offset);
        }
    }
    let mut names = g.names.clone();
    let mut vertex_origin: Vec<GraphPoint> = (0..g.vertex_count()).map(GraphPoint::Vertex).collect();
    let mut used = BTreeSet::new();
    let mut edges = Vec::new();
    let mut pieces = Vec::with_capacity(g.edge_count());
    for (i, e) in g.edges.iter().enumerate() {
        let mut prev_vertex = e.u;
        let mut prev_offset = Q::zero();
        let mut ps = Vec::new();
        for &t in &cuts[i] {
            let name = g.fresh_name(&used, format!("e{i}@{}", format_q(&t)));
            used.insert(name.clone());
            names.push(name);
            vertex_origin.push(GraphPoint::Edge { edge: i, offset: t });
            let m = names.len() - 1;
            ps.push((edges.len(), prev_offset));
            edges.push(Edge {
                u: prev_vertex,
                v: m,
                len: t - prev_offset,
            });
            prev_vertex = m;
            prev_offset = t;
        }
        ps.push((edges.len(), prev_offset));
        edges.push(Edge {
            u: prev_vertex,
            v: e.v,
            len: e.len - prev_offset,
        });
        pieces.push(ps);
    }
    let refined = MetricGraph::new(names, edges).expect("subdivision of a valid graph");
    Refinement {
        original: g.clone(),
        refined,
        pieces,
        vertex_origin,
    }
}

/// Subdivides parallel edges at their midpoints and loops at their thirds,
/// producing a simple model.
pub fn simple_model(g: &MetricGraph) -> Refinement {
    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, e) in g.edges.iter().enumerate() {
        classes.entry((e.u.min(e.v), e.u.max(e.v))).or_default().push(i);
    }
    let mut points = Vec::new();
    for ((a, b), es) in classes {
        for &i in &es {
            let len = g.edges[i].len;
            if a == b {
                points.push(GraphPoint::Edge { edge: i, offset: len * q(1, 3) });
                points.push(GraphPoint::Edge { edge: i, offset: len * q(2, 3) });
            } else if es.len() > 1 {
                points.push(GraphPoint::Edge { edge: i, offset: len * q(1, 2) });
            }
        }
    }
    refine_model(g, &points)
}
