use std::collections::BTreeMap;

use thiserror::Error;

use crate::hypercube::{RankError, RankFunction};
use crate::metricgraph::{
    refine_model, simple_model, Direction, Divisor, GraphPoint, MetricGraph, PLFunction, Refinement,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlopeError {
    #[error("model graph is not simple")]
    NotSimple,
    #[error("edge {edge}: slope lists of the two orientations are not antisymmetric")]
    AntisymmetryViolated { edge: usize },
    #[error("edge {edge}: expected {expected} slopes, got {got}")]
    EdgeListLengthMismatch { edge: usize, expected: usize, got: usize },
    #[error("edge {edge}: slopes must be strictly increasing")]
    NotIncreasing { edge: usize },
    #[error("edge {edge} has no slope list")]
    MissingEdgeSlopes { edge: usize },
    #[error("vertex {vertex}: {source}")]
    BadVertexRank { vertex: usize, source: RankError },
    #[error("vertex {vertex}: rank function has dimension {got}, valence is {expected}")]
    VertexDimension { vertex: usize, expected: usize, got: usize },
    #[error("grid denominator {0} misses a point of the divisor or a vertex")]
    GridTooCoarse(u64),
    #[error("point {0:?} is not on the model")]
    BadPoint(GraphPoint),
    #[error("enumeration exceeded the cap of {0} structures")]
    ExplosionGuard(usize),
}

/// Slope data of order `r` on a simple model: an increasing list of `r + 1`
/// slopes per edge (read in the forward direction) and a rank function per
/// vertex, its axes ordered as `MetricGraph::incident`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeStructure {
    model: MetricGraph,
    r: usize,
    edge_slopes: Vec<Vec<i64>>,
    vertex_ranks: Vec<RankFunction>,
}

fn reverse_list(l: &[i64]) -> Vec<i64> {
    l.iter().rev().map(|s| -s).collect()
}

impl SlopeStructure {
    pub fn new(
        model: MetricGraph,
        r: usize,
        edge_slopes: Vec<Vec<i64>>,
        vertex_ranks: Vec<RankFunction>,
    ) -> Result<Self, SlopeError> {
        if !model.is_simple() {
            return Err(SlopeError::NotSimple);
        }
        if edge_slopes.len() != model.edge_count() {
            return Err(SlopeError::MissingEdgeSlopes {
                edge: edge_slopes.len().min(model.edge_count()),
            });
        }
        for (e, l) in edge_slopes.iter().enumerate() {
            check_list(e, l, r)?;
        }
        if vertex_ranks.len() != model.vertex_count() {
            return Err(SlopeError::VertexDimension {
                vertex: vertex_ranks.len().min(model.vertex_count()),
                expected: 0,
                got: 0,
            });
        }
        for (v, rf) in vertex_ranks.iter().enumerate() {
            let d = model.valence(v);
            if rf.delta() != d {
                return Err(SlopeError::VertexDimension {
                    vertex: v,
                    expected: d,
                    got: rf.delta(),
                });
            }
            if rf.r() != r {
                return Err(SlopeError::BadVertexRank {
                    vertex: v,
                    source: RankError::DimensionMismatch {
                        expected: r,
                        got: rf.r(),
                    },
                });
            }
        }
        Ok(SlopeStructure {
            model,
            r,
            edge_slopes,
            vertex_ranks,
        })
    }

    /// Builds a structure from lists given on oriented edges. An edge may
    /// be given in either orientation or both; both must be antisymmetric.
    /// Missing vertex ranks default to the standard rank function. A graph
    /// that is not simple is first replaced by its simple model, whose new
    /// vertices carry the standard rank function.
    pub fn build(
        graph: &MetricGraph,
        r: usize,
        oriented: &[(Direction, Vec<i64>)],
        vertex_ranks: Vec<Option<RankFunction>>,
    ) -> Result<(SlopeStructure, Refinement), SlopeError> {
        let mut lists: Vec<Option<Vec<i64>>> = vec![None; graph.edge_count()];
        for (d, l) in oriented {
            if d.edge >= graph.edge_count() {
                return Err(SlopeError::MissingEdgeSlopes { edge: d.edge });
            }
            check_list(d.edge, l, r)?;
            let fwd = if d.forward { l.clone() } else { reverse_list(l) };
            match &lists[d.edge] {
                Some(prev) if *prev != fwd => {
                    return Err(SlopeError::AntisymmetryViolated { edge: d.edge })
                }
                _ => lists[d.edge] = Some(fwd),
            }
        }
        let lists = lists
            .into_iter()
            .enumerate()
            .map(|(e, l)| l.ok_or(SlopeError::MissingEdgeSlopes { edge: e }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ranks = Vec::with_capacity(graph.vertex_count());
        for v in 0..graph.vertex_count() {
            let d = graph.valence(v);
            ranks.push(match vertex_ranks.get(v).cloned().flatten() {
                Some(rf) => rf,
                None => RankFunction::standard(d, r),
            });
        }
        let refinement = if graph.is_simple() {
            Refinement::identity(graph)
        } else {
            simple_model(graph)
        };
        let s = SlopeStructure::on_refinement(&refinement, r, &lists, ranks)?;
        Ok((s, refinement))
    }

    /// Transports per-edge lists and per-vertex ranks of the original graph
    /// to a refinement; new vertices get the standard rank function.
    pub fn on_refinement(
        refinement: &Refinement,
        r: usize,
        lists: &[Vec<i64>],
        ranks: Vec<RankFunction>,
    ) -> Result<SlopeStructure, SlopeError> {
        let g = &refinement.refined;
        let mut edge_slopes = vec![Vec::new(); g.edge_count()];
        for (oe, ps) in refinement.pieces.iter().enumerate() {
            for (re, _) in ps {
                edge_slopes[*re] = lists[oe].clone();
            }
        }
        let mut vr = ranks;
        for v in vr.len()..g.vertex_count() {
            vr.push(RankFunction::standard(g.valence(v), r));
        }
        SlopeStructure::new(g.clone(), r, edge_slopes, vr)
    }

    pub fn model(&self) -> &MetricGraph {
        &self.model
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edge_slopes(&self) -> &[Vec<i64>] {
        &self.edge_slopes
    }

    pub fn vertex_ranks(&self) -> &[RankFunction] {
        &self.vertex_ranks
    }

    pub fn vertex_rank(&self, v: usize) -> &RankFunction {
        &self.vertex_ranks[v]
    }

    /// Allowed outgoing slopes along `d`, increasing.
    pub fn slopes_along(&self, d: Direction) -> Vec<i64> {
        let l = &self.edge_slopes[d.edge];
        if d.forward {
            l.clone()
        } else {
            reverse_list(l)
        }
    }

    /// Rank function at a point: the vertex rank, or the standard one on
    /// `[r]^2` at interior points.
    pub fn rank_at(&self, p: &GraphPoint) -> RankFunction {
        match p {
            GraphPoint::Vertex(v) => self.vertex_ranks[*v].clone(),
            GraphPoint::Edge { .. } => RankFunction::standard(2, self.r),
        }
    }

    /// Reindexes the structure on a finer subdivision of its model.
    pub fn refine(&self, points: &[GraphPoint]) -> (SlopeStructure, Refinement) {
        let refinement = refine_model(&self.model, points);
        let s = SlopeStructure::on_refinement(&refinement, self.r, &self.edge_slopes, self.vertex_ranks.clone())
            .expect("refinement of a valid structure");
        (s, refinement)
    }

    /// The same structure with all orientations reversed: each edge `u–v`
    /// becomes `v–u` and lists are reread from the other end.
    pub fn reversed(&self) -> SlopeStructure {
        let edges: Vec<_> = self
            .model
            .edges()
            .iter()
            .map(|e| crate::metricgraph::Edge {
                u: e.v,
                v: e.u,
                len: e.len,
            })
            .collect();
        let g = MetricGraph::new(self.model.names().to_vec(), edges).expect("same graph");
        let lists = self.edge_slopes.iter().map(|l| reverse_list(l)).collect();
        // Incidence order is by edge index, so every axis keeps its place.
        let ranks = self.vertex_ranks.clone();
        SlopeStructure::new(g, self.r, lists, ranks).expect("reversal of a valid structure")
    }

    /// `S + div(f)`: each allowed slope is shifted by minus the slope of `f`.
    /// The model is refined at the interior breakpoints of `f` first; `f`
    /// must live on this structure's model.
    pub fn translate(&self, f: &PLFunction) -> (SlopeStructure, Refinement) {
        let (s, refinement) = self.refine(&f.interior_breakpoints());
        let fr = refinement.function_to_refined(f);
        let g = &s.model;
        let edge_slopes = (0..g.edge_count())
            .map(|e| {
                let sl = fr.slope_from(e, &num_traits::Zero::zero(), true);
                s.edge_slopes[e].iter().map(|x| x - sl).collect()
            })
            .collect();
        let t = SlopeStructure::new(g.clone(), s.r, edge_slopes, s.vertex_ranks.clone())
            .expect("translation keeps the lists increasing");
        (t, refinement)
    }

    /// Removes valence-two vertices with the standard rank function across
    /// which the slope lists continue unchanged, while the result stays
    /// simple. Vertices in `keep` are never removed.
    pub fn coarsen(&self, keep: &[usize]) -> SlopeStructure {
        let mut s = self.clone();
        let mut keep_names: Vec<String> = keep.iter().map(|&v| self.model.name(v).to_string()).collect();
        keep_names.sort();
        loop {
            let Some(w) = (0..s.model.vertex_count()).find(|&w| s.removable(w, &keep_names)) else {
                return s;
            };
            s = s.remove_vertex(w);
        }
    }

    fn removable(&self, w: usize, keep: &[String]) -> bool {
        if keep.binary_search(&self.model.name(w).to_string()).is_ok() {
            return false;
        }
        let inc = self.model.incident(w);
        if inc.len() != 2 || self.vertex_ranks[w] != RankFunction::standard(2, self.r) {
            return false;
        }
        let (a, b) = (self.model.head(inc[0]), self.model.head(inc[1]));
        if a == b {
            return false;
        }
        let joined = self.model.edges().iter().any(|e| (e.u == a && e.v == b) || (e.u == b && e.v == a));
        // Walking into w along inc[0] reversed and leaving along inc[1].
        !joined && self.slopes_along(inc[0].reversed()) == self.slopes_along(inc[1])
    }

    fn remove_vertex(&self, w: usize) -> SlopeStructure {
        let inc = self.model.incident(w);
        let (d0, d1) = (inc[0], inc[1]);
        let a = self.model.head(d0);
        let b = self.model.head(d1);
        let len = self.model.edge(d0.edge).len + self.model.edge(d1.edge).len;
        let list = self.slopes_along(d1);
        let remap = |v: usize| if v > w { v - 1 } else { v };
        let mut edges = Vec::new();
        let mut lists = Vec::new();
        let mut new_index = BTreeMap::new();
        let merged_at = d0.edge.min(d1.edge);
        for (i, e) in self.model.edges().iter().enumerate() {
            if i == merged_at {
                new_index.insert(i, edges.len());
                edges.push(crate::metricgraph::Edge {
                    u: remap(a),
                    v: remap(b),
                    len,
                });
                lists.push(list.clone());
            } else if i != d0.edge && i != d1.edge {
                new_index.insert(i, edges.len());
                edges.push(crate::metricgraph::Edge {
                    u: remap(e.u),
                    v: remap(e.v),
                    len: e.len,
                });
                lists.push(self.edge_slopes[i].clone());
            }
        }
        let mut names = self.model.names().to_vec();
        names.remove(w);
        let g = MetricGraph::new(names, edges).expect("merge keeps the graph valid");
        let mut ranks = Vec::new();
        for v in 0..self.model.vertex_count() {
            if v == w {
                continue;
            }
            let rf = &self.vertex_ranks[v];
            let old_inc = self.model.incident(v);
            let nv = remap(v);
            let new_inc = g.incident(nv);
            // Axis k of the old function corresponds to an old direction;
            // find where it sits in the new incidence order.
            let target: Vec<Direction> = old_inc
                .iter()
                .map(|d| {
                    if d.edge == d0.edge || d.edge == d1.edge {
                        Direction {
                            edge: new_index[&merged_at],
                            forward: v == a,
                        }
                    } else {
                        Direction {
                            edge: new_index[&d.edge],
                            forward: d.forward,
                        }
                    }
                })
                .collect();
            let perm: Vec<usize> = new_inc
                .iter()
                .map(|d| target.iter().position(|t| t == d).expect("direction survives"))
                .collect();
            ranks.push(permute_axes(rf, &perm));
        }
        SlopeStructure::new(g, self.r, lists, ranks).expect("coarsening of a valid structure")
    }

    /// Checks the non-increasing property at every valence-two vertex
    /// outside the support of `d`: the slope vector leaving along one edge
    /// is coordinate-wise at most the one arriving along the other. Returns
    /// the offending vertex.
    pub fn check_nonincreasing(&self, d: &Divisor) -> Result<(), NonIncreasingViolation> {
        for w in 0..self.model.vertex_count() {
            let inc = self.model.incident(w);
            if inc.len() != 2 || d.get(&GraphPoint::Vertex(w)) != 0 {
                continue;
            }
            let arriving = self.slopes_along(inc[0].reversed());
            let leaving = self.slopes_along(inc[1]);
            if let Some(j) = (0..=self.r).find(|&j| leaving[j] > arriving[j]) {
                return Err(NonIncreasingViolation { vertex: w, index: j });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonIncreasingViolation {
    pub vertex: usize,
    pub index: usize,
}

fn check_list(edge: usize, l: &[i64], r: usize) -> Result<(), SlopeError> {
    if l.len() != r + 1 {
        return Err(SlopeError::EdgeListLengthMismatch {
            edge,
            expected: r + 1,
            got: l.len(),
        });
    }
    if l.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SlopeError::NotIncreasing { edge });
    }
    Ok(())
}

/// `g(p) = f(q)` where `q[perm[k]] = p[k]`: axis `k` of the result is axis
/// `perm[k]` of `f`.
pub fn permute_axes(f: &RankFunction, perm: &[usize]) -> RankFunction {
    let cube = f.cube();
    let values = cube
        .points()
        .map(|p| {
            let mut q = vec![0; p.len()];
            for (k, &x) in p.iter().enumerate() {
                q[perm[k]] = x;
            }
            f.value(&q)
        })
        .collect();
    RankFunction::new(f.delta(), f.r(), values).expect("permuting axes keeps validity")
}
