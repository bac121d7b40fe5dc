//! Continuous piecewise-affine functions with integer slopes.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::divisor::Divisor;
use super::graph::{Direction, GraphPoint, MetricGraph, Refinement};
use super::rational::{as_int, format_q, qi, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PLError {
    #[error("functions live on different graphs")]
    GraphMismatch,
    #[error("non-integral slope on edge {edge} near offset {at}")]
    NonIntegralSlope { edge: usize, at: String },
    #[error("breakpoints of edge {0} are not an increasing cover of the edge")]
    BadBreakpoints(usize),
    #[error("values disagree at vertex {0}")]
    Discontinuous(usize),
    #[error("edge {0}: piece lengths do not add up to the edge length")]
    BadPieces(usize),
}

/// Breakpoints `(offset, value)` per edge, from the `u` end, both endpoints
/// included. Collinear consecutive pieces are merged, so structural equality
/// is equality of functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PLFunction {
    vertex_values: Vec<Q>,
    edges: Vec<Vec<(Q, Q)>>,
}

fn piece_slope(a: &(Q, Q), b: &(Q, Q)) -> Q {
    (b.1 - a.1) / (b.0 - a.0)
}

fn canonicalize(bps: &mut Vec<(Q, Q)>) {
    bps.dedup_by(|b, a| a.0 == b.0);
    let mut out: Vec<(Q, Q)> = Vec::with_capacity(bps.len());
    for p in bps.drain(..) {
        while out.len() >= 2 {
            let n = out.len();
            if piece_slope(&out[n - 2], &out[n - 1]) == piece_slope(&out[n - 1], &p) {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    *bps = out;
}

/// Value at `t` of the function with the given breakpoints.
fn eval_bps(bps: &[(Q, Q)], t: &Q) -> Q {
    let k = bps.partition_point(|(p, _)| p <= t);
    if k == 0 {
        return bps[0].1;
    }
    if k == bps.len() {
        return bps[k - 1].1;
    }
    let (a, b) = (&bps[k - 1], &bps[k]);
    if a.0 == *t {
        return a.1;
    }
    a.1 + piece_slope(a, b) * (t - a.0)
}

/// Values at sorted `positions`, all within the edge.
fn eval_sorted(bps: &[(Q, Q)], positions: &[Q]) -> Vec<Q> {
    let mut k = 0;
    positions
        .iter()
        .map(|t| {
            while k + 1 < bps.len() - 1 && bps[k + 1].0 <= *t {
                k += 1;
            }
            let (a, b) = (&bps[k], &bps[k + 1]);
            a.1 + piece_slope(a, b) * (t - a.0)
        })
        .collect()
}

fn merged_positions(a: &[(Q, Q)], b: &[(Q, Q)]) -> Vec<Q> {
    let set: BTreeSet<Q> = a.iter().chain(b).map(|(p, _)| *p).collect();
    set.into_iter().collect()
}

impl PLFunction {
    pub fn constant(g: &MetricGraph, c: Q) -> Self {
        PLFunction {
            vertex_values: vec![c; g.vertex_count()],
            edges: g
                .edges()
                .iter()
                .map(|e| vec![(Q::zero(), c), (e.len, c)])
                .collect(),
        }
    }

    pub fn zero(g: &MetricGraph) -> Self {
        PLFunction::constant(g, Q::zero())
    }

    /// Builds a function from breakpoint lists; vertex values are read off
    /// the edges. On a graph without edges the function is `0`.
    pub fn from_breakpoints(g: &MetricGraph, edges: Vec<Vec<(Q, Q)>>) -> Result<Self, PLError> {
        if edges.len() != g.edge_count() {
            return Err(PLError::GraphMismatch);
        }
        let mut vertex_values: Vec<Option<Q>> = vec![None; g.vertex_count()];
        let mut out = Vec::with_capacity(edges.len());
        for (i, mut bps) in edges.into_iter().enumerate() {
            let e = g.edge(i);
            if bps.len() < 2
                || bps[0].0 != Q::zero()
                || bps[bps.len() - 1].0 != e.len
                || bps.windows(2).any(|w| w[0].0 >= w[1].0)
            {
                return Err(PLError::BadBreakpoints(i));
            }
            for w in bps.windows(2) {
                if !piece_slope(&w[0], &w[1]).is_integer() {
                    return Err(PLError::NonIntegralSlope {
                        edge: i,
                        at: format_q(&w[0].0),
                    });
                }
            }
            for (v, val) in [(e.u, bps[0].1), (e.v, bps[bps.len() - 1].1)] {
                match vertex_values[v] {
                    Some(x) if x != val => return Err(PLError::Discontinuous(v)),
                    _ => vertex_values[v] = Some(val),
                }
            }
            canonicalize(&mut bps);
            out.push(bps);
        }
        Ok(PLFunction {
            vertex_values: vertex_values
                .into_iter()
                .map(|v| v.unwrap_or_else(Q::zero))
                .collect(),
            edges: out,
        })
    }

    /// Builds a function from slopes: per edge, pieces `(length, slope)` read
    /// from the `u` end. Values are propagated from `root` with value `c`.
    pub fn from_edge_slopes(
        g: &MetricGraph,
        root: usize,
        c: Q,
        pieces: &[Vec<(Q, i64)>],
    ) -> Result<Self, PLError> {
        if pieces.len() != g.edge_count() {
            return Err(PLError::GraphMismatch);
        }
        for (i, ps) in pieces.iter().enumerate() {
            let total: Q = ps.iter().map(|(l, _)| *l).sum();
            if total != g.edge(i).len || ps.iter().any(|(l, _)| *l <= Q::zero()) {
                return Err(PLError::BadPieces(i));
            }
        }
        let rise = |i: usize| -> Q { pieces[i].iter().map(|(l, s)| *l * qi(*s)).sum() };
        let mut values: Vec<Option<Q>> = vec![None; g.vertex_count()];
        values[root] = Some(c);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for d in g.incident(x) {
                let y = g.head(d);
                let delta = rise(d.edge);
                let vy = if d.forward {
                    values[x].unwrap() + delta
                } else {
                    values[x].unwrap() - delta
                };
                if values[y].is_none() {
                    values[y] = Some(vy);
                    queue.push_back(y);
                }
            }
        }
        let mut edges = Vec::with_capacity(pieces.len());
        for (i, ps) in pieces.iter().enumerate() {
            let mut t = Q::zero();
            let mut val = values[g.edge(i).u].unwrap();
            let mut bps = vec![(t, val)];
            for (l, s) in ps {
                t += l;
                val += *l * qi(*s);
                bps.push((t, val));
            }
            edges.push(bps);
        }
        PLFunction::from_breakpoints(g, edges)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn breakpoints(&self, e: usize) -> &[(Q, Q)] {
        &self.edges[e]
    }

    pub fn vertex_value(&self, v: usize) -> Q {
        self.vertex_values[v]
    }

    /// Pieces of edge `e` as `(start, end, slope)`.
    pub fn pieces(&self, e: usize) -> Vec<(Q, Q, i64)> {
        self.edges[e]
            .windows(2)
            .map(|w| {
                let s = as_int(&piece_slope(&w[0], &w[1])).expect("integral slope");
                (w[0].0, w[1].0, s)
            })
            .collect()
    }

    pub fn eval(&self, p: &GraphPoint) -> Q {
        match p {
            GraphPoint::Vertex(v) => self.vertex_values[*v],
            GraphPoint::Edge { edge, offset } => eval_bps(&self.edges[*edge], offset),
        }
    }

    pub fn eval_on_edge(&self, e: usize, t: &Q) -> Q {
        eval_bps(&self.edges[e], t)
    }

    /// Slope of the piece of edge `e` just after offset `t` (forward) or
    /// just before it (backward), as an outgoing slope.
    pub fn slope_from(&self, e: usize, t: &Q, forward: bool) -> i64 {
        let bps = &self.edges[e];
        let k = if forward {
            bps.partition_point(|(p, _)| p <= t).clamp(1, bps.len() - 1)
        } else {
            bps.partition_point(|(p, _)| p < t).clamp(1, bps.len() - 1)
        };
        let s = as_int(&piece_slope(&bps[k - 1], &bps[k])).expect("integral slope");
        if forward {
            s
        } else {
            -s
        }
    }

    /// Outgoing slope at `p` along `d`.
    pub fn slope(&self, g: &MetricGraph, p: &GraphPoint, d: Direction) -> i64 {
        let t = match p {
            GraphPoint::Vertex(_) => {
                if d.forward {
                    Q::zero()
                } else {
                    g.edge(d.edge).len
                }
            }
            GraphPoint::Edge { offset, .. } => *offset,
        };
        self.slope_from(d.edge, &t, d.forward)
    }

    /// Outgoing slopes at `p`, in the order of `g.directions_at(p)`.
    pub fn slopes_at(&self, g: &MetricGraph, p: &GraphPoint) -> Vec<i64> {
        g.directions_at(p)
            .into_iter()
            .map(|d| self.slope(g, p, d))
            .collect()
    }

    pub fn divisor_of(&self, g: &MetricGraph) -> Divisor {
        let mut d = Divisor::new();
        for v in 0..g.vertex_count() {
            let s: i64 = self.slopes_at(g, &GraphPoint::Vertex(v)).iter().sum();
            d.add_point(GraphPoint::Vertex(v), -s);
        }
        for (e, bps) in self.edges.iter().enumerate() {
            for w in bps.windows(3) {
                let left = as_int(&piece_slope(&w[0], &w[1])).unwrap();
                let right = as_int(&piece_slope(&w[1], &w[2])).unwrap();
                d.add_point(
                    GraphPoint::Edge {
                        edge: e,
                        offset: w[1].0,
                    },
                    left - right,
                );
            }
        }
        d
    }

    /// Interior breakpoints as graph points.
    pub fn interior_breakpoints(&self) -> Vec<GraphPoint> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(e, bps)| {
                bps[1..bps.len() - 1].iter().map(move |(t, _)| GraphPoint::Edge {
                    edge: e,
                    offset: *t,
                })
            })
            .collect()
    }

    pub fn same_graph(&self, other: &PLFunction) -> bool {
        self.edges.len() == other.edges.len()
            && self.vertex_values.len() == other.vertex_values.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.last().unwrap().0 == b.last().unwrap().0)
    }

    fn check_same(&self, other: &PLFunction) -> Result<(), PLError> {
        if self.same_graph(other) {
            Ok(())
        } else {
            Err(PLError::GraphMismatch)
        }
    }

    fn map_values(&self, f: impl Fn(Q) -> Q) -> PLFunction {
        PLFunction {
            vertex_values: self.vertex_values.iter().map(|v| f(*v)).collect(),
            edges: self
                .edges
                .iter()
                .map(|bps| bps.iter().map(|(t, v)| (*t, f(*v))).collect())
                .collect(),
        }
    }

    pub fn add_constant(&self, c: Q) -> PLFunction {
        self.map_values(|v| v + c)
    }

    pub fn neg(&self) -> PLFunction {
        self.map_values(|v| -v)
    }

    pub fn scale(&self, k: i64) -> PLFunction {
        if k == 0 {
            return self.map_values(|_| Q::zero()).recanonicalized();
        }
        self.map_values(|v| v * qi(k))
    }

    /// Multiplication by a rational, when the slopes stay integral.
    pub fn scale_q(&self, c: Q) -> Option<PLFunction> {
        if c.is_zero() {
            return Some(self.scale(0));
        }
        let out = self.map_values(|v| v * c);
        out.edges
            .iter()
            .all(|bps| bps.windows(2).all(|w| piece_slope(&w[0], &w[1]).is_integer()))
            .then_some(out)
    }

    fn recanonicalized(mut self) -> PLFunction {
        for bps in &mut self.edges {
            canonicalize(bps);
        }
        self
    }

    fn combine(
        &self,
        other: &PLFunction,
        op: impl Fn(Q, Q) -> Q,
    ) -> Result<PLFunction, PLError> {
        self.check_same(other)?;
        let edges = self
            .edges
            .iter()
            .zip(&other.edges)
            .map(|(a, b)| {
                let pos = merged_positions(a, b);
                let va = eval_sorted(a, &pos);
                let vb = eval_sorted(b, &pos);
                let mut bps: Vec<(Q, Q)> = pos
                    .into_iter()
                    .zip(va.into_iter().zip(vb).map(|(x, y)| op(x, y)))
                    .collect();
                canonicalize(&mut bps);
                bps
            })
            .collect();
        Ok(PLFunction {
            vertex_values: self
                .vertex_values
                .iter()
                .zip(&other.vertex_values)
                .map(|(x, y)| op(*x, *y))
                .collect(),
            edges,
        })
    }

    pub fn add(&self, other: &PLFunction) -> Result<PLFunction, PLError> {
        self.combine(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &PLFunction) -> Result<PLFunction, PLError> {
        self.combine(other, |x, y| x - y)
    }

    /// Pointwise minimum, with exact crossing points.
    pub fn tropical_min(&self, other: &PLFunction) -> Result<PLFunction, PLError> {
        self.extremum(other, false)
    }

    pub fn tropical_max(&self, other: &PLFunction) -> Result<PLFunction, PLError> {
        self.extremum(other, true)
    }

    fn extremum(&self, other: &PLFunction, max: bool) -> Result<PLFunction, PLError> {
        self.check_same(other)?;
        let pick = |x: Q, y: Q| if (x < y) != max { x } else { y };
        let edges = self
            .edges
            .iter()
            .zip(&other.edges)
            .map(|(a, b)| {
                let pos = merged_positions(a, b);
                let va = eval_sorted(a, &pos);
                let vb = eval_sorted(b, &pos);
                let mut bps = Vec::with_capacity(pos.len() + 4);
                for k in 0..pos.len() {
                    bps.push((pos[k], pick(va[k], vb[k])));
                    if k + 1 < pos.len() {
                        let d0 = va[k] - vb[k];
                        let d1 = va[k + 1] - vb[k + 1];
                        if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                            let t = pos[k] + (pos[k + 1] - pos[k]) * d0 / (d0 - d1);
                            let slope = (va[k + 1] - va[k]) / (pos[k + 1] - pos[k]);
                            bps.push((t, va[k] + slope * (t - pos[k])));
                        }
                    }
                }
                canonicalize(&mut bps);
                bps
            })
            .collect();
        Ok(PLFunction {
            vertex_values: self
                .vertex_values
                .iter()
                .zip(&other.vertex_values)
                .map(|(x, y)| pick(*x, *y))
                .collect(),
            edges,
        })
    }

    /// Minimum of a nonempty family.
    pub fn min_all<'a>(fs: impl IntoIterator<Item = &'a PLFunction>) -> Result<PLFunction, PLError> {
        let mut it = fs.into_iter();
        let first = it.next().expect("nonempty family").clone();
        it.try_fold(first, |acc, f| acc.tropical_min(f))
    }

    pub fn is_constant(&self) -> bool {
        let c = self.vertex_values[0];
        self.vertex_values.iter().all(|v| *v == c)
            && self.edges.iter().all(|bps| bps.len() == 2 && bps[0].1 == c)
    }

    /// Attained at a vertex or an interior breakpoint.
    pub fn max_value(&self) -> Q {
        self.all_values().max().expect("nonempty")
    }

    pub fn min_value(&self) -> Q {
        self.all_values().min().expect("nonempty")
    }

    fn all_values(&self) -> impl Iterator<Item = Q> + '_ {
        self.vertex_values
            .iter()
            .copied()
            .chain(self.edges.iter().flat_map(|bps| bps.iter().map(|(_, v)| *v)))
    }

    pub fn max_abs_slope(&self) -> i64 {
        (0..self.edges.len())
            .flat_map(|e| self.pieces(e))
            .map(|(_, _, s)| s.abs())
            .max()
            .unwrap_or(0)
    }

    /// Raw per-edge breakpoints, for serialization.
    pub fn edge_breakpoints(&self) -> &[Vec<(Q, Q)>] {
        &self.edges
    }

    pub fn vertex_values(&self) -> &[Q] {
        &self.vertex_values
    }

    /// Lower envelope of affine functions `t ↦ c + s·t` on edge `e`.
    pub fn envelope_on_edge(len: Q, lines: &[(Q, i64)]) -> Vec<(Q, Q)> {
        let mut pos: BTreeSet<Q> = [Q::zero(), len].into_iter().collect();
        for (i, (c1, s1)) in lines.iter().enumerate() {
            for (c2, s2) in &lines[i + 1..] {
                if s1 != s2 {
                    let t = (c2 - c1) / qi(s1 - s2);
                    if t > Q::zero() && t < len {
                        pos.insert(t);
                    }
                }
            }
        }
        let mut bps: Vec<(Q, Q)> = pos
            .into_iter()
            .map(|t| {
                let v = lines.iter().map(|(c, s)| c + qi(*s) * t).min().unwrap();
                (t, v)
            })
            .collect();
        canonicalize(&mut bps);
        bps
    }

    /// `x ↦ d(p, x)`.
    pub fn distance_from(g: &MetricGraph, p: &GraphPoint) -> PLFunction {
        let dv = g.vertex_distances(p);
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let lines = [(dv[e.u], 1), (dv[e.v] + e.len, -1)];
                match p {
                    GraphPoint::Edge { edge, offset } if *edge == i => {
                        // |t - offset| is not a minimum of lines; split at p.
                        let o = *offset;
                        let left = [lines[0], lines[1], (o, -1)];
                        let right: Vec<(Q, i64)> = lines
                            .iter()
                            .map(|(c, s)| (c + qi(*s) * o, *s))
                            .chain([(Q::zero(), 1)])
                            .collect();
                        let mut bps = PLFunction::envelope_on_edge(o, &left);
                        bps.pop();
                        bps.extend(
                            PLFunction::envelope_on_edge(e.len - o, &right)
                                .into_iter()
                                .map(|(t, v)| (t + o, v)),
                        );
                        canonicalize(&mut bps);
                        bps
                    }
                    _ => PLFunction::envelope_on_edge(e.len, &lines),
                }
            })
            .collect();
        PLFunction::from_breakpoints(g, edges).expect("distance functions are valid")
    }

    /// Union of the breakpoint offsets of `fs` on edge `e`.
    pub fn common_positions(fs: &[&PLFunction], e: usize) -> Vec<Q> {
        let set: BTreeSet<Q> = fs
            .iter()
            .flat_map(|f| f.edges[e].iter().map(|(t, _)| *t))
            .collect();
        set.into_iter().collect()
    }
}

impl Refinement {
    pub fn function_to_refined(&self, f: &PLFunction) -> PLFunction {
        let mut edges = vec![Vec::new(); self.refined.edge_count()];
        for (oe, ps) in self.pieces.iter().enumerate() {
            let bps = f.breakpoints(oe);
            for (k, &(re, start)) in ps.iter().enumerate() {
                let end = ps
                    .get(k + 1)
                    .map_or(self.original.edge(oe).len, |(_, s)| *s);
                let mut local = vec![(Q::zero(), eval_bps(bps, &start))];
                local.extend(
                    bps.iter()
                        .filter(|(t, _)| *t > start && *t < end)
                        .map(|(t, v)| (t - start, *v)),
                );
                local.push((end - start, eval_bps(bps, &end)));
                edges[re] = local;
            }
        }
        PLFunction::from_breakpoints(&self.refined, edges).expect("restriction is valid")
    }

    pub fn function_to_original(&self, f: &PLFunction) -> PLFunction {
        let edges = self
            .pieces
            .iter()
            .map(|ps| {
                let mut bps: Vec<(Q, Q)> = Vec::new();
                for (k, &(re, start)) in ps.iter().enumerate() {
                    for (t, v) in &f.breakpoints(re)[usize::from(k > 0)..] {
                        bps.push((start + t, *v));
                    }
                }
                bps
            })
            .collect();
        PLFunction::from_breakpoints(&self.original, edges).expect("gluing is valid")
    }

    pub fn divisor_to_refined(&self, d: &Divisor) -> Divisor {
        d.map_points(|p| self.to_refined(p))
    }

    pub fn divisor_to_original(&self, d: &Divisor) -> Divisor {
        d.map_points(|p| self.to_original(p))
    }
}
