use num_traits::{Signed, Zero};

use crate::metricgraph::rational::format_q;
use crate::metricgraph::{Direction, Divisor, GraphPoint, MetricGraph, PLFunction, Q};

use super::{SeriesError, TropModule};

/// A piece of a closed region of the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutPiece {
    Vertex(usize),
    /// An isolated interior point.
    Point { edge: usize, offset: Q },
    /// A closed sub-segment `[from, to]` of an edge, `from < to`.
    Segment { edge: usize, from: Q, to: Q },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPoint {
    pub point: GraphPoint,
    /// Directions leaving the region, with the outgoing slope along each.
    pub out: Vec<(Direction, i64)>,
}

/// A compact region together with its boundary and outgoing branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub region: Vec<CutPiece>,
    pub boundary: Vec<BoundaryPoint>,
    /// Number of connected components of the region.
    pub components: usize,
}

impl Cut {
    pub fn contains(&self, p: &GraphPoint) -> bool {
        match p {
            GraphPoint::Vertex(v) => self.region.iter().any(|c| match c {
                CutPiece::Vertex(w) => w == v,
                _ => false,
            }),
            GraphPoint::Edge { edge, offset } => self.region.iter().any(|c| match c {
                CutPiece::Point { edge: e, offset: t } => e == edge && t == offset,
                CutPiece::Segment { edge: e, from, to } => e == edge && from <= offset && offset <= to,
                CutPiece::Vertex(_) => false,
            }),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// The set where `f` attains its minimum, with its boundary data.
pub fn min_locus(g: &MetricGraph, f: &PLFunction) -> Cut {
    let m = f.min_value();
    let n = g.vertex_count();
    let mut region: Vec<CutPiece> = (0..n)
        .filter(|&v| f.vertex_value(v) == m)
        .map(CutPiece::Vertex)
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut candidates: Vec<GraphPoint> = (0..n).filter(|&v| f.vertex_value(v) == m).map(GraphPoint::Vertex).collect();

    for (e, edge) in g.edges().iter().enumerate() {
        let bps = f.breakpoints(e);
        let mut i = 0;
        while i < bps.len() {
            if bps[i].1 != m {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < bps.len() && bps[j + 1].1 == m {
                j += 1;
            }
            let (a, b) = (bps[i].0, bps[j].0);
            let id = parent.len();
            parent.push(id);
            if a.is_zero() {
                let r = find(&mut parent, edge.u);
                parent[r] = id;
            }
            if b == edge.len {
                let r = find(&mut parent, edge.v);
                let s = find(&mut parent, id);
                if r != s {
                    parent[r] = s;
                }
            }
            if a < b {
                region.push(CutPiece::Segment { edge: e, from: a, to: b });
            } else if !a.is_zero() && a != edge.len {
                region.push(CutPiece::Point { edge: e, offset: a });
            }
            for t in [a, b] {
                if t > Q::zero() && t < edge.len {
                    candidates.push(GraphPoint::Edge { edge: e, offset: t });
                }
            }
            i = j + 1;
        }
    }
    candidates.dedup();

    let in_region: Vec<usize> = (0..n)
        .filter(|&v| f.vertex_value(v) == m)
        .chain(n..parent.len())
        .collect();
    let mut roots: Vec<usize> = in_region.iter().map(|&x| find(&mut parent, x)).collect();
    roots.sort_unstable();
    roots.dedup();

    let boundary = candidates
        .into_iter()
        .filter_map(|p| {
            let out: Vec<(Direction, i64)> = g
                .directions_at(&p)
                .into_iter()
                .map(|d| (d, f.slope(g, &p, d)))
                .filter(|(_, s)| *s > 0)
                .collect();
            (!out.is_empty()).then_some(BoundaryPoint { point: p, out })
        })
        .collect();
    Cut {
        region,
        boundary,
        components: roots.len(),
    }
}

fn critical_values(f: &PLFunction) -> impl Iterator<Item = Q> + '_ {
    f.vertex_values()
        .iter()
        .copied()
        .chain(f.edge_breakpoints().iter().flat_map(|b| b.iter().map(|(_, v)| *v)))
}

/// Searches the generators for an unsaturated cut with respect to `v`: the
/// minimum locus `X` of a generator `h` with `h(v) > min h`, together with
/// the function that is `-ε` on `X`, follows the slopes of `h` out of `X`,
/// and vanishes elsewhere. A cut is returned only when this function passes
/// membership, so for an effective module the answer is `None` exactly when
/// `D` is `v`-reduced.
pub fn find_unsaturated_cut(m: &TropModule, v: &GraphPoint) -> Result<Option<(Cut, PLFunction)>, SeriesError> {
    let g = m.graph();
    let zero = PLFunction::zero(g);
    for h in m.generators() {
        let low = h.min_value();
        if h.eval(v) <= low {
            continue;
        }
        let f = h.add_constant(-low);
        let eps = critical_values(&f).filter(|x| x.is_positive()).min().expect("f(v) > 0") / Q::from(2);
        let w = f.add_constant(-eps).tropical_min(&zero)?;
        if m.membership(&w)?.member {
            return Ok(Some((min_locus(g, &f), w)));
        }
    }
    Ok(None)
}

/// One step of the explicit local formula for reduced divisors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStep {
    pub point: GraphPoint,
    pub divisor: Divisor,
    /// The union of the unsaturated cuts with respect to the new point.
    pub cut: Cut,
    pub epsilon: Q,
}

fn start_offset(g: &MetricGraph, p: &GraphPoint, d: Direction) -> Q {
    match p {
        GraphPoint::Vertex(_) => {
            if d.forward {
                Q::zero()
            } else {
                g.edge(d.edge).len
            }
        }
        GraphPoint::Edge { offset, .. } => *offset,
    }
}

/// `D_u` for `u` at distance `delta` from `v` along `dir`, computed as
/// `D + div(f^u)` after replacing `M` by `M(-f_v)`. The cut `X` is the union
/// of the zero loci of the normalized generators whose slope along `dir`
/// is the top allowed slope `s_r`, and `f^u = min(0, H - s_r·δ)` where `H` is
/// the minimum of those generators.
pub fn local_reduced_step(
    m: &TropModule,
    v: &GraphPoint,
    dir: Direction,
    delta: Q,
) -> Result<LocalStep, SeriesError> {
    let g = m.graph();
    let fv = m.f_v(v);
    let d0 = m.divisor() + &fv.divisor_of(g);
    let normalized: Vec<PLFunction> = m
        .generators()
        .iter()
        .map(|h| h.add_constant(-h.eval(v)).sub(&fv))
        .collect::<Result<_, _>>()?;
    let top = *m.structure().slopes_along(dir).last().expect("nonempty list") - fv.slope(g, v, dir);

    let t0 = start_offset(g, v, dir);
    let len = g.edge(dir.edge).len;
    let ahead = |t: &Q| if dir.forward { *t > t0 } else { *t < t0 };
    let dist = |t: &Q| (*t - t0).abs();
    let mut radius = if dir.forward { len - t0 } else { t0 };
    for f in &normalized {
        for (t, _) in f.breakpoints(dir.edge) {
            if ahead(t) {
                radius = radius.min(dist(t));
            }
        }
    }
    for (p, _) in d0.iter() {
        if let Some(t) = g.offset_on(p, dir.edge) {
            if ahead(&t) {
                radius = radius.min(dist(&t));
            }
        }
    }

    let zero = PLFunction::zero(g);
    let (cut, fu, eps) = if top <= 0 {
        (min_locus(g, &zero), zero.clone(), Q::zero())
    } else {
        let chosen: Vec<&PLFunction> = normalized
            .iter()
            .filter(|f| f.slope(g, v, dir) == top)
            .collect();
        if chosen.is_empty() {
            return Err(SeriesError::NoTopSlope);
        }
        let h = PLFunction::min_all(chosen.iter().copied())?;
        if let Some(c) = critical_values(&h).filter(|x| x.is_positive()).min() {
            radius = radius.min(c / Q::from(top as i128));
        }
        let eps = Q::from(top as i128) * delta;
        (min_locus(g, &h), h.add_constant(-eps).tropical_min(&zero)?, eps)
    };
    if delta <= Q::zero() || delta >= radius {
        return Err(SeriesError::RadiusTooLarge {
            delta: format_q(&delta),
            radius: format_q(&radius),
        });
    }
    let point = g.walk(v, dir, delta).expect("inside the radius");
    Ok(LocalStep {
        point,
        divisor: &d0 + &fu.divisor_of(g),
        cut,
        epsilon: eps,
    })
}
