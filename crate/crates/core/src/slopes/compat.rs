use crate::hypercube::CubePoint;
use crate::metricgraph::{Divisor, GraphPoint, PLFunction};

use super::structure::SlopeStructure;

/// Why a function fails to be compatible at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incompatibility {
    /// Outgoing slope along a direction is not an allowed slope.
    SlopeNotAllowed { point: GraphPoint, slope: i64 },
    /// The slope-index vector at the point is not a jump of its rank function.
    NotAJump { point: GraphPoint, indices: CubePoint },
}

/// Slope-index vector of `f` at `p`, in the incidence order of the model.
pub fn index_vector(s: &SlopeStructure, f: &PLFunction, p: &GraphPoint) -> Result<CubePoint, Incompatibility> {
    let g = s.model();
    g.directions_at(p)
        .into_iter()
        .map(|d| {
            let slope = f.slope(g, p, d);
            s.slopes_along(d)
                .iter()
                .position(|&x| x == slope)
                .ok_or(Incompatibility::SlopeNotAllowed {
                    point: p.clone(),
                    slope,
                })
        })
        .collect()
}

/// Points where compatibility has to be checked: vertices and interior
/// breakpoints of `f`. Elsewhere the index vector is `(i, r - i)`.
fn critical_points(s: &SlopeStructure, f: &PLFunction) -> Vec<GraphPoint> {
    let mut pts: Vec<GraphPoint> = (0..s.model().vertex_count()).map(GraphPoint::Vertex).collect();
    pts.extend(f.interior_breakpoints());
    pts
}

pub fn check_compatible(s: &SlopeStructure, f: &PLFunction) -> Result<(), Incompatibility> {
    let g = s.model();
    // Slopes on every piece, including pieces without breakpoints.
    for e in 0..g.edge_count() {
        let allowed = &s.edge_slopes()[e];
        for (a, _, slope) in f.pieces(e) {
            if !allowed.contains(&slope) {
                return Err(Incompatibility::SlopeNotAllowed {
                    point: g.point_on_edge(e, a).expect("piece start on edge"),
                    slope,
                });
            }
        }
    }
    for p in critical_points(s, f) {
        let idx = index_vector(s, f, &p)?;
        if !s.rank_at(&p).is_jump(&idx) {
            return Err(Incompatibility::NotAJump { point: p, indices: idx });
        }
    }
    Ok(())
}

pub fn is_compatible(s: &SlopeStructure, f: &PLFunction) -> bool {
    check_compatible(s, f).is_ok()
}

/// Membership in `Rat(D, S)`: compatible and `D + div(f) ≥ 0`.
pub fn in_rat_d_s(s: &SlopeStructure, d: &Divisor, f: &PLFunction) -> bool {
    is_compatible(s, f) && (d + &f.divisor_of(s.model())).is_effective()
}

/// Conditions (1) and (2) of the rank property for a single `E`: the rank of
/// the index vector is at least `E(x)` everywhere, and `D + div(f) - E ≥ 0`.
/// Compatibility is checked too.
pub fn satisfies_rank_condition(s: &SlopeStructure, d: &Divisor, e: &Divisor, f: &PLFunction) -> bool {
    if !is_compatible(s, f) {
        return false;
    }
    if !(&(d + &f.divisor_of(s.model())) - e).is_effective() {
        return false;
    }
    let mut pts = critical_points(s, f);
    pts.extend(e.support().cloned());
    pts.into_iter().all(|p| match index_vector(s, f, &p) {
        Ok(idx) => s.rank_at(&p).value(&idx) >= e.get(&p),
        Err(_) => false,
    })
}
