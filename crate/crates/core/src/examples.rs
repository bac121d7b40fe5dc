//! Worked examples used by tests, fixtures and the acceptance suite.

use crate::hypercube::RankFunction;
use crate::metricgraph::{q, qi, Direction, Divisor, GraphPoint, MetricGraph, Refinement};
use crate::slopes::SlopeStructure;

/// A divisor with a slope structure, on the simple model of `refinement.original`.
#[derive(Debug, Clone)]
pub struct Example {
    pub name: &'static str,
    pub structure: SlopeStructure,
    pub refinement: Refinement,
    pub divisor: Divisor,
}

/// Rank function on `[2]^2` with values `((2,1,0),(1,1,0),(0,0,0))`.
pub fn first_grd_matrix() -> RankFunction {
    RankFunction::new(2, 2, vec![2, 1, 0, 1, 1, 0, 0, 0, 0]).expect("valid matrix")
}

fn fwd(edge: usize, l: &[i64]) -> (Direction, Vec<i64>) {
    (Direction { edge, forward: true }, l.to_vec())
}

fn build(
    name: &'static str,
    g: MetricGraph,
    r: usize,
    lists: Vec<(Direction, Vec<i64>)>,
    ranks: Vec<Option<RankFunction>>,
    d: &[(usize, i64)],
) -> Example {
    let (structure, refinement) = SlopeStructure::build(&g, r, &lists, ranks).expect("example is valid");
    let divisor = Divisor::from_pairs(d.iter().map(|&(v, c)| (GraphPoint::Vertex(v), c)));
    Example {
        name,
        structure,
        refinement,
        divisor,
    }
}

/// Two vertices joined by two edges of length one, slopes `0 < 1 < 2` from
/// `u`, the matrix above at both vertices, and `D = 4(u)`.
pub fn first_grd() -> Example {
    let g = MetricGraph::from_named(&["u", "v"], &[("u", "v", qi(1)), ("u", "v", qi(1))]).unwrap();
    build(
        "first_grd",
        g,
        2,
        vec![fwd(0, &[0, 1, 2]), fwd(1, &[0, 1, 2])],
        vec![Some(first_grd_matrix()), Some(first_grd_matrix())],
        &[(0, 4)],
    )
}

/// The same graph with slopes `-1 < 0 < 1` and `D = 2(u) + 2(v)`.
pub fn first_grd_symmetric() -> Example {
    let g = MetricGraph::from_named(&["u", "v"], &[("u", "v", qi(1)), ("u", "v", qi(1))]).unwrap();
    build(
        "first_grd_symmetric",
        g,
        2,
        vec![fwd(0, &[-1, 0, 1]), fwd(1, &[-1, 0, 1])],
        vec![Some(first_grd_matrix()), Some(first_grd_matrix())],
        &[(0, 2), (1, 2)],
    )
}

fn path(len: i128, den: i128) -> MetricGraph {
    MetricGraph::from_named(&["u", "v", "w"], &[("u", "v", q(len, den)), ("v", "w", q(len, den))]).unwrap()
}

/// Path `u - v - w` with unit edges, slopes `-2 < 0 < 2` forward,
/// `D = 2(u) + 4(v) + 2(w)`, rank two.
pub fn second_grd() -> Example {
    build(
        "second_grd",
        path(1, 1),
        2,
        vec![fwd(0, &[-2, 0, 2]), fwd(1, &[-2, 0, 2])],
        vec![None, Some(first_grd_matrix()), None],
        &[(0, 2), (1, 4), (2, 2)],
    )
}

/// Rank function on `[1]^2` with values `((1,0),(0,0))`.
pub fn rank_one_matrix() -> RankFunction {
    RankFunction::new(2, 1, vec![1, 0, 0, 0]).expect("valid matrix")
}

/// The rank-one sub-structure with slopes `0 < 2` and `-2 < 0`, `D` unchanged.
pub fn second_grd_sub_d8() -> Example {
    build(
        "second_grd_sub_d8",
        path(1, 1),
        1,
        vec![fwd(0, &[0, 2]), fwd(1, &[-2, 0])],
        vec![None, Some(rank_one_matrix()), None],
        &[(0, 2), (1, 4), (2, 2)],
    )
}

/// The halved sub-structure: slopes `0 < 1` and `-1 < 0`, `D = (u) + 2(v) + (w)`.
pub fn second_grd_sub() -> Example {
    build(
        "second_grd_sub",
        path(1, 1),
        1,
        vec![fwd(0, &[0, 1]), fwd(1, &[-1, 0])],
        vec![None, Some(rank_one_matrix()), None],
        &[(0, 1), (1, 2), (2, 1)],
    )
}

/// The halved sub-structure on edges of length `3/2`, as drawn in the
/// counterexample to the existence of `f_x` without closedness.
pub fn finiteness_counterexample() -> Example {
    build(
        "finiteness_counterexample",
        path(3, 2),
        1,
        vec![fwd(0, &[0, 1]), fwd(1, &[-1, 0])],
        vec![None, Some(rank_one_matrix()), None],
        &[(0, 1), (1, 2), (2, 1)],
    )
}
