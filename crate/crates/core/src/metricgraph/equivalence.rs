//! Linear equivalence of divisors.
//!
//! After subdividing at the support of `D1 − D2`, a function with
//! `div(f) = D1 − D2` is affine on every edge of the model, so its vertex
//! values solve the weighted Laplacian system `Lφ = D1 − D2`. That solution is
//! unique up to a constant, and `D1 ~ D2` exactly when its edge slopes are
//! integers.

use num_traits::Zero;

use super::divisor::Divisor;
use super::graph::{refine_model, GraphPoint, MetricGraph};
use super::plfunction::PLFunction;
use super::rational::{qi, Q};

/// Solves `a x = b` exactly; `None` if `a` is singular.
pub fn solve_linear(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for j in col..n {
            a[col][j] /= p;
        }
        b[col] /= p;
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col];
                for j in col..n {
                    let t = a[col][j];
                    a[i][j] -= f * t;
                }
                let t = b[col];
                b[i] -= f * t;
            }
        }
    }
    Some(b)
}

/// A function `f` with `D1 = D2 + div(f)`, if any.
pub fn linear_equivalent(g: &MetricGraph, d1: &Divisor, d2: &Divisor) -> Option<PLFunction> {
    if d1.degree() != d2.degree() {
        return None;
    }
    let diff = d1 - d2;
    let support: Vec<GraphPoint> = diff.support().cloned().collect();
    let refinement = refine_model(g, &support);
    let m = &refinement.refined;
    let n = m.vertex_count();
    let mut lap = vec![vec![Q::zero(); n]; n];
    for e in m.edges() {
        if e.u == e.v {
            continue;
        }
        let w = e.len.recip();
        lap[e.u][e.u] += w;
        lap[e.v][e.v] += w;
        lap[e.u][e.v] -= w;
        lap[e.v][e.u] -= w;
    }
    let rhs: Vec<Q> = (0..n)
        .map(|v| qi(diff.get(&refinement.vertex_origin[v])))
        .collect();
    let mut phi = vec![Q::zero(); n];
    if n > 1 {
        let a: Vec<Vec<Q>> = lap[1..].iter().map(|row| row[1..].to_vec()).collect();
        let sol = solve_linear(a, rhs[1..].to_vec())?;
        phi[1..].copy_from_slice(&sol);
    }
    let mut edges = Vec::with_capacity(m.edge_count());
    for e in m.edges() {
        let slope = (phi[e.v] - phi[e.u]) / e.len;
        if !slope.is_integer() {
            return None;
        }
        edges.push(vec![(Q::zero(), phi[e.u]), (e.len, phi[e.v])]);
    }
    let f = PLFunction::from_breakpoints(m, edges).ok()?;
    let f = refinement.function_to_original(&f);
    debug_assert_eq!(&f.divisor_of(g), &diff);
    Some(f)
}
