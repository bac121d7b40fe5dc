//! Ranked hypercubes `[r]^δ`: rank functions, jumps and the partition of
//! top jumps.
//!
//! Points are `Vec<usize>` with 0-based axes. Tables are stored densely in
//! row-major order, the first coordinate being the most significant.

use std::collections::BTreeSet;

use thiserror::Error;

pub mod flags;

pub type CubePoint = Vec<usize>;

/// Default bound on `(r+1)^δ`.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hypercube of dimension 0")]
    ZeroDimension,
    #[error("hypercube has {cells} cells, above the cap {cap}")]
    TooLarge { cells: u128, cap: usize },
    #[error("value {value} at {point:?} lies outside [-1, {r}]")]
    OutOfRange { point: CubePoint, value: i64, r: usize },
    #[error("axis normalization fails at {point:?}: value {value}, expected {expected}")]
    AxisNormalization {
        point: CubePoint,
        value: i64,
        expected: i64,
    },
    #[error("not monotone: rho({lower:?}) = {lower_value} < rho({upper:?}) = {upper_value}")]
    NotMonotone {
        lower: CubePoint,
        upper: CubePoint,
        lower_value: i64,
        upper_value: i64,
    },
    #[error("supermodularity fails for {a:?} and {b:?}")]
    NotSupermodular { a: CubePoint, b: CubePoint },
    #[error("top jumps do not partition the axes: {0}")]
    NotPartition(String),
}

/// Shape of the hypercube `[r]^δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    pub delta: usize,
    pub r: usize,
}

impl Cube {
    pub fn new(delta: usize, r: usize) -> Self {
        Cube { delta, r }
    }

    pub fn cell_count(&self) -> u128 {
        (self.r as u128 + 1).saturating_pow(self.delta as u32)
    }

    /// Number of cells; only meaningful once the cap has been checked.
    pub fn len(&self) -> usize {
        self.cell_count() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        (self.r + 1).pow((self.delta - 1 - axis) as u32)
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        p.len() == self.delta && p.iter().all(|&c| c <= self.r)
    }

    pub fn index(&self, p: &[usize]) -> usize {
        debug_assert!(self.contains(p), "{p:?} outside {self:?}");
        p.iter().fold(0, |acc, &c| acc * (self.r + 1) + c)
    }

    pub fn point(&self, mut idx: usize) -> CubePoint {
        let mut p = vec![0; self.delta];
        for k in (0..self.delta).rev() {
            p[k] = idx % (self.r + 1);
            idx /= self.r + 1;
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = CubePoint> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn origin(&self) -> CubePoint {
        vec![0; self.delta]
    }

    pub fn top(&self) -> CubePoint {
        vec![self.r; self.delta]
    }

    fn check_cap(&self, cap: usize) -> Result<(), RankError> {
        if self.delta == 0 {
            return Err(RankError::ZeroDimension);
        }
        let cells = self.cell_count();
        if cells > cap as u128 {
            return Err(RankError::TooLarge { cells, cap });
        }
        Ok(())
    }
}

pub fn meet(a: &[usize], b: &[usize]) -> Result<CubePoint, RankError> {
    if a.len() != b.len() {
        return Err(RankError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| *x.min(y)).collect())
}

pub fn join(a: &[usize], b: &[usize]) -> Result<CubePoint, RankError> {
    if a.len() != b.len() {
        return Err(RankError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| *x.max(y)).collect())
}

/// Coordinate-wise `a <= b`.
pub fn leq(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

fn unit_step(p: &[usize], axis: usize) -> CubePoint {
    let mut q = p.to_vec();
    q[axis] += 1;
    q
}

/// A validated rank function on `[r]^δ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankFunction {
    cube: Cube,
    values: Vec<i64>,
}

impl RankFunction {
    /// Validates `values` against the rank-function axioms, with the default cap.
    pub fn new(delta: usize, r: usize, values: Vec<i64>) -> Result<Self, RankError> {
        validate_rank_function_with_cap(values, delta, r, DEFAULT_CELL_CAP)
    }

    pub fn standard(delta: usize, r: usize) -> Self {
        standard_rank_function(delta, r)
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn delta(&self) -> usize {
        self.cube.delta
    }

    pub fn r(&self) -> usize {
        self.cube.r
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value(&self, p: &[usize]) -> i64 {
        self.values[self.cube.index(p)]
    }

    /// `ρ(a) ≥ 0` and `ρ` drops by one in every in-cube direction.
    pub fn is_jump(&self, p: &[usize]) -> bool {
        let v = self.value(p);
        if v < 0 {
            return false;
        }
        (0..self.delta())
            .filter(|&i| p[i] < self.r())
            .all(|i| self.value(&unit_step(p, i)) == v - 1)
    }

    pub fn jumps(&self) -> JumpSet {
        JumpSet {
            points: self.cube.points().filter(|p| self.is_jump(p)).collect(),
        }
    }

    /// Supports of the non-zero jumps of rank `r − 1`; a partition of the axes.
    pub fn partition_top_jumps(&self) -> Result<Vec<Vec<usize>>, RankError> {
        let r = self.r() as i64;
        if r < 1 {
            return Err(RankError::NotPartition("width 0 has no top jumps".into()));
        }
        let mut blocks: Vec<Vec<usize>> = self
            .jumps()
            .iter()
            .filter(|a| a.iter().any(|&c| c > 0) && self.value(a) == r - 1)
            .map(|a| (0..a.len()).filter(|&i| a[i] > 0).collect())
            .collect();
        blocks.sort();
        let mut seen = vec![false; self.delta()];
        for b in &blocks {
            for &i in b {
                if seen[i] {
                    return Err(RankError::NotPartition(format!("axis {i} covered twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(RankError::NotPartition(format!("axis {i} not covered")));
        }
        Ok(blocks)
    }

    /// The unique jump `a ≥ p` with `ρ(a) = ρ(p)`, for `ρ(p) ≥ 0`.
    pub fn jump_above(&self, p: &[usize]) -> Option<CubePoint> {
        let v = self.value(p);
        if v < 0 {
            return None;
        }
        let mut a = p.to_vec();
        'walk: loop {
            for i in 0..self.delta() {
                if a[i] < self.r() && self.value(&unit_step(&a, i)) == v {
                    a[i] += 1;
                    continue 'walk;
                }
            }
            return Some(a);
        }
    }

    /// All-pairs supermodularity check, returning a violating pair.
    pub fn supermodularity_violation(&self) -> Option<(CubePoint, CubePoint)> {
        all_pairs_violation(self.cube, &self.values)
    }
}

/// Finite set of jumps, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpSet {
    points: Vec<CubePoint>,
}

impl JumpSet {
    pub fn iter(&self) -> impl Iterator<Item = &CubePoint> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        self.points
            .binary_search_by(|q| q.as_slice().cmp(p))
            .is_ok()
    }

    pub fn as_set(&self) -> BTreeSet<CubePoint> {
        self.points.iter().cloned().collect()
    }

    pub fn into_vec(self) -> Vec<CubePoint> {
        self.points
    }

    pub fn is_meet_closed(&self) -> bool {
        self.points.iter().all(|a| {
            self.points
                .iter()
                .all(|b| self.contains(&meet(a, b).expect("same dimension")))
        })
    }
}

/// Checks properties (1)–(3) in the order range, axis normalization,
/// monotonicity.
pub fn check_basic_axioms(cube: Cube, values: &[i64]) -> Result<(), RankError> {
    let r = cube.r as i64;
    for (idx, &v) in values.iter().enumerate() {
        if v < -1 || v > r {
            return Err(RankError::OutOfRange {
                point: cube.point(idx),
                value: v,
                r: cube.r,
            });
        }
    }
    for axis in 0..cube.delta {
        for t in 0..=cube.r {
            let mut p = cube.origin();
            p[axis] = t;
            let v = values[cube.index(&p)];
            if v != r - t as i64 {
                return Err(RankError::AxisNormalization {
                    point: p,
                    value: v,
                    expected: r - t as i64,
                });
            }
        }
    }
    for idx in 0..values.len() {
        let p = cube.point(idx);
        for i in 0..cube.delta {
            if p[i] < cube.r {
                let q = unit_step(&p, i);
                let (lo, hi) = (values[idx], values[cube.index(&q)]);
                if hi > lo {
                    return Err(RankError::NotMonotone {
                        lower: p,
                        upper: q,
                        lower_value: lo,
                        upper_value: hi,
                    });
                }
            }
        }
    }
    Ok(())
}

/// The simplified local inequality
/// `ρ(x) − ρ(x+e_i) ≥ ρ(x+e_j) − ρ(x+e_i+e_j)`, returning the first failing
/// pair `(x+e_i, x+e_j)`.
fn local_violation(cube: Cube, values: &[i64]) -> Option<(CubePoint, CubePoint)> {
    for idx in 0..values.len() {
        let x = cube.point(idx);
        for i in 0..cube.delta {
            if x[i] == cube.r {
                continue;
            }
            for j in (i + 1)..cube.delta {
                if x[j] == cube.r {
                    continue;
                }
                let xi = idx + cube.stride(i);
                let xj = idx + cube.stride(j);
                let xij = xi + cube.stride(j);
                if values[idx] - values[xi] < values[xj] - values[xij] {
                    return Some((cube.point(xi), cube.point(xj)));
                }
            }
        }
    }
    None
}

fn all_pairs_violation(cube: Cube, values: &[i64]) -> Option<(CubePoint, CubePoint)> {
    let n = values.len();
    for ia in 0..n {
        let a = cube.point(ia);
        for ib in (ia + 1)..n {
            let b = cube.point(ib);
            let lo = cube.index(&meet(&a, &b).ok()?);
            let hi = cube.index(&join(&a, &b).ok()?);
            if values[ia] + values[ib] > values[lo] + values[hi] {
                return Some((a, b));
            }
        }
    }
    None
}

/// Whether the local (dimension one, distance one) inequality holds
/// everywhere. Assumes `values` covers the cube.
pub fn is_weakly_supermodular_11(cube: Cube, values: &[i64]) -> bool {
    local_violation(cube, values).is_none()
}

/// All-pairs supermodularity, used as a cross-check.
pub fn is_supermodular_all_pairs(cube: Cube, values: &[i64]) -> bool {
    all_pairs_violation(cube, values).is_none()
}

pub fn validate_rank_function(
    values: Vec<i64>,
    delta: usize,
    r: usize,
) -> Result<RankFunction, RankError> {
    validate_rank_function_with_cap(values, delta, r, DEFAULT_CELL_CAP)
}

pub fn validate_rank_function_with_cap(
    values: Vec<i64>,
    delta: usize,
    r: usize,
    cap: usize,
) -> Result<RankFunction, RankError> {
    let cube = Cube::new(delta, r);
    cube.check_cap(cap)?;
    if values.len() != cube.len() {
        return Err(RankError::DimensionMismatch {
            expected: cube.len(),
            got: values.len(),
        });
    }
    check_basic_axioms(cube, &values)?;
    if let Some((a, b)) = local_violation(cube, &values) {
        return Err(RankError::NotSupermodular { a, b });
    }
    debug_assert!(
        cube.len() > 4096 || is_supermodular_all_pairs(cube, &values),
        "local and global supermodularity disagree"
    );
    Ok(RankFunction { cube, values })
}

pub fn standard_rank_function(delta: usize, r: usize) -> RankFunction {
    let cube = Cube::new(delta, r);
    let values = cube
        .points()
        .map(|p| {
            let s: usize = p.iter().sum();
            if s <= r {
                (r - s) as i64
            } else {
                -1
            }
        })
        .collect();
    RankFunction { cube, values }
}

/// All rank functions on `[r]^delta`, in lexicographic order of their value
/// tables. Returns `None` when there are more than `cap`.
pub fn enumerate_rank_functions(delta: usize, r: usize, cap: usize) -> Option<Vec<RankFunction>> {
    let cube = Cube::new(delta, r);
    let n = cube.len();
    let mut values = vec![0i64; n];
    let mut out = Vec::new();

    fn rec(cube: Cube, idx: usize, values: &mut Vec<i64>, out: &mut Vec<RankFunction>, cap: usize) -> bool {
        if idx == values.len() {
            if out.len() == cap {
                return false;
            }
            out.push(RankFunction {
                cube,
                values: values.clone(),
            });
            return true;
        }
        let p = cube.point(idx);
        let nonzero: Vec<usize> = (0..cube.delta).filter(|&i| p[i] > 0).collect();
        if nonzero.len() <= 1 {
            values[idx] = cube.r as i64 - p.iter().sum::<usize>() as i64;
            return rec(cube, idx + 1, values, out, cap);
        }
        let hi = nonzero.iter().map(|&i| values[idx - cube.stride(i)]).min().unwrap();
        let mut lo = -1;
        for (a, &i) in nonzero.iter().enumerate() {
            for &j in &nonzero[a + 1..] {
                let x = idx - cube.stride(i) - cube.stride(j);
                lo = lo.max(values[x + cube.stride(i)] + values[x + cube.stride(j)] - values[x]);
            }
        }
        for v in lo..=hi {
            values[idx] = v;
            if !rec(cube, idx + 1, values, out, cap) {
                return false;
            }
        }
        true
    }

    if rec(cube, 0, &mut values, &mut out, cap) {
        Some(out)
    } else {
        None
    }
}


#[cfg(test)]
mod enumeration_tests {
    use super::*;

    fn brute(delta: usize, r: usize) -> Vec<Vec<i64>> {
        let cube = Cube::new(delta, r);
        let n = cube.len();
        let base = r as i64 + 2;
        let mut out = Vec::new();
        for code in 0..base.pow(n as u32) {
            let mut c = code;
            let mut vals = vec![0; n];
            for slot in vals.iter_mut().rev() {
                *slot = c % base - 1;
                c /= base;
            }
            if validate_rank_function(vals.clone(), delta, r).is_ok() {
                out.push(vals);
            }
        }
        out
    }

    #[test]
    fn matches_exhaustive_tables() {
        for (delta, r) in [(1, 2), (2, 1), (2, 2), (3, 1)] {
            let got: Vec<Vec<i64>> = enumerate_rank_functions(delta, r, 1 << 20)
                .unwrap()
                .into_iter()
                .map(|f| f.values().to_vec())
                .collect();
            assert_eq!(got, brute(delta, r), "delta={delta} r={r}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(enumerate_rank_functions(2, 2, 1).is_none());
        assert_eq!(enumerate_rank_functions(1, 3, 1).unwrap().len(), 1);
    }
}
