//! Dot arrays and permutation arrays, and their bijection with rank
//! functions.
//!
//! The upper principal subarray `P[x]` consists of the dots `y ≥ x`. Ranks of
//! `P[x]` are read in the original coordinates; subtracting `x` from every
//! dot would give the same counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypercube::{leq, Cube, CubePoint, RankError, RankFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("point {0:?} lies outside the array")]
    OutOfBounds(CubePoint),
    #[error("array of shape {0:?} is not square")]
    ShapeNotSquare(Vec<usize>),
    #[error("not a permutation array: {0}")]
    NotPermutationArray(String),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// A dot array of shape `extents[0] × … × extents[δ-1]`, where
/// `extents[i] = r_i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDotArray", into = "RawDotArray")]
pub struct DotArray {
    shape: Vec<usize>,
    dots: BTreeSet<CubePoint>,
}

#[derive(Serialize, Deserialize)]
struct RawDotArray {
    shape: Vec<usize>,
    dots: Vec<CubePoint>,
}

impl TryFrom<RawDotArray> for DotArray {
    type Error = PermError;
    fn try_from(raw: RawDotArray) -> Result<Self, PermError> {
        DotArray::new(raw.shape, raw.dots)
    }
}

impl From<DotArray> for RawDotArray {
    fn from(p: DotArray) -> Self {
        RawDotArray {
            shape: p.shape,
            dots: p.dots.into_iter().collect(),
        }
    }
}

impl DotArray {
    pub fn new(
        shape: Vec<usize>,
        dots: impl IntoIterator<Item = CubePoint>,
    ) -> Result<Self, PermError> {
        let mut p = DotArray {
            shape,
            dots: BTreeSet::new(),
        };
        for d in dots {
            if !p.in_bounds(&d) {
                return Err(PermError::OutOfBounds(d));
            }
            p.dots.insert(d);
        }
        Ok(p)
    }

    /// Square array of shape `[r]^δ`.
    pub fn square(
        delta: usize,
        r: usize,
        dots: impl IntoIterator<Item = CubePoint>,
    ) -> Result<Self, PermError> {
        DotArray::new(vec![r + 1; delta], dots)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dots(&self) -> &BTreeSet<CubePoint> {
        &self.dots
    }

    pub fn delta(&self) -> usize {
        self.shape.len()
    }

    pub fn in_bounds(&self, p: &[usize]) -> bool {
        p.len() == self.shape.len() && p.iter().zip(&self.shape).all(|(c, e)| c < e)
    }

    pub fn with_dots(&self, extra: &BTreeSet<CubePoint>) -> DotArray {
        DotArray {
            shape: self.shape.clone(),
            dots: self.dots.union(extra).cloned().collect(),
        }
    }

    pub fn without_dots(&self, removed: &BTreeSet<CubePoint>) -> DotArray {
        DotArray {
            shape: self.shape.clone(),
            dots: self.dots.difference(removed).cloned().collect(),
        }
    }

    fn positions(&self) -> impl Iterator<Item = CubePoint> + '_ {
        let total: usize = self.shape.iter().product();
        (0..total).map(move |mut idx| {
            let mut p = vec![0; self.shape.len()];
            for k in (0..self.shape.len()).rev() {
                p[k] = idx % self.shape[k];
                idx /= self.shape[k];
            }
            p
        })
    }

    /// Number of distinct `axis`-coordinates among the dots of `P[origin]`.
    pub fn rank_along_axis(&self, origin: &[usize], axis: usize) -> Result<usize, PermError> {
        if !self.in_bounds(origin) || axis >= self.delta() {
            return Err(PermError::OutOfBounds(origin.to_vec()));
        }
        Ok(self.axis_ranks(origin)[axis])
    }

    fn axis_ranks(&self, origin: &[usize]) -> Vec<usize> {
        let mut seen: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.delta()];
        for d in self.dots.iter().filter(|d| leq(origin, d)) {
            for (k, &c) in d.iter().enumerate() {
                seen[k].insert(c);
            }
        }
        seen.iter().map(BTreeSet::len).collect()
    }

    /// `Some(rank)` when `P[origin]` is rankable.
    pub fn rank_at(&self, origin: &[usize]) -> Option<usize> {
        let ranks = self.axis_ranks(origin);
        ranks.iter().all(|&k| k == ranks[0]).then(|| ranks[0])
    }

    pub fn is_totally_rankable(&self) -> bool {
        self.positions().all(|x| self.rank_at(&x).is_some())
    }

    /// Whether `x` is the meet of at least two dots `≠ x`, each sharing a
    /// coordinate with `x`. Equivalently, every coordinate of `x` is attained
    /// by some dot `y ≥ x` with `y ≠ x`.
    pub fn is_redundant(&self, x: &[usize]) -> bool {
        let above: Vec<&CubePoint> = self
            .dots
            .iter()
            .filter(|y| y.as_slice() != x && leq(x, y))
            .collect();
        (0..x.len()).all(|k| above.iter().any(|y| y[k] == x[k]))
    }

    pub fn redundant_positions(&self) -> BTreeSet<CubePoint> {
        self.positions().filter(|x| self.is_redundant(x)).collect()
    }

    fn square_width(&self) -> Result<usize, PermError> {
        match self.shape.first() {
            Some(&e) if e > 0 && self.shape.iter().all(|&s| s == e) => Ok(e - 1),
            _ => Err(PermError::ShapeNotSquare(self.shape.clone())),
        }
    }

    pub fn is_permutation_array(&self) -> Result<bool, PermError> {
        Ok(self.permutation_defect()?.is_none())
    }

    fn permutation_defect(&self) -> Result<Option<String>, PermError> {
        let r = self.square_width()?;
        if let Some(x) = self.positions().find(|x| self.rank_at(x).is_none()) {
            return Ok(Some(format!("P[{x:?}] is not rankable")));
        }
        let top = self.rank_at(&vec![0; self.delta()]).unwrap_or(0);
        if top != r + 1 {
            return Ok(Some(format!("rank {top} differs from {}", r + 1)));
        }
        if let Some(d) = self.dots.iter().find(|d| self.is_redundant(d)) {
            return Ok(Some(format!("dot {d:?} is redundant")));
        }
        Ok(None)
    }
}

/// `ρ_P(a) = rank(P[a]) − 1`.
pub fn rank_function_from_array(p: &DotArray) -> Result<RankFunction, PermError> {
    if let Some(why) = p.permutation_defect()? {
        return Err(PermError::NotPermutationArray(why));
    }
    rank_function_of_rankable(p)
}

/// Same as [`rank_function_from_array`] but admits redundant dots.
pub fn rank_function_of_rankable(p: &DotArray) -> Result<RankFunction, PermError> {
    let r = p.square_width()?;
    let cube = Cube::new(p.delta(), r);
    let mut values = Vec::with_capacity(cube.len());
    for a in cube.points() {
        let k = p
            .rank_at(&a)
            .ok_or_else(|| PermError::NotPermutationArray(format!("P[{a:?}] is not rankable")))?;
        values.push(k as i64 - 1);
    }
    Ok(RankFunction::new(p.delta(), r, values)?)
}

/// Dots on the jumps of `rf`, minus the redundant positions of that array.
pub fn array_from_rank_function(rf: &RankFunction) -> DotArray {
    let jumped = DotArray {
        shape: vec![rf.r() + 1; rf.delta()],
        dots: rf.jumps().as_set(),
    };
    let redundant = jumped.redundant_positions();
    jumped.without_dots(&redundant)
}
