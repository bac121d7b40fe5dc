//! Local matroids of a ranked hypercube and coherent complexes of matroids.
//!
//! At a point `a` the ground set `I_a` is the set of axes `i` with `a_i < r`
//! and `ρ_a(X) = ρ(a) − ρ(a + Σ_{i∈X} e_i)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypercube::{Cube, CubePoint, RankError, RankFunction};

/// Largest ground set for which a full subset table is built.
pub const MAX_GROUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("local matroid at {point:?} violates the matroid axioms: {why}")]
    NotAMatroid { point: CubePoint, why: String },
    #[error("ground set at {point:?} should be {expected:?}")]
    WrongGround {
        point: CubePoint,
        expected: Vec<usize>,
    },
    #[error("condition ({which}) violated at {point:?}")]
    ConditionViolated { which: &'static str, point: CubePoint },
    #[error("path sums differ around {point:?} in directions {i} and {j}")]
    PathInconsistent { point: CubePoint, i: usize, j: usize },
    #[error("complex has {got} matroids, expected {expected}")]
    WrongCount { expected: usize, got: usize },
    #[error("ground set of size {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// A matroid on a set of hypercube axes, stored as a table indexed by
/// subsets of positions in `ground`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalMatroid {
    ground: Vec<usize>,
    ranks: Vec<i64>,
}

impl LocalMatroid {
    /// `ranks[m]` is the rank of `{ground[k] : bit k of m}`.
    pub fn new(ground: Vec<usize>, ranks: Vec<i64>) -> Result<Self, String> {
        if ground.len() > MAX_GROUND {
            return Err(format!("ground set of size {} too large", ground.len()));
        }
        if ranks.len() != 1 << ground.len() {
            return Err(format!(
                "expected {} subset ranks, got {}",
                1usize << ground.len(),
                ranks.len()
            ));
        }
        let m = LocalMatroid { ground, ranks };
        m.check_axioms()?;
        Ok(m)
    }

    /// The free matroid on `ground`.
    pub fn free(ground: Vec<usize>) -> Self {
        let ranks = (0..1u64 << ground.len())
            .map(|m| m.count_ones() as i64)
            .collect();
        LocalMatroid { ground, ranks }
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    fn position(&self, axis: usize) -> Option<usize> {
        self.ground.iter().position(|&g| g == axis)
    }

    fn local_mask(&self, axes: &[usize]) -> Option<usize> {
        axes.iter()
            .try_fold(0usize, |m, &a| self.position(a).map(|k| m | 1 << k))
    }

    /// Rank of a set of axes, `None` if some axis is outside the ground set.
    pub fn rank(&self, axes: &[usize]) -> Option<i64> {
        self.local_mask(axes).map(|m| self.ranks[m])
    }

    pub fn total_rank(&self) -> i64 {
        *self.ranks.last().expect("table is nonempty")
    }

    pub fn is_loop(&self, axis: usize) -> bool {
        self.rank(&[axis]) == Some(0)
    }

    /// Rank table keyed by bitmasks over axes.
    pub fn axis_mask_table(&self) -> BTreeMap<u64, i64> {
        (0..self.ranks.len())
            .map(|m| {
                let axes: u64 = (0..self.ground.len())
                    .filter(|k| m >> k & 1 == 1)
                    .map(|k| 1u64 << self.ground[k])
                    .sum();
                (axes, self.ranks[m])
            })
            .collect()
    }

    /// Rank of `X ∪ {i}` minus rank of `{i}`, for `X` avoiding `i`.
    pub fn contraction_rank(&self, i: usize, axes: &[usize]) -> Option<i64> {
        let mut with_i = axes.to_vec();
        with_i.push(i);
        Some(self.rank(&with_i)? - self.rank(&[i])?)
    }

    /// Empty set has rank 0, ranks grow by 0 or 1 per element and the local
    /// form of submodularity holds.
    pub fn check_axioms(&self) -> Result<(), String> {
        if self.ranks[0] != 0 {
            return Err("empty set has nonzero rank".into());
        }
        let n = self.ground.len();
        for m in 0..self.ranks.len() {
            for i in (0..n).filter(|i| m >> i & 1 == 0) {
                let step = self.ranks[m | 1 << i] - self.ranks[m];
                if !(0..=1).contains(&step) {
                    return Err(format!("adding {} changes rank by {step}", self.ground[i]));
                }
                for j in (i + 1..n).filter(|j| m >> j & 1 == 0) {
                    let both = self.ranks[m | 1 << i | 1 << j];
                    if both + self.ranks[m] > self.ranks[m | 1 << i] + self.ranks[m | 1 << j] {
                        return Err(format!(
                            "submodularity fails for {} and {}",
                            self.ground[i], self.ground[j]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn ground_at(cube: Cube, a: &[usize]) -> Vec<usize> {
    (0..cube.delta).filter(|&i| a[i] < cube.r).collect()
}

pub fn local_matroid(rf: &RankFunction, a: &[usize]) -> LocalMatroid {
    let cube = rf.cube();
    let ground = ground_at(cube, a);
    let base = rf.value(a);
    let ranks = (0..1usize << ground.len())
        .map(|m| {
            let mut b = a.to_vec();
            for (k, &i) in ground.iter().enumerate() {
                if m >> k & 1 == 1 {
                    b[i] += 1;
                }
            }
            base - rf.value(&b)
        })
        .collect();
    let m = LocalMatroid { ground, ranks };
    debug_assert!(m.check_axioms().is_ok(), "local matroid at {a:?}");
    m
}

/// Matroids indexed by the points of `[r]^δ` in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidComplex {
    cube: Cube,
    matroids: Vec<LocalMatroid>,
}

impl MatroidComplex {
    /// Builds an unvalidated complex; [`rank_function_from_complex`] checks
    /// the coherence conditions.
    pub fn new(delta: usize, r: usize, matroids: Vec<LocalMatroid>) -> Result<Self, MatroidError> {
        let cube = Cube::new(delta, r);
        if delta > MAX_GROUND {
            return Err(MatroidError::TooLarge(delta));
        }
        if matroids.len() as u128 != cube.cell_count() {
            return Err(MatroidError::WrongCount {
                expected: cube.cell_count() as usize,
                got: matroids.len(),
            });
        }
        for (idx, m) in matroids.iter().enumerate() {
            let a = cube.point(idx);
            let expected = ground_at(cube, &a);
            if m.ground != expected {
                return Err(MatroidError::WrongGround { point: a, expected });
            }
        }
        Ok(MatroidComplex { cube, matroids })
    }

    pub fn cube(&self) -> Cube {
        self.cube
    }

    pub fn at(&self, a: &[usize]) -> &LocalMatroid {
        &self.matroids[self.cube.index(a)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (CubePoint, &LocalMatroid)> {
        self.matroids
            .iter()
            .enumerate()
            .map(|(i, m)| (self.cube.point(i), m))
    }
}

pub fn coherent_complex_from_rank(rf: &RankFunction) -> MatroidComplex {
    let cube = rf.cube();
    MatroidComplex {
        cube,
        matroids: cube.points().map(|a| local_matroid(rf, &a)).collect(),
    }
}

pub fn export_local_matroids(rf: &RankFunction) -> Vec<(CubePoint, LocalMatroid)> {
    coherent_complex_from_rank(rf).iter().map(|(a, m)| (a, m.clone())).collect()
}

fn step(a: &[usize], i: usize) -> CubePoint {
    let mut b = a.to_vec();
    b[i] += 1;
    b
}

/// Checks conditions (i)–(iii) and rebuilds `ρ` by summing rank increments
/// along increasing paths from the origin.
pub fn rank_function_from_complex(c: &MatroidComplex) -> Result<RankFunction, MatroidError> {
    let cube = c.cube;
    let (delta, r) = (cube.delta, cube.r);
    for (a, m) in c.iter() {
        m.check_axioms()
            .map_err(|why| MatroidError::NotAMatroid { point: a.clone(), why })?;
    }
    // (i)
    for i in 0..delta {
        for t in 0..r {
            let mut a = cube.origin();
            a[i] = t;
            if c.at(&a).rank(&[i]) != Some(1) {
                return Err(MatroidError::ConditionViolated { which: "i", point: a });
            }
        }
    }
    // (ii): away from `i`, the matroid at a + e_i is the contraction M_a / i.
    for (a, m) in c.iter() {
        for &i in m.ground() {
            let next = c.at(&step(&a, i));
            let others: Vec<usize> = m.ground().iter().copied().filter(|&j| j != i).collect();
            for mask in 0u64..1 << others.len() {
                let x: Vec<usize> = (0..others.len())
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| others[k])
                    .collect();
                if next.rank(&x) != m.contraction_rank(i, &x) {
                    return Err(MatroidError::ConditionViolated { which: "ii", point: a });
                }
            }
        }
    }
    // commutation of elementary moves
    for (a, m) in c.iter() {
        let g = m.ground();
        for (p, &i) in g.iter().enumerate() {
            for &j in &g[p + 1..] {
                let via_i = m.rank(&[i]).unwrap() + c.at(&step(&a, i)).rank(&[j]).unwrap();
                let via_j = m.rank(&[j]).unwrap() + c.at(&step(&a, j)).rank(&[i]).unwrap();
                if via_i != via_j {
                    return Err(MatroidError::PathInconsistent { point: a, i, j });
                }
            }
        }
    }
    // (iii): the largest path sum to (r, …, r), over all increasing paths.
    let mut best = vec![0i64; cube.len()];
    for idx in 0..cube.len() {
        let a = cube.point(idx);
        for i in 0..delta {
            if a[i] > 0 {
                let mut prev = a.clone();
                prev[i] -= 1;
                let inc = c.at(&prev).rank(&[i]).unwrap();
                best[idx] = best[idx].max(best[cube.index(&prev)] + inc);
            }
        }
    }
    if best[cube.index(&cube.top())] > r as i64 + 1 {
        return Err(MatroidError::ConditionViolated {
            which: "iii",
            point: cube.top(),
        });
    }
    let mut values = vec![0i64; cube.len()];
    for idx in 0..cube.len() {
        let a = cube.point(idx);
        values[idx] = match (0..delta).find(|&i| a[i] > 0) {
            None => r as i64,
            Some(i) => {
                let mut prev = a.clone();
                prev[i] -= 1;
                values[cube.index(&prev)] - c.at(&prev).rank(&[i]).unwrap()
            }
        };
    }
    Ok(RankFunction::new(delta, r, values)?)
}

#[derive(Serialize, Deserialize)]
struct RawMatroid {
    point: CubePoint,
    ground: Vec<usize>,
    rank: BTreeMap<String, i64>,
}

#[derive(Serialize, Deserialize)]
struct RawComplex {
    delta: usize,
    r: usize,
    matroids: Vec<RawMatroid>,
}

impl Serialize for MatroidComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawComplex {
            delta: self.cube.delta,
            r: self.cube.r,
            matroids: self
                .iter()
                .map(|(point, m)| RawMatroid {
                    point,
                    ground: m.ground.clone(),
                    rank: m
                        .axis_mask_table()
                        .into_iter()
                        .map(|(k, v)| (k.to_string(), v))
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatroidComplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawComplex::deserialize(d)?;
        let cube = Cube::new(raw.delta, raw.r);
        let mut slots: Vec<Option<LocalMatroid>> = vec![None; cube.len()];
        for rm in raw.matroids {
            if !cube.contains(&rm.point) {
                return Err(D::Error::custom(format!("point {:?} outside cube", rm.point)));
            }
            let n = rm.ground.len();
            if n > MAX_GROUND {
                return Err(D::Error::custom("ground set too large"));
            }
            let mut ranks = vec![0i64; 1 << n];
            for (m, slot) in ranks.iter_mut().enumerate() {
                let axes: u64 = (0..n)
                    .filter(|k| m >> k & 1 == 1)
                    .map(|k| 1u64 << rm.ground[k])
                    .sum();
                *slot = *rm
                    .rank
                    .get(&axes.to_string())
                    .ok_or_else(|| D::Error::custom(format!("missing rank for mask {axes}")))?;
            }
            let idx = cube.index(&rm.point);
            slots[idx] = Some(LocalMatroid::new(rm.ground, ranks).map_err(D::Error::custom)?);
        }
        let matroids = slots
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| D::Error::custom(format!("no matroid at {:?}", cube.point(i)))))
            .collect::<Result<Vec<_>, _>>()?;
        MatroidComplex::new(raw.delta, raw.r, matroids).map_err(D::Error::custom)
    }
}
