use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use super::graph::GraphPoint;

/// A finite integer combination of points; zero coefficients are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Divisor {
    coeffs: BTreeMap<GraphPoint, i64>,
}

impl Divisor {
    pub fn new() -> Self {
        Divisor::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (GraphPoint, i64)>) -> Self {
        let mut d = Divisor::new();
        for (p, c) in pairs {
            d.add_point(p, c);
        }
        d
    }

    pub fn point(p: GraphPoint, c: i64) -> Self {
        Divisor::from_pairs([(p, c)])
    }

    pub fn add_point(&mut self, p: GraphPoint, c: i64) {
        if c == 0 {
            return;
        }
        let slot = self.coeffs.entry(p.clone()).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.coeffs.remove(&p);
        }
    }

    pub fn get(&self, p: &GraphPoint) -> i64 {
        self.coeffs.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.values().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.values().all(|&c| c >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &GraphPoint> {
        self.coeffs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GraphPoint, i64)> {
        self.coeffs.iter().map(|(p, c)| (p, *c))
    }

    /// `self ≥ other` coefficient-wise.
    pub fn dominates(&self, other: &Divisor) -> bool {
        (self - other).is_effective()
    }

    pub fn map_points(&self, f: impl Fn(&GraphPoint) -> GraphPoint) -> Divisor {
        Divisor::from_pairs(self.iter().map(|(p, c)| (f(p), c)))
    }

    pub fn scale(&self, k: i64) -> Divisor {
        Divisor::from_pairs(self.iter().map(|(p, c)| (p.clone(), c * k)))
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, c) in rhs.iter() {
            d.add_point(p.clone(), c);
        }
        d
    }
}

impl Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        self + &(-rhs)
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        self.scale(-1)
    }
}
