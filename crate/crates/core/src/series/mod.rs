//! Finitely generated tropical semimodules of rational functions, used as
//! presentations of linear series: membership, extremals, reduced divisors,
//! unsaturated cuts, tropical rank, and the classification of rank-one
//! series by quotient trees.

mod cuts;
mod dependence;
mod g1d;
mod linear;

#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::metricgraph::{Divisor, GraphPoint, MetricGraph, PLError, PLFunction, Refinement, Q};
use crate::slopes::{in_rat_d_s, SlopeError, SlopeStructure};

pub use cuts::{find_unsaturated_cut, local_reduced_step, min_locus, BoundaryPoint, Cut, CutPiece, LocalStep};
pub use dependence::{
    min_attained_twice, tropical_dependence, tropical_rank, DependenceLimits, RankReport,
};
pub use g1d::{
    classify_g1d, pullback_from_tree, random_harmonic_morphism, trees_isometric, HarmonicMorphism, Pullback,
    QuotientTree,
};
pub use linear::{
    check_linear_series, module_from_witnesses, prune_generators, realize_jump, SeriesVerdict, StrongCheck, SubSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Function(#[from] PLError),
    #[error(transparent)]
    Slope(#[from] SlopeError),
    #[error("the module has no generators")]
    Empty,
    #[error("generator {0} is not in Rat(D, S)")]
    NotInRat(usize),
    #[error("step of length {delta} exceeds the structural radius {radius}")]
    RadiusTooLarge { delta: String, radius: String },
    #[error("no generator reaches the top slope along the step direction")]
    NoTopSlope,
    #[error("candidate search exceeded {0} nodes")]
    SearchBoundExceeded(usize),
    #[error("strongly refined check requested without sub-series")]
    MissingSubSeries,
    #[error("no element of the module realizes the jump {0:?}")]
    NotFound(Vec<usize>),
    #[error("the module has rank {0}, not 1")]
    NotRankOne(usize),
    #[error("not a refined series: {0}")]
    NotRefined(String),
    #[error("the quotient has a cycle through tree vertices {0:?}")]
    QuotientNotTree(Vec<usize>),
    #[error("not harmonic at vertex {vertex}")]
    NotHarmonic { vertex: usize },
    #[error("bad morphism: {0}")]
    BadMorphism(String),
}

/// The semimodule of all `min_i (h_i + c_i)` for generators `h_i`, inside
/// `Rat(D, S)` on the model of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TropModule {
    structure: SlopeStructure,
    divisor: Divisor,
    generators: Vec<PLFunction>,
}

/// Residuated constants for a candidate element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    /// `c_i = max (g - h_i)`, the largest shifts with `h_i + c_i ≥ g`.
    pub constants: Vec<Q>,
}

impl TropModule {
    pub fn new(structure: SlopeStructure, divisor: Divisor, generators: Vec<PLFunction>) -> Result<Self, SeriesError> {
        if generators.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (i, h) in generators.iter().enumerate() {
            if !h.same_graph(&PLFunction::zero(structure.model())) || !in_rat_d_s(&structure, &divisor, h) {
                return Err(SeriesError::NotInRat(i));
            }
        }
        Ok(TropModule {
            structure,
            divisor,
            generators,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        self.structure.model()
    }

    pub fn structure(&self) -> &SlopeStructure {
        &self.structure
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    pub fn generators(&self) -> &[PLFunction] {
        &self.generators
    }

    pub fn r(&self) -> usize {
        self.structure.r()
    }

    /// `min_i (h_i + c_i)`, skipping generators with no constant.
    pub fn combination(&self, constants: &[Option<Q>]) -> Option<PLFunction> {
        let shifted: Vec<PLFunction> = self
            .generators
            .iter()
            .zip(constants)
            .filter_map(|(h, c)| c.map(|c| h.add_constant(c)))
            .collect();
        if shifted.is_empty() {
            return None;
        }
        Some(PLFunction::min_all(&shifted).expect("generators share the model"))
    }

    pub fn membership(&self, g: &PLFunction) -> Result<Membership, SeriesError> {
        let constants = self
            .generators
            .iter()
            .map(|h| Ok(g.sub(h)?.max_value()))
            .collect::<Result<Vec<Q>, PLError>>()?;
        let some: Vec<Option<Q>> = constants.iter().map(|c| Some(*c)).collect();
        let member = self.combination(&some).as_ref() == Some(g);
        Ok(Membership { member, constants })
    }

    pub fn contains(&self, g: &PLFunction) -> bool {
        self.membership(g).map(|m| m.member).unwrap_or(false)
    }

    /// Indices of the extremal generators: one representative per class
    /// modulo constants (the first), kept when it is not generated by the
    /// other representatives.
    pub fn extremals(&self) -> Vec<usize> {
        let reps = self.representatives();
        reps.iter()
            .copied()
            .filter(|&i| {
                let others: Vec<PLFunction> = reps
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| self.generators[j].clone())
                    .collect();
                !generated_by(&others, &self.generators[i])
            })
            .collect()
    }

    fn representatives(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = Vec::new();
        for (i, h) in self.generators.iter().enumerate() {
            if !reps.iter().any(|&j| differ_by_constant(&self.generators[j], h)) {
                reps.push(i);
            }
        }
        reps
    }

    /// `min_i (h_i - h_i(v))`.
    pub fn f_v(&self, v: &GraphPoint) -> PLFunction {
        let normalized: Vec<PLFunction> = self.generators.iter().map(|h| h.add_constant(-h.eval(v))).collect();
        PLFunction::min_all(&normalized).expect("generators share the model")
    }

    pub fn reduced_divisor(&self, v: &GraphPoint) -> Divisor {
        &self.divisor + &self.f_v(v).divisor_of(self.graph())
    }

    pub fn is_reduced_at(&self, v: &GraphPoint) -> bool {
        self.f_v(v).is_constant()
    }

    /// `M(-f)` relative to `(D + div f, S + div f)`: generators `h_i - f` on
    /// the model refined at the breakpoints of `f`.
    pub fn modify(&self, f: &PLFunction) -> Result<(TropModule, Refinement), SeriesError> {
        let (structure, refinement) = self.structure.translate(f);
        let fr = refinement.function_to_refined(f);
        let divisor = refinement.divisor_to_refined(&(&self.divisor + &f.divisor_of(self.graph())));
        let generators = self
            .generators
            .iter()
            .map(|h| refinement.function_to_refined(h).sub(&fr))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((TropModule::new(structure, divisor, generators)?, refinement))
    }

    /// The same generators on a refined model.
    pub fn refine(&self, points: &[GraphPoint]) -> (TropModule, Refinement) {
        let (structure, refinement) = self.structure.refine(points);
        let module = TropModule {
            structure,
            divisor: refinement.divisor_to_refined(&self.divisor),
            generators: self.generators.iter().map(|h| refinement.function_to_refined(h)).collect(),
        };
        (module, refinement)
    }

    /// Whether the constant functions belong to the module.
    pub fn is_effective(&self) -> bool {
        self.contains(&PLFunction::zero(self.graph()))
    }
}

pub(crate) fn differ_by_constant(a: &PLFunction, b: &PLFunction) -> bool {
    a.sub(b).map(|d| d.is_constant()).unwrap_or(false)
}

/// Whether `g` is a min-combination of shifts of `gens`.
pub(crate) fn generated_by(gens: &[PLFunction], g: &PLFunction) -> bool {
    if gens.is_empty() {
        return false;
    }
    let shifted: Vec<PLFunction> = gens
        .iter()
        .map(|h| {
            let c = g.sub(h).expect("shared model").max_value();
            h.add_constant(c)
        })
        .collect();
    PLFunction::min_all(&shifted).expect("shared model") == *g
}

/// Offsets on every edge at multiples of `1/n`, and all vertices.
pub fn grid_points(g: &MetricGraph, n: u64) -> Vec<GraphPoint> {
    let mut pts: Vec<GraphPoint> = (0..g.vertex_count()).map(GraphPoint::Vertex).collect();
    let n = n.max(1) as i128;
    for (e, edge) in g.edges().iter().enumerate() {
        let mut k = 1;
        loop {
            let t = Q::new(k, n);
            if t >= edge.len {
                break;
            }
            pts.push(GraphPoint::Edge { edge: e, offset: t });
            k += 1;
        }
    }
    pts
}
