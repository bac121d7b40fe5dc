use rayon::prelude::*;

use crate::hypercube::{meet, CubePoint};
use crate::metricgraph::{Divisor, GraphPoint, PLFunction};
use crate::slopes::{
    effective_divisors, index_vector, satisfies_rank_condition, search_witness, Grid, RankVerdict, RowOutcome,
    SearchLimits, SearchOutcome, SlopeStructure, VerdictRow, VerdictStatus,
};

use super::dependence::{tropical_rank, DependenceLimits, RankReport};
use super::{differ_by_constant, SeriesError, TropModule};

/// A sub-series `M_E` offered for one effective divisor `E`.
#[derive(Debug, Clone)]
pub struct SubSeries {
    pub e: Divisor,
    pub module: TropModule,
}

#[derive(Debug, Clone, Default)]
pub enum StrongCheck {
    #[default]
    Off,
    With(Vec<SubSeries>),
}

#[derive(Debug, Clone)]
pub struct SeriesVerdict {
    /// Per grid divisor, a witness from the module.
    pub rows: RankVerdict,
    pub rank: RankReport,
    /// Rank condition verified and tropical rank equal to `r`.
    pub refined: bool,
    /// Outcome of the strongly refined check, when requested.
    pub strong: Option<bool>,
}

impl SeriesVerdict {
    pub fn status(&self) -> VerdictStatus {
        match self.rows.status {
            VerdictStatus::Verified if self.rank.inconclusive => VerdictStatus::Inconclusive,
            VerdictStatus::Verified if !self.refined || self.strong == Some(false) => VerdictStatus::Refuted,
            s => s,
        }
    }
}

fn module_witness(m: &TropModule, e: &Divisor, grid: &Grid, limits: SearchLimits) -> RowOutcome {
    let s = m.structure();
    let d = m.divisor();
    if let Some(h) = m.generators().iter().find(|h| satisfies_rank_condition(s, d, e, h)) {
        return RowOutcome::Witness(h.clone());
    }
    for p in e.support() {
        let f = m.f_v(p);
        if satisfies_rank_condition(s, d, e, &f) {
            return RowOutcome::Witness(f);
        }
    }
    let limits = SearchLimits {
        dedupe: false,
        ..limits
    };
    match search_witness(s, d, e, grid, limits, &mut |f| m.contains(f)) {
        SearchOutcome::Found(f) => RowOutcome::Witness(f),
        SearchOutcome::Exhausted => RowOutcome::NoWitness,
        SearchOutcome::BudgetExceeded => RowOutcome::Budget,
    }
}

fn sub_series_ok(m: &TropModule, sub: &SubSeries, dep: DependenceLimits) -> bool {
    let r = m.r() as i64;
    let s_deg = sub.e.degree();
    if !sub.e.is_effective() || s_deg > r || sub.module.graph() != m.graph() {
        return false;
    }
    let contained = sub
        .module
        .structure()
        .edge_slopes()
        .iter()
        .zip(m.structure().edge_slopes())
        .all(|(a, b)| a.iter().all(|x| b.contains(x)));
    let conditions = sub
        .module
        .generators()
        .iter()
        .all(|f| satisfies_rank_condition(m.structure(), m.divisor(), &sub.e, f));
    let want = (r - s_deg) as usize;
    contained && conditions && tropical_rank(&sub.module, want, dep).rank == Some(want)
}

/// Checks `(**)` for every effective `E` of degree `r` on the grid, with
/// witnesses drawn from the module: generators and the functions `f_p` are
/// tried first, then the grid search restricted to members. The tropical
/// rank decides whether the series is refined. Checking the conditions on
/// the generators of a sub-series suffices, since the set of functions
/// meeting them for a fixed `E` is stable under minima and constants.
pub fn check_linear_series(
    m: &TropModule,
    grid_denominator: u64,
    limits: SearchLimits,
    dep: DependenceLimits,
    strong: &StrongCheck,
) -> Result<SeriesVerdict, SeriesError> {
    if let StrongCheck::With(subs) = strong {
        if subs.is_empty() {
            return Err(SeriesError::MissingSubSeries);
        }
    }
    let s = m.structure();
    let grid = Grid::new(s, m.divisor(), grid_denominator)?;
    let tests = effective_divisors(&grid.points(s.model().vertex_count()), s.r());
    let rows: Vec<VerdictRow> = tests
        .into_par_iter()
        .map(|e| {
            let outcome = module_witness(m, &e, &grid, limits);
            VerdictRow { e, outcome }
        })
        .collect();
    let rows = RankVerdict::from_rows(grid_denominator, rows);
    let rank = tropical_rank(m, s.r(), dep);
    let refined = rows.status == VerdictStatus::Verified && rank.rank == Some(s.r());
    let strong = match strong {
        StrongCheck::Off => None,
        StrongCheck::With(subs) => Some(subs.iter().all(|sub| sub_series_ok(m, sub, dep))),
    };
    Ok(SeriesVerdict {
        rows,
        rank,
        refined,
        strong,
    })
}

/// Drops generators, last first, as long as every grid row still finds a
/// witness in the smaller module. The constant generator is kept.
pub fn prune_generators(
    m: &TropModule,
    grid_denominator: u64,
    limits: SearchLimits,
) -> Result<TropModule, SeriesError> {
    let s = m.structure();
    let grid = Grid::new(s, m.divisor(), grid_denominator)?;
    let tests = effective_divisors(&grid.points(s.model().vertex_count()), s.r());
    let mut gens = m.generators().to_vec();
    let mut i = gens.len();
    while i > 1 {
        i -= 1;
        let mut trial = gens.clone();
        trial.remove(i);
        let tm = TropModule::new(s.clone(), m.divisor().clone(), trial.clone())?;
        let ok = tests
            .par_iter()
            .all(|e| matches!(module_witness(&tm, e, &grid, limits), RowOutcome::Witness(_)));
        if ok {
            gens = trial;
        }
    }
    TropModule::new(s.clone(), m.divisor().clone(), gens)
}

/// An element of the module whose slope-index vector at `v` is `a`.
///
/// Elements vanishing at `v` are the `min_i (h_i - h_i(v) + c_i)` with
/// `c_i ≥ 0`, and their index vector at `v` is the meet of the vectors of
/// the generators with `c_i = 0`. So `a` is realized exactly when the meet
/// of all generator vectors above `a` equals `a`.
pub fn realize_jump(m: &TropModule, v: &GraphPoint, a: &CubePoint) -> Result<PLFunction, SeriesError> {
    let s = m.structure();
    let mut chosen = Vec::new();
    let mut acc: Option<CubePoint> = None;
    for h in m.generators() {
        let Ok(idx) = index_vector(s, h, v) else { continue };
        if idx.len() == a.len() && idx.iter().zip(a).all(|(x, y)| x >= y) {
            acc = Some(match acc {
                None => idx,
                Some(b) => meet(&b, &idx).expect("same dimension"),
            });
            chosen.push(h.add_constant(-h.eval(v)));
        }
    }
    if acc.as_ref() != Some(a) {
        return Err(SeriesError::NotFound(a.clone()));
    }
    Ok(PLFunction::min_all(&chosen)?)
}

/// The module generated by the constants and the witnesses of a verified
/// rank check, one per class modulo constants, each normalized to vanish at
/// vertex 0.
pub fn module_from_witnesses(s: &SlopeStructure, d: &Divisor, verdict: &RankVerdict) -> Result<TropModule, SeriesError> {
    let mut gens: Vec<PLFunction> = vec![PLFunction::zero(s.model())];
    for row in &verdict.rows {
        if let RowOutcome::Witness(f) = &row.outcome {
            if !gens.iter().any(|h| differ_by_constant(h, f)) {
                gens.push(f.add_constant(-f.vertex_value(0)));
            }
        }
    }
    TropModule::new(s.clone(), d.clone(), gens)
}
