use rayon::prelude::*;

use crate::metricgraph::{Divisor, GraphPoint, PLFunction};

use super::search::{search_witness, Grid, SearchLimits, SearchOutcome};
use super::structure::{SlopeError, SlopeStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Verified,
    Refuted,
    Inconclusive,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Verified => "verified",
            VerdictStatus::Refuted => "refuted",
            VerdictStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOutcome {
    Witness(PLFunction),
    /// The exhaustive grid search found nothing.
    NoWitness,
    /// The search budget ran out.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictRow {
    pub e: Divisor,
    pub outcome: RowOutcome,
}

/// Result of checking the rank condition for every effective `E` of degree
/// `r` on a grid. All statements are relative to the grid: witnesses only
/// change slope at grid points, and only grid divisors are tested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVerdict {
    pub status: VerdictStatus,
    pub grid_denominator: u64,
    pub rows: Vec<VerdictRow>,
}

impl RankVerdict {
    pub fn from_rows(grid_denominator: u64, rows: Vec<VerdictRow>) -> RankVerdict {
        let status = if rows.iter().any(|r| r.outcome == RowOutcome::NoWitness) {
            VerdictStatus::Refuted
        } else if rows.iter().any(|r| r.outcome == RowOutcome::Budget) {
            VerdictStatus::Inconclusive
        } else {
            VerdictStatus::Verified
        };
        RankVerdict {
            status,
            grid_denominator,
            rows,
        }
    }

    pub fn witness(&self, e: &Divisor) -> Option<&PLFunction> {
        self.rows.iter().find(|r| &r.e == e).and_then(|r| match &r.outcome {
            RowOutcome::Witness(f) => Some(f),
            _ => None,
        })
    }

    pub fn first_failure(&self) -> Option<&VerdictRow> {
        self.rows.iter().find(|r| r.outcome == RowOutcome::NoWitness)
    }
}

/// All effective divisors of degree `k` supported on `points`, in
/// lexicographic order of the multiset of point indices.
pub fn effective_divisors(points: &[GraphPoint], k: usize) -> Vec<Divisor> {
    fn rec(points: &[GraphPoint], start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Divisor>) {
        if left == 0 {
            out.push(Divisor::from_pairs(cur.iter().map(|&i| (points[i].clone(), 1))));
            return;
        }
        for i in start..points.len() {
            cur.push(i);
            rec(points, i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(points, 0, k, &mut Vec::new(), &mut out);
    out
}

/// Runs one search per test divisor, in parallel; rows keep the input order.
pub fn check_divisors(
    s: &SlopeStructure,
    d: &Divisor,
    grid: &Grid,
    tests: Vec<Divisor>,
    limits: SearchLimits,
    accept: &(dyn Fn(&Divisor, &PLFunction) -> bool + Sync),
) -> Vec<VerdictRow> {
    tests
        .into_par_iter()
        .map(|e| {
            let outcome = match search_witness(s, d, &e, grid, limits, &mut |f| accept(&e, f)) {
                SearchOutcome::Found(f) => RowOutcome::Witness(f),
                SearchOutcome::Exhausted => RowOutcome::NoWitness,
                SearchOutcome::BudgetExceeded => RowOutcome::Budget,
            };
            VerdictRow { e, outcome }
        })
        .collect()
}

/// Checks that `(D, S)` is a crude linear series of rank `r` relative to a
/// grid of the given denominator.
pub fn crude_rank_check(
    s: &SlopeStructure,
    d: &Divisor,
    grid_denominator: u64,
    limits: SearchLimits,
) -> Result<RankVerdict, SlopeError> {
    let grid = Grid::new(s, d, grid_denominator)?;
    let tests = effective_divisors(&grid.points(s.model().vertex_count()), s.r());
    let rows = check_divisors(s, d, &grid, tests, limits, &|_, _| true);
    Ok(RankVerdict::from_rows(grid_denominator, rows))
}
