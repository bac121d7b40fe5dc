use std::collections::BTreeSet;

use crate::hypercube::{enumerate_rank_functions, RankFunction};
use crate::metricgraph::{refine_model, simple_model, Divisor, GraphPoint, MetricGraph, Q};

use super::structure::{SlopeError, SlopeStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub r: usize,
    /// Slopes lie in `[-bound, bound]`.
    pub bound: i64,
    /// Subdivision points sit at offsets `j / subdivision_denominator`.
    pub subdivision_denominator: u64,
    /// Maximum number of structures returned.
    pub cap: usize,
}

/// Cap read from `TROPLIN_CAP`, defaulting to 100000.
pub fn default_cap() -> usize {
    std::env::var("TROPLIN_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000)
}

/// Increasing lists of `r + 1` integers in `[-k, k]`, lexicographically.
pub fn slope_lists(r: usize, k: i64) -> Vec<Vec<i64>> {
    fn rec(r: usize, k: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == r + 1 {
            out.push(cur.clone());
            return;
        }
        let start = cur.last().map_or(-k, |x| x + 1);
        for x in start..=k {
            cur.push(x);
            rec(r, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, k, &mut Vec::new(), &mut out);
    out
}

/// A slope pattern along one edge: lists in the forward direction, each
/// coordinate-wise at most the previous one, and the cut offsets between
/// them.
#[derive(Debug, Clone)]
struct EdgePattern {
    lists: Vec<Vec<i64>>,
    cuts: Vec<Q>,
}

fn edge_patterns(lists: &[Vec<i64>], interior: &[Q]) -> Vec<EdgePattern> {
    fn chains(lists: &[Vec<i64>], max_len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == max_len {
            return;
        }
        let last = *cur.last().unwrap();
        for (i, l) in lists.iter().enumerate() {
            if i != last && l.iter().zip(&lists[last]).all(|(a, b)| a <= b) {
                cur.push(i);
                chains(lists, max_len, cur, out);
                cur.pop();
            }
        }
    }
    fn choose(items: &[Q], k: usize, start: usize, cur: &mut Vec<Q>, out: &mut Vec<Vec<Q>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            choose(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for first in 0..lists.len() {
        let mut cs = Vec::new();
        chains(lists, interior.len() + 1, &mut vec![first], &mut cs);
        for c in cs {
            let mut cuts = Vec::new();
            choose(interior, c.len() - 1, 0, &mut Vec::new(), &mut cuts);
            for cut in cuts {
                out.push(EdgePattern {
                    lists: c.iter().map(|&i| lists[i].clone()).collect(),
                    cuts: cut,
                });
            }
        }
    }
    out
}

/// Slope structures of order `r` on subdivisions of `g` with slopes in
/// `[-k, k]` and lists constant between subdivision points, satisfying the
/// non-increasing property away from `d`. Vertex rank functions range over
/// all rank functions at the vertices of `g`; subdivision points carry the
/// standard one. Each structure is returned in coarsest form, keeping the
/// vertices of `g`.
pub fn enumerate_slope_structures(
    g: &MetricGraph,
    d: &Divisor,
    cfg: EnumerationConfig,
) -> Result<Vec<SlopeStructure>, SlopeError> {
    for p in d.support() {
        if !matches!(p, GraphPoint::Vertex(_)) {
            return Err(SlopeError::BadPoint(p.clone()));
        }
    }
    let lists = slope_lists(cfg.r, cfg.bound);
    let n = cfg.subdivision_denominator.max(1) as i128;
    let patterns: Vec<Vec<EdgePattern>> = g
        .edges()
        .iter()
        .map(|e| {
            let interior: Vec<Q> = (1..)
                .map(|j| Q::new(j, n))
                .take_while(|t| *t < e.len)
                .collect();
            edge_patterns(&lists, &interior)
        })
        .collect();
    let mut ranks: Vec<Vec<RankFunction>> = Vec::new();
    for v in 0..g.vertex_count() {
        ranks.push(
            enumerate_rank_functions(g.valence(v), cfg.r, cfg.cap.max(1))
                .ok_or(SlopeError::ExplosionGuard(cfg.cap))?,
        );
    }
    let total = patterns
        .iter()
        .map(|p| p.len() as u128)
        .chain(ranks.iter().map(|r| r.len() as u128))
        .try_fold(1u128, |acc, x| acc.checked_mul(x))
        .unwrap_or(u128::MAX);
    if total > cfg.cap as u128 {
        return Err(SlopeError::ExplosionGuard(cfg.cap));
    }

    let keep: Vec<usize> = (0..g.vertex_count()).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut pick = vec![0usize; g.edge_count()];
    let mut rpick = vec![0usize; g.vertex_count()];
    loop {
        let chosen: Vec<&EdgePattern> = pick.iter().enumerate().map(|(e, &i)| &patterns[e][i]).collect();
        let cuts: Vec<GraphPoint> = chosen
            .iter()
            .enumerate()
            .flat_map(|(e, p)| p.cuts.iter().map(move |t| GraphPoint::Edge { edge: e, offset: *t }))
            .collect();
        let sub = refine_model(g, &cuts);
        let mut piece_lists = vec![Vec::new(); sub.refined.edge_count()];
        for (e, p) in chosen.iter().enumerate() {
            for (k, (re, _)) in sub.pieces[e].iter().enumerate() {
                piece_lists[*re] = p.lists[k].clone();
            }
        }
        let vr: Vec<RankFunction> = rpick.iter().enumerate().map(|(v, &i)| ranks[v][i].clone()).collect();
        let simple = simple_model(&sub.refined);
        let mut vr_full = vr.clone();
        for v in vr.len()..sub.refined.vertex_count() {
            vr_full.push(RankFunction::standard(sub.refined.valence(v), cfg.r));
        }
        let s = SlopeStructure::on_refinement(&simple, cfg.r, &piece_lists, vr_full)?;
        if s.check_nonincreasing(d).is_ok() {
            let c = s.coarsen(&keep);
            let key = format!("{c:?}");
            if seen.insert(key) {
                out.push(c);
            }
        }
        // Advance the mixed-radix counter: vertex ranks fastest.
        let mut advanced = false;
        for v in (0..rpick.len()).rev() {
            rpick[v] += 1;
            if rpick[v] < ranks[v].len() {
                advanced = true;
                break;
            }
            rpick[v] = 0;
        }
        if !advanced {
            for e in (0..pick.len()).rev() {
                pick[e] += 1;
                if pick[e] < patterns[e].len() {
                    advanced = true;
                    break;
                }
                pick[e] = 0;
            }
        }
        if !advanced {
            return Ok(out);
        }
    }
}
