use std::collections::{BTreeSet, HashSet};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::metricgraph::{MetricGraph, PLFunction, Q};

use super::{SeriesError, TropModule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DependenceLimits {
    /// Maximum number of candidate assignments explored per subset.
    pub max_nodes: usize,
}

impl Default for DependenceLimits {
    fn default() -> Self {
        DependenceLimits { max_nodes: 200_000 }
    }
}

/// Whether `min_i (f_i + c_i)` is attained at least twice at every point.
/// Checked on every cell of the common refinement, split further at the
/// crossing points of the shifted functions.
pub fn min_attained_twice(g: &MetricGraph, fs: &[&PLFunction], cs: &[Q]) -> bool {
    if g.edge_count() == 0 {
        let vals: Vec<Q> = fs.iter().zip(cs).map(|(f, c)| f.vertex_value(0) + c).collect();
        let m = *vals.iter().min().expect("nonempty");
        return vals.iter().filter(|x| **x == m).count() >= 2;
    }
    for e in 0..g.edge_count() {
        let pos = PLFunction::common_positions(fs, e);
        for w in pos.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = (a + b) / Q::from(2);
            // Lines c + s·(t - a) on [a, b].
            let lines: Vec<(Q, Q)> = fs
                .iter()
                .zip(cs)
                .map(|(f, c)| {
                    let va = f.eval_on_edge(e, &a) + c;
                    let vm = f.eval_on_edge(e, &mid) + c;
                    (va, (vm - va) / (mid - a))
                })
                .collect();
            let mut cuts: BTreeSet<Q> = [a, b].into_iter().collect();
            for (i, (c1, s1)) in lines.iter().enumerate() {
                for (c2, s2) in &lines[i + 1..] {
                    if s1 != s2 {
                        let t = a + (c2 - c1) / (s1 - s2);
                        if t > a && t < b {
                            cuts.insert(t);
                        }
                    }
                }
            }
            let cuts: Vec<Q> = cuts.into_iter().collect();
            for cw in cuts.windows(2) {
                let x = (cw[0] + cw[1]) / Q::from(2) - a;
                let vals: Vec<Q> = lines.iter().map(|(c, s)| c + s * x).collect();
                let m = *vals.iter().min().expect("nonempty");
                if vals.iter().filter(|v| **v == m).count() < 2 {
                    return false;
                }
            }
        }
    }
    true
}

/// Values of `f_i - f_j` on the pieces where the difference is constant.
fn plateau_values(g: &MetricGraph, d: &PLFunction) -> Vec<Q> {
    let mut out = BTreeSet::new();
    for e in 0..g.edge_count() {
        for (a, _, s) in d.pieces(e) {
            if s == 0 {
                out.insert(d.eval_on_edge(e, &a));
            }
        }
    }
    if g.edge_count() == 0 {
        out.insert(d.vertex_value(0));
    }
    out.into_iter().collect()
}

struct ActiveSearch<'a> {
    g: &'a MetricGraph,
    fs: &'a [&'a PLFunction],
    plateaus: Vec<Vec<Vec<Q>>>,
    seen: HashSet<Vec<Option<Q>>>,
    nodes: usize,
    limit: usize,
}

impl ActiveSearch<'_> {
    /// Least `c_j` with `f_j + c_j ≥ min` of the assigned shifted functions.
    fn touching(&self, cs: &[Option<Q>], j: usize) -> Q {
        let env = PLFunction::min_all(
            cs.iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|c| self.fs[i].add_constant(c)))
                .collect::<Vec<_>>()
                .iter(),
        )
        .expect("shared model");
        env.sub(self.fs[j]).expect("shared model").max_value()
    }

    fn run(&mut self, cs: &mut Vec<Option<Q>>) -> Result<Option<Vec<Q>>, SeriesError> {
        if !self.seen.insert(cs.clone()) {
            return Ok(None);
        }
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(SeriesError::SearchBoundExceeded(self.limit));
        }
        if cs.iter().all(|c| c.is_some()) {
            let full: Vec<Q> = cs.iter().map(|c| c.unwrap()).collect();
            return Ok(min_attained_twice(self.g, self.fs, &full).then_some(full));
        }
        for j in 0..cs.len() {
            if cs[j].is_some() {
                continue;
            }
            let mut cands: BTreeSet<Q> = BTreeSet::new();
            for i in 0..cs.len() {
                if let Some(ci) = cs[i] {
                    for p in &self.plateaus[i][j] {
                        cands.insert(ci + p);
                    }
                }
            }
            cands.insert(self.touching(cs, j));
            for c in cands {
                cs[j] = Some(c);
                let found = self.run(cs)?;
                cs[j] = None;
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(None)
    }
}

/// Constants making every function active and the minimum attained twice
/// everywhere. Candidates for each new constant come from the plateau
/// values of pairwise differences with already fixed functions, and from
/// the least shift at which the function touches the current envelope.
fn all_active(g: &MetricGraph, fs: &[&PLFunction], limit: usize) -> Result<Option<Vec<Q>>, SeriesError> {
    let k = fs.len();
    let plateaus = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| plateau_values(g, &fs[i].sub(fs[j]).expect("shared model")))
                .collect()
        })
        .collect();
    let mut search = ActiveSearch {
        g,
        fs,
        plateaus,
        seen: HashSet::new(),
        nodes: 0,
        limit,
    };
    let mut cs = vec![None; k];
    cs[0] = Some(Q::zero());
    search.run(&mut cs)
}

/// Constants `c_i` such that `min_i (f_i + c_i)` is attained at least twice
/// everywhere, or `None` when the bounded candidate search finds none.
/// Every returned certificate is verified exactly. Subsets are tried by
/// increasing size; functions outside the dependent subset receive a
/// constant large enough to stay above the minimum.
pub fn tropical_dependence(
    g: &MetricGraph,
    fs: &[PLFunction],
    limits: DependenceLimits,
) -> Result<Option<Vec<Q>>, SeriesError> {
    let k = fs.len();
    if k < 2 {
        return Ok(None);
    }
    for size in 2..=k {
        for subset in subsets(k, size) {
            let sub: Vec<&PLFunction> = subset.iter().map(|&i| &fs[i]).collect();
            if let Some(cs) = all_active(g, &sub, limits.max_nodes)? {
                return Ok(Some(extend(fs, &subset, &cs)));
            }
        }
    }
    Ok(None)
}

fn extend(fs: &[PLFunction], subset: &[usize], cs: &[Q]) -> Vec<Q> {
    let active: Vec<PLFunction> = subset.iter().zip(cs).map(|(&i, c)| fs[i].add_constant(*c)).collect();
    let top = PLFunction::min_all(&active).expect("nonempty").max_value();
    (0..fs.len())
        .map(|i| match subset.iter().position(|&j| j == i) {
            Some(k) => cs[k],
            None => top - fs[i].min_value() + Q::one(),
        })
        .collect()
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Outcome of the tropical rank computation over the extremal generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    /// The least `r ≤ r_max` such that every `r + 2` extremals are
    /// dependent, when found.
    pub rank: Option<usize>,
    /// Every `r` below this value has an independent subset (relative to
    /// the candidate search).
    pub lower_bound: usize,
    /// An independent subset of size `lower_bound + 1`, as generator indices.
    pub independent: Option<Vec<usize>>,
    /// Some subset hit the search bound.
    pub inconclusive: bool,
    pub extremals: Vec<usize>,
}

pub fn tropical_rank(m: &TropModule, r_max: usize, limits: DependenceLimits) -> RankReport {
    let ext = m.extremals();
    let g = m.graph();
    let mut report = RankReport {
        rank: None,
        lower_bound: 0,
        independent: None,
        inconclusive: false,
        extremals: ext.clone(),
    };
    for r in 0..=r_max {
        let size = r + 2;
        if ext.len() < size {
            report.rank = Some(r);
            return report;
        }
        let outcomes: Vec<(Vec<usize>, Result<Option<Vec<Q>>, SeriesError>)> = subsets(ext.len(), size)
            .into_par_iter()
            .map(|s| {
                let fs: Vec<PLFunction> = s.iter().map(|&i| m.generators()[ext[i]].clone()).collect();
                let idx: Vec<usize> = s.iter().map(|&i| ext[i]).collect();
                (idx, tropical_dependence(g, &fs, limits))
            })
            .collect();
        let independent = outcomes.iter().find(|(_, o)| matches!(o, Ok(None)));
        let bounded = outcomes.iter().any(|(_, o)| o.is_err());
        match independent {
            Some((idx, _)) => {
                report.lower_bound = r + 1;
                report.independent = Some(idx.clone());
            }
            None if bounded => {
                report.inconclusive = true;
                return report;
            }
            None => {
                report.rank = Some(r);
                return report;
            }
        }
    }
    report
}
