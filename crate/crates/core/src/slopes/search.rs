//! Exhaustive search for functions of `Rat(D, S)` meeting the rank
//! conditions for a given `E`, among functions whose slope changes only at
//! grid points.

use std::collections::{BTreeMap, VecDeque};

use num_traits::Zero;

use crate::hypercube::CubePoint;
use crate::metricgraph::{qi, Divisor, GraphPoint, PLFunction, Q};

use super::structure::{SlopeError, SlopeStructure};

/// Grid of points at offsets `k / denominator` from the `u` end of every
/// model edge, plus both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub denominator: u64,
    /// Per edge, increasing positions including `0` and the length.
    pub positions: Vec<Vec<Q>>,
}

impl Grid {
    pub fn new(s: &SlopeStructure, d: &Divisor, denominator: u64) -> Result<Grid, SlopeError> {
        if denominator == 0 {
            return Err(SlopeError::GridTooCoarse(0));
        }
        let g = s.model();
        let step = Q::new(1, denominator as i128);
        let mut positions = Vec::with_capacity(g.edge_count());
        for e in g.edges() {
            let mut ps = Vec::new();
            let mut t = Q::zero();
            while t < e.len {
                ps.push(t);
                t += step;
            }
            ps.push(e.len);
            positions.push(ps);
        }
        let grid = Grid {
            denominator,
            positions,
        };
        for p in d.support() {
            if !grid.contains(p) {
                return Err(SlopeError::GridTooCoarse(denominator));
            }
        }
        Ok(grid)
    }

    pub fn contains(&self, p: &GraphPoint) -> bool {
        match p {
            GraphPoint::Vertex(_) => true,
            GraphPoint::Edge { edge, offset } => self.positions[*edge].binary_search(offset).is_ok(),
        }
    }

    /// All vertices followed by the interior grid points of each edge.
    pub fn points(&self, vertex_count: usize) -> Vec<GraphPoint> {
        let mut pts: Vec<GraphPoint> = (0..vertex_count).map(GraphPoint::Vertex).collect();
        for (e, ps) in self.positions.iter().enumerate() {
            for t in &ps[1..ps.len() - 1] {
                pts.push(GraphPoint::Edge { edge: e, offset: *t });
            }
        }
        pts
    }
}

/// Default grid denominator: lcm of the edge-length denominators times `r!`.
pub fn default_denominator(s: &SlopeStructure) -> u64 {
    let mut l: i128 = 1;
    for e in s.model().edges() {
        l = crate::metricgraph::rational::lcm(l, *e.len.denom());
    }
    let fact: i128 = (1..=s.r() as i128).product();
    (l * fact.max(1)) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximum number of search nodes before giving up.
    pub max_nodes: u64,
    /// When false, every slope sequence on an edge is tried rather than one
    /// per boundary behaviour. Needed when the acceptance test looks at more
    /// than boundary data.
    pub dedupe: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_nodes: 5_000_000,
            dedupe: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(PLFunction),
    Exhausted,
    BudgetExceeded,
}

/// Slope behaviour of a function on one edge: first and last slope index
/// (forward), total rise, and one index sequence per grid segment.
#[derive(Debug, Clone)]
struct Profile {
    first: usize,
    last: usize,
    rise: Q,
    seq: Vec<usize>,
}

fn edge_profiles(
    s: &SlopeStructure,
    d: &Divisor,
    e_div: &Divisor,
    grid: &Grid,
    edge: usize,
    limits: &SearchLimits,
) -> Option<Vec<Profile>> {
    let slopes = &s.edge_slopes()[edge];
    let r = s.r();
    let pos = &grid.positions[edge];
    let seg_len: Vec<Q> = pos.windows(2).map(|w| w[1] - w[0]).collect();
    // State: (first, current, rise) -> one sequence, or all sequences.
    let mut states: Vec<(usize, usize, Q, Vec<usize>)> =
        (0..=r).map(|i| (i, i, seg_len[0] * qi(slopes[i]), vec![i])).collect();
    for m in 1..seg_len.len() {
        let p = GraphPoint::Edge {
            edge,
            offset: pos[m],
        };
        let em = e_div.get(&p);
        let dm = d.get(&p);
        let mut next: Vec<(usize, usize, Q, Vec<usize>)> = Vec::new();
        let mut seen: BTreeMap<(usize, usize, Q), ()> = BTreeMap::new();
        for (first, cur, rise, seq) in &states {
            let cur = *cur as i64;
            for j in 0..=(cur - em).min(r as i64) {
                if j < 0 {
                    break;
                }
                let j = j as usize;
                if dm + (slopes[cur as usize] - slopes[j]) - em < 0 {
                    continue;
                }
                let nr = rise + seg_len[m] * qi(slopes[j]);
                if limits.dedupe && seen.insert((*first, j, nr), ()).is_some() {
                    continue;
                }
                let mut ns = seq.clone();
                ns.push(j);
                next.push((*first, j, nr, ns));
            }
        }
        if next.len() as u64 > limits.max_nodes {
            return None;
        }
        states = next;
    }
    Some(
        states
            .into_iter()
            .map(|(first, last, rise, seq)| Profile { first, last, rise, seq })
            .collect(),
    )
}

struct Dfs<'a> {
    s: &'a SlopeStructure,
    d: &'a Divisor,
    e_div: &'a Divisor,
    grid: &'a Grid,
    order: Vec<usize>,
    profiles: Vec<Vec<Profile>>,
    /// Per vertex, jumps of its rank function with value at least `E(v)`.
    jumps: Vec<Vec<CubePoint>>,
    choice: Vec<Option<usize>>,
    phi: Vec<Option<Q>>,
    nodes: u64,
    max_nodes: u64,
}

enum Step {
    Found(PLFunction),
    Continue,
    Budget,
}

impl<'a> Dfs<'a> {
    /// Index of axis `k` at vertex `v` under the current choices.
    fn axis_index(&self, v: usize, k: usize) -> Option<(usize, i64)> {
        let d = self.s.model().incident(v)[k];
        let p = &self.profiles[d.edge][self.choice[d.edge]?];
        let idx = if d.forward { p.first } else { self.s.r() - p.last };
        Some((idx, self.s.slopes_along(d)[idx]))
    }

    fn vertex_ok(&self, v: usize) -> bool {
        let g = self.s.model();
        let inc = g.incident(v);
        let assigned: Vec<Option<(usize, i64)>> = (0..inc.len()).map(|k| self.axis_index(v, k)).collect();
        let pt = GraphPoint::Vertex(v);
        let mut budget = self.d.get(&pt) - self.e_div.get(&pt);
        for (k, a) in assigned.iter().enumerate() {
            budget -= match a {
                Some((_, sl)) => *sl,
                None => self.s.slopes_along(inc[k])[0],
            };
        }
        if budget < 0 {
            return false;
        }
        self.jumps[v]
            .iter()
            .any(|j| assigned.iter().enumerate().all(|(k, a)| a.map_or(true, |(i, _)| j[k] == i)))
    }

    fn build(&self) -> PLFunction {
        let g = self.s.model();
        let edges = (0..g.edge_count())
            .map(|e| {
                let p = &self.profiles[e][self.choice[e].expect("complete")];
                let pos = &self.grid.positions[e];
                let slopes = &self.s.edge_slopes()[e];
                let mut val = self.phi[g.edge(e).u].expect("complete");
                let mut bps = vec![(pos[0], val)];
                for (m, &i) in p.seq.iter().enumerate() {
                    val += (pos[m + 1] - pos[m]) * qi(slopes[i]);
                    bps.push((pos[m + 1], val));
                }
                bps
            })
            .collect();
        PLFunction::from_breakpoints(g, edges).expect("grid function is valid")
    }

    fn run(&mut self, depth: usize, accept: &mut dyn FnMut(&PLFunction) -> bool) -> Step {
        if depth == self.order.len() {
            let f = self.build();
            return if accept(&f) { Step::Found(f) } else { Step::Continue };
        }
        let e = self.order[depth];
        let (u, v) = (self.s.model().edge(e).u, self.s.model().edge(e).v);
        for k in 0..self.profiles[e].len() {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Step::Budget;
            }
            let rise = self.profiles[e][k].rise;
            let set = match (self.phi[u], self.phi[v]) {
                (Some(a), Some(b)) => {
                    if b - a != rise {
                        continue;
                    }
                    None
                }
                (Some(a), None) => Some((v, a + rise)),
                (None, Some(b)) => Some((u, b - rise)),
                (None, None) => unreachable!("edges are ordered from the root"),
            };
            self.choice[e] = Some(k);
            if let Some((w, val)) = set {
                self.phi[w] = Some(val);
            }
            if self.vertex_ok(u) && self.vertex_ok(v) {
                match self.run(depth + 1, accept) {
                    Step::Continue => {}
                    other => {
                        self.choice[e] = None;
                        if let Some((w, _)) = set {
                            self.phi[w] = None;
                        }
                        return other;
                    }
                }
            }
            self.choice[e] = None;
            if let Some((w, _)) = set {
                self.phi[w] = None;
            }
        }
        Step::Continue
    }
}

/// Edges in breadth-first order from vertex 0, so that each edge after the
/// first touches an earlier one.
fn bfs_edge_order(s: &SlopeStructure) -> Vec<usize> {
    let g = s.model();
    let mut seen_v = vec![false; g.vertex_count()];
    let mut seen_e = vec![false; g.edge_count()];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([0]);
    seen_v[0] = true;
    while let Some(x) = queue.pop_front() {
        for d in g.incident(x) {
            if !seen_e[d.edge] {
                seen_e[d.edge] = true;
                order.push(d.edge);
                let y = g.head(d);
                if !seen_v[y] {
                    seen_v[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    order
}

/// Searches for a function `f` on the model, with slopes changing only at
/// grid points, such that `f` is compatible, `ρ_x(δ_x f) ≥ E(x)` at every
/// point and `D + div(f) - E ≥ 0`, and `accept(f)` holds. The function is
/// normalized to vanish at vertex 0.
pub fn search_witness(
    s: &SlopeStructure,
    d: &Divisor,
    e_div: &Divisor,
    grid: &Grid,
    limits: SearchLimits,
    accept: &mut dyn FnMut(&PLFunction) -> bool,
) -> SearchOutcome {
    let g = s.model();
    // Grid points off the grid cannot carry E.
    if e_div.support().any(|p| !grid.contains(p)) {
        return SearchOutcome::Exhausted;
    }
    let mut profiles = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        match edge_profiles(s, d, e_div, grid, e, &limits) {
            Some(p) => profiles.push(p),
            None => return SearchOutcome::BudgetExceeded,
        }
    }
    let jumps = (0..g.vertex_count())
        .map(|v| {
            let rf = s.vertex_rank(v);
            let ev = e_div.get(&GraphPoint::Vertex(v));
            rf.jumps().into_vec().into_iter().filter(|j| rf.value(j) >= ev).collect()
        })
        .collect();
    let mut phi = vec![None; g.vertex_count()];
    phi[0] = Some(Q::zero());
    let mut dfs = Dfs {
        s,
        d,
        e_div,
        grid,
        order: bfs_edge_order(s),
        profiles,
        jumps,
        choice: vec![None; g.edge_count()],
        phi,
        nodes: 0,
        max_nodes: limits.max_nodes,
    };
    if g.edge_count() == 0 {
        // A single vertex: only the constant function.
        let f = PLFunction::zero(g);
        return if dfs.vertex_ok(0) && accept(&f) {
            SearchOutcome::Found(f)
        } else {
            SearchOutcome::Exhausted
        };
    }
    match dfs.run(0, accept) {
        Step::Found(f) => SearchOutcome::Found(f),
        Step::Continue => SearchOutcome::Exhausted,
        Step::Budget => SearchOutcome::BudgetExceeded,
    }
}
