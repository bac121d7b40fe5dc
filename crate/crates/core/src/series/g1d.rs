use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::hypercube::{Cube, RankFunction};
use crate::metricgraph::rational::format_q;
use crate::metricgraph::{refine_model, Direction, Divisor, Edge, GraphPoint, MetricGraph, PLFunction, Refinement, Q};
use crate::slopes::{in_rat_d_s, SlopeStructure};

use super::{grid_points, SeriesError, TropModule};

/// A finite morphism from `source` to the tree `target`, linear on each
/// source edge with a positive integer relative slope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicMorphism {
    pub source: MetricGraph,
    pub target: MetricGraph,
    pub vertex_map: Vec<usize>,
    /// Per source edge: target edge and relative slope.
    pub edge_map: Vec<(usize, i64)>,
}

impl HarmonicMorphism {
    /// Whether source edge `e` runs along its target edge in the forward
    /// direction.
    fn forward(&self, e: usize) -> bool {
        let t = self.target.edge(self.edge_map[e].0);
        self.vertex_map[self.source.edge(e).u] == t.u
    }

    /// Image of a direction at a source vertex.
    pub fn image_direction(&self, d: Direction) -> Direction {
        Direction {
            edge: self.edge_map[d.edge].0,
            forward: self.forward(d.edge) == d.forward,
        }
    }

    pub fn map_point(&self, p: &GraphPoint) -> GraphPoint {
        match p {
            GraphPoint::Vertex(x) => GraphPoint::Vertex(self.vertex_map[*x]),
            GraphPoint::Edge { edge, offset } => {
                let (t, mu) = self.edge_map[*edge];
                let s = *offset * Q::from(mu as i128);
                let off = if self.forward(*edge) {
                    s
                } else {
                    self.target.edge(t).len - s
                };
                GraphPoint::Edge { edge: t, offset: off }
            }
        }
    }

    /// Sum of relative slopes over the directions at `x` mapping to `d`.
    fn weight(&self, x: usize, d: Direction) -> i64 {
        self.source
            .incident(x)
            .into_iter()
            .filter(|sd| self.image_direction(*sd) == d)
            .map(|sd| self.edge_map[sd.edge].1)
            .sum()
    }

    pub fn local_degree(&self, x: usize) -> i64 {
        let y = self.vertex_map[x];
        self.target.incident(y).first().map_or(0, |d| self.weight(x, *d))
    }

    /// Checks the edge data and local degree balance; returns the degree.
    pub fn validate(&self) -> Result<i64, SeriesError> {
        let bad = |s: String| Err(SeriesError::BadMorphism(s));
        if self.vertex_map.len() != self.source.vertex_count() || self.edge_map.len() != self.source.edge_count() {
            return bad("map sizes do not match the source".into());
        }
        if !self.target.is_tree() || self.target.edge_count() == 0 {
            return bad("target is not a tree with an edge".into());
        }
        if self.vertex_map.iter().any(|&y| y >= self.target.vertex_count()) {
            return bad("vertex image out of range".into());
        }
        for (e, edge) in self.source.edges().iter().enumerate() {
            let (t, mu) = self.edge_map[e];
            if t >= self.target.edge_count() || mu < 1 {
                return bad(format!("edge {e}: bad target edge or slope"));
            }
            let te = self.target.edge(t);
            let (a, b) = (self.vertex_map[edge.u], self.vertex_map[edge.v]);
            if !((a == te.u && b == te.v) || (a == te.v && b == te.u)) {
                return bad(format!("edge {e}: endpoints do not map to the target edge"));
            }
            if te.len != edge.len * Q::from(mu as i128) {
                return bad(format!("edge {e}: length times slope differs from the target length"));
            }
        }
        for x in 0..self.source.vertex_count() {
            let y = self.vertex_map[x];
            let ws: Vec<i64> = self.target.incident(y).into_iter().map(|d| self.weight(x, d)).collect();
            if ws.iter().any(|w| *w != ws[0] || *w <= 0) {
                return Err(SeriesError::NotHarmonic { vertex: x });
            }
        }
        Ok((0..self.source.edge_count())
            .filter(|&e| self.edge_map[e].0 == 0)
            .map(|e| self.edge_map[e].1)
            .sum())
    }

    /// Pulls back a function on the target along the morphism.
    pub fn pull_back(&self, f: &PLFunction) -> PLFunction {
        let edges = (0..self.source.edge_count())
            .map(|e| {
                let (t, mu) = self.edge_map[e];
                let mu = Q::from(mu as i128);
                let len = self.target.edge(t).len;
                let mut bps: Vec<(Q, Q)> = f
                    .breakpoints(t)
                    .iter()
                    .map(|(tau, val)| {
                        if self.forward(e) {
                            (*tau / mu, *val)
                        } else {
                            ((len - *tau) / mu, *val)
                        }
                    })
                    .collect();
                bps.sort();
                bps
            })
            .collect();
        PLFunction::from_breakpoints(&self.source, edges).expect("pullback of a valid function")
    }

    /// The morphism between refinements of source and target. Every vertex
    /// of `src` must map to a vertex of `tgt`.
    fn refined(&self, src: &Refinement, tgt: &Refinement) -> HarmonicMorphism {
        let vertex_map: Vec<usize> = src
            .vertex_origin
            .iter()
            .map(|p| match tgt.to_refined(&self.map_point(p)) {
                GraphPoint::Vertex(y) => y,
                other => panic!("vertex image {other:?} is not a vertex"),
            })
            .collect();
        let edge_map = src
            .refined
            .edges()
            .iter()
            .enumerate()
            .map(|(re, edge)| {
                let (oe, _) = src.piece_origin(re);
                let (a, b) = (vertex_map[edge.u], vertex_map[edge.v]);
                let t = tgt
                    .refined
                    .edges()
                    .iter()
                    .position(|te| (te.u == a && te.v == b) || (te.u == b && te.v == a))
                    .expect("image edge exists");
                (t, self.edge_map[oe].1)
            })
            .collect();
        HarmonicMorphism {
            source: src.refined.clone(),
            target: tgt.refined.clone(),
            vertex_map,
            edge_map,
        }
    }
}

/// A pulled-back series with the refined morphism it came from.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub module: TropModule,
    /// From the input source to the model of the module.
    pub refinement: Refinement,
    /// From the input target to the refined tree.
    pub target_refinement: Refinement,
    /// The morphism between the refined models.
    pub morphism: HarmonicMorphism,
    /// The base point, on the model of the module.
    pub base: GraphPoint,
    pub degree: i64,
}

/// `x ↦ d(y0, x ∧ y)` on a tree: the distance from `y0` to the point where
/// the paths to `x` and to `y` part.
fn tree_function(t: &MetricGraph, y0: &GraphPoint, y: &GraphPoint) -> PLFunction {
    let a = PLFunction::distance_from(t, y0);
    let b = PLFunction::distance_from(t, y);
    let c = t.distance(y0, y);
    a.sub(&b)
        .expect("same tree")
        .add_constant(c)
        .scale_q(Q::new(1, 2))
        .expect("integral slopes on a tree")
}

/// Rank function of order one whose nonzero jumps are the indicator vectors
/// of the classes of `classes` (one class id per axis).
fn partition_rank(classes: &[usize]) -> RankFunction {
    let delta = classes.len();
    let values: Vec<i64> = Cube::new(delta, 1)
        .points()
        .map(|p| {
            let support: BTreeSet<usize> = p.iter().enumerate().filter(|(_, x)| **x > 0).map(|(i, _)| classes[i]).collect();
            match support.len() {
                0 => 1,
                1 => 0,
                _ => -1,
            }
        })
        .collect();
    RankFunction::new(delta, 1, values).expect("partition rank functions are valid")
}

/// The pullback of the tree's g¹_1 based at `ψ(x0)`, generated by the
/// pullbacks of `x ↦ d(ψ(x0), x ∧ y)` for `y` on the grid of denominator
/// `tree_grid` of the target.
pub fn pullback_from_tree(psi: &HarmonicMorphism, x0: &GraphPoint, tree_grid: u64) -> Result<Pullback, SeriesError> {
    let degree = psi.validate()?;
    let y0 = psi.map_point(x0);

    // Subdivide the target at the base and at midpoints of edges carrying
    // parallel source edges, then the source at all preimages.
    let mut tpoints: Vec<GraphPoint> = Vec::new();
    if matches!(y0, GraphPoint::Edge { .. }) {
        tpoints.push(y0.clone());
    }
    let mut pairs: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in psi.source.edges() {
        *pairs.entry((e.u.min(e.v), e.u.max(e.v))).or_default() += 1;
    }
    for (i, e) in psi.source.edges().iter().enumerate() {
        if pairs[&(e.u.min(e.v), e.u.max(e.v))] > 1 {
            let t = psi.edge_map[i].0;
            tpoints.push(GraphPoint::Edge {
                edge: t,
                offset: psi.target.edge(t).len / Q::from(2),
            });
        }
    }
    let mut spoints: Vec<GraphPoint> = Vec::new();
    for p in &tpoints {
        if let GraphPoint::Edge { edge: t, offset } = p {
            for (e, (te, mu)) in psi.edge_map.iter().enumerate() {
                if te == t {
                    let mu = Q::from(*mu as i128);
                    let s = if psi.forward(e) {
                        *offset / mu
                    } else {
                        (psi.target.edge(*t).len - *offset) / mu
                    };
                    spoints.push(GraphPoint::Edge { edge: e, offset: s });
                }
            }
        }
    }
    let tref = refine_model(&psi.target, &tpoints);
    let sref = refine_model(&psi.source, &spoints);
    let phi = psi.refined(&sref, &tref);
    phi.validate()?;
    let tree = &phi.target;
    let src = &phi.source;
    let base_t = tref.to_refined(&y0);
    let base = sref.to_refined(x0);

    let dist = tree.vertex_distances(&base_t);
    let mut edge_slopes = Vec::with_capacity(src.edge_count());
    for e in 0..src.edge_count() {
        let (t, mu) = phi.edge_map[e];
        let te = tree.edge(t);
        let away_forward = dist[te.v] > dist[te.u];
        edge_slopes.push(if phi.forward(e) == away_forward {
            vec![0, mu]
        } else {
            vec![-mu, 0]
        });
    }
    let vertex_ranks = (0..src.vertex_count())
        .map(|x| {
            let classes: Vec<usize> = src
                .incident(x)
                .into_iter()
                .map(|d| {
                    let img = phi.image_direction(d);
                    img.edge * 2 + img.forward as usize
                })
                .collect();
            partition_rank(&classes)
        })
        .collect();
    let structure = SlopeStructure::new(src.clone(), 1, edge_slopes, vertex_ranks)?;

    let base_vertex = match base_t {
        GraphPoint::Vertex(y) => y,
        _ => unreachable!("the base is a vertex of the refined tree"),
    };
    let divisor = Divisor::from_pairs(
        (0..src.vertex_count())
            .filter(|&x| phi.vertex_map[x] == base_vertex)
            .map(|x| (GraphPoint::Vertex(x), phi.local_degree(x))),
    );

    let mut tree_fns: Vec<PLFunction> = Vec::new();
    let refined_grid: Vec<GraphPoint> = grid_points(&psi.target, tree_grid)
        .iter()
        .map(|p| tref.to_refined(p))
        .chain((0..tree.vertex_count()).map(GraphPoint::Vertex))
        .collect();
    for y in &refined_grid {
        let f = tree_function(tree, &base_t, y);
        if !tree_fns.contains(&f) {
            tree_fns.push(f);
        }
    }
    let generators = tree_fns.iter().map(|f| phi.pull_back(f)).collect();
    let module = TropModule::new(structure, divisor, generators)?;
    Ok(Pullback {
        module,
        refinement: sref,
        target_refinement: tref,
        morphism: phi,
        base,
        degree,
    })
}

/// The quotient of a rank-one series: points are identified when every
/// generator takes the same value on them.
#[derive(Debug, Clone)]
pub struct QuotientTree {
    pub tree: MetricGraph,
    /// The projection, as a harmonic morphism from a refinement of the
    /// series' model onto the tree.
    pub projection: HarmonicMorphism,
    /// Successive refinements from the series' model to the source of the
    /// projection.
    pub refinements: Vec<Refinement>,
    pub base: GraphPoint,
    pub degree: i64,
}

impl QuotientTree {
    /// Image of a point of the series' model.
    pub fn project(&self, p: &GraphPoint) -> GraphPoint {
        self.projection.map_point(&self.to_source(p))
    }

    /// A point of the series' model on the source of the projection.
    pub fn to_source(&self, p: &GraphPoint) -> GraphPoint {
        refinement_tail(&self.refinements, p)
    }

    /// Preimages of a tree point on the refined model, with multiplicities.
    pub fn fiber(&self, y: &GraphPoint) -> Vec<(GraphPoint, i64)> {
        let psi = &self.projection;
        match y {
            GraphPoint::Vertex(t) => (0..psi.source.vertex_count())
                .filter(|&x| psi.vertex_map[x] == *t)
                .map(|x| (GraphPoint::Vertex(x), psi.local_degree(x)))
                .collect(),
            GraphPoint::Edge { edge, offset } => (0..psi.source.edge_count())
                .filter(|&e| psi.edge_map[e].0 == *edge)
                .map(|e| {
                    let mu = Q::from(psi.edge_map[e].1 as i128);
                    let s = if psi.forward(e) {
                        *offset / mu
                    } else {
                        (self.tree.edge(*edge).len - *offset) / mu
                    };
                    (GraphPoint::Edge { edge: e, offset: s }, psi.edge_map[e].1)
                })
                .collect(),
        }
    }

    /// The tree with its valence-two vertices suppressed, except the image
    /// of the base point.
    pub fn coarse_tree(&self) -> MetricGraph {
        let t = &self.tree;
        let base = match self.project(&self.base) {
            GraphPoint::Vertex(y) => Some(y),
            _ => None,
        };
        let keep: Vec<bool> = (0..t.vertex_count())
            .map(|v| t.valence(v) != 2 || Some(v) == base)
            .collect();
        let ids: Vec<usize> = keep
            .iter()
            .scan(0, |n, &k| {
                let id = *n;
                *n += k as usize;
                Some(id)
            })
            .collect();
        let mut edges = Vec::new();
        let mut used = vec![false; t.edge_count()];
        for v in (0..t.vertex_count()).filter(|&v| keep[v]) {
            for d in t.incident(v) {
                if used[d.edge] {
                    continue;
                }
                let (mut d, mut len) = (d, Q::zero());
                loop {
                    used[d.edge] = true;
                    len += t.edge(d.edge).len;
                    let w = t.head(d);
                    if keep[w] {
                        edges.push(Edge {
                            u: ids[v],
                            v: ids[w],
                            len,
                        });
                        break;
                    }
                    d = t.incident(w).into_iter().find(|x| x.edge != d.edge).expect("valence two");
                }
            }
        }
        let names = (0..t.vertex_count()).filter(|&v| keep[v]).map(|v| t.name(v).to_string()).collect();
        MetricGraph::new(names, edges).expect("suppression keeps a tree")
    }

    pub fn to_dot(&self) -> String {
        self.coarse_tree().to_dot("quotient")
    }
}

fn values_at(gens: &[PLFunction], p: &GraphPoint) -> Vec<Q> {
    gens.iter().map(|h| h.eval(p)).collect()
}

/// Parameter `λ ∈ (0, 1)` with `p = a + λ (b - a)`, if any.
fn inside(a: &[Q], b: &[Q], p: &[Q]) -> Option<Q> {
    let mut lambda: Option<Q> = None;
    for ((x, y), z) in a.iter().zip(b).zip(p) {
        let d = *y - *x;
        if d.is_zero() {
            if z != x {
                return None;
            }
            continue;
        }
        let l = (*z - *x) / d;
        match lambda {
            None => lambda = Some(l),
            Some(m) if m != l => return None,
            _ => {}
        }
    }
    lambda.filter(|l| *l > Q::zero() && *l < Q::from(1))
}

fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &(y, ei) in &adj[x] {
                if parent[x].map(|(_, pe)| pe) == Some(ei) {
                    continue;
                }
                if seen[y] {
                    // Walk both ends up to the common ancestor.
                    let path = |mut z: usize| {
                        let mut p = vec![z];
                        while let Some((q, _)) = parent[z] {
                            p.push(q);
                            z = q;
                        }
                        p
                    };
                    let (px, py) = (path(x), path(y));
                    let common = px.iter().find(|z| py.contains(z)).copied().unwrap_or(s);
                    let mut cycle: Vec<usize> = px.iter().copied().take_while(|z| *z != common).collect();
                    cycle.push(common);
                    let back: Vec<usize> = py.iter().copied().take_while(|z| *z != common).collect();
                    cycle.extend(back.into_iter().rev());
                    return cycle;
                }
                seen[y] = true;
                parent[y] = Some((x, ei));
                stack.push(y);
            }
        }
    }
    Vec::new()
}

/// Classifies an effective rank-one series as the pullback of the g¹_1 of
/// its quotient tree, based at the image of `x0`.
pub fn classify_g1d(m: &TropModule, x0: &GraphPoint) -> Result<QuotientTree, SeriesError> {
    if m.r() != 1 {
        return Err(SeriesError::NotRankOne(m.r()));
    }
    // Work with M(-f_{x0}) so that D is x0-reduced.
    let (m, pre) = if m.is_reduced_at(x0) {
        (m.clone(), Refinement::identity(m.graph()))
    } else {
        m.modify(&m.f_v(x0))?
    };
    let x0 = pre.to_refined(x0);
    let mut points: Vec<GraphPoint> = m.generators().iter().flat_map(|h| h.interior_breakpoints()).collect();
    points.push(x0.clone());
    let (mut cur, first) = m.refine(&points);
    let mut chain = vec![pre, first];

    // Split edges at vertex images lying inside their image segments.
    loop {
        let g = cur.graph();
        let imgs: BTreeSet<Vec<Q>> = (0..g.vertex_count())
            .map(|x| values_at(cur.generators(), &GraphPoint::Vertex(x)))
            .collect();
        let mut cuts = Vec::new();
        for (e, edge) in g.edges().iter().enumerate() {
            let a = values_at(cur.generators(), &GraphPoint::Vertex(edge.u));
            let b = values_at(cur.generators(), &GraphPoint::Vertex(edge.v));
            if a == b {
                return Err(SeriesError::NotRefined(format!("every generator is constant on edge {e}")));
            }
            for p in &imgs {
                if let Some(l) = inside(&a, &b, p) {
                    cuts.push(GraphPoint::Edge {
                        edge: e,
                        offset: l * edge.len,
                    });
                }
            }
        }
        if cuts.is_empty() {
            break;
        }
        let (next, r) = cur.refine(&cuts);
        cur = next;
        chain.push(r);
    }

    let g = cur.graph().clone();
    let mut ids: BTreeMap<Vec<Q>, usize> = BTreeMap::new();
    let vmap: Vec<usize> = (0..g.vertex_count())
        .map(|x| {
            let k = values_at(cur.generators(), &GraphPoint::Vertex(x));
            let n = ids.len();
            *ids.entry(k).or_insert(n)
        })
        .collect();
    let mut tedges: Vec<Edge> = Vec::new();
    let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut emap = Vec::with_capacity(g.edge_count());
    for (e, edge) in g.edges().iter().enumerate() {
        let sl = &cur.structure().edge_slopes()[e];
        let mu = sl[sl.len() - 1] - sl[0];
        let len = edge.len * Q::from(mu as i128);
        let (a, b) = (vmap[edge.u], vmap[edge.v]);
        let key = (a.min(b), a.max(b));
        let t = match lookup.get(&key) {
            Some(&t) => {
                if tedges[t].len != len {
                    return Err(SeriesError::NotRefined(format!(
                        "edge {e} glues with length {} onto a tree edge of length {}",
                        format_q(&len),
                        format_q(&tedges[t].len)
                    )));
                }
                t
            }
            None => {
                tedges.push(Edge { u: a, v: b, len });
                lookup.insert(key, tedges.len() - 1);
                tedges.len() - 1
            }
        };
        emap.push((t, mu));
    }
    let n = ids.len();
    if tedges.len() + 1 != n {
        let pairs: Vec<(usize, usize)> = tedges.iter().map(|e| (e.u, e.v)).collect();
        return Err(SeriesError::QuotientNotTree(find_cycle(n, &pairs)));
    }
    let names = (0..n).map(|i| format!("t{i}")).collect();
    let tree = MetricGraph::new(names, tedges).map_err(|e| SeriesError::NotRefined(e.to_string()))?;
    let projection = HarmonicMorphism {
        source: g.clone(),
        target: tree.clone(),
        vertex_map: vmap,
        edge_map: emap,
    };
    let degree = projection.validate().map_err(|e| SeriesError::NotRefined(e.to_string()))?;
    if degree != m.divisor().degree() {
        return Err(SeriesError::NotRefined(format!(
            "projection has degree {degree}, the divisor {}",
            m.divisor().degree()
        )));
    }

    let base = projection.map_point(&refinement_tail(&chain[1..], &x0));
    // Each generator descends to the tree's g¹_1 based at the image of x0.
    let GraphPoint::Vertex(b) = base else {
        unreachable!("x0 is a vertex of the refined model")
    };
    let dist = tree.vertex_distances(&base);
    let slopes = tree
        .edges()
        .iter()
        .map(|e| if dist[e.v] > dist[e.u] { vec![0, 1] } else { vec![-1, 0] })
        .collect();
    let ranks = (0..tree.vertex_count()).map(|v| RankFunction::standard(tree.valence(v), 1)).collect();
    let ts = SlopeStructure::new(tree.clone(), 1, slopes, ranks)?;
    let td = Divisor::point(GraphPoint::Vertex(b), 1);
    for (i, h) in cur.generators().iter().enumerate() {
        let down = descend(&projection, h);
        if !in_rat_d_s(&ts, &td, &down) {
            return Err(SeriesError::NotRefined(format!("generator {i} does not descend to the tree's g¹_1")));
        }
    }
    Ok(QuotientTree {
        tree,
        projection,
        refinements: chain,
        base,
        degree,
    })
}

fn refinement_tail(chain: &[Refinement], p: &GraphPoint) -> GraphPoint {
    chain.iter().fold(p.clone(), |q, r| r.to_refined(&q))
}

/// The function on the tree induced by a function constant on fibers.
fn descend(psi: &HarmonicMorphism, h: &PLFunction) -> PLFunction {
    let t = &psi.target;
    let edges = (0..t.edge_count())
        .map(|te| {
            let e = psi.edge_map.iter().position(|(x, _)| *x == te).expect("surjective");
            let mu = Q::from(psi.edge_map[e].1 as i128);
            let len = t.edge(te).len;
            let mut bps: Vec<(Q, Q)> = h
                .breakpoints(e)
                .iter()
                .map(|(s, v)| {
                    if psi.forward(e) {
                        (*s * mu, *v)
                    } else {
                        (len - *s * mu, *v)
                    }
                })
                .collect();
            bps.sort();
            bps
        })
        .collect();
    PLFunction::from_breakpoints(t, edges).expect("descended function is continuous")
}

/// A random finite harmonic morphism onto a random tree with at most four
/// vertices and integer edge lengths: fibers over tree vertices carry random
/// compositions of the degree, and the source edges over each tree edge
/// come from the north-west corner rule between the two compositions.
pub fn random_harmonic_morphism<R: Rng + ?Sized>(rng: &mut R, max_degree: i64, max_edges: usize) -> HarmonicMorphism {
    loop {
        let k = rng.gen_range(2..=4usize);
        let tedges: Vec<Edge> = (1..k)
            .map(|i| Edge {
                u: rng.gen_range(0..i),
                v: i,
                len: Q::from(rng.gen_range(1..=3i128)),
            })
            .collect();
        let target = MetricGraph::new((0..k).map(|i| format!("y{i}")).collect(), tedges).expect("a tree");
        let d = rng.gen_range(1..=max_degree);
        let mut names = Vec::new();
        let mut vertex_map = Vec::new();
        let mut fibers: Vec<Vec<(usize, i64)>> = Vec::new();
        for y in 0..k {
            let mut parts = Vec::new();
            let mut left = d;
            while left > 0 {
                let p = rng.gen_range(1..=left);
                parts.push(p);
                left -= p;
            }
            let fiber = parts
                .into_iter()
                .enumerate()
                .map(|(i, p)| {
                    names.push(format!("x{y}_{i}"));
                    vertex_map.push(y);
                    (names.len() - 1, p)
                })
                .collect();
            fibers.push(fiber);
        }
        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        for (t, te) in target.edges().iter().enumerate() {
            let mut a = fibers[te.u].clone();
            let mut b = fibers[te.v].clone();
            a.shuffle(rng);
            b.shuffle(rng);
            let (mut i, mut j) = (0, 0);
            let (mut ra, mut rb) = (a[0].1, b[0].1);
            while i < a.len() && j < b.len() {
                let mu = ra.min(rb);
                edges.push(Edge {
                    u: a[i].0,
                    v: b[j].0,
                    len: te.len / Q::from(mu as i128),
                });
                edge_map.push((t, mu));
                ra -= mu;
                rb -= mu;
                if ra == 0 {
                    i += 1;
                    ra = a.get(i).map_or(0, |x| x.1);
                }
                if rb == 0 {
                    j += 1;
                    rb = b.get(j).map_or(0, |x| x.1);
                }
            }
        }
        if edges.len() > max_edges {
            continue;
        }
        let Ok(source) = MetricGraph::new(names, edges) else { continue };
        return HarmonicMorphism {
            source,
            target,
            vertex_map,
            edge_map,
        };
    }
}

/// Isometry test for metric trees, ignoring valence-two vertices.
pub fn trees_isometric(a: &MetricGraph, b: &MetricGraph) -> bool {
    fn adjacency(t: &MetricGraph) -> Vec<BTreeMap<usize, Q>> {
        let mut adj: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); t.vertex_count()];
        for e in t.edges() {
            adj[e.u].insert(e.v, e.len);
            adj[e.v].insert(e.u, e.len);
        }
        loop {
            let Some(x) = (0..adj.len()).find(|&x| adj[x].len() == 2) else { break };
            let mut it = adj[x].clone().into_iter();
            let (p, lp) = it.next().unwrap();
            let (q, lq) = it.next().unwrap();
            adj[p].remove(&x);
            adj[q].remove(&x);
            adj[x].clear();
            adj[p].insert(q, lp + lq);
            adj[q].insert(p, lp + lq);
        }
        adj
    }
    fn canon(adj: &[BTreeMap<usize, Q>], x: usize, parent: Option<usize>) -> String {
        let mut parts: Vec<String> = adj[x]
            .iter()
            .filter(|(y, _)| Some(**y) != parent)
            .map(|(y, l)| format!("{}:{}", format_q(l), canon(adj, *y, Some(x))))
            .collect();
        parts.sort();
        format!("({})", parts.join(","))
    }
    fn signature(t: &MetricGraph) -> Option<String> {
        if !t.is_tree() {
            return None;
        }
        let adj = adjacency(t);
        let live: Vec<usize> = (0..adj.len()).filter(|&x| !adj[x].is_empty()).collect();
        if live.is_empty() {
            return Some("()".into());
        }
        live.iter().map(|&x| canon(&adj, x, None)).min()
    }
    match (signature(a), signature(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}
