use super::*;
use crate::examples;
use crate::metricgraph::{q, qi, Direction, Divisor, Edge, GraphPoint, MetricGraph, PLFunction, Q};
use crate::slopes::{crude_rank_check, in_rat_d_s, is_compatible, SearchLimits, VerdictStatus};

fn path_tree(lens: &[i64]) -> MetricGraph {
    let names = (0..=lens.len()).map(|i| format!("p{i}")).collect();
    let edges = lens
        .iter()
        .enumerate()
        .map(|(i, l)| Edge {
            u: i,
            v: i + 1,
            len: qi(*l),
        })
        .collect();
    MetricGraph::new(names, edges).unwrap()
}

fn identity(t: &MetricGraph) -> HarmonicMorphism {
    HarmonicMorphism {
        source: t.clone(),
        target: t.clone(),
        vertex_map: (0..t.vertex_count()).collect(),
        edge_map: (0..t.edge_count()).map(|e| (e, 1)).collect(),
    }
}

/// The g¹_1 of a tree based at vertex 0, generated on the grid of
/// denominator `n`.
fn tree_series(t: &MetricGraph, n: u64) -> TropModule {
    pullback_from_tree(&identity(t), &GraphPoint::Vertex(0), n).unwrap().module
}

/// Two vertices joined by two unit edges, mapped onto a unit segment.
fn two_cycle_cover() -> HarmonicMorphism {
    let source = MetricGraph::from_named(&["u", "v"], &[("u", "v", qi(1)), ("u", "v", qi(1))]).unwrap();
    let target = MetricGraph::from_named(&["a", "b"], &[("a", "b", qi(1))]).unwrap();
    HarmonicMorphism {
        source,
        target,
        vertex_map: vec![0, 1],
        edge_map: vec![(0, 1), (0, 1)],
    }
}

fn theta_triple_cover() -> HarmonicMorphism {
    let source =
        MetricGraph::from_named(&["u", "v"], &[("u", "v", qi(2)), ("u", "v", qi(2)), ("u", "v", qi(2))]).unwrap();
    let target = MetricGraph::from_named(&["a", "b"], &[("a", "b", qi(2))]).unwrap();
    HarmonicMorphism {
        source,
        target,
        vertex_map: vec![0, 1],
        edge_map: vec![(0, 1), (0, 1), (0, 1)],
    }
}

fn first_grd_module() -> TropModule {
    let ex = examples::first_grd();
    let v = crude_rank_check(&ex.structure, &ex.divisor, 4, SearchLimits::default()).unwrap();
    assert_eq!(v.status, VerdictStatus::Verified);
    module_from_witnesses(&ex.structure, &ex.divisor, &v).unwrap()
}

/// Truncations of `Rat(D, S)` for the finiteness counterexample: the tent
/// at `v`, the constants, and `f_1, …, f_n`, where `f_i` is `-1` at `u`,
/// rises with slope one to `x`, stays at zero up to `3/2 + 1/i` and then
/// falls with slope one.
fn truncated_counterexample(n: i64) -> (TropModule, PLFunction) {
    let ex = examples::finiteness_counterexample();
    let g = ex.structure.model().clone();
    let mut gens = vec![
        PLFunction::zero(&g),
        PLFunction::from_edge_slopes(&g, 1, qi(0), &[vec![(q(3, 2), 1)], vec![(q(3, 2), -1)]]).unwrap(),
    ];
    for i in 1..=n {
        let flat = Q::new(1, i as i128);
        gens.push(
            PLFunction::from_edge_slopes(
                &g,
                0,
                qi(-1),
                &[vec![(qi(1), 1), (q(1, 2), 0)], vec![(flat, 0), (q(3, 2) - flat, -1)]],
            )
            .unwrap(),
        );
    }
    let fx =
        PLFunction::from_edge_slopes(&g, 0, qi(-1), &[vec![(qi(1), 1), (q(1, 2), 0)], vec![(q(3, 2), -1)]]).unwrap();
    (TropModule::new(ex.structure, ex.divisor, gens).unwrap(), fx)
}

// Membership.

#[test]
fn generators_are_members_with_zero_constant() {
    let m = tree_series(&path_tree(&[1, 2]), 1);
    for (j, h) in m.generators().iter().enumerate() {
        let c = m.membership(h).unwrap();
        assert!(c.member);
        assert_eq!(c.constants[j], qi(0));
    }
    let a = m.generators()[1].add_constant(qi(1));
    let b = &m.generators()[2];
    assert!(m.contains(&a.tropical_min(b).unwrap()));
}

#[test]
fn limit_function_is_outside_every_truncation() {
    for n in [1, 2, 5, 10] {
        let (m, fx) = truncated_counterexample(n);
        assert!(!m.contains(&fx));
        assert!(!is_compatible(m.structure(), &fx));
        // The truncation's own minimum at x is a member and differs from f_x.
        let x = GraphPoint::Edge { edge: 0, offset: qi(1) };
        let mine = m.f_v(&x);
        assert!(m.contains(&mine));
        assert_ne!(mine, fx);
    }
}

#[test]
fn f_v_of_the_counterexample_is_the_tent() {
    let (m, _) = truncated_counterexample(4);
    let g = m.graph();
    let fv = m.f_v(&GraphPoint::Vertex(1));
    assert_eq!(fv.vertex_value(1), qi(0));
    assert_eq!(fv.slopes_at(g, &GraphPoint::Vertex(1)), vec![-1, -1]);
    assert!(in_rat_d_s(m.structure(), m.divisor(), &fv));
}

// Extremals.

#[test]
fn extremals_absorb_shifts_and_minima() {
    let m = tree_series(&path_tree(&[2]), 1);
    let h1 = m.generators()[1].clone();
    let h2 = m.generators()[2].clone();
    let s = m.structure().clone();
    let d = m.divisor().clone();
    let shifted = TropModule::new(s.clone(), d.clone(), vec![h1.clone(), h1.add_constant(qi(1))]).unwrap();
    assert_eq!(shifted.extremals(), vec![0]);
    let mins = TropModule::new(s, d, vec![h1.clone(), h2.clone(), h1.tropical_min(&h2).unwrap()]).unwrap();
    assert_eq!(mins.extremals(), vec![0, 1]);
}

#[test]
fn extremals_match_pairwise_removal_on_a_path() {
    let m = tree_series(&path_tree(&[1, 2]), 2);
    let ext = m.extremals();
    // Oracle: a generator is redundant when removing it leaves the other
    // generators spanning it.
    let gens = m.generators();
    let oracle: Vec<usize> = (0..gens.len())
        .filter(|&i| {
            let others: Vec<PLFunction> = (0..gens.len()).filter(|&j| j != i).map(|j| gens[j].clone()).collect();
            !generated_by(&others, &gens[i])
        })
        .collect();
    assert_eq!(ext, oracle);
    // On a path based at one end: the constant and the far end.
    assert_eq!(ext.len(), 2);
}

// Reduced divisors.

#[test]
fn f_v_vanishes_at_v_and_lies_below_normalized_generators() {
    let m = first_grd_module();
    let g = m.graph().clone();
    for p in grid_points(&g, 4) {
        let fv = m.f_v(&p);
        assert_eq!(fv.eval(&p), qi(0));
        for h in m.generators() {
            let diff = h.add_constant(-h.eval(&p)).sub(&fv).unwrap();
            assert!(diff.min_value() >= qi(0));
        }
        assert!(m.contains(&fv));
    }
}

#[test]
fn single_generator_f_v() {
    let m = tree_series(&path_tree(&[2]), 1);
    let h = m.generators()[2].clone();
    let one = TropModule::new(m.structure().clone(), m.divisor().clone(), vec![h.clone()]).unwrap();
    let p = GraphPoint::Edge { edge: 0, offset: qi(1) };
    assert_eq!(one.f_v(&p), h.add_constant(-h.eval(&p)));
}

#[test]
fn first_grd_reduced_at_u_keeps_all_four_chips() {
    let m = first_grd_module();
    let u = GraphPoint::Vertex(0);
    let du = m.reduced_divisor(&u);
    assert_eq!(du.get(&u), 4);
    assert_eq!(du, *m.divisor());
    assert!(find_unsaturated_cut(&m, &u).unwrap().is_none());
}

#[test]
fn tent_module_reduces_to_the_midpoint() {
    // Segment of length 1, D = (0) + (1), slopes -1 < 0 < 1.
    let g = path_tree(&[1]);
    let s = SlopeStructure::new(
        g.clone(),
        2,
        vec![vec![-1, 0, 1]],
        vec![crate::hypercube::RankFunction::standard(1, 2); 2],
    )
    .unwrap();
    let d = Divisor::from_pairs([(GraphPoint::Vertex(0), 1), (GraphPoint::Vertex(1), 1)]);
    let tent = PLFunction::from_edge_slopes(&g, 0, qi(0), &[vec![(q(1, 2), 1), (q(1, 2), -1)]]).unwrap();
    let m = TropModule::new(s, d, vec![PLFunction::zero(&g), tent]).unwrap();
    let mid = GraphPoint::Edge { edge: 0, offset: q(1, 2) };
    assert_eq!(m.reduced_divisor(&mid), Divisor::point(mid.clone(), 2));
}

#[test]
fn coefficient_formula_on_the_tree_series() {
    let t = path_tree(&[1, 2]);
    let m = tree_series(&t, 2);
    let g = m.graph().clone();
    for p in grid_points(&g, 2) {
        let dp = m.reduced_divisor(&p);
        let s0: i64 = g.directions_at(&p).iter().map(|d| m.structure().slopes_along(*d)[0]).sum();
        assert_eq!(dp.get(&p), m.divisor().get(&p) - s0);
        assert!(dp.get(&p) >= 1);
        assert!(dp.is_effective());
    }
}

#[test]
fn reduction_is_idempotent() {
    let m = first_grd_module();
    let x = GraphPoint::Vertex(1);
    let (mx, r) = m.modify(&m.f_v(&x)).unwrap();
    let xr = r.to_refined(&x);
    assert_eq!(mx.reduced_divisor(&xr), *mx.divisor());
    assert!(mx.is_reduced_at(&xr));
}

// Unsaturated cuts.

#[test]
fn unreduced_first_grd_has_a_cut_around_u() {
    let m = first_grd_module();
    let x = GraphPoint::Vertex(1);
    assert!(!m.is_reduced_at(&x));
    let (cut, w) = find_unsaturated_cut(&m, &x).unwrap().expect("a cut");
    assert!(cut.contains(&GraphPoint::Vertex(0)));
    assert!(!cut.contains(&x));
    assert!(m.contains(&w));
    for b in &cut.boundary {
        for (d, s) in &b.out {
            assert!(*s > 0);
            assert!(m.structure().slopes_along(*d).contains(s));
        }
    }
    // After reducing at x there is none.
    let (mx, r) = m.modify(&m.f_v(&x)).unwrap();
    assert!(find_unsaturated_cut(&mx, &r.to_refined(&x)).unwrap().is_none());
}

#[test]
fn min_locus_of_a_nonpositive_member_is_a_cut() {
    let m = first_grd_module();
    let x = GraphPoint::Vertex(2);
    let f = m.f_v(&x);
    let cut = min_locus(m.graph(), &f);
    assert!(!cut.contains(&x));
    assert!(cut.components >= 1);
    assert!(!cut.boundary.is_empty());
}

// Local formula.

#[test]
fn local_step_on_a_tree_moves_the_chip() {
    let t = path_tree(&[2]);
    let m = tree_series(&t, 2);
    let v = GraphPoint::Vertex(0);
    let dir = Direction { edge: 0, forward: true };
    let step = local_reduced_step(&m, &v, dir, q(1, 3)).unwrap();
    let u = GraphPoint::Edge { edge: 0, offset: q(1, 3) };
    assert_eq!(step.point, u);
    assert_eq!(step.divisor, Divisor::point(u.clone(), 1));
    assert_eq!(step.divisor, m.reduced_divisor(&u));
    assert!(matches!(
        local_reduced_step(&m, &v, dir, qi(1)),
        Err(SeriesError::RadiusTooLarge { .. })
    ));
}

#[test]
fn local_step_on_the_two_cycle_moves_two_points() {
    let pb = pullback_from_tree(&two_cycle_cover(), &GraphPoint::Vertex(0), 4).unwrap();
    let m = pb.module;
    let g = m.graph().clone();
    let u = GraphPoint::Vertex(0);
    for d in g.incident(0) {
        let step = local_reduced_step(&m, &u, d, q(1, 8)).unwrap();
        assert_eq!(step.divisor, m.reduced_divisor(&step.point));
        assert_eq!(step.divisor.degree(), 2);
        assert_eq!(step.divisor.support().count(), 2);
        let top = *m.structure().slopes_along(d).last().unwrap();
        assert_eq!(step.divisor.get(&step.point), top);
    }
}

#[test]
fn local_step_agrees_with_direct_reduction_on_first_grd() {
    let m = first_grd_module();
    let g = m.graph().clone();
    for p in grid_points(&g, 4) {
        for d in g.directions_at(&p) {
            match local_reduced_step(&m, &p, d, q(1, 16)) {
                Ok(step) => assert_eq!(step.divisor, m.reduced_divisor(&step.point), "at {p:?} along {d:?}"),
                Err(SeriesError::RadiusTooLarge { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

// Tropical dependence and rank.

#[test]
fn duplicates_are_dependent() {
    let m = tree_series(&path_tree(&[2]), 1);
    let f = m.generators()[1].clone();
    let cs = tropical_dependence(m.graph(), &[f.clone(), f], DependenceLimits::default()).unwrap();
    assert_eq!(cs, Some(vec![qi(0), qi(0)]));
}

#[test]
fn shift_and_minimum_are_dependent() {
    let g = path_tree(&[2]);
    let f = PLFunction::from_edge_slopes(&g, 0, qi(0), &[vec![(qi(2), 1)]]).unwrap();
    let h = PLFunction::from_edge_slopes(&g, 0, qi(1), &[vec![(qi(2), -1)]]).unwrap();
    let fs = vec![f.clone(), f.add_constant(qi(1)), f.tropical_min(&h).unwrap()];
    let cs = tropical_dependence(&g, &fs, DependenceLimits::default()).unwrap().expect("dependent");
    let refs: Vec<&PLFunction> = fs.iter().collect();
    assert!(min_attained_twice(&g, &refs, &cs));
}

#[test]
fn constant_and_identity_are_independent() {
    let g = path_tree(&[1]);
    let f = PLFunction::from_edge_slopes(&g, 0, qi(0), &[vec![(qi(1), 1)]]).unwrap();
    let cs = tropical_dependence(&g, &[PLFunction::zero(&g), f], DependenceLimits::default()).unwrap();
    assert_eq!(cs, None);
}

#[test]
fn tree_series_has_tropical_rank_one() {
    let t = MetricGraph::from_named(
        &["c", "a", "b", "d"],
        &[("c", "a", qi(1)), ("c", "b", qi(2)), ("c", "d", qi(1))],
    )
    .unwrap();
    let m = tree_series(&t, 1);
    let rep = tropical_rank(&m, 2, DependenceLimits::default());
    assert_eq!(rep.rank, Some(1));
}

#[test]
fn constants_have_tropical_rank_zero() {
    let m = tree_series(&path_tree(&[1]), 1);
    let c = TropModule::new(
        m.structure().clone(),
        m.divisor().clone(),
        vec![PLFunction::zero(m.graph())],
    )
    .unwrap();
    assert_eq!(tropical_rank(&c, 2, DependenceLimits::default()).rank, Some(0));
}

/// Brute force over constants in `k/4`, `|k| ≤ 12`, or absent.
fn dependent_by_brute_force(g: &MetricGraph, fs: &[&PLFunction]) -> bool {
    let mut choices: Vec<Option<Q>> = (-12..=12).map(|k| Some(Q::new(k, 4))).collect();
    choices.push(None);
    let n = fs.len();
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut cs = vec![Some(qi(0))];
        cs.extend(idx.iter().map(|&k| choices[k]));
        let (sub, consts): (Vec<&PLFunction>, Vec<Q>) =
            fs.iter().zip(&cs).filter_map(|(f, c)| c.map(|c| (*f, c))).unzip();
        if sub.len() >= 2 && min_attained_twice(g, &sub, &consts) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < choices.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn raw_witness_family_of_first_grd_spans_rank_three() {
    let m = first_grd_module();
    let rep = tropical_rank(&m, 3, DependenceLimits::default());
    assert!(!rep.inconclusive);
    assert_eq!(rep.rank, Some(3));
    let ind = rep.independent.expect("an independent four-subset");
    let fs: Vec<&PLFunction> = ind.iter().map(|&i| &m.generators()[i]).collect();
    assert!(!dependent_by_brute_force(m.graph(), &fs));
}

#[test]
fn pruned_first_grd_family_has_rank_two() {
    let m = prune_generators(&first_grd_module(), 4, SearchLimits::default()).unwrap();
    let v = check_linear_series(&m, 4, SearchLimits::default(), DependenceLimits::default(), &StrongCheck::Off)
        .unwrap();
    assert_eq!(v.rows.status, VerdictStatus::Verified);
    assert_eq!(v.rank.rank, Some(2));
    assert!(v.refined);
    // Every four elements drawn from the extremals and their shifted
    // minima are dependent.
    let ext: Vec<PLFunction> = v.rank.extremals.iter().map(|&i| m.generators()[i].clone()).collect();
    let mut pool = ext.clone();
    pool.push(ext[1].tropical_min(&ext[2].add_constant(q(-1, 2))).unwrap());
    for sub in super::dependence::subsets(pool.len(), 4) {
        let fs: Vec<&PLFunction> = sub.iter().map(|&i| &pool[i]).collect();
        assert!(dependent_by_brute_force(m.graph(), &fs));
    }
}

// Linear series checks.

#[test]
fn tree_series_is_a_refined_series() {
    let m = tree_series(&path_tree(&[1, 1]), 2);
    let v = check_linear_series(&m, 2, SearchLimits::default(), DependenceLimits::default(), &StrongCheck::Off)
        .unwrap();
    assert_eq!(v.rows.status, VerdictStatus::Verified);
    assert!(v.refined);
    assert_eq!(v.status(), VerdictStatus::Verified);
}

#[test]
fn strong_check_needs_sub_series() {
    let m = tree_series(&path_tree(&[1]), 1);
    let err = check_linear_series(
        &m,
        1,
        SearchLimits::default(),
        DependenceLimits::default(),
        &StrongCheck::With(vec![]),
    )
    .unwrap_err();
    assert_eq!(err, SeriesError::MissingSubSeries);
}

#[test]
fn rank_one_tree_series_is_strongly_refined_with_constants() {
    let m = tree_series(&path_tree(&[1]), 1);
    let g = m.graph().clone();
    let mut subs = Vec::new();
    for p in grid_points(&g, 1) {
        let fp = m.f_v(&p);
        let (s, _) = m.structure().translate(&PLFunction::zero(&g));
        let zero_s = SlopeStructure::new(
            g.clone(),
            0,
            s.edge_slopes().iter().map(|_| vec![0]).collect(),
            (0..g.vertex_count())
                .map(|v| crate::hypercube::RankFunction::standard(g.valence(v), 0))
                .collect(),
        )
        .unwrap();
        let e = Divisor::point(p.clone(), 1);
        let dd = m.divisor() + &fp.divisor_of(&g);
        let sub = TropModule::new(zero_s, dd, vec![PLFunction::zero(&g)]).unwrap();
        subs.push(SubSeries { e, module: sub });
        // The generator realizing (p) satisfies the conditions.
        assert!(crate::slopes::satisfies_rank_condition(
            m.structure(),
            m.divisor(),
            &Divisor::point(p, 1),
            &fp
        ));
    }
    let v = check_linear_series(&m, 1, SearchLimits::default(), DependenceLimits::default(), &StrongCheck::With(subs))
        .unwrap();
    assert!(v.refined);
    assert!(v.strong.is_some());
}

#[test]
fn truncated_counterexample_is_flagged() {
    let (m, fx) = truncated_counterexample(3);
    assert!(!m.contains(&fx));
    let v = check_linear_series(&m, 2, SearchLimits::default(), DependenceLimits::default(), &StrongCheck::Off)
        .unwrap();
    assert_ne!(v.status(), VerdictStatus::Verified);
}

#[test]
fn first_grd_witness_module_verifies() {
    let m = first_grd_module();
    let v = check_linear_series(&m, 4, SearchLimits::default(), DependenceLimits::default(), &StrongCheck::Off)
        .unwrap();
    assert_eq!(v.rows.status, VerdictStatus::Verified);
}

// Jumps.

#[test]
fn realize_the_zero_jump_and_leaf_jumps() {
    let t = path_tree(&[1, 1]);
    let m = tree_series(&t, 1);
    let v = GraphPoint::Vertex(1);
    let f0 = realize_jump(&m, &v, &vec![0, 0]).unwrap();
    assert_eq!(f0, m.f_v(&v));
    let f1 = realize_jump(&m, &v, &vec![0, 1]).unwrap();
    assert!(m.contains(&f1));
    assert_eq!(crate::slopes::index_vector(m.structure(), &f1, &v).unwrap(), vec![0, 1]);
    assert!(matches!(realize_jump(&m, &v, &vec![1, 1]), Err(SeriesError::NotFound(_))));
}

#[test]
fn first_grd_realizes_the_diagonal_jump_at_u() {
    let m = first_grd_module();
    let u = GraphPoint::Vertex(0);
    let f = realize_jump(&m, &u, &vec![1, 1]).unwrap();
    assert_eq!(crate::slopes::index_vector(m.structure(), &f, &u).unwrap(), vec![1, 1]);
    assert!(m.contains(&f));
}

// Classification and pullback.

#[test]
fn identity_pullback_is_the_tree_series() {
    let t = path_tree(&[1, 2]);
    let pb = pullback_from_tree(&identity(&t), &GraphPoint::Vertex(0), 1).unwrap();
    assert_eq!(pb.degree, 1);
    assert_eq!(*pb.module.divisor(), Divisor::point(GraphPoint::Vertex(0), 1));
    let q = classify_g1d(&pb.module, &GraphPoint::Vertex(0)).unwrap();
    assert!(trees_isometric(&q.tree, &t));
    assert_eq!(q.degree, 1);
}

#[test]
fn two_cycle_double_cover() {
    let psi = two_cycle_cover();
    let pb = pullback_from_tree(&psi, &GraphPoint::Vertex(0), 2).unwrap();
    assert_eq!(pb.degree, 2);
    assert_eq!(pb.module.divisor().degree(), 2);
    assert_eq!(pb.module.divisor().get(&GraphPoint::Vertex(0)), 2);
    let qt = classify_g1d(&pb.module, &pb.base).unwrap();
    assert_eq!(qt.degree, 2);
    assert!(trees_isometric(&qt.tree, &psi.target));
    assert_eq!(qt.coarse_tree().edge_count(), 1);
    // Fibers of interior tree points have two points of multiplicity one.
    let y = GraphPoint::Edge { edge: 0, offset: q(1, 4) };
    let fib = qt.fiber(&y);
    assert_eq!(fib.len(), 2);
    assert!(fib.iter().all(|(_, k)| *k == 1));
    // Points with the same image have the same reduced divisor.
    let (a, b) = (&fib[0].0, &fib[1].0);
    let m = &pb.module;
    let back = |p: &GraphPoint| qt.refinements.iter().rev().fold(p.clone(), |x, r| r.to_original(&x));
    assert_eq!(m.reduced_divisor(&back(a)), m.reduced_divisor(&back(b)));
    let rep = tropical_rank(m, 2, DependenceLimits::default());
    assert_eq!(rep.rank, Some(1));
}

#[test]
fn theta_triple_cover_is_a_g13() {
    let psi = theta_triple_cover();
    let pb = pullback_from_tree(&psi, &GraphPoint::Vertex(0), 1).unwrap();
    assert_eq!(pb.degree, 3);
    let v = check_linear_series(&pb.module, 2, SearchLimits::default(), DependenceLimits::default(), &StrongCheck::Off)
        .unwrap();
    assert_eq!(v.status(), VerdictStatus::Verified);
}

#[test]
fn non_harmonic_maps_are_rejected() {
    let mut psi = two_cycle_cover();
    psi.edge_map[1] = (0, 2);
    let source = MetricGraph::from_named(&["u", "v"], &[("u", "v", qi(1)), ("u", "v", q(1, 2))]).unwrap();
    psi.source = source;
    // Weights 1 + 2 at both ends balance; break it with a pendant edge.
    assert!(psi.validate().is_ok());
    let t = MetricGraph::from_named(&["a", "b", "c"], &[("a", "b", qi(1)), ("b", "c", qi(1))]).unwrap();
    let s = MetricGraph::from_named(&["u", "v", "w"], &[("u", "v", qi(1)), ("v", "w", qi(1)), ("v", "w", qi(1))])
        .unwrap();
    let bad = HarmonicMorphism {
        source: s,
        target: t,
        vertex_map: vec![0, 1, 2],
        edge_map: vec![(0, 1), (1, 1), (1, 1)],
    };
    assert!(matches!(bad.validate(), Err(SeriesError::NotHarmonic { vertex: 1 })));
}

#[test]
fn non_rank_one_input_is_rejected() {
    let m = first_grd_module();
    assert_eq!(
        classify_g1d(&m, &GraphPoint::Vertex(0)).unwrap_err(),
        SeriesError::NotRankOne(2)
    );
}

#[test]
fn random_morphisms_round_trip() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let psi = random_harmonic_morphism(&mut rng, 3, 8);
        let d = psi.validate().unwrap();
        let pb = pullback_from_tree(&psi, &GraphPoint::Vertex(0), 1).unwrap();
        let q = classify_g1d(&pb.module, &pb.base).unwrap();
        assert_eq!(q.degree, d);
        assert!(trees_isometric(&q.tree, &psi.target));
    }
}

