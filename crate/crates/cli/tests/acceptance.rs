//! Acceptance criteria, one line each. Lines go straight to stdout so they
//! show without `--nocapture`; the test fails if any criterion fails or
//! overruns its time limit.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use troplin::examples;
use troplin::hypercube::flags::random_flag_rank_function;
use troplin::hypercube::{check_basic_axioms, is_supermodular_all_pairs, is_weakly_supermodular_11, Cube, RankFunction};
use troplin::io;
use troplin::matroidcomplex::{coherent_complex_from_rank, local_matroid, rank_function_from_complex};
use troplin::metricgraph::{q, qi, Direction, Divisor, GraphPoint, MetricGraph, PLFunction, Refinement, Q};
use troplin::permarray::{array_from_rank_function, rank_function_from_array};
use troplin::series::{
    classify_g1d, find_unsaturated_cut, local_reduced_step, module_from_witnesses, prune_generators,
    pullback_from_tree, random_harmonic_morphism, trees_isometric, tropical_rank, DependenceLimits, SeriesError,
    TropModule,
};
use troplin::slopes::{
    check_compatible, check_divisors, crude_rank_check, default_denominator, effective_divisors, is_compatible,
    satisfies_rank_condition, Grid, Incompatibility, RowOutcome, SearchLimits, SlopeStructure, VerdictStatus,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

// 1. Hypercube axioms.

/// Every integer table on `[r]^2` with values in `[-1, r]`.
fn all_tables(r: usize) -> impl Iterator<Item = Vec<i64>> {
    let cells = (r + 1) * (r + 1);
    let base = r as u64 + 2;
    (0..base.pow(cells as u32)).map(move |mut code| {
        (0..cells)
            .map(|_| {
                let v = (code % base) as i64 - 1;
                code /= base;
                v
            })
            .collect()
    })
}

/// All rank functions with `δ = 2`, `r ≤ 2`, found by exhaustive search.
fn corpus() -> Vec<RankFunction> {
    let mut out = Vec::new();
    for r in 0..=2 {
        for t in all_tables(r) {
            if check_basic_axioms(Cube::new(2, r), &t).is_ok() && is_supermodular_all_pairs(Cube::new(2, r), &t) {
                out.push(RankFunction::new(2, r, t).unwrap());
            }
        }
    }
    out
}

fn hypercube_axioms() -> Check {
    let (mut tables, mut basic, mut valid) = (0usize, 0usize, 0usize);
    for r in 0..=2 {
        let cube = Cube::new(2, r);
        for t in all_tables(r) {
            tables += 1;
            if check_basic_axioms(cube, &t).is_err() {
                continue;
            }
            basic += 1;
            let weak = is_weakly_supermodular_11(cube, &t);
            ensure(weak == is_supermodular_all_pairs(cube, &t), format!("disagreement on {t:?}"))?;
            ensure(weak == RankFunction::new(2, r, t.clone()).is_ok(), format!("validator disagrees on {t:?}"))?;
            valid += weak as usize;
        }
    }
    Ok(format!("{tables} tables, {basic} pass (1)-(3), {valid} rank functions"))
}

// 2. Permutation arrays.

fn random_delta3(rng: &mut ChaCha8Rng) -> RankFunction {
    let r = rng.gen_range(1..=3);
    let p = rng.gen_range(2..=3);
    random_flag_rank_function(rng, 3, r, p)
}

fn perm_round_trip(rf: &RankFunction) -> Result<(), String> {
    let p = array_from_rank_function(rf);
    ensure(p.is_permutation_array() == Ok(true), format!("not a permutation array: {rf:?}"))?;
    ensure(rank_function_from_array(&p).as_ref() == Ok(rf), format!("round trip fails: {rf:?}"))?;
    let both: BTreeSet<_> = p.dots().union(&p.redundant_positions()).cloned().collect();
    ensure(rf.jumps().as_set() == both, format!("jumps differ from dots and redundant positions: {rf:?}"))
}

fn permutation_bijection() -> Check {
    let c = corpus();
    for rf in &c {
        perm_round_trip(rf)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        perm_round_trip(&random_delta3(&mut rng))?;
    }
    Ok(format!("{} corpus functions, 1000 random with δ = 3", c.len()))
}

// 3. Matroid complexes.

fn matroid_bijection() -> Check {
    let c = corpus();
    for rf in &c {
        let mc = coherent_complex_from_rank(rf);
        for (a, m) in mc.iter() {
            m.check_axioms().map_err(|e| format!("local matroid at {a:?}: {e}"))?;
        }
        ensure(rank_function_from_complex(&mc).as_ref() == Ok(rf), format!("round trip fails: {rf:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut loops = 0;
    for _ in 0..1000 {
        let rf = random_delta3(&mut rng);
        let r = rf.r();
        let x: Vec<usize> = (0..3).map(|_| rng.gen_range(0..=r)).collect();
        let y: Vec<usize> = x.iter().map(|&a| rng.gen_range(a..=r)).collect();
        let (mx, my) = (local_matroid(&rf, &x), local_matroid(&rf, &y));
        for i in 0..3 {
            if x[i] == y[i] && x[i] < r && mx.is_loop(i) {
                loops += 1;
                ensure(my.is_loop(i), format!("loop {i} lost from {x:?} to {y:?} in {rf:?}"))?;
            }
        }
    }
    Ok(format!("{} corpus functions, 1000 pairs, {loops} loops followed", c.len()))
}

// 4. The first example.

/// Functions on the two-edge graph with the given slope pieces along each
/// edge from `u`, normalized to vanish at `u`, on the model.
fn on_both_edges(r: &Refinement, pieces: [Vec<(Q, i64)>; 2]) -> PLFunction {
    let pieces: Vec<Vec<(Q, i64)>> = pieces
        .into_iter()
        .map(|p| p.into_iter().filter(|(l, _)| *l > qi(0)).collect())
        .collect();
    let f = PLFunction::from_edge_slopes(&r.original, 0, qi(0), &pieces).unwrap();
    r.function_to_refined(&f)
}

/// Slope 2 up to `a`, 1 up to `b`, then 0.
fn profile(a: Q, b: Q) -> Vec<(Q, i64)> {
    vec![(a, 2), (b - a, 1), (qi(1) - b, 0)]
}

/// Offsets of the points of `e` on the original edges, if all are interior.
fn interior_offsets(r: &Refinement, e: &Divisor) -> Option<Vec<(usize, Q)>> {
    let mut out = Vec::new();
    for (p, c) in e.iter() {
        match r.to_original(p) {
            GraphPoint::Edge { edge, offset } => out.extend(std::iter::repeat((edge, offset)).take(c as usize)),
            GraphPoint::Vertex(_) => return None,
        }
    }
    out.sort();
    Some(out)
}

/// The witness drawn for `E = x + y`: with both points on one edge the same
/// profile with breaks at `x` and `y` on both edges; on different edges the
/// profile with breaks at `t` and `1 - t` on each edge.
fn expected_shape(r: &Refinement, e: &Divisor) -> Option<(&'static str, PLFunction)> {
    let pts = interior_offsets(r, e)?;
    let [(ea, a), (eb, b)] = pts[..] else { return None };
    if ea == eb {
        let p = profile(a, b);
        Some(("same-edge", on_both_edges(r, [p.clone(), p])))
    } else {
        let sym = |t: Q| profile(t.min(qi(1) - t), t.max(qi(1) - t));
        Some(("cross-edge", on_both_edges(r, [sym(a), sym(b)])))
    }
}

fn first_grd() -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_troplin"))
        .arg("rank-check")
        .arg(data("first_grd.json"))
        .args(["--grid-denominator", "4"])
        .output()
        .map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), format!("exit code {:?}", out.status.code()))?;
    ensure(report["status"] == "verified", format!("status {}", report["status"]))?;

    let ex = examples::first_grd();
    let (s, d, r) = (&ex.structure, &ex.divisor, &ex.refinement);
    let grid = Grid::new(s, d, 4).map_err(|e| e.to_string())?;
    let tests: Vec<Divisor> = effective_divisors(&grid.points(s.model().vertex_count()), 2)
        .into_iter()
        .filter(|e| expected_shape(r, e).is_some())
        .collect();
    for e in &tests {
        let (_, f) = expected_shape(r, e).unwrap();
        ensure(satisfies_rank_condition(s, d, e, &f), format!("drawn witness fails for {e:?}"))?;
    }
    let limits = SearchLimits {
        dedupe: false,
        ..SearchLimits::default()
    };
    let accept = |e: &Divisor, f: &PLFunction| {
        let (_, want) = expected_shape(r, e).unwrap();
        f.add_constant(-f.eval(&GraphPoint::Vertex(0))) == want
    };
    let rows = check_divisors(s, d, &grid, tests, limits, &accept);
    let mut found = [0usize; 2];
    for row in &rows {
        let (kind, _) = expected_shape(r, &row.e).unwrap();
        ensure(
            matches!(row.outcome, RowOutcome::Witness(_)),
            format!("search misses the {kind} witness for {:?}", row.e),
        )?;
        found[(kind == "cross-edge") as usize] += 1;
    }
    ensure(found[0] > 0 && found[1] > 0, "a shape has no test divisor")?;
    Ok(format!(
        "verified at N = 4; search finds the same-edge shape for {} and the cross-edge shape for {} divisors",
        found[0], found[1]
    ))
}

// 5. The second example.

fn second_grd() -> Check {
    let mut parts = Vec::new();
    for (ex, r, deg) in [(examples::second_grd(), 2, 8), (examples::second_grd_sub(), 1, 4)] {
        ensure(ex.structure.r() == r && ex.divisor.degree() == deg, format!("{} has the wrong shape", ex.name))?;
        let n = default_denominator(&ex.structure).max(2);
        let v = crude_rank_check(&ex.structure, &ex.divisor, n, SearchLimits::default()).map_err(|e| e.to_string())?;
        ensure(v.status == VerdictStatus::Verified, format!("{} is {}", ex.name, v.status.as_str()))?;
        parts.push(format!("(r, d) = ({r}, {deg}) verified at N = {n} over {} divisors", v.rows.len()));
    }
    Ok(parts.join("; "))
}

// 6. The finiteness counterexample.

fn counterexample() -> Check {
    let ex = examples::finiteness_counterexample();
    let g = ex.structure.model().clone();
    let fx = PLFunction::from_edge_slopes(&g, 0, qi(-1), &[vec![(qi(1), 1), (q(1, 2), 0)], vec![(q(3, 2), -1)]])
        .unwrap();
    match check_compatible(&ex.structure, &fx) {
        Err(Incompatibility::NotAJump { point, .. }) if point == GraphPoint::Vertex(1) => {}
        other => return Err(format!("f_x: {other:?}")),
    }
    let mut gens = vec![
        PLFunction::zero(&g),
        PLFunction::from_edge_slopes(&g, 1, qi(0), &[vec![(q(3, 2), 1)], vec![(q(3, 2), -1)]]).unwrap(),
    ];
    for i in 1..=20 {
        let flat = Q::new(1, i);
        let fi = PLFunction::from_edge_slopes(
            &g,
            0,
            qi(-1),
            &[vec![(qi(1), 1), (q(1, 2), 0)], vec![(flat, 0), (q(3, 2) - flat, -1)]],
        )
        .unwrap();
        ensure(is_compatible(&ex.structure, &fi), format!("f_{i} is incompatible"))?;
        gens.push(fi);
        let m = TropModule::new(ex.structure.clone(), ex.divisor.clone(), gens.clone()).map_err(|e| e.to_string())?;
        ensure(!m.contains(&fx), format!("f_x lies in the truncation at {i}"))?;
    }
    Ok("f_x fails at v; outside all 20 truncations".into())
}

// 7. Reduced divisors.

fn pruned_first_grd() -> TropModule {
    let ex = examples::first_grd();
    let v = crude_rank_check(&ex.structure, &ex.divisor, 4, SearchLimits::default()).unwrap();
    let m = module_from_witnesses(&ex.structure, &ex.divisor, &v).unwrap();
    prune_generators(&m, 4, SearchLimits::default()).unwrap()
}

fn test_modules(rng: &mut ChaCha8Rng) -> Vec<(String, TropModule)> {
    let text = std::fs::read_to_string(data("cycle_g12.json")).unwrap();
    let cycle = io::series_from_json(&io::parse(&text).unwrap()).unwrap().module().unwrap();
    let mut out = vec![("first_grd".to_string(), pruned_first_grd()), ("cycle_g12".to_string(), cycle)];
    for i in 0..4 {
        let psi = random_harmonic_morphism(rng, 3, 6);
        let x0 = GraphPoint::Vertex(rng.gen_range(0..psi.source.vertex_count()));
        out.push((format!("pullback {i}"), pullback_from_tree(&psi, &x0, 1).unwrap().module));
    }
    out
}

fn random_point(g: &MetricGraph, rng: &mut ChaCha8Rng) -> GraphPoint {
    let e = rng.gen_range(0..g.edge_count());
    let len = g.edge(e).len;
    let t = Q::new(rng.gen_range(0..16), 16) * len;
    g.point_on_edge(e, t).unwrap()
}

fn reduced_divisors() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let modules = test_modules(&mut rng);
    for (name, m) in &modules {
        let g = m.graph();
        for _ in 0..100 {
            let x = random_point(g, &mut rng);
            let s0: i64 = g.directions_at(&x).iter().map(|d| m.structure().slopes_along(*d)[0]).sum();
            let dx = m.reduced_divisor(&x);
            ensure(dx.get(&x) == m.divisor().get(&x) - s0, format!("{name}: coefficient formula at {x:?}"))?;
            ensure(dx.get(&x) >= m.r() as i64, format!("{name}: D_x(x) < r at {x:?}"))?;
            let cut = find_unsaturated_cut(m, &x).map_err(|e| e.to_string())?;
            ensure(cut.is_none() == m.f_v(&x).is_constant(), format!("{name}: cut criterion at {x:?}"))?;
        }
    }
    let (mut steps, mut attempts) = (0, 0);
    while steps < 100 {
        attempts += 1;
        ensure(attempts <= 2000, format!("only {steps} steps within the radius"))?;
        let (name, m) = &modules[rng.gen_range(0..modules.len())];
        let v = random_point(m.graph(), &mut rng);
        let dirs = m.graph().directions_at(&v);
        let dir: Direction = dirs[rng.gen_range(0..dirs.len())];
        let delta = Q::new(1, 1 << rng.gen_range(2..7));
        match local_reduced_step(m, &v, dir, delta) {
            Ok(step) => {
                ensure(
                    step.divisor == m.reduced_divisor(&step.point),
                    format!("{name}: step from {v:?} along {dir:?}"),
                )?;
                steps += 1;
            }
            Err(SeriesError::RadiusTooLarge { .. }) => {}
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    Ok(format!(
        "{} modules x 100 points; 100 local steps in {attempts} attempts",
        modules.len()
    ))
}

// 8. Rank-one classification.

fn g1d_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut degrees = Vec::new();
    for i in 0..20 {
        let deg = rng.gen_range(1..=4);
        let psi = random_harmonic_morphism(&mut rng, deg, 8);
        ensure(psi.source.edge_count() <= 8, format!("morphism {i} has too many edges"))?;
        let d = psi.validate().map_err(|e| e.to_string())?;
        let x0 = GraphPoint::Vertex(rng.gen_range(0..psi.source.vertex_count()));
        let pb = pullback_from_tree(&psi, &x0, 1).map_err(|e| format!("morphism {i}: {e}"))?;
        let qt = classify_g1d(&pb.module, &pb.base).map_err(|e| format!("morphism {i}: {e}"))?;
        ensure(qt.degree == d, format!("morphism {i}: degree {} vs {d}", qt.degree))?;
        ensure(trees_isometric(&qt.tree, &psi.target), format!("morphism {i}: trees differ"))?;
        let rank = tropical_rank(&pb.module, 2, DependenceLimits::default());
        ensure(rank.rank == Some(1), format!("morphism {i}: tropical rank {:?}", rank.rank))?;
        degrees.push(d);
    }
    Ok(format!("20 morphisms of degrees {degrees:?}"))
}

// 9. Membership and stability under minima.

/// Brute-force membership: some choice of constants among the differences
/// at critical points, or absence, gives `f` as a minimum.
fn member_by_brute_force(g: &MetricGraph, gens: &[PLFunction], f: &PLFunction) -> bool {
    let mut all: Vec<&PLFunction> = gens.iter().collect();
    all.push(f);
    let mut pts: Vec<GraphPoint> = (0..g.vertex_count()).map(GraphPoint::Vertex).collect();
    for e in 0..g.edge_count() {
        for t in PLFunction::common_positions(&all, e) {
            if t > qi(0) && t < g.edge(e).len {
                pts.push(GraphPoint::Edge { edge: e, offset: t });
            }
        }
    }
    let choices: Vec<Vec<Option<Q>>> = gens
        .iter()
        .map(|h| {
            let set: BTreeSet<Q> = pts.iter().map(|p| f.eval(p) - h.eval(p)).collect();
            set.into_iter().map(Some).chain([None]).collect()
        })
        .collect();
    let mut idx = vec![0usize; gens.len()];
    loop {
        let shifted: Vec<PLFunction> = gens
            .iter()
            .zip(&idx)
            .enumerate()
            .filter_map(|(i, (h, &k))| choices[i][k].map(|c| h.add_constant(c)))
            .collect();
        if !shifted.is_empty() && PLFunction::min_all(&shifted).unwrap() == *f {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn random_member(m: &TropModule, rng: &mut ChaCha8Rng) -> PLFunction {
    let cs: Vec<Option<Q>> = (0..m.generators().len())
        .map(|_| rng.gen_bool(0.6).then(|| Q::new(rng.gen_range(-4..=4), 4)))
        .collect();
    m.combination(&cs)
        .unwrap_or_else(|| m.generators()[rng.gen_range(0..m.generators().len())].clone())
}

fn compatible_on(s: &SlopeStructure, rng: &mut ChaCha8Rng) -> Option<PLFunction> {
    let g = s.model();
    let pieces: Vec<Vec<(Q, i64)>> = (0..g.edge_count())
        .map(|e| {
            let list = s.slopes_along(Direction { edge: e, forward: true });
            let len = g.edge(e).len;
            let cut = Q::new(rng.gen_range(1..4), 4) * len;
            let (a, b) = (list[rng.gen_range(0..list.len())], list[rng.gen_range(0..list.len())]);
            vec![(cut, a.max(b)), (len - cut, a.min(b))]
        })
        .collect();
    let f = PLFunction::from_edge_slopes(g, 0, Q::new(rng.gen_range(-4..4), 2), &pieces).ok()?;
    is_compatible(s, &f).then_some(f)
}

fn membership_and_minima() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let modules = test_modules(&mut rng);
    let (mut members, mut agree) = (0, 0);
    for i in 0..500 {
        let (_, full) = &modules[i % modules.len()];
        let k = full.generators().len().min(3);
        let picks: Vec<PLFunction> = (0..k)
            .map(|_| full.generators()[rng.gen_range(0..full.generators().len())].clone())
            .collect();
        let m = TropModule::new(full.structure().clone(), full.divisor().clone(), picks).map_err(|e| e.to_string())?;
        let member = rng.gen_bool(0.5);
        let f = if member {
            random_member(&m, &mut rng)
        } else {
            random_member(&m, &mut rng).tropical_max(&random_member(&m, &mut rng)).unwrap()
        };
        let fast = m.contains(&f);
        ensure(
            fast == member_by_brute_force(m.graph(), m.generators(), &f),
            format!("instance {i} disagrees"),
        )?;
        ensure(!member || fast, format!("instance {i}: a combination is not a member"))?;
        members += fast as usize;
        agree += 1;
    }
    let s = examples::second_grd().structure;
    let (mut pairs, mut tries) = (0, 0);
    while pairs < 500 {
        tries += 1;
        ensure(tries <= 100_000, format!("only {pairs} compatible pairs"))?;
        let (Some(f), Some(h)) = (compatible_on(&s, &mut rng), compatible_on(&s, &mut rng)) else {
            continue;
        };
        let h = h.add_constant(Q::new(rng.gen_range(-8..8), 4));
        ensure(is_compatible(&s, &f.tropical_min(&h).unwrap()), format!("pair {pairs}: minimum incompatible"))?;
        pairs += 1;
    }
    Ok(format!("{agree} membership instances ({members} members); 500 compatible pairs"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, u64, fn() -> Check); 9] = [
        ("hypercube axioms, δ = 2, r ≤ 2", 10, hypercube_axioms),
        ("permutation-array bijection", 30, permutation_bijection),
        ("matroid-complex bijection", 30, matroid_bijection),
        ("first_grd rank check and witness shapes", 60, first_grd),
        ("second_grd and its rank-one sub-structure", 60, second_grd),
        ("finiteness counterexample", 5, counterexample),
        ("reduced-divisor identities", 120, reduced_divisors),
        ("g1d classification round trip", 300, g1d_round_trip),
        ("membership oracle and minima", 60, membership_and_minima),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let (ok, detail) = match outcome {
            Ok(d) if in_time => (true, d),
            Ok(d) => (false, format!("{d}; over the time limit")),
            Err(e) => (false, e),
        };
        let _ = writeln!(
            std::io::stdout().lock(),
            "{} [{}] {name} ({:.2} s / {limit} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
