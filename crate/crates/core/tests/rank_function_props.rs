use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use troplin::hypercube::flags::random_flag_rank_function;
use troplin::hypercube::{
    check_basic_axioms, is_supermodular_all_pairs, is_weakly_supermodular_11, standard_rank_function, RankFunction,
};
use troplin::matroidcomplex::{coherent_complex_from_rank, local_matroid, rank_function_from_complex};
use troplin::permarray::{array_from_rank_function, rank_function_from_array, rank_function_of_rankable};

fn sample(seed: u64) -> RankFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = rng.gen_range(1..=4);
    let r = rng.gen_range(0..=3);
    let p = if rng.gen_bool(0.5) { 2 } else { 3 };
    random_flag_rank_function(&mut rng, delta, r, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flag_ranks_are_supermodular(seed in any::<u64>()) {
        let rf = sample(seed);
        prop_assert!(is_weakly_supermodular_11(rf.cube(), rf.values()));
        prop_assert!(is_supermodular_all_pairs(rf.cube(), rf.values()));
    }

    #[test]
    fn weak_and_full_supermodularity_agree_on_perturbed_tables(seed in any::<u64>(), bump in -1i64..=1) {
        let rf = sample(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
        let mut values = rf.values().to_vec();
        let k = rng.gen_range(0..values.len());
        values[k] += bump;
        if check_basic_axioms(rf.cube(), &values).is_ok() {
            prop_assert_eq!(
                is_weakly_supermodular_11(rf.cube(), &values),
                is_supermodular_all_pairs(rf.cube(), &values)
            );
        }
    }

    #[test]
    fn jumps_are_meet_closed(seed in any::<u64>()) {
        prop_assert!(sample(seed).jumps().is_meet_closed());
    }

    #[test]
    fn only_the_origin_has_full_rank(seed in any::<u64>()) {
        let rf = sample(seed);
        let r = rf.r() as i64;
        for a in rf.cube().points() {
            prop_assert_eq!(rf.value(&a) == r, a.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn every_layer_has_a_jump_of_the_right_rank(seed in any::<u64>()) {
        let rf = sample(seed);
        let (delta, r) = (rf.delta(), rf.r());
        for i in 0..delta {
            for t in 0..=r {
                let found = rf
                    .jumps()
                    .iter()
                    .any(|a| a[i] == t && rf.value(a) == (r - t) as i64);
                prop_assert!(found, "layer {} {} of {:?}", i, t, rf.values());
            }
        }
    }

    #[test]
    fn ranks_dominate_the_standard_function(seed in any::<u64>()) {
        let rf = sample(seed);
        let st = standard_rank_function(rf.delta(), rf.r());
        for a in rf.cube().points() {
            prop_assert!(rf.value(&a) >= st.value(&a));
        }
    }

    #[test]
    fn permutation_array_round_trip(seed in any::<u64>()) {
        let rf = sample(seed);
        let p = array_from_rank_function(&rf);
        prop_assert!(p.is_permutation_array().unwrap());
        prop_assert_eq!(&rank_function_from_array(&p).unwrap(), &rf);
        let jumps = rf.jumps().as_set();
        let expected: std::collections::BTreeSet<_> = p.dots().union(&p.redundant_positions()).cloned().collect();
        prop_assert_eq!(jumps, expected);
    }

    #[test]
    fn redundant_dots_do_not_change_ranks(seed in any::<u64>()) {
        let rf = sample(seed);
        let p = array_from_rank_function(&rf);
        let red = p.redundant_positions();
        if let Some(x) = red.iter().next() {
            let one: std::collections::BTreeSet<_> = [x.clone()].into_iter().collect();
            let q = p.with_dots(&one);
            prop_assert!(q.is_totally_rankable());
            prop_assert_eq!(&rank_function_of_rankable(&q).unwrap(), &rf);
        }
    }

    #[test]
    fn array_rank_drops_by_at_most_one(seed in any::<u64>()) {
        let rf = sample(seed);
        let p = array_from_rank_function(&rf);
        for x in rf.cube().points() {
            for i in 0..rf.delta() {
                if x[i] < rf.r() {
                    let mut y = x.clone();
                    y[i] += 1;
                    let (a, b) = (p.rank_at(&x).unwrap(), p.rank_at(&y).unwrap());
                    prop_assert!(b + 1 >= a);
                }
            }
        }
    }

    #[test]
    fn matroid_complex_round_trip(seed in any::<u64>()) {
        let rf = sample(seed);
        let c = coherent_complex_from_rank(&rf);
        for (a, m) in c.iter() {
            prop_assert!(m.check_axioms().is_ok(), "at {:?}", a);
        }
        prop_assert_eq!(&rank_function_from_complex(&c).unwrap(), &rf);
    }

    #[test]
    fn loops_persist_upwards(seed in any::<u64>(), pick in any::<u64>()) {
        let rf = sample(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let (delta, r) = (rf.delta(), rf.r());
        let x: Vec<usize> = (0..delta).map(|_| rng.gen_range(0..=r)).collect();
        let y: Vec<usize> = x.iter().map(|&a| rng.gen_range(a..=r)).collect();
        let (mx, my) = (local_matroid(&rf, &x), local_matroid(&rf, &y));
        for i in 0..delta {
            if x[i] == y[i] && x[i] < r && mx.is_loop(i) {
                prop_assert!(my.is_loop(i));
            }
        }
    }
}
