use klac::instance::random_coefficient_instance;
use klac::universal::{
    build_case1, build_case2, build_scheme, coded_plan, lower_bound_tk, plan_scheme, prune_used_rows, SchemeMode,
};
use klac::BitVector;
use proptest::prelude::*;

// Smallest x whose sums of at most k out of x rows can reach n vectors.
fn naive_bound(t: u64, n: u64, k: u64) -> u64 {
    let choose = |x: u64, i: u64| -> u128 { (0..i).fold(1u128, |acc, j| acc * (x - j) as u128 / (j + 1) as u128) };
    let mut x = 1;
    while (1..=k.min(x)).map(|i| choose(x, i)).sum::<u128>() < n as u128 {
        x += 1;
    }
    x.max(t)
}

#[test]
fn lower_bound_matches_direct_count() {
    for t in 1..=10u64 {
        for k in 1..=t {
            for n in 1..=(1u64 << t) - 1 {
                assert_eq!(
                    lower_bound_tk(t, n, k).unwrap(),
                    naive_bound(t, n, k),
                    "T={t} n={n} k={k}"
                );
            }
        }
    }
}

#[test]
fn case2_sizes_follow_the_block_formula() {
    for t in 2..=16usize {
        for k in 1..t.div_ceil(2) {
            let w = t.div_ceil(k);
            let q = t / w;
            let expected = q * ((1 << w) - 1) + (1 << (t - q * w)) - 1;
            assert_eq!(coded_plan(t, k).unwrap().t_k, expected as u128);
            assert!(expected <= k << w);
        }
    }
}

proptest! {
    #[test]
    fn case1_reconstructs_with_half_the_rows(t in 2usize..40, bits in any::<u64>()) {
        let s = build_case1(t).unwrap();
        let d = BitVector::from_u64(bits & (u64::MAX >> (64 - t.min(64))), t);
        let rows = s.reconstruct(&d).unwrap();
        prop_assert!(rows.len() <= t.div_ceil(2));
        prop_assert_eq!(s.p().sum_rows(rows), d);
    }

    #[test]
    fn case2_reconstructs_with_k_rows(t in 2usize..22, k_pick in 0usize..100, bits in any::<u64>()) {
        let k = 1 + k_pick % t.div_ceil(2).max(1);
        let s = build_case2(t, k).unwrap();
        let d = BitVector::from_u64(bits & ((1 << t) - 1), t);
        let rows = s.reconstruct(&d).unwrap();
        prop_assert!(rows.len() <= k);
        prop_assert_eq!(s.p().sum_rows(rows), d);
    }

    #[test]
    fn built_schemes_serve_every_client(t in 2usize..16, n_pick in any::<u32>(), k_pick in any::<u32>(), seed in any::<u64>()) {
        let n = 1 + n_pick as usize % ((1 << t) - 1).min(300);
        let k = 1 + k_pick as usize % t;
        let d = random_coefficient_instance(t, n, seed).unwrap();
        let plan = plan_scheme(t, n as u64, k).unwrap();
        let s = build_scheme(t, n as u64, k, Some(&d)).unwrap();
        prop_assert_eq!(s.t_k() as u128, plan.t_k);
        prop_assert!(s.t_k() as u64 >= lower_bound_tk(t as u64, n as u64, k as u64).unwrap().min(n as u64));
        let a = s.assign(&d).unwrap();
        a.validate(s.p(), &d, k).unwrap();
        if plan.mode == SchemeMode::Uncoded {
            prop_assert_eq!(a.max_rows(), 1);
        }
        let pruned = prune_used_rows(&s, &d).unwrap();
        pruned.assignment.validate(&pruned.p, &d, k).unwrap();
        prop_assert!(pruned.t_k() <= s.t_k());
        prop_assert!(pruned.kept.windows(2).all(|w| w[0] < w[1]));
    }
}
