use klac::privacy::{
    brute_force_superspace_count, count_superspaces_exact, count_superspaces_log2, entropy_metric, log2_big,
    mil_conventional_lower, mil_upper_asymptotic, mil_upper_exact,
};
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn closed_form_matches_enumeration() {
    for m in 1..=5 {
        for t in 0..=m {
            for k in 0..=t {
                let brute = brute_force_superspace_count(m, t, k).unwrap();
                assert_eq!(
                    count_superspaces_exact(m, t, k).unwrap(),
                    BigUint::from(brute),
                    "m={m} T={t} k={k}"
                );
                let log = count_superspaces_log2(m, t, k).unwrap();
                assert!((log - (brute as f64).log2()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn mil_separation_grid() {
    for m in [100usize] {
        for s in 0..=10 {
            for k in 1..=3 {
                assert!(mil_upper_exact(m, k, s).unwrap() < mil_conventional_lower(m, 30).unwrap());
            }
        }
    }
}

proptest! {
    #[test]
    fn entropy_non_increasing_in_k(m in 2usize..400, t_pick in any::<u16>()) {
        let t = 1 + t_pick as usize % m.min(40);
        let mut prev = f64::INFINITY;
        for k in 0..=t {
            let e = entropy_metric(m, t, k).unwrap().exact;
            prop_assert!(e >= 0.0 && e <= prev + 1e-9);
            prev = e;
        }
        prop_assert_eq!(prev, 0.0);
    }

    #[test]
    fn mil_upper_monotone_and_below_relaxation(m in 2usize..200, k in 1usize..20, s in 0usize..50) {
        let v = mil_upper_exact(m, k, s).unwrap();
        prop_assert!(v <= mil_upper_asymptotic(m, k, s).unwrap() + 1e-9);
        prop_assert!(mil_upper_exact(m + 1, k, s).unwrap() >= v - 1e-9);
        prop_assert!(mil_upper_exact(m, k + 1, s).unwrap() >= v - 1e-9);
        prop_assert!(mil_upper_exact(m, k, s + 1).unwrap() >= v - 1e-9);
    }

    #[test]
    fn conventional_lower_non_negative(m in 1usize..300, t_pick in any::<u16>()) {
        let t = 1 + t_pick as usize % m;
        prop_assert!(mil_conventional_lower(m, t).unwrap() >= 0.0);
    }

    #[test]
    fn log_and_exact_paths_agree(m in 1usize..64, t_pick in any::<u16>(), k_pick in any::<u16>()) {
        let t = t_pick as usize % (m + 1);
        let k = k_pick as usize % (t + 1);
        let exact = log2_big(&count_superspaces_exact(m, t, k).unwrap());
        let log = count_superspaces_log2(m, t, k).unwrap();
        prop_assert!((exact - log).abs() <= 1e-9 * exact.max(1.0));
    }
}
