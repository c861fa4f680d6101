use klac::access::AccessAssignment;
use klac::instance::{synthesize_instance, two_pair_example, CodingSetup};
use klac::protocol::{curious_view, run_protocol, AccessPolicy, MessageStore};
use klac::universal::{build_case2, build_scheme};
use klac::BitMatrix;
use proptest::prelude::*;

fn pair_code() -> CodingSetup {
    let a = BitMatrix::from_strs(&["11000", "00110"]).unwrap();
    CodingSetup::from_coding_matrix(&two_pair_example(), a).unwrap()
}

fn unit_assignment(d: &BitMatrix) -> AccessAssignment {
    AccessAssignment::new(d.rows().iter().map(|r| r.iter_ones().collect()).collect())
}

#[test]
fn two_pair_code_with_single_row_access() {
    let setup = pair_code();
    let d = setup.coefficients();
    let p = BitMatrix::identity(2);
    let store = MessageStore::random(5, 8, 1);
    let run = run_protocol(&setup, &p, &unit_assignment(&d), 1, &store, AccessPolicy::Assigned, 1).unwrap();
    run.ensure_decoded().unwrap();
    assert!(run.outcomes.iter().all(|o| o.rows_used == 1));

    let view = curious_view(&run.log, 3).unwrap();
    assert_eq!(view.coding_rows.len(), 1);
    assert_eq!(view.coding_rows[0].coefficients, "00110");
    assert_eq!(view.payloads.len(), 2);
    assert!(curious_view(&run.log, 4).is_err());
}

#[test]
fn identity_scheme_embeds_the_conventional_protocol() {
    let (inst, setup) = synthesize_instance(5, 12, 20, 9).unwrap();
    let d = setup.coefficients();
    let s = build_scheme(5, 12, 5, None).unwrap();
    let a = s.assign(&d).unwrap();
    let store = MessageStore::random(inst.m(), 64, 2);
    let run = run_protocol(&setup, s.p(), &a, 5, &store, AccessPolicy::Assigned, 0).unwrap();
    run.ensure_decoded().unwrap();
    assert!(run.log.private_bits <= (12 * 5 * 20) as u64);
    // A client holding all T rows sees the whole code.
    let full = (0..12).find(|&i| a.rows(i).len() == 5);
    if let Some(i) = full {
        assert_eq!(curious_view(&run.log, i).unwrap().coding_rows.len(), 5);
    }
}

#[test]
fn case2_run_accounting() {
    let (inst, setup) = synthesize_instance(8, 20, 40, 3).unwrap();
    let s = build_case2(8, 3).unwrap();
    let a = s.assign(&setup.coefficients()).unwrap();
    let store = MessageStore::random(inst.m(), 64, 3);
    let run = run_protocol(&setup, s.p(), &a, 3, &store, AccessPolicy::Assigned, 3).unwrap();
    run.ensure_decoded().unwrap();
    assert!(run.outcomes.iter().all(|o| o.rows_used <= 3));
    let m = inst.m() as u64;
    assert_eq!(run.log.broadcast_bits, 17 * 64);
    assert!(run.log.total_bits() <= 20 * 3 * m + 17 * 64);
    assert_eq!(run.log.conventional_bits(), 8 * (64 + m));
    let csv = run.report_csv().unwrap();
    assert!(csv.starts_with("client_id,rows_used,decode_ok\n1,"));
    assert!(csv.contains("C_k,C,T,T_k,k\n"));
}

#[test]
fn broken_assignment_names_the_client() {
    let setup = pair_code();
    let p = BitMatrix::identity(2);
    let wrong = AccessAssignment::new(vec![vec![0], vec![0], vec![0], vec![1]]);
    let store = MessageStore::random(5, 8, 5);
    let run = run_protocol(&setup, &p, &wrong, 1, &store, AccessPolicy::Assigned, 0).unwrap();
    let err = run.ensure_decoded().unwrap_err();
    assert!(matches!(err, klac::Error::SimulationFailure { client: 3, .. }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn uniform_minimal_access_picks_smallest_sets() {
    let (inst, setup) = synthesize_instance(6, 30, 30, 4).unwrap();
    let d = setup.coefficients();
    let s = build_case2(6, 2).unwrap();
    let a = s.assign(&d).unwrap();
    let store = MessageStore::random(inst.m(), 16, 4);
    let run = run_protocol(&setup, s.p(), &a, 2, &store, AccessPolicy::UniformMinimal, 11).unwrap();
    run.ensure_decoded().unwrap();
    for (i, o) in run.outcomes.iter().enumerate() {
        assert!(o.rows_used <= a.rows(i).len());
    }
    let again = run_protocol(&setup, s.p(), &a, 2, &store, AccessPolicy::UniformMinimal, 11).unwrap();
    assert_eq!(run, again);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn views_hold_only_assigned_rows(t in 2usize..9, extra in 0usize..25, k_off in 0usize..8, seed in any::<u64>()) {
        let n = (t + extra).min((1 << t) - 1);
        let k = 1 + k_off % t;
        let (inst, setup) = synthesize_instance(t, n, n + 4, seed).unwrap();
        let d = setup.coefficients();
        let s = build_scheme(t, n as u64, k, Some(&d)).unwrap();
        let a = s.assign(&d).unwrap();
        let store = MessageStore::random(inst.m(), 32, seed);
        let run = run_protocol(&setup, s.p(), &a, k, &store, AccessPolicy::Assigned, seed).unwrap();
        run.ensure_decoded().unwrap();
        prop_assert!(run.log.total_bits() <= run.log.cost_bound());
        let a_k = s.p().mul(&setup.a).unwrap();
        for i in 0..n {
            let view = curious_view(&run.log, i).unwrap();
            prop_assert!(view.coding_rows.len() <= k);
            let json: serde_json::Value = serde_json::from_str(&view.to_json()).unwrap();
            for row in json["coding_rows"].as_array().unwrap() {
                let idx = row["index"].as_u64().unwrap() as usize - 1;
                prop_assert!(a.rows(i).contains(&idx));
                prop_assert_eq!(row["coefficients"].as_str().unwrap(), a_k.row(idx).to_string());
            }
        }
    }
}
