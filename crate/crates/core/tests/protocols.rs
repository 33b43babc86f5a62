//! Protocol-level invariants checked on every enumerated branch.

use core::f64::consts::{FRAC_1_SQRT_2 as H, PI};

use proptest::prelude::*;

use qbcast_core::library::gates::hadamard;
use qbcast_core::library::{BroadcastSpec, DiagonalPhaseGate, Graph, StabilizerSet};
use qbcast_core::linalg::{self, r, C64};
use qbcast_core::protocol::*;

fn check(t: &ProtocolTranscript) {
    assert!(t.passed(), "{} failed", t.protocol);
    t.check_locality().unwrap();
    t.check_causality().unwrap();
    if t.mode == Mode::Enumerate {
        assert!((t.total_probability() - 1.0).abs() < 1e-10, "{}", t.protocol);
    }
}

fn amplitudes() -> impl Strategy<Value = (C64, C64)> {
    ((0.0f64..1.0), (0.0f64..6.3), (0.0f64..6.3)).prop_map(|(p, a, b)| (linalg::cis(a) * p.sqrt(), linalg::cis(b) * (1.0 - p).sqrt()))
}

#[test]
fn every_protocol_holds_on_every_branch() {
    let e = Mode::Enumerate;
    let (a, b) = (r(0.6), r(0.8));
    let spec = BroadcastSpec::new(2, 2, a, b).unwrap();
    let path = Graph::path(3);
    let mut runs = vec![
        run_bbp(a, b, 0.4, 3, e.clone()).unwrap(),
        run_bbp_rotated(&hadamard(), [r(H), r(H)], 0.3, e.clone()).unwrap(),
        run_multisender(&spec, &[0.2, -0.9], &[true, true], e.clone()).unwrap(),
        add_sender(&spec, e.clone()).unwrap(),
        delete_sender(&spec, 2, e.clone()).unwrap(),
        add_then_delete(&spec, e.clone()).unwrap(),
        send_phase_restricted(a, b, 3, 5, 3, 2, e.clone()).unwrap(),
        send_phase_general(a, b, 0.7, 6, GeneralVariant::Destructive, 1, e.clone()).unwrap(),
        send_phase_general(a, b, 0.7, 9, GeneralVariant::Projector, 2, e.clone()).unwrap(),
        send_phase_general(a, b, 2.0 * PI / 7.0, 7, GeneralVariant::Approximate, 2, e.clone()).unwrap(),
        run_stabilizer_broadcast(&StabilizerSet::new(Graph::ring(4).unwrap().stabilizers()).unwrap(), false, e.clone()).unwrap(),
        teleport_phase_gate(&path, &[(1, 0.3), (3, -1.1)], true, e.clone()).unwrap(),
        run_graph_reduction(&Graph::ring(5).unwrap(), &[1, 2, 4], e.clone()).unwrap(),
        run_ghz_star(4, e.clone()).unwrap(),
        run_ghz_ring(4, e.clone()).unwrap(),
    ];
    let gspec = BroadcastSpec::new(2, 3, a, b).unwrap().with_entangler(cz_entangler(&path).unwrap()).unwrap();
    runs.push(run_graph_dist_phase(&gspec, &[0.5, 0.25], false, e.clone()).unwrap());
    let hyper = BroadcastSpec::new(1, 3, a, b).unwrap().with_entangler(DiagonalPhaseGate::multi_cz(3).unwrap()).unwrap();
    runs.push(run_graph_dist_phase(&hyper, &[0.1], false, e).unwrap());
    for t in &runs {
        check(t);
    }
}

#[test]
fn sampled_runs_are_reproducible() {
    let spec = BroadcastSpec::new(2, 2, r(H), r(H)).unwrap();
    for seed in [0, 1, 99] {
        let m = Mode::Sample { seed };
        let a = run_multisender(&spec, &[0.3, 0.4], &[true, true], m.clone()).unwrap();
        let b = run_multisender(&spec, &[0.3, 0.4], &[true, true], m).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.branches.len(), 1);
        check(&a);
    }
}

#[test]
fn inactive_angles_do_not_matter() {
    for (m, n) in [(2, 2), (3, 1), (3, 2)] {
        let spec = BroadcastSpec::new(m, n, r(0.6), r(0.8)).unwrap();
        let mut active = vec![true; m];
        active[m - 1] = false;
        let base: Vec<f64> = (0..m).map(|j| 0.3 * j as f64 + 0.1).collect();
        let mut moved = base.clone();
        moved[m - 1] += 1.7;
        let a = run_multisender(&spec, &base, &active, Mode::Enumerate).unwrap();
        let b = run_multisender(&spec, &moved, &active, Mode::Enumerate).unwrap();
        check(&a);
        for (x, y) in a.branches.iter().zip(&b.branches) {
            let (x, y) = (x.final_state.as_ref().unwrap(), y.final_state.as_ref().unwrap());
            assert!(x.max_abs_diff(y).unwrap() < 1e-12);
        }
    }
}

#[test]
fn three_senders_one_receiver() {
    let spec = BroadcastSpec::new(3, 1, r(0.6), r(0.8)).unwrap();
    let t = run_multisender(&spec, &[0.0; 3], &[true; 3], Mode::Enumerate).unwrap();
    check(&t);
    // Sender qudits have dimension N + 1 = 2, so there are 2^3 outcome strings.
    assert_eq!(t.branches.len(), 8);
}

#[test]
fn key_rounds_from_the_worked_example() {
    // (sent, basis, conclusive, announced, expected bit)
    let table: [(usize, usize, bool, Option<usize>, Option<u8>); 10] = [
        (1, 1, false, None, None),
        (2, 1, true, Some(0), Some(0)),
        (1, 0, false, None, None),
        (0, 2, true, Some(1), Some(0)),
        (1, 1, false, None, None),
        (2, 1, true, Some(1), None),
        (0, 1, false, None, None),
        (0, 2, true, Some(2), None),
        (2, 0, true, Some(1), Some(1)),
        (1, 1, false, None, None),
    ];
    for (round, &(sent, basis, conclusive, announced, bit)) in table.iter().enumerate() {
        let outcome = usize::from(conclusive);
        match announced {
            None => assert!(!conclusive, "round {}", round + 1),
            Some(k) => {
                let inferred = pbc_sift(Some(basis), outcome, k);
                assert_eq!(inferred.is_some(), bit.is_some(), "round {}", round + 1);
                if let Some(j) = inferred {
                    assert_eq!(j, sent);
                    assert_eq!(hop_bit(j, k), bit);
                }
            }
        }
    }
}

#[test]
fn sifted_keys_never_disagree() {
    for strategy in [BobStrategy::Projective, BobStrategy::Povm] {
        let rep = run_qkd_pbc(2000, 3, strategy, 11).unwrap();
        assert_eq!(rep.disagreements, 0);
        for (a, b) in rep.alice_keys.iter().zip(&rep.bob_keys) {
            assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn broadcast_reaches_every_receiver((a, b) in amplitudes(), theta in -7.0f64..7.0, n in 1usize..=4) {
        let t = run_bbp(a, b, theta, n, Mode::Enumerate).unwrap();
        prop_assert_eq!(t.branches.len(), n + 1);
        check(&t);
    }

    #[test]
    fn angles_add_across_senders((a, b) in amplitudes(), thetas in prop::collection::vec(-4.0f64..4.0, 1..=3), n in 1usize..=3) {
        let spec = BroadcastSpec::new(thetas.len(), n, a, b).unwrap();
        let t = run_multisender(&spec, &thetas, &vec![true; thetas.len()], Mode::Enumerate).unwrap();
        prop_assert!((t.metric("total angle").unwrap() - thetas.iter().sum::<f64>()).abs() < 1e-12);
        check(&t);
    }

    #[test]
    fn restricted_phase_is_deterministic((a, b) in amplitudes(), k_dim in 3usize..=8, k in 0usize..8) {
        let t = send_phase_restricted(a, b, k % k_dim, k_dim, 2, 1, Mode::Enumerate).unwrap();
        prop_assert!((t.passing_probability() - 1.0).abs() < 1e-12);
        check(&t);
    }

    #[test]
    fn hand_over_restores_the_template((a, b) in amplitudes(), m in 1usize..=2, n in 2usize..=3) {
        let spec = BroadcastSpec::new(m, n, a, b).unwrap();
        check(&add_then_delete(&spec, Mode::Enumerate).unwrap());
    }
}
