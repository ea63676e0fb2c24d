//! Randomized invariants across modules.

use bellsim::cli::fmt_sig9;
use bellsim::comparison::{ps_coherent_at, ps_hybrid, ps_ours};
use bellsim::ft::{decode_block, TelecorrectionCircuitSpec};
use bellsim::logical::{classify, measure_logical_bell, LogicalBellLabel, PairChannel};
use bellsim::loss::{bm_success_prob_lossy, gate_teleport_success_prob, LossChannel, LossSides};
use bellsim::photonic::BsOutcome;
use bellsim::protocols::{
    fidelity, hadamard_via_teleport, ideal_output, teleport, GateKind, GateOutcome, LogicalQubitState,
    PauliCorrection,
};
use bellsim::rng::stream;
use bellsim::BellState;
use proptest::prelude::*;

fn bell() -> impl Strategy<Value = BellState> {
    prop::sample::select(BellState::ALL.to_vec())
}

/// Even-weight Hamming codewords: the stabilizer group of one block.
fn codewords() -> Vec<u32> {
    (0..128u32)
        .filter(|&w| {
            let s = (0..7).filter(|i| w >> i & 1 == 1).fold(0, |s, i| s ^ (i + 1));
            s == 0 && w.count_ones() % 2 == 0
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn logical_measurement_never_misreports(b in bell(), n in 1usize..=12, seed in any::<u64>()) {
        let label = LogicalBellLabel::from_bell(b, n).unwrap();
        let r = measure_logical_bell(label, &PairChannel::standard(), &mut stream(seed, &[])).unwrap();
        if let Some(found) = r.outcome {
            prop_assert_eq!(found, label);
        }
        prop_assert_eq!(r.per_pair.len(), n);
    }

    #[test]
    fn all_failed_pairs_give_no_answer(n in 1usize..=16) {
        prop_assert_eq!(classify(&vec![BsOutcome::Fail; n]).unwrap(), None);
    }

    #[test]
    fn loss_success_is_monotone(n in 1usize..=20, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(bm_success_prob_lossy(n, hi) <= bm_success_prob_lossy(n, lo) + 1e-15);
        prop_assert!(gate_teleport_success_prob(n, hi) <= gate_teleport_success_prob(n, lo) + 1e-15);
        // loss on one side only never hurts more than loss on both
        prop_assert!(bm_success_prob_lossy(n, a) <= gate_teleport_success_prob(n, a) + 1e-15);
        prop_assert!((0.0..=1.0).contains(&bm_success_prob_lossy(n, a)));
    }

    #[test]
    fn scheme_ordering_on_the_plotted_range(nbar in 2.0f64..=20.0) {
        let coherent = ps_coherent_at(nbar).unwrap();
        prop_assert!(coherent + 1e-12 >= ps_hybrid(nbar));
        prop_assert!(ps_hybrid(nbar) + 1e-12 >= ps_ours(nbar));
    }

    #[test]
    fn lossless_teleport_is_exact(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = stream(seed, &[1]);
        let q = LogicalQubitState::random(n, &mut r);
        let out = teleport(&q, LossChannel::new(0.0).unwrap(), LossSides::Both, &mut r).unwrap();
        if let GateOutcome::Success(s) = out {
            let f = fidelity(&ideal_output(GateKind::TeleportIdentity, &[q]).amps, &s.output.amps);
            prop_assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lossless_hadamard_is_exact(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = stream(seed, &[2]);
        let q = LogicalQubitState::random(n, &mut r);
        let out = hadamard_via_teleport(&q, LossChannel::new(0.0).unwrap(), &mut r).unwrap();
        if let GateOutcome::Success(s) = out {
            let f = fidelity(&ideal_output(GateKind::Hadamard, &[q]).amps, &s.output.amps);
            prop_assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn correction_frames_conjugate_back(x1 in any::<bool>(), z1 in any::<bool>(), x2 in any::<bool>(), z2 in any::<bool>()) {
        let p1 = PauliCorrection { x: x1, z: z1 };
        let p2 = PauliCorrection { x: x2, z: z2 };
        prop_assert_eq!(p1.through_hadamard().through_hadamard(), p1);
        let (a, b) = PauliCorrection::through_cz(p1, p2);
        prop_assert_eq!(PauliCorrection::through_cz(a, b), (p1, p2));
    }

    #[test]
    fn decoder_corrects_any_single_flip(cw in prop::sample::select(codewords()), q in 0usize..7, logical in any::<bool>()) {
        let base = if logical { cw ^ 0x7f } else { cw };
        prop_assert_eq!(decode_block(base ^ (1 << q), 0), Some(logical));
        // the same flip declared as an erasure
        prop_assert_eq!(decode_block(base ^ (1 << q), 1 << q), Some(logical));
    }

    #[test]
    fn circuit_parser_never_panics(text in "[a-z0-9 #\\n-]{0,200}") {
        let _ = TelecorrectionCircuitSpec::parse(&text);
    }

    #[test]
    fn sig9_round_trips(x in -1e12f64..1e12) {
        let back: f64 = fmt_sig9(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-9 * x.abs() + 1e-300);
    }
}

#[test]
fn default_circuit_survives_text_round_trip() {
    let c = TelecorrectionCircuitSpec::default_round();
    assert_eq!(TelecorrectionCircuitSpec::parse(&c.to_text()).unwrap(), c);
}
