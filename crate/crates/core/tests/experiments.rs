use proptest::prelude::*;
use tamperlab_core::adversaries::{lift_classical, replacement_channel};
use tamperlab_core::experiments::beta::beta_law_test;
use tamperlab_core::experiments::moments::{
    estimate_first_moment, estimate_higher_moment, exact_first_moment, exact_first_moment_from_kraus,
    higher_moment_bound,
};
use tamperlab_core::experiments::net::{build_delta_net, NetConfig};
use tamperlab_core::experiments::stats::mean_and_standard_error;
use tamperlab_core::experiments::{
    continuity_sweep, exact_overlap, soundness_sweep, tampered_distribution, PairKind, TrialsMode, Verdict,
};
use tamperlab_core::qmath::{random_unit_vector, sample_haar_unitary, ComplexMatrix, SeededRng};
use tamperlab_core::{AdversarialFamily, ClassicalFunction, HaarScheme, QuantumChannel};

/// Unitary on `C^4` with `|Tr V|² = 4`: `diag(1, 1, 1, −1)·…` has trace 2.
fn trace_two_unitary() -> QuantumChannel {
    let w = sample_haar_unitary(4, &mut SeededRng::new(5, 5)).unwrap();
    let diag = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 1.0, -1.0]).unwrap();
    QuantumChannel::unitary(w.matmul(&diag).unwrap().matmul(&w.adjoint()).unwrap()).unwrap()
}

/// Independent Monte Carlo route: full Haar encoder, density-matrix overlap.
fn dense_mean(ch: &QuantumChannel, d: usize, k: u32, s: usize, t: usize, trials: u64, seed: u64) -> (f64, f64) {
    let values: Vec<f64> = (0..trials)
        .map(|i| {
            let u = sample_haar_unitary(d, &mut SeededRng::new(seed, i)).unwrap();
            let scheme = HaarScheme::new(u, k).unwrap();
            exact_overlap(&scheme, ch, s, t).unwrap().value
        })
        .collect();
    mean_and_standard_error(&values)
}

#[test]
fn overlap_examples() {
    let scheme = HaarScheme::from_seed(8, 2, 1).unwrap();
    let dep = QuantumChannel::depolarizing(8).unwrap();
    for s in 0..4 {
        for t in 0..4 {
            assert!((exact_overlap(&scheme, &dep, s, t).unwrap().value - 0.125).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decoder_outcomes_sum_to_one(seed in any::<u64>(), rank in 1usize..=6, k in 1u32..=3) {
        let d = 16;
        let scheme = HaarScheme::from_seed(d, k, seed).unwrap();
        let ch = QuantumChannel::random(d, rank, &mut SeededRng::new(seed, 1)).unwrap();
        for s in 0..scheme.num_messages() {
            let dist = tampered_distribution(&scheme, &ch, s).unwrap();
            let sum: f64 = (0..scheme.num_messages())
                .map(|t| exact_overlap(&scheme, &ch, s, t).unwrap().value)
                .sum();
            prop_assert!((sum + dist.bottom - 1.0).abs() < 1e-10);
            for &p in &dist.messages {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
            }
        }
    }
}

#[test]
fn first_moment_of_a_trace_two_unitary() {
    let ch = trace_two_unitary();
    let fe = ch.entanglement_fidelity().unwrap();
    assert!((fe - 0.25).abs() < 1e-12);
    assert!((exact_first_moment(4, fe, PairKind::OffDiagonal) - 0.2).abs() < 1e-12);
    let (mean, se) = dense_mean(&ch, 4, 1, 0, 1, 100_000, 17);
    assert!((mean - 0.2).abs() <= 4.0 * se, "{mean} +- {se}");
    let report = estimate_first_moment(&ch, "v", 4, 1, PairKind::OffDiagonal, 10_000, 3).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
}

#[test]
fn first_moments_for_mixed_channels() {
    let mut rng = SeededRng::new(21, 0);
    for d in [4usize, 8, 16] {
        let n = d.trailing_zeros();
        let channels = [
            QuantumChannel::unitary(sample_haar_unitary(d, &mut rng).unwrap()).unwrap(),
            QuantumChannel::depolarizing(d).unwrap(),
            lift_classical(&ClassicalFunction::random(n, &mut rng).unwrap()).unwrap(),
            replacement_channel(&random_unit_vector(d, &mut rng).unwrap()).unwrap(),
            QuantumChannel::random(d, 3, &mut rng).unwrap(),
        ];
        for (i, ch) in channels.iter().enumerate() {
            for kind in [PairKind::OffDiagonal, PairKind::Diagonal] {
                let fe = ch.entanglement_fidelity().unwrap();
                assert!((exact_first_moment(d, fe, kind) - exact_first_moment_from_kraus(ch, kind)).abs() < 1e-12);
                let r = estimate_first_moment(ch, "mix", d, 1, kind, 10_000, 100 + i as u64).unwrap();
                assert_eq!(r.verdict, Verdict::Pass, "d={d} channel {i} {kind:?}: {r:?}");
            }
        }
    }
}

#[test]
fn second_moment_of_a_unitary_respects_the_bound() {
    let d = 64;
    let u = QuantumChannel::unitary(sample_haar_unitary(d, &mut SeededRng::new(8, 8)).unwrap()).unwrap();
    let bound = higher_moment_bound(d, 1, 0.0, 2, PairKind::OffDiagonal, 4.0).unwrap();
    assert!((bound - 2.0 * (2.0f64 * 66.0 / 4096.0).powi(2)).abs() < 1e-15);
    let r = estimate_higher_moment(&u, "u", d, 1, PairKind::OffDiagonal, 2, 100_000, 9, 4.0).unwrap();
    assert!(r.empirical_mean <= bound, "{} > {bound}", r.empirical_mean);
    assert_eq!(r.verdict, Verdict::Heuristic);
}

#[test]
fn beta_law_point_values() {
    let r = beta_law_test(8, 100_000, 5, &[0.25]).unwrap();
    let oracle = 0.75f64.powi(7);
    assert!((r.thresholds[0].exact - oracle).abs() < 1e-15);
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.thresholds);
    for d in [2usize, 4, 8] {
        let r = beta_law_test(d, 10_000, 40 + d as u64, &[0.0, 0.5]).unwrap();
        assert!(r.ks.p_value > 0.01, "d={d}: {:?}", r.ks);
        assert_eq!(r.thresholds[0].empirical, 1.0);
    }
}

#[test]
fn depolarizing_sweep_is_exact() {
    for k in 1..=3u32 {
        let fam = AdversarialFamily::depolarizing(64).unwrap();
        let r = soundness_sweep(&fam, k, 20, TrialsMode::Exact, 11).unwrap();
        let level = (1u32 << k) as f64 / 64.0;
        for s in &r.samples {
            assert!((s.max_non_bottom - level).abs() < 1e-12);
            assert!((s.min_non_bottom - level).abs() < 1e-12);
        }
    }
}

#[test]
fn traceless_sweep_concentrates() {
    let fam = AdversarialFamily::traceless_unitaries(64, 20, 12).unwrap();
    let r = soundness_sweep(&fam, 2, 10, TrialsMode::Exact, 13).unwrap();
    assert!((r.reference_level - (3.0 * 64.0 / 4095.0 + 64.0 / 4160.0)).abs() < 1e-12);
    let all_mean = r.samples.iter().map(|s| s.mean_non_bottom).sum::<f64>() / r.samples.len() as f64;
    assert!((all_mean - r.reference_level).abs() < 0.01, "{all_mean}");
}

#[test]
fn continuity_never_fails() {
    let r = continuity_sweep(16, 2, 1000, 14).unwrap();
    assert_eq!(r.violations, 0);
}

#[test]
fn qubit_net_covers_all_probes() {
    let net = build_delta_net(2, 0.5, 15, NetConfig::default()).unwrap();
    assert_eq!(net.coverage_confidence, 1.0);
    assert!((net.num_points as f64) <= net.size_ceiling);
}

#[test]
fn reports_are_reproducible() {
    let ch = QuantumChannel::random(8, 2, &mut SeededRng::new(1, 1)).unwrap();
    let a = estimate_first_moment(&ch, "x", 8, 2, PairKind::OffDiagonal, 1000, 99).unwrap();
    let b = estimate_first_moment(&ch, "x", 8, 2, PairKind::OffDiagonal, 1000, 99).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
