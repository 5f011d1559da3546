use proptest::prelude::*;
use tamperlab_core::qmath::{random_unit_vector, sample_haar_unitary, ComplexMatrix, SeededRng};
use tamperlab_core::schemes::{break_classical_scheme, hadamard_scheme_probabilities};
use tamperlab_core::{ClassicalSchemeTable, HaarScheme, QuantumMessageScheme};

fn random_density(d: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal()).unwrap();
    let rho = g.matmul(&g.adjoint()).unwrap();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// `⟨x|H^{⊗n}|y⟩ = (−1)^{x·y} / √(2^n)`.
fn hadamard_entry(n: u32, x: usize, y: usize) -> f64 {
    let sign = if (x & y).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    sign / 2f64.powf(n as f64 / 2.0)
}

#[test]
fn haar_schemes_are_complete() {
    for k in 0..=4u32 {
        let d = 1usize << (k + 1);
        let scheme = HaarScheme::from_seed(d, k, 40 + k as u64).unwrap();
        for m in 0..scheme.num_messages() {
            let dist = scheme.decode_pure(&scheme.encode(m).unwrap()).unwrap();
            assert!((dist.messages[m] - 1.0).abs() < 1e-10, "k={k} m={m}");
            assert!(dist.bottom.abs() < 1e-10);
        }
    }
}

#[test]
fn decoder_is_a_complete_measurement() {
    let scheme = HaarScheme::from_seed(16, 2, 3).unwrap();
    let mut rng = SeededRng::new(4, 0);
    for _ in 0..100 {
        let rho = random_density(16, &mut rng);
        let dist = scheme.decode_distribution(&rho).unwrap();
        assert!((dist.total() - 1.0).abs() < 1e-10);
        assert!(dist.messages.iter().all(|&p| p >= -1e-12) && dist.bottom >= -1e-12);
    }
}

#[test]
fn code_space_does_not_depend_on_message_basis() {
    let scheme = QuantumMessageScheme::new(HaarScheme::from_seed(16, 2, 5).unwrap());
    let w = sample_haar_unitary(4, &mut SeededRng::new(6, 0)).unwrap();
    let a = scheme.code_projector().unwrap();
    let b = scheme.code_projector_in_basis(&w).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-10);
    let p2 = a.matmul(&a).unwrap();
    assert!(p2.max_abs_diff(&a) < 1e-10);
    assert!((a.trace().re - 4.0).abs() < 1e-10);
}

#[test]
fn quantum_messages_are_accepted() {
    let scheme = QuantumMessageScheme::new(HaarScheme::from_seed(8, 2, 7).unwrap());
    let mut rng = SeededRng::new(8, 0);
    for _ in 0..20 {
        let v = random_unit_vector(4, &mut rng).unwrap();
        let c = scheme.encode_state(&v).unwrap();
        let dec = scheme.quantum_decode(&c.projector()).unwrap();
        assert!((dec.accept_prob - 1.0).abs() < 1e-10);
        let post = dec.post_state.unwrap();
        assert!(post.max_abs_diff(&v.projector()) < 1e-10);
    }
}

#[test]
fn hadamard_outputs_are_flat() {
    for n in 1..=10u32 {
        let k = n / 2;
        let pad = n - k;
        let dim = 1usize << n;
        let ys: Vec<usize> = if n <= 6 { (0..dim).collect() } else { vec![0, 1, dim / 3, dim - 1] };
        for y in ys {
            let out = hadamard_scheme_probabilities(n, k, y, 0).unwrap();
            for (mp, &p) in out.distribution.messages.iter().enumerate() {
                let oracle = hadamard_entry(n, mp << pad, y).powi(2);
                assert!((p - oracle).abs() < 1e-12);
                assert!((p - 2f64.powi(-(n as i32))).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn breaker_certificates_replay(seed in any::<u64>(), n in 1u32..=6, k_raw in 1u32..=3, randomized in any::<bool>()) {
        let k = k_raw.min(n);
        let mut rng = SeededRng::new(seed, 0);
        let max_support = (1usize << n) >> k;
        let support = 1 + rng.below(max_support);
        let scheme = ClassicalSchemeTable::random(n, k, support, randomized, &mut rng).unwrap();
        let cert = break_classical_scheme(&scheme).unwrap();
        prop_assert_eq!(cert.replay(&scheme), cert.wrong_decode_prob);
        prop_assert!((cert.wrong_decode_prob - 1.0).abs() < 1e-12);
        for m in 0..scheme.num_messages() {
            prop_assert!((scheme.completeness(m) - 1.0).abs() < 1e-12);
        }
    }
}
