use proptest::prelude::*;
use tamperlab_core::channels::validate;
use tamperlab_core::qmath::{sample_haar_unitary, ComplexMatrix, SeededRng, C64};
use tamperlab_core::QuantumChannel;

/// `Φ(|i⟩⟨j|)` for every `i, j`: the channel's action on an operator basis.
fn action_on_basis(ch: &QuantumChannel) -> Vec<ComplexMatrix> {
    let d = ch.dim_in();
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d).unwrap();
            e.set(i, j, C64::new(1.0, 0.0));
            out.push(ch.apply(&e).unwrap());
        }
    }
    out
}

fn same_action(a: &QuantumChannel, b: &QuantumChannel, tol: f64) -> bool {
    action_on_basis(a)
        .iter()
        .zip(action_on_basis(b))
        .all(|(x, y)| x.max_abs_diff(&y) <= tol)
}

/// `K'_a = Σ_b V[a,b]·K_b` for an `m×r` isometry `V`: a different Kraus set of the same channel.
fn rotate_environment(ch: &QuantumChannel, extra: usize, rng: &mut SeededRng) -> QuantumChannel {
    let r = ch.num_kraus();
    let m = r + extra;
    let u = sample_haar_unitary(m, rng).unwrap();
    let kraus = (0..m)
        .map(|a| {
            let mut k = ComplexMatrix::zeros(ch.dim_out(), ch.dim_in()).unwrap();
            for (b, kb) in ch.kraus().iter().enumerate() {
                k.add_scaled(kb, u.get(a, b)).unwrap();
            }
            k
        })
        .collect();
    QuantumChannel::new(ch.dim_in(), ch.dim_out(), kraus).unwrap()
}

/// `F_e = (1/d²)·Σ_i |Tr K_i|²`.
fn fidelity_oracle(ch: &QuantumChannel) -> f64 {
    let d = ch.dim_in() as f64;
    ch.kraus().iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / (d * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn representation_round_trip(seed in any::<u64>(), d in 1usize..=4, r in 1usize..=16) {
        let rank = r.min(d * d);
        let ch = QuantumChannel::random(d, rank, &mut SeededRng::new(seed, 0)).unwrap();
        let canonical = ch.canonicalized().unwrap();
        prop_assert!(same_action(&ch, &canonical, 1e-9));
        let via_choi = ch.choi().unwrap().to_channel().unwrap();
        prop_assert!(same_action(&ch, &via_choi, 1e-9));
    }

    #[test]
    fn rank_ignores_the_kraus_set(seed in any::<u64>(), d in 2usize..=4, r in 1usize..=4, extra in 0usize..=3) {
        let mut rng = SeededRng::new(seed, 1);
        let ch = QuantumChannel::random(d, r, &mut rng).unwrap();
        let redundant = rotate_environment(&ch, extra, &mut rng);
        let rank = ch.min_kraus_rank().unwrap();
        prop_assert_eq!(rank, r);
        prop_assert_eq!(redundant.min_kraus_rank().unwrap(), rank);
        prop_assert_eq!(ch.canonicalized().unwrap().min_kraus_rank().unwrap(), rank);
    }

    #[test]
    fn fidelity_ignores_the_kraus_set(seed in any::<u64>(), d in 1usize..=4, r in 1usize..=4) {
        let mut rng = SeededRng::new(seed, 2);
        let ch = QuantumChannel::random(d, r, &mut rng).unwrap();
        let fe = ch.entanglement_fidelity().unwrap();
        prop_assert!((fe - fidelity_oracle(&ch)).abs() < 1e-12);
        let rotated = rotate_environment(&ch, 2, &mut rng);
        prop_assert!((rotated.entanglement_fidelity().unwrap() - fe).abs() < 1e-10);
        let mut padded = ch.kraus().to_vec();
        padded.push(ComplexMatrix::zeros(d, d).unwrap());
        let padded = QuantumChannel::new(d, d, padded).unwrap();
        prop_assert!((padded.entanglement_fidelity().unwrap() - fe).abs() < 1e-10);
    }

    #[test]
    fn basic_ranges(seed in any::<u64>(), d in 1usize..=4, r in 1usize..=16) {
        let ch = QuantumChannel::random(d, r.min(d * d), &mut SeededRng::new(seed, 3)).unwrap();
        let fe = ch.entanglement_fidelity().unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&fe));
        let rank = ch.min_kraus_rank().unwrap();
        prop_assert!(rank >= 1 && rank <= d * d);
        let choi = ch.choi().unwrap();
        prop_assert!((choi.matrix().trace().re - d as f64).abs() < 1e-9);
        prop_assert!(validate(&ch).unwrap().ok());
    }
}

#[test]
fn unitary_fidelity_examples() {
    let x = QuantumChannel::pauli_string("X").unwrap();
    assert!(x.entanglement_fidelity().unwrap().abs() < 1e-15);
    let dep = QuantumChannel::depolarizing(4).unwrap();
    assert!((dep.entanglement_fidelity().unwrap() - 1.0 / 16.0).abs() < 1e-14);
    assert_eq!(dep.min_kraus_rank().unwrap(), 16);
    let id = QuantumChannel::identity(3).unwrap();
    assert_eq!(id.min_kraus_rank().unwrap(), 1);
    assert!((id.entanglement_fidelity().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn stinespring_reproduces_the_channel() {
    let mut rng = SeededRng::new(9, 0);
    let ch = QuantumChannel::random(3, 2, &mut rng).unwrap();
    let iso = ch.stinespring().unwrap();
    assert!(iso.isometry_residual().unwrap() < 1e-10);
    let g = ComplexMatrix::from_fn(3, 3, |_, _| rng.complex_normal()).unwrap();
    let rho = g.matmul(&g.adjoint()).unwrap();
    let rho = rho.scale_real(1.0 / rho.trace().re);
    assert!(iso.apply(&rho).unwrap().max_abs_diff(&ch.apply(&rho).unwrap()) < 1e-12);
}
