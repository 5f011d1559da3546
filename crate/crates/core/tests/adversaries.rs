use proptest::prelude::*;
use tamperlab_core::adversaries::{audit_family, lift_classical, replacement_channel};
use tamperlab_core::qmath::{random_unit_vector, ComplexMatrix, SeededRng, UnitVector};
use tamperlab_core::{AdversarialFamily, ClassicalFunction, ConstraintProfile, QuantumChannel};

/// Largest fibre size, counted directly from the table.
fn max_fibre(f: &ClassicalFunction) -> usize {
    let mut counts = vec![0usize; f.domain_size()];
    for &y in f.table() {
        counts[y] += 1;
    }
    counts.into_iter().max().unwrap()
}

fn fixed_points(f: &ClassicalFunction) -> usize {
    f.table().iter().enumerate().filter(|(x, y)| x == *y).count()
}

#[test]
fn lift_maps_basis_states_to_images() {
    let mut rng = SeededRng::new(1, 0);
    for n in 1..=4u32 {
        for _ in 0..10 {
            let f = ClassicalFunction::random(n, &mut rng).unwrap();
            let ch = lift_classical(&f).unwrap();
            for x in 0..f.domain_size() {
                let out = ch.apply_pure(&UnitVector::basis(f.domain_size(), x).unwrap()).unwrap();
                let expected = UnitVector::basis(f.domain_size(), f.table()[x]).unwrap().projector();
                assert!(out.max_abs_diff(&expected) < 1e-12);
            }
        }
    }
}

#[test]
fn classical_rank_and_fidelity_sandwich() {
    let mut rng = SeededRng::new(2, 0);
    for i in 0..200 {
        let n = 1 + (i % 4) as u32;
        let f = ClassicalFunction::random(n, &mut rng).unwrap();
        let ch = lift_classical(&f).unwrap();
        let r = ch.min_kraus_rank().unwrap();
        assert_eq!(r, max_fibre(&f), "{:?}", f.table());
        let fe = ch.entanglement_fidelity().unwrap();
        let fix = fixed_points(&f) as f64;
        let size2 = (f.domain_size() * f.domain_size()) as f64;
        assert!(fe >= fix * fix / (size2 * r as f64) - 1e-10);
        assert!(fe <= fix * fix / size2 + 1e-10);
    }
}

#[test]
fn replacement_absorbs_every_input() {
    let mut rng = SeededRng::new(3, 0);
    let psi = random_unit_vector(6, &mut rng).unwrap();
    let ch = replacement_channel(&psi).unwrap();
    let target = psi.projector();
    for _ in 0..50 {
        let g = ComplexMatrix::from_fn(6, 6, |_, _| rng.complex_normal()).unwrap();
        let rho = g.matmul(&g.adjoint()).unwrap();
        let rho = rho.scale_real(1.0 / rho.trace().re);
        assert!(ch.apply(&rho).unwrap().max_abs_diff(&target) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn adding_a_channel_never_fixes_a_condition(seed in any::<u64>(), kind in 0usize..4, alpha in 0.0f64..0.2) {
        let d = 8;
        let profile = ConstraintProfile::new(alpha, 0.5).unwrap();
        let base = AdversarialFamily::traceless_unitaries(d, 2, seed).unwrap();
        let mut rng = SeededRng::new(seed, 9);
        let extra = match kind {
            0 => QuantumChannel::identity(d).unwrap(),
            1 => QuantumChannel::random(d, 1 + rng.below(6), &mut rng).unwrap(),
            2 => replacement_channel(&random_unit_vector(d, &mut rng).unwrap()).unwrap(),
            _ => lift_classical(&ClassicalFunction::random(3, &mut rng).unwrap()).unwrap(),
        };
        let before = audit_family(&base, &profile).unwrap();
        let after = audit_family(&base.with_channel(extra).unwrap(), &profile).unwrap();
        prop_assert!(before.size.pass || !after.size.pass);
        prop_assert!(before.rank.pass || !after.rank.pass);
        prop_assert!(before.entanglement_fidelity.pass || !after.entanglement_fidelity.pass);
    }
}

#[test]
fn pauli_family_audit() {
    let fam = AdversarialFamily::paulis(2).unwrap();
    assert_eq!(fam.len(), 15);
    let audit = audit_family(&fam, &ConstraintProfile::new(0.1, 0.5).unwrap()).unwrap();
    assert_eq!(audit.summary.max_min_kraus_rank, 1);
    assert!(audit.summary.max_entanglement_fidelity.abs() < 1e-12);
    assert_eq!(audit.unitary_members, 15);
}
