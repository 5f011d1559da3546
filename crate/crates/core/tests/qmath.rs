use proptest::prelude::*;
use tamperlab_core::experiments::stats::ks_two_sample;
use tamperlab_core::qmath::perm::{tensor_permutation_operator, trace_permuted_product};
use tamperlab_core::qmath::{sample_haar_unitary, twirl_exact, ComplexMatrix, Permutation, SeededRng, C64};

fn random_matrix(n: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| rng.complex_normal()).unwrap()
}

fn random_permutation(n: usize, rng: &mut SeededRng) -> Permutation {
    let mut map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        map.swap(i, rng.below(i + 1));
    }
    Permutation::from_zero_based(map).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_unitaries_are_unitary(seed in any::<u64>(), d in 1usize..=16) {
        let u = sample_haar_unitary(d, &mut SeededRng::new(seed, 0)).unwrap();
        let gram = u.adjoint().matmul(&u).unwrap();
        prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(d).unwrap()) < 1e-10);
    }

    #[test]
    fn same_seed_same_unitary(seed in any::<u64>(), stream in any::<u64>()) {
        let a = sample_haar_unitary(5, &mut SeededRng::new(seed, stream)).unwrap();
        let b = sample_haar_unitary(5, &mut SeededRng::new(seed, stream)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn inverse_composes_to_identity(seed in any::<u64>(), n in 1usize..=7) {
        let p = random_permutation(n, &mut SeededRng::new(seed, 1));
        prop_assert_eq!(p.compose(&p.inverse()).unwrap(), Permutation::identity(n));
        let cycle_len: usize = p.cycles().iter().map(Vec::len).sum();
        prop_assert_eq!(cycle_len, n);
    }
}

#[test]
fn haar_invariance_under_left_multiplication() {
    let d = 4;
    let w = sample_haar_unitary(d, &mut SeededRng::new(100, 0)).unwrap();
    let n = 10_000;
    let mut plain = Vec::with_capacity(n);
    let mut rotated = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let u = sample_haar_unitary(d, &mut SeededRng::new(1, i)).unwrap();
        plain.push(u.get(0, 0).norm_sqr());
        let v = sample_haar_unitary(d, &mut SeededRng::new(2, i)).unwrap();
        rotated.push(w.matmul(&v).unwrap().get(0, 0).norm_sqr());
    }
    let ks = ks_two_sample(&plain, &rotated);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn permutation_operators_form_a_representation() {
    for n in 1..=4 {
        let group = Permutation::all(n).unwrap();
        for d in 1..=3 {
            let ops: Vec<ComplexMatrix> = group.iter().map(|p| tensor_permutation_operator(p, d).unwrap()).collect();
            for (i, p) in group.iter().enumerate() {
                for (j, s) in group.iter().enumerate() {
                    let prod = ops[i].matmul(&ops[j]).unwrap();
                    let direct = tensor_permutation_operator(&p.compose(s).unwrap(), d).unwrap();
                    assert_eq!(prod, direct, "n={n} d={d} pi={p} sigma={s}");
                }
            }
        }
    }
}

#[test]
fn swap_trick_matches_dense_trace() {
    let mut rng = SeededRng::new(31, 0);
    for _ in 0..100 {
        let n = 1 + rng.below(4);
        let d = 1 + rng.below(4);
        let mats: Vec<ComplexMatrix> = (0..n).map(|_| random_matrix(d, &mut rng)).collect();
        let pi = random_permutation(n, &mut rng);
        let mut kron = mats[0].clone();
        for m in &mats[1..] {
            kron = kron.kron(m).unwrap();
        }
        let dense = kron.matmul(&tensor_permutation_operator(&pi, d).unwrap()).unwrap().trace();
        let fast = trace_permuted_product(&pi, &mats).unwrap();
        assert!((dense - fast).norm() <= 1e-10 * dense.norm().max(1.0), "{pi} d={d}: {dense} vs {fast}");
    }
}

#[test]
fn first_order_twirl_matches_monte_carlo() {
    let d = 6;
    let mut rng = SeededRng::new(77, 0);
    let g = random_matrix(d, &mut rng);
    let m = g.matmul(&g.adjoint()).unwrap();
    let exact = twirl_exact(&m, 1).unwrap();
    let samples = 100_000u64;
    let mut acc = ComplexMatrix::zeros(d, d).unwrap();
    for i in 0..samples {
        let u = sample_haar_unitary(d, &mut SeededRng::new(78, i)).unwrap();
        acc.add_scaled(&u.matmul(&m).unwrap().matmul(&u.adjoint()).unwrap(), C64::new(1.0, 0.0))
            .unwrap();
    }
    let mc = acc.scale_real(1.0 / samples as f64);
    let scale = exact.max_abs();
    assert!(mc.max_abs_diff(&exact) <= 0.01 * scale, "{} vs {scale}", mc.max_abs_diff(&exact));
}
