//! Fixtures shared by the benchmarks.

use tamperlab_core::qmath::{sample_haar_unitary, SeededRng};
use tamperlab_core::{ComplexMatrix, QuantumChannel};

/// Seed for every fixture, so runs are comparable.
pub const BENCH_SEED: u64 = 0xBE7C;

pub fn haar(d: usize) -> ComplexMatrix {
    sample_haar_unitary(d, &mut SeededRng::new(BENCH_SEED, d as u64)).expect("valid dimension")
}

pub fn random_channel(d: usize, rank: usize) -> QuantumChannel {
    QuantumChannel::random(d, rank, &mut SeededRng::new(BENCH_SEED, (d * 1000 + rank) as u64)).expect("valid channel")
}

/// Random density operator on `C^dim`.
pub fn density(dim: usize) -> ComplexMatrix {
    let mut rng = SeededRng::new(BENCH_SEED, 1 << 32 | dim as u64);
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| rng.complex_normal()).expect("valid shape");
    let w = g.matmul(&g.adjoint()).expect("square");
    let tr = w.trace().re;
    w.scale_real(1.0 / tr)
}
