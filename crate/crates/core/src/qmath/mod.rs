//! Dense complex linear algebra and Haar-measure tooling.

pub mod eig;
pub mod haar;
pub mod matrix;
pub mod perm;
pub mod rng;
pub mod twirl;

pub use eig::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use haar::{haar_columns, random_unit_vector, sample_haar_unitary};
pub use matrix::{ComplexMatrix, UnitVector, C64, MAX_ENTRIES, NORM_TOL};
pub use perm::{
    combinatorics_suite, swap_trick_check, tensor_permutation_operator, trace_permuted_product,
    trace_with_inverse_permutation, CombinatoricsReport, Permutation, SwapTrickReport,
};
pub use rng::{SeededRng, StreamTag, GAUSSIAN_TRANSFORM};
pub use twirl::{psi_map, swap_operator, twirl_approx, twirl_exact, ApproxTwirl, DEFAULT_MOMENT_CONSTANT};
