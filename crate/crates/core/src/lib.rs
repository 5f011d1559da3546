//! Quantum tamper-detection laboratory.
//!
//! The crate is organised the same way the experiments are run:
//!
//! - [`qmath`]: dense complex linear algebra, Haar sampling, the symmetric group
//!   and Haar moment operators (twirls).
//! - [`channels`]: CPTP maps in Kraus, Choi and Stinespring form, minimum Kraus
//!   rank and entanglement fidelity.
//! - [`schemes`]: encoding/decoding schemes (Haar random, quantum-message,
//!   Hadamard, classical tables) and the classical impossibility breaker.
//! - [`adversaries`]: adversarial family constructors and the condition audit.
//! - [`experiments`]: exact tampering probabilities, Monte Carlo moments, the
//!   Beta-law test, soundness sweeps, delta-nets and the continuity check.
//! - [`io`]: JSON file formats for channels, families, schemes and functions.

pub mod adversaries;
pub mod channels;
pub mod error;
pub mod experiments;
pub mod io;
pub mod qmath;
pub mod schemes;

pub use adversaries::{AdversarialFamily, ClassicalFunction, ConstraintProfile};
pub use channels::{ChoiMatrix, QuantumChannel, StinespringIsometry};
pub use error::{Error, Result};
pub use qmath::{ComplexMatrix, Permutation, SeededRng, UnitVector, C64};
pub use schemes::{ClassicalSchemeTable, HaarScheme, HadamardScheme, QuantumMessageScheme};

/// Library version stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
