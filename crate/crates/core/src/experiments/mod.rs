//! Experiments: exact tampering probabilities, Monte Carlo moments, the
//! Beta-law test, soundness sweeps, delta-nets and the continuity check.
//!
//! Every Monte Carlo loop draws trial `i` from its own stream and reduces the
//! per-trial values in index order, so results do not depend on the number of
//! worker threads.

pub mod beta;
pub mod continuity;
pub mod moments;
pub mod net;
pub mod overlap;
pub mod report;
pub mod soundness;
pub mod stats;

pub use beta::{beta_law_test, BetaReport};
pub use continuity::{continuity_check, continuity_sweep, ContinuityReport};
pub use moments::{
    estimate_first_moment, estimate_higher_moment, eval_deviation_bound, exact_first_moment, ChannelParams,
    DeviationBound, MomentReport, PairKind,
};
pub use net::{build_delta_net, DeltaNet, NetConfig};
pub use overlap::{
    code_space_acceptance, exact_overlap, non_bottom_probability, overlap_via_kraus, tampered_distribution, OverlapSample,
};
pub use report::{CsvRow, ExperimentReport, Verdict};
pub use soundness::{soundness_sweep, SoundnessReport, TrialsMode};
