//! Soundness sweeps: for each sampled Haar encoder, the worst non-`⊥`
//! probability over all messages and all channels of a family.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::{exact_first_moment, PairKind};
use super::overlap::codeword_overlaps;
use super::report::Verdict;
use super::stats::{mean_and_standard_error, quantile_sorted, sorted};
use crate::adversaries::{detect_replacement, AdversarialFamily};
use crate::error::{Error, Result};
use crate::qmath::rng::{SeededRng, StreamTag};
use crate::qmath::UnitVector;
use crate::schemes::HaarScheme;

/// Quantiles reported for the per-encoder maxima.
pub const REPORTED_QUANTILES: [f64; 5] = [0.0, 0.05, 0.5, 0.95, 1.0];
/// Tail level used for the replacement-overlap prediction.
pub const REPLACEMENT_TAIL: f64 = 0.05;

/// How decoder outcomes are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum TrialsMode {
    /// Probabilities computed as traces.
    #[default]
    Exact,
    /// Frequencies from `shots` simulated measurements per (encoder, message, channel).
    Sampled { shots: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct EncoderSample {
    pub encoder: usize,
    /// Largest non-`⊥` probability over messages and channels.
    pub max_non_bottom: f64,
    pub min_non_bottom: f64,
    pub mean_non_bottom: f64,
    /// Channel and message attaining the maximum.
    pub worst_channel: usize,
    pub worst_message: usize,
    /// `max |⟨ψ_m|ψ⟩|²` over codewords and replacement targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_replacement_overlap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantileSummary {
    pub q: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplacementSummary {
    pub targets: usize,
    /// Largest overlap seen across all encoders.
    pub max_overlap: f64,
    /// Each overlap is `Beta(1, d−1)`; the union over `2^k · targets` pairs
    /// exceeds this level with probability at most [`REPLACEMENT_TAIL`].
    pub predicted_level: f64,
    pub exceed_fraction: f64,
    /// Mean overlap `1/d`.
    pub expected_overlap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub family: String,
    pub d: usize,
    pub k: u32,
    pub family_size: usize,
    pub n_unitaries: usize,
    pub trials_mode: TrialsMode,
    pub master_seed: u64,
    /// Largest `F_e` in the family.
    pub max_entanglement_fidelity: f64,
    /// `E_U[Σ_t X_mt] = (2^k − 1)·E[X_{s≠t}] + E[X_{s=t}]` at the largest `F_e`.
    pub reference_level: f64,
    pub mean_of_max: f64,
    pub standard_error_of_max: f64,
    pub quantiles: Vec<QuantileSummary>,
    /// Smallest and largest non-`⊥` probability over every encoder, message and channel.
    pub overall_min: f64,
    pub overall_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replacement: Option<ReplacementSummary>,
    pub verdict: Verdict,
    pub samples: Vec<EncoderSample>,
}

/// Non-`⊥` probability `Σ_t X_mt` for every channel and message.
fn non_bottom_table(scheme: &HaarScheme, family: &AdversarialFamily) -> Result<Vec<Vec<f64>>> {
    family
        .channels()
        .iter()
        .map(|ch| {
            (0..scheme.num_messages())
                .map(|m| {
                    let psi = &scheme.codewords()[m];
                    Ok(ch.transition_probabilities(psi, scheme.codewords())?.iter().sum::<f64>())
                })
                .collect()
        })
        .collect()
}

/// Samples `n_unitaries` Haar encoders (stream `Encoder/i`) and reports the
/// distribution of the worst-case non-`⊥` probability.
pub fn soundness_sweep(
    family: &AdversarialFamily,
    k: u32,
    n_unitaries: usize,
    mode: TrialsMode,
    seed: u64,
) -> Result<SoundnessReport> {
    let d = family.d();
    if k >= usize::BITS || (1usize << k) >= d {
        return Err(Error::NoAncilla { messages: 1usize.checked_shl(k).unwrap_or(usize::MAX), d });
    }
    if n_unitaries == 0 {
        return Err(Error::Precondition("need at least one encoder sample".into()));
    }
    if let TrialsMode::Sampled { shots: 0 } = mode {
        return Err(Error::Precondition("sampled mode needs at least one shot".into()));
    }
    let targets: Vec<UnitVector> = family.channels().iter().filter_map(detect_replacement).collect();

    let samples: Vec<EncoderSample> = (0..n_unitaries)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::for_purpose(seed, StreamTag::Encoder, i as u64);
            let scheme = HaarScheme::sample(d, k, &mut rng, Some(seed))?;
            let mut table = non_bottom_table(&scheme, family)?;
            if let TrialsMode::Sampled { shots } = mode {
                let mut shots_rng = SeededRng::for_purpose(seed, StreamTag::Shots, i as u64);
                for p in table.iter_mut().flatten() {
                    let dist = Binomial::new(shots, p.clamp(0.0, 1.0))
                        .map_err(|e| Error::Numerical(format!("binomial sampler: {e}")))?;
                    *p = dist.sample(&mut shots_rng) as f64 / shots as f64;
                }
            }
            let mut best = (f64::NEG_INFINITY, 0, 0);
            let mut min = f64::INFINITY;
            let mut total = 0.0;
            for (c, row) in table.iter().enumerate() {
                for (m, &p) in row.iter().enumerate() {
                    if p > best.0 {
                        best = (p, c, m);
                    }
                    min = min.min(p);
                    total += p;
                }
            }
            let max_replacement_overlap = (!targets.is_empty()).then(|| {
                targets
                    .iter()
                    .flat_map(|t| codeword_overlaps(&scheme, t))
                    .fold(0.0, f64::max)
            });
            Ok(EncoderSample {
                encoder: i,
                max_non_bottom: best.0,
                min_non_bottom: min,
                mean_non_bottom: total / (family.len() * scheme.num_messages()) as f64,
                worst_channel: best.1,
                worst_message: best.2,
                max_replacement_overlap,
            })
        })
        .collect::<Result<_>>()?;

    let fe = family
        .channels()
        .iter()
        .map(|ch| ch.entanglement_fidelity())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let messages = (1usize << k) as f64;
    let reference_level = (messages - 1.0) * exact_first_moment(d, fe, PairKind::OffDiagonal)
        + exact_first_moment(d, fe, PairKind::Diagonal);

    let maxima: Vec<f64> = samples.iter().map(|s| s.max_non_bottom).collect();
    let (mean_of_max, standard_error_of_max) = mean_and_standard_error(&maxima);
    let ordered = sorted(&maxima);
    let quantiles = REPORTED_QUANTILES
        .iter()
        .map(|&q| QuantileSummary {
            q,
            value: quantile_sorted(&ordered, q),
        })
        .collect();

    let replacement = (!targets.is_empty()).then(|| {
        let pairs = messages * targets.len() as f64;
        let predicted_level = 1.0 - (REPLACEMENT_TAIL / pairs).min(1.0).powf(1.0 / (d as f64 - 1.0));
        let overlaps: Vec<f64> = samples.iter().filter_map(|s| s.max_replacement_overlap).collect();
        ReplacementSummary {
            targets: targets.len(),
            max_overlap: overlaps.iter().copied().fold(0.0, f64::max),
            predicted_level,
            exceed_fraction: overlaps.iter().filter(|&&x| x > predicted_level).count() as f64
                / overlaps.len() as f64,
            expected_overlap: 1.0 / d as f64,
        }
    });

    Ok(SoundnessReport {
        family: family.label().to_string(),
        d,
        k,
        family_size: family.len(),
        n_unitaries,
        trials_mode: mode,
        master_seed: seed,
        max_entanglement_fidelity: fe,
        reference_level,
        mean_of_max,
        standard_error_of_max,
        quantiles,
        overall_min: samples.iter().map(|s| s.min_non_bottom).fold(f64::INFINITY, f64::min),
        overall_max: ordered.last().copied().unwrap_or(f64::NAN),
        replacement,
        verdict: Verdict::Heuristic,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::QuantumChannel;

    #[test]
    fn identity_is_never_caught() {
        let fam = AdversarialFamily::new("id", vec![QuantumChannel::identity(8).unwrap()]).unwrap();
        let r = soundness_sweep(&fam, 2, 3, TrialsMode::Exact, 1).unwrap();
        assert!((r.overall_min - 1.0).abs() < 1e-12);
        assert!((r.reference_level - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_level_is_exact() {
        let fam = AdversarialFamily::depolarizing(16).unwrap();
        let r = soundness_sweep(&fam, 2, 4, TrialsMode::Exact, 2).unwrap();
        assert!((r.overall_min - 0.25).abs() < 1e-12 && (r.overall_max - 0.25).abs() < 1e-12);
        assert!((r.reference_level - 0.25).abs() < 1e-12);
        assert!(r.replacement.is_none());
    }

    #[test]
    fn replacement_family_reports_overlaps() {
        let fam = AdversarialFamily::replacement(16, 3, 4).unwrap();
        let r = soundness_sweep(&fam, 1, 5, TrialsMode::Exact, 3).unwrap();
        let rep = r.replacement.as_ref().unwrap();
        assert_eq!(rep.targets, 3);
        // Non-bottom probability of a replacement channel is the summed overlap.
        for s in &r.samples {
            assert!(s.max_non_bottom + 1e-12 >= s.max_replacement_overlap.unwrap());
        }
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let fam = AdversarialFamily::traceless_unitaries(8, 2, 5).unwrap();
        let mode = TrialsMode::Sampled { shots: 200 };
        let a = soundness_sweep(&fam, 1, 3, mode, 6).unwrap();
        let b = soundness_sweep(&fam, 1, 3, mode, 6).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        for s in &a.samples {
            assert!((s.max_non_bottom * 200.0).fract() == 0.0);
        }
    }

    #[test]
    fn needs_an_ancilla() {
        let fam = AdversarialFamily::depolarizing(4).unwrap();
        assert!(matches!(
            soundness_sweep(&fam, 2, 1, TrialsMode::Exact, 0),
            Err(Error::NoAncilla { .. })
        ));
    }
}
