//! Overlap law for a Haar-rotated vector: `|⟨v, Uw⟩|² ~ Beta(1, d−1)` for
//! unit `v, w`, so `Pr[|⟨v, Uw⟩|² ≥ t] = (1 − t)^{d−1}`.

use rayon::prelude::*;
use serde::Serialize;

use super::moments::{MIN_TRIALS, SE_FLOOR};
use super::report::Verdict;
use super::stats::{ks_one_sample, KsResult};
use crate::error::{Error, Result};
use crate::qmath::haar::sample_haar_unitary;
use crate::qmath::matrix::{inner, C64};
use crate::qmath::rng::{SeededRng, StreamTag};

/// KS p-value below which the distribution check fails.
pub const KS_ALPHA: f64 = 0.01;

/// `Pr[X ≥ t]` for `X ~ Beta(1, d−1)`.
pub fn beta_tail(d: usize, t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        if d == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - t).powi(d as i32 - 1)
    }
}

/// CDF of `Beta(1, d−1)`.
pub fn beta_cdf(d: usize, x: f64) -> f64 {
    1.0 - beta_tail(d, x)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdCheck {
    pub threshold: f64,
    pub exact: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaReport {
    pub d: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub thresholds: Vec<ThresholdCheck>,
    pub ks: KsResult,
    pub ks_verdict: Verdict,
    pub verdict: Verdict,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// `|⟨e_0, U·w⟩|²` with `w` the uniform superposition, one Haar `U` per trial
/// (stream `Trial/i`).
pub fn sample_beta_overlaps(d: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be positive".into()));
    }
    let w = vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d];
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[0] = C64::new(1.0, 0.0);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::for_purpose(seed, StreamTag::Trial, i as u64);
            let u = sample_haar_unitary(d, &mut rng)?;
            let uw = u.mul_vec(&w)?;
            Ok(inner(&v, &uw).norm_sqr())
        })
        .collect()
}

/// Tail probabilities at each threshold (4 binomial standard errors) plus a
/// one-sample KS test against `Beta(1, d−1)`.
pub fn beta_law_test(d: usize, trials: usize, seed: u64, thresholds: &[f64]) -> Result<BetaReport> {
    if trials < MIN_TRIALS {
        return Err(Error::Precondition(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Domain(format!("threshold {t} outside [0, 1]")));
    }
    let samples = sample_beta_overlaps(d, trials, seed)?;
    let n = samples.len() as f64;
    let checks: Vec<ThresholdCheck> = thresholds
        .iter()
        .map(|&t| {
            let exact = beta_tail(d, t);
            let hits = samples.iter().filter(|&&x| x >= t).count() as f64;
            let empirical = hits / n;
            let standard_error = (exact * (1.0 - exact) / n).sqrt();
            let ok = (empirical - exact).abs() <= 4.0 * standard_error + SE_FLOOR;
            ThresholdCheck {
                threshold: t,
                exact,
                empirical,
                standard_error,
                verdict: Verdict::from_bool(ok),
            }
        })
        .collect();
    let ks = if d == 1 {
        // Degenerate law: the overlap is always 1.
        KsResult {
            statistic: samples.iter().map(|x| (1.0 - x).abs()).fold(0.0, f64::max),
            p_value: 1.0,
            samples: samples.len(),
        }
    } else {
        ks_one_sample(&samples, |x| beta_cdf(d, x))
    };
    let ks_verdict = Verdict::from_bool(ks.p_value > KS_ALPHA);
    let verdict = Verdict::all(checks.iter().map(|c| c.verdict).chain([ks_verdict]));
    Ok(BetaReport {
        d,
        trials,
        master_seed: seed,
        thresholds: checks,
        ks,
        ks_verdict,
        verdict,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_values() {
        assert_eq!(beta_tail(2, 0.5), 0.5);
        assert_eq!(beta_tail(2, 0.0), 1.0);
        assert!((beta_tail(8, 0.25) - 0.75f64.powi(7)).abs() < 1e-15);
    }

    #[test]
    fn small_run_passes() {
        let r = beta_law_test(4, 2000, 11, &[0.0, 0.1, 0.5]).unwrap();
        assert_eq!(r.thresholds[0].empirical, 1.0);
        assert!(r.samples.iter().all(|x| (0.0..=1.0 + 1e-12).contains(x)));
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(beta_law_test(4, 10, 1, &[0.5]).is_err());
        assert!(beta_law_test(4, 1000, 1, &[1.5]).is_err());
    }
}
