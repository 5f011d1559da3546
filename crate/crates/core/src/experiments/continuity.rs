//! Continuity of the code-space acceptance `Z_φ = Tr[Π_C Φ(|φ⟩⟨φ|)]`:
//! `|Z_s − Z_s̃| ≤ ½‖|s⟩⟨s| − |s̃⟩⟨s̃|‖₁ = √(1 − |⟨s|s̃⟩|²)`.

use rayon::prelude::*;
use serde::Serialize;

use super::overlap::code_space_acceptance;
use super::report::Verdict;
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::haar::random_unit_vector;
use crate::qmath::rng::{SeededRng, StreamTag};
use crate::qmath::UnitVector;
use crate::schemes::{HaarScheme, QuantumMessageScheme};

pub const CONTINUITY_SLACK: f64 = 1e-10;
/// Largest Kraus rank drawn by [`continuity_sweep`].
pub const SWEEP_MAX_RANK: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub index: usize,
    pub z_first: f64,
    pub z_second: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub d: usize,
    pub k: u32,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs − rhs`; negative when every pair has room to spare.
    pub worst_margin: f64,
    pub verdict: Verdict,
    pub checks: Vec<PairCheck>,
}

/// Lifts a message-space state through the encoder; code-space states pass through.
fn to_code_space(scheme: &QuantumMessageScheme, v: &UnitVector) -> Result<UnitVector> {
    let d = scheme.base().d();
    if v.dim() == d {
        Ok(v.clone())
    } else if v.dim() == scheme.message_dim() {
        scheme.encode_state(v)
    } else {
        Err(Error::InvalidState(format!(
            "state of dimension {} is neither a message ({}) nor a codeword ({d})",
            v.dim(),
            scheme.message_dim()
        )))
    }
}

fn check_pair(
    scheme: &QuantumMessageScheme,
    ch: &QuantumChannel,
    index: usize,
    a: &UnitVector,
    b: &UnitVector,
) -> Result<PairCheck> {
    let a = to_code_space(scheme, a)?;
    let b = to_code_space(scheme, b)?;
    let z_first = code_space_acceptance(scheme.base(), ch, &a)?;
    let z_second = code_space_acceptance(scheme.base(), ch, &b)?;
    let lhs = (z_first - z_second).abs();
    let rhs = 0.5 * a.trace_distance(&b);
    Ok(PairCheck {
        index,
        z_first,
        z_second,
        lhs,
        rhs,
        holds: lhs <= rhs + CONTINUITY_SLACK,
    })
}

fn summarize(d: usize, k: u32, checks: Vec<PairCheck>) -> ContinuityReport {
    let violations = checks.iter().filter(|c| !c.holds).count();
    let worst_margin = checks.iter().map(|c| c.lhs - c.rhs).fold(f64::NEG_INFINITY, f64::max);
    ContinuityReport {
        d,
        k,
        pairs: checks.len(),
        violations,
        worst_margin,
        verdict: Verdict::from_bool(violations == 0),
        checks,
    }
}

/// Checks the inequality for each pair under one channel. Pairs may be given
/// in the message space (they are encoded first) or directly on `C^d`.
pub fn continuity_check(
    scheme: &QuantumMessageScheme,
    ch: &QuantumChannel,
    pairs: &[(UnitVector, UnitVector)],
) -> Result<ContinuityReport> {
    let checks = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| check_pair(scheme, ch, i, a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(scheme.base().d(), scheme.base().k(), checks))
}

/// `instances` independent (pair, channel) draws against the encoder from
/// `seed`. Instance `i` uses stream `StatePair/i`: a channel of rank
/// `1..=SWEEP_MAX_RANK` and two states, which are message states for even
/// `i` and arbitrary states on `C^d` for odd `i`.
pub fn continuity_sweep(d: usize, k: u32, instances: usize, seed: u64) -> Result<ContinuityReport> {
    let scheme = QuantumMessageScheme::new(HaarScheme::from_seed(d, k, seed)?);
    let checks = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::for_purpose(seed, StreamTag::StatePair, i as u64);
            let rank = 1 + rng.below(SWEEP_MAX_RANK);
            let ch = QuantumChannel::random(d, rank, &mut rng)?;
            let dim = if i % 2 == 0 { scheme.message_dim() } else { d };
            let a = random_unit_vector(dim, &mut rng)?;
            let b = random_unit_vector(dim, &mut rng)?;
            check_pair(&scheme, &ch, i, &a, &b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(d, k, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_orthogonal_pairs() {
        let scheme = QuantumMessageScheme::new(HaarScheme::from_seed(8, 1, 2).unwrap());
        let ch = QuantumChannel::random(8, 2, &mut SeededRng::new(3, 0)).unwrap();
        let e0 = UnitVector::basis(2, 0).unwrap();
        let e1 = UnitVector::basis(2, 1).unwrap();
        let r = continuity_check(&scheme, &ch, &[(e0.clone(), e0.clone()), (e0, e1)]).unwrap();
        assert!(r.checks[0].lhs < 1e-12 && r.checks[0].rhs < 1e-7);
        assert!((r.checks[1].rhs - 1.0).abs() < 1e-12);
        assert!(r.checks[1].lhs <= 1.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn sweep_has_no_violations() {
        let r = continuity_sweep(16, 2, 100, 7).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_margin <= CONTINUITY_SLACK);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let scheme = QuantumMessageScheme::new(HaarScheme::from_seed(8, 1, 2).unwrap());
        let ch = QuantumChannel::identity(8).unwrap();
        let v = UnitVector::basis(3, 0).unwrap();
        assert!(continuity_check(&scheme, &ch, &[(v.clone(), v)]).is_err());
    }
}
