//! Delta-nets of pure states by greedy random packing, with empirical
//! coverage verification.
//!
//! Distances are trace distances `‖|a⟩⟨a| − |b⟩⟨b|‖₁ = 2√(1 − |⟨a|b⟩|²)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::haar::random_unit_vector;
use crate::qmath::matrix::inner;
use crate::qmath::rng::{SeededRng, StreamTag};
use crate::qmath::UnitVector;

pub const MAX_NET_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Consecutive rejected candidates that end the packing phase.
    pub rejection_streak: usize,
    /// Probe states per verification round.
    pub probes_per_round: usize,
    /// Rounds of probing; uncovered probes of a round join the net.
    pub max_rounds: usize,
    /// Hard cap on the number of points.
    pub max_points: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            rejection_streak: 2000,
            probes_per_round: 10_000,
            max_rounds: 20,
            max_points: 200_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaNet {
    pub dim: usize,
    pub radius: f64,
    pub master_seed: u64,
    #[serde(skip)]
    pub points: Vec<UnitVector>,
    pub num_points: usize,
    /// `(5/δ)^{2K}`.
    pub size_ceiling: f64,
    /// Fraction of the final round's probes within `radius` of the net.
    pub coverage_confidence: f64,
    pub packing_points: usize,
    pub candidates_tried: usize,
    pub probe_rounds: usize,
    /// Largest probe-to-net distance in the final round.
    pub max_probe_distance: f64,
}

/// `(5/δ)^{2K}`.
pub fn size_ceiling(dim: usize, delta: f64) -> f64 {
    (5.0 / delta).powf(2.0 * dim as f64)
}

fn distance_from_overlap(overlap_sq: f64) -> f64 {
    2.0 * (1.0 - overlap_sq).max(0.0).sqrt()
}

/// Largest `|⟨p|v⟩|²` over the points.
fn best_overlap(points: &[UnitVector], v: &UnitVector) -> f64 {
    points
        .iter()
        .map(|p| inner(p.as_slice(), v.as_slice()).norm_sqr())
        .fold(0.0, f64::max)
}

pub fn build_delta_net(dim: usize, delta: f64, seed: u64, config: NetConfig) -> Result<DeltaNet> {
    if dim == 0 || dim > MAX_NET_DIM {
        return Err(Error::Precondition(format!("net dimension must be in 1..={MAX_NET_DIM}, got {dim}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("net radius must be in (0, 1), got {delta}")));
    }
    let ceiling = size_ceiling(dim, delta);
    let cap = config.max_points.min(ceiling.floor().min(usize::MAX as f64) as usize);
    // dist(a, b) ≤ δ  ⇔  |⟨a|b⟩|² ≥ 1 − δ²/4.
    let min_overlap = 1.0 - delta * delta / 4.0;
    let too_many = |n: usize| {
        Error::NetConstruction(format!(
            "net for K = {dim}, delta = {delta} needs more than {n} points (cap {cap}, ceiling {ceiling:.3e})"
        ))
    };

    let mut points: Vec<UnitVector> = Vec::new();
    let mut candidates_tried = 0;
    let mut candidate_rng = SeededRng::for_purpose(seed, StreamTag::NetCandidate, 0);
    let mut streak = 0;
    while streak < config.rejection_streak {
        let v = random_unit_vector(dim, &mut candidate_rng)?;
        candidates_tried += 1;
        if points.is_empty() || best_overlap(&points, &v) < min_overlap {
            if points.len() == cap {
                return Err(too_many(cap));
            }
            points.push(v);
            streak = 0;
        } else {
            streak += 1;
        }
    }
    let packing_points = points.len();

    let mut rounds = 0;
    let mut coverage = 0.0;
    let mut max_probe_distance = f64::NAN;
    for round in 0..config.max_rounds {
        rounds = round + 1;
        let base = (round * config.probes_per_round) as u64;
        let probes: Vec<(UnitVector, f64)> = (0..config.probes_per_round)
            .into_par_iter()
            .map(|p| {
                let mut rng = SeededRng::for_purpose(seed, StreamTag::NetProbe, base + p as u64);
                let v = random_unit_vector(dim, &mut rng)?;
                let o = best_overlap(&points, &v);
                Ok((v, o))
            })
            .collect::<Result<_>>()?;
        let covered = probes.iter().filter(|(_, o)| *o >= min_overlap).count();
        coverage = covered as f64 / probes.len().max(1) as f64;
        max_probe_distance = distance_from_overlap(probes.iter().map(|(_, o)| *o).fold(1.0, f64::min));
        if covered == probes.len() {
            break;
        }
        let added_from = points.len();
        for (v, o) in probes {
            if o >= min_overlap || best_overlap(&points[added_from..], &v) >= min_overlap {
                continue;
            }
            if points.len() == cap {
                return Err(too_many(cap));
            }
            points.push(v);
        }
    }
    if coverage < 1.0 {
        return Err(Error::NetConstruction(format!(
            "coverage {:.4}% after {rounds} probe rounds with {} points; max probe distance {max_probe_distance:.4}",
            coverage * 100.0,
            points.len()
        )));
    }
    Ok(DeltaNet {
        dim,
        radius: delta,
        master_seed: seed,
        num_points: points.len(),
        points,
        size_ceiling: ceiling,
        coverage_confidence: coverage,
        packing_points,
        candidates_tried,
        probe_rounds: rounds,
        max_probe_distance,
    })
}

impl DeltaNet {
    /// Distance from `v` to the closest net point.
    pub fn distance_to(&self, v: &UnitVector) -> f64 {
        distance_from_overlap(best_overlap(&self.points, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> NetConfig {
        NetConfig {
            rejection_streak: 300,
            probes_per_round: 2000,
            ..NetConfig::default()
        }
    }

    #[test]
    fn one_dimensional_net_is_a_point() {
        let net = build_delta_net(1, 0.5, 3, quick()).unwrap();
        assert_eq!(net.num_points, 1);
        assert_eq!(net.coverage_confidence, 1.0);
    }

    #[test]
    fn qubit_net_covers_and_respects_ceiling() {
        let net = build_delta_net(2, 0.5, 4, quick()).unwrap();
        assert_eq!(net.coverage_confidence, 1.0);
        assert!((net.num_points as f64) <= net.size_ceiling);
        assert_eq!(size_ceiling(2, 1.0), 625.0);
        let mut rng = SeededRng::new(99, 0);
        let v = random_unit_vector(2, &mut rng).unwrap();
        assert!(net.distance_to(&v) <= 0.5 + 0.05);
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = NetConfig {
            max_points: 3,
            ..quick()
        };
        assert!(matches!(build_delta_net(4, 0.3, 1, cfg), Err(Error::NetConstruction(_))));
        assert!(build_delta_net(9, 0.5, 1, cfg).is_err());
        assert!(build_delta_net(2, 1.0, 1, cfg).is_err());
    }
}
