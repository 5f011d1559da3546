//! Adversarial families and the audit of the soundness conditions.
//!
//! A family `𝓕` on `C^d` is audited against a [`ConstraintProfile`] `(α, δ)`:
//!
//! 1. `log₂|𝓕| ≤ d^α`
//! 2. `rank(𝓕) = max_Φ r(Φ) ≤ d^{1−δ}`
//! 3. `F_e(𝓕) = max_Φ F_e(Φ) ≤ 2/d^{δ/2}`
//!
//! plus the corollary hypotheses for unitary members (`|Tr V| ≤ √2·d^{3/4}`)
//! and for lifts of classical functions on `n = log₂ d` bits
//! (`H_∞(f(X)) ≥ nδ`, `p_fix ≤ √2·2^{−nδ/4}`).
//!
//! The size condition is read as `|𝓕| ≤ 2^{d^α}`, i.e. `2^{2^{αn}}` for
//! `d = 2^n`. The proof-internal parameter `β ∈ (α, δ/2]` plays no role in
//! the audit.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::haar::{random_unit_vector, sample_haar_unitary};
use crate::qmath::matrix::{ComplexMatrix, UnitVector, C64, ONE};
use crate::qmath::rng::{SeededRng, StreamTag};

/// Relative slack applied to every real-valued threshold.
pub const AUDIT_SLACK: f64 = 1e-9;
/// Largest bit count for classical functions.
pub const CLASSICAL_MAX_BITS: u32 = 16;

/// `f: {0,1}^n → {0,1}^n` as a lookup table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClassicalFunctionRepr")]
pub struct ClassicalFunction {
    n: u32,
    table: Vec<usize>,
}

#[derive(Deserialize)]
struct ClassicalFunctionRepr {
    n: u32,
    table: Vec<usize>,
}

impl TryFrom<ClassicalFunctionRepr> for ClassicalFunction {
    type Error = Error;

    fn try_from(r: ClassicalFunctionRepr) -> Result<Self> {
        Self::new(r.n, r.table)
    }
}

impl ClassicalFunction {
    pub fn new(n: u32, table: Vec<usize>) -> Result<Self> {
        if n > CLASSICAL_MAX_BITS {
            return Err(Error::SizeLimit {
                what: format!("classical function on {n} bits"),
                entries: 1u128 << n,
                limit: 1u128 << CLASSICAL_MAX_BITS,
            });
        }
        let size = 1usize << n;
        if table.len() != size {
            return Err(Error::Domain(format!("table has {} entries, expected 2^{n} = {size}", table.len())));
        }
        if let Some(bad) = table.iter().find(|&&y| y >= size) {
            return Err(Error::Domain(format!("table value {bad} is not an {n}-bit string")));
        }
        Ok(Self { n, table })
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::new(n, (0..1usize << n).collect())
    }

    pub fn constant(n: u32, y: usize) -> Result<Self> {
        Self::new(n, vec![y; 1usize << n])
    }

    /// `x ↦ x ⊕ 1…1`.
    pub fn flip_all(n: u32) -> Result<Self> {
        let mask = (1usize << n) - 1;
        Self::new(n, (0..1usize << n).map(|x| x ^ mask).collect())
    }

    /// Uniformly random table.
    pub fn random(n: u32, rng: &mut SeededRng) -> Result<Self> {
        let size = 1usize << n.min(CLASSICAL_MAX_BITS + 1);
        Self::new(n, (0..size).map(|_| rng.below(size)).collect())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn domain_size(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn eval(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `f⁻¹(y)` for every `y`, inputs ascending.
    pub fn fibres(&self) -> Vec<Vec<usize>> {
        let mut fibres = vec![Vec::new(); self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            fibres[y].push(x);
        }
        fibres
    }

    /// `max_y |f⁻¹(y)|`.
    pub fn max_preimage(&self) -> usize {
        self.fibres().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn fixed_points(&self) -> usize {
        self.table.iter().enumerate().filter(|(x, &y)| *x == y).count()
    }
}

/// Collision-free partition `B_1, …, B_ℓ` of the domain, `ℓ = max_y |f⁻¹(y)|`:
/// block `b` takes the `b`-th element of every fibre that has one.
pub fn collision_free_partition(f: &ClassicalFunction) -> Vec<Vec<usize>> {
    let fibres = f.fibres();
    let blocks = f.max_preimage();
    (0..blocks)
        .map(|b| {
            let mut block: Vec<usize> = fibres.iter().filter_map(|fib| fib.get(b).copied()).collect();
            block.sort_unstable();
            block
        })
        .collect()
}

/// CPTP lift with Kraus operators `K_b = Σ_{x∈B_b} |f(x)⟩⟨x|`.
pub fn lift_classical(f: &ClassicalFunction) -> Result<QuantumChannel> {
    let d = f.domain_size();
    let kraus = collision_free_partition(f)
        .into_iter()
        .map(|block| {
            let mut k = ComplexMatrix::zeros(d, d)?;
            for x in block {
                k.set(f.eval(x), x, ONE);
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(d, d, kraus)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalStats {
    /// `max_y |f⁻¹(y)| / 2^n`.
    pub p_max: f64,
    /// `−log₂ p_max`.
    pub min_entropy: f64,
    /// `|{x : f(x) = x}| / 2^n`.
    pub p_fix: f64,
}

pub fn classical_stats(f: &ClassicalFunction) -> ClassicalStats {
    let size = f.domain_size() as f64;
    let p_max = f.max_preimage() as f64 / size;
    ClassicalStats {
        p_max,
        min_entropy: -p_max.log2(),
        p_fix: f.fixed_points() as f64 / size,
    }
}

/// `Φ_ψ(ρ) = Tr[ρ]·|ψ⟩⟨ψ|` with Kraus set `{|ψ⟩⟨i|}`.
pub fn replacement_channel(psi: &UnitVector) -> Result<QuantumChannel> {
    let d = psi.dim();
    let kraus = (0..d)
        .map(|i| {
            let mut k = ComplexMatrix::zeros(d, d)?;
            for (a, &z) in psi.as_slice().iter().enumerate() {
                k.set(a, i, z);
            }
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(d, d, kraus)
}

/// Tolerance, per unit of `d`, on `‖J(Φ) − J(candidate)‖_F²` when
/// recognising channel types. Both Choi matrices have `Tr J² ≤ d²`.
const RECOGNITION_TOL: f64 = 1e-9;

/// Recognises the lift of a classical function, whatever Kraus set was used.
pub fn detect_classical(ch: &QuantumChannel) -> Option<ClassicalFunction> {
    let d = ch.dim_in();
    if !ch.is_square() || !d.is_power_of_two() || d > 1 << CLASSICAL_MAX_BITS {
        return None;
    }
    let mut table = vec![usize::MAX; d];
    for k in ch.kraus() {
        for (x, slot) in table.iter_mut().enumerate() {
            for y in 0..d {
                if k.get(y, x).norm() > 1e-12 {
                    if *slot != usize::MAX && *slot != y {
                        return None;
                    }
                    *slot = y;
                }
            }
        }
    }
    if table.contains(&usize::MAX) {
        return None;
    }
    let f = ClassicalFunction::new(d.trailing_zeros(), table).ok()?;
    let lift = lift_classical(&f).ok()?;
    (ch.choi_distance_sq(&lift).ok()? <= RECOGNITION_TOL * d as f64).then_some(f)
}

/// Recognises a replacement channel and returns its output state.
pub fn detect_replacement(ch: &QuantumChannel) -> Option<UnitVector> {
    if !ch.is_square() {
        return None;
    }
    let d = ch.dim_in();
    let out = ch.apply_pure(&UnitVector::basis(d, 0).ok()?).ok()?;
    // A replacement channel has pure outputs; this rejects wide channels such
    // as the depolarizing one before the Kraus-pair comparison.
    if out.frobenius_norm().powi(2) < 1.0 - 1e-9 {
        return None;
    }
    let pivot = (0..d).max_by(|&a, &b| out.get(a, a).re.total_cmp(&out.get(b, b).re))?;
    let weight = out.get(pivot, pivot).re;
    if weight <= 0.0 {
        return None;
    }
    let psi = UnitVector::normalized(out.column(pivot).iter().map(|z| z / weight.sqrt()).collect()).ok()?;
    let candidate = replacement_channel(&psi).ok()?;
    (ch.choi_distance_sq(&candidate).ok()? <= RECOGNITION_TOL * d as f64).then_some(psi)
}

/// Parameters `(α, δ)` with `0 ≤ 2α < δ < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintProfile {
    alpha: f64,
    delta: f64,
}

impl ConstraintProfile {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && 2.0 * alpha < delta && delta < 1.0) {
            return Err(Error::Domain(format!(
                "profile needs 0 <= 2*alpha < delta < 1, got alpha = {alpha}, delta = {delta}"
            )));
        }
        Ok(Self { alpha, delta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Bound on `log₂|𝓕|`: `d^α`.
    pub fn log2_size_threshold(&self, d: usize) -> f64 {
        (d as f64).powf(self.alpha)
    }

    /// `d^{1−δ}`.
    pub fn rank_threshold(&self, d: usize) -> f64 {
        (d as f64).powf(1.0 - self.delta)
    }

    /// `2/d^{δ/2}`.
    pub fn fidelity_threshold(&self, d: usize) -> f64 {
        2.0 / (d as f64).powf(self.delta / 2.0)
    }

    /// `√2·d^{3/4}`.
    pub fn unitary_trace_threshold(d: usize) -> f64 {
        std::f64::consts::SQRT_2 * (d as f64).powf(0.75)
    }

    /// `nδ`.
    pub fn min_entropy_threshold(&self, n: u32) -> f64 {
        n as f64 * self.delta
    }

    /// `√2·2^{−nδ/4}`.
    pub fn fixed_point_threshold(&self, n: u32) -> f64 {
        std::f64::consts::SQRT_2 * 2f64.powf(-(n as f64) * self.delta / 4.0)
    }
}

/// Per-family maxima used by the audit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySummary {
    pub size: usize,
    pub max_min_kraus_rank: usize,
    pub max_entanglement_fidelity: f64,
}

/// Finite list of channels on a common `C^d`.
#[derive(Debug)]
pub struct AdversarialFamily {
    label: String,
    d: usize,
    channels: Vec<QuantumChannel>,
    summary: OnceLock<FamilySummary>,
}

impl Clone for AdversarialFamily {
    fn clone(&self) -> Self {
        Self {
            label: self.label.clone(),
            d: self.d,
            channels: self.channels.clone(),
            summary: self.summary.clone(),
        }
    }
}

impl AdversarialFamily {
    pub fn new(label: impl Into<String>, channels: Vec<QuantumChannel>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::Family("family has no channels".into()))?;
        let d = first.dim_in();
        for (i, ch) in channels.iter().enumerate() {
            if ch.dim_in() != d || ch.dim_out() != d {
                return Err(Error::Family(format!(
                    "channel {i} maps C^{} -> C^{}, family dimension is {d}",
                    ch.dim_in(),
                    ch.dim_out()
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            d,
            channels,
            summary: OnceLock::new(),
        })
    }

    /// `count` independent Haar unitaries.
    pub fn haar_unitaries(d: usize, count: usize, seed: u64) -> Result<Self> {
        let channels = (0..count)
            .map(|i| {
                let mut rng = SeededRng::for_purpose(seed, StreamTag::Adversary, i as u64);
                QuantumChannel::unitary(sample_haar_unitary(d, &mut rng)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("haar-unitaries(d={d},count={count},seed={seed})"), channels)
    }

    /// `count` unitaries `W·diag(1, ω, …, ω^{d−1})·W*` with Haar `W` and
    /// `ω = e^{2πi/d}`; each has trace zero, hence `F_e = 0`.
    pub fn traceless_unitaries(d: usize, count: usize, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension("traceless unitaries need d >= 2".into()));
        }
        let phases: Vec<C64> = (0..d)
            .map(|j| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / d as f64))
            .collect();
        let channels = (0..count)
            .map(|i| {
                let mut rng = SeededRng::for_purpose(seed, StreamTag::Adversary, i as u64);
                let w = sample_haar_unitary(d, &mut rng)?;
                let wd = ComplexMatrix::from_fn(d, d, |r, c| w.get(r, c) * phases[c])?;
                QuantumChannel::unitary(wd.matmul(&w.adjoint())?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("traceless-unitaries(d={d},count={count},seed={seed})"), channels)
    }

    /// `count` replacement channels with Haar-random target states.
    pub fn replacement(d: usize, count: usize, seed: u64) -> Result<Self> {
        let channels = (0..count)
            .map(|i| {
                let mut rng = SeededRng::for_purpose(seed, StreamTag::Adversary, i as u64);
                replacement_channel(&random_unit_vector(d, &mut rng)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("replacement(d={d},count={count},seed={seed})"), channels)
    }

    pub fn depolarizing(d: usize) -> Result<Self> {
        Self::new(format!("depolarizing(d={d})"), vec![QuantumChannel::depolarizing(d)?])
    }

    /// All non-identity Pauli strings on `n` qubits.
    pub fn paulis(n: u32) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::Domain(format!("Pauli family supports 1..=4 qubits, got {n}")));
        }
        let letters = ['I', 'X', 'Y', 'Z'];
        let channels = (1..4usize.pow(n))
            .map(|mut code| {
                let mut label = vec!['I'; n as usize];
                for slot in label.iter_mut().rev() {
                    *slot = letters[code % 4];
                    code /= 4;
                }
                QuantumChannel::pauli_string(&label.iter().collect::<String>())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("paulis(n={n})"), channels)
    }

    /// Lifts of random classical functions on `n` bits.
    pub fn random_classical(n: u32, count: usize, seed: u64) -> Result<Self> {
        let channels = (0..count)
            .map(|i| {
                let mut rng = SeededRng::for_purpose(seed, StreamTag::Adversary, i as u64);
                lift_classical(&ClassicalFunction::random(n, &mut rng)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(format!("classical(n={n},count={count},seed={seed})"), channels)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn channels(&self) -> &[QuantumChannel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Copy of the family with one more member.
    pub fn with_channel(&self, ch: QuantumChannel) -> Result<Self> {
        let mut channels = self.channels.clone();
        channels.push(ch);
        Self::new(self.label.clone(), channels)
    }

    /// Size, `rank(𝓕)` and `F_e(𝓕)`, computed once.
    pub fn summary(&self) -> Result<&FamilySummary> {
        if let Some(s) = self.summary.get() {
            return Ok(s);
        }
        let per_member: Vec<(usize, f64)> = self
            .channels
            .par_iter()
            .map(|ch| Ok((ch.min_kraus_rank()?, ch.entanglement_fidelity()?)))
            .collect::<Result<Vec<_>>>()?;
        let summary = FamilySummary {
            size: self.channels.len(),
            max_min_kraus_rank: per_member.iter().map(|p| p.0).max().unwrap_or(0),
            max_entanglement_fidelity: per_member.iter().map(|p| p.1).fold(0.0, f64::max),
        };
        Ok(self.summary.get_or_init(|| summary))
    }

    /// `F_e(𝓕)` without the rank computation.
    pub fn max_entanglement_fidelity(&self) -> Result<f64> {
        if let Some(s) = self.summary.get() {
            return Ok(s.max_entanglement_fidelity);
        }
        let values = self
            .channels
            .par_iter()
            .map(QuantumChannel::entanglement_fidelity)
            .collect::<Result<Vec<_>>>()?;
        Ok(values.into_iter().fold(0.0, f64::max))
    }
}

/// One audited inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub rule: String,
    pub threshold: f64,
    pub observed: f64,
    pub pass: bool,
}

impl ConditionVerdict {
    fn at_most(rule: &str, observed: f64, threshold: f64) -> Self {
        Self {
            rule: rule.into(),
            threshold,
            observed,
            pass: observed <= threshold * (1.0 + AUDIT_SLACK),
        }
    }

    fn at_least(rule: &str, observed: f64, threshold: f64) -> Self {
        Self {
            rule: rule.into(),
            threshold,
            observed,
            pass: observed >= threshold * (1.0 - AUDIT_SLACK),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyAudit {
    pub label: String,
    pub d: usize,
    pub alpha: f64,
    pub delta: f64,
    pub summary: FamilySummary,
    pub size: ConditionVerdict,
    pub rank: ConditionVerdict,
    pub entanglement_fidelity: ConditionVerdict,
    /// Present when the family has unitary members; observed is the largest `|Tr V|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary_trace: Option<ConditionVerdict>,
    /// Present when the family has classical lifts; observed is the smallest min-entropy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_min_entropy: Option<ConditionVerdict>,
    /// Present when the family has classical lifts; observed is the largest `p_fix`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_fixed_points: Option<ConditionVerdict>,
    pub unitary_members: usize,
    pub classical_members: usize,
    /// Conditions 1–3 all hold.
    pub theorem_conditions_pass: bool,
    /// Every reported condition holds.
    pub pass: bool,
}

pub fn audit_family(fam: &AdversarialFamily, profile: &ConstraintProfile) -> Result<FamilyAudit> {
    let d = fam.d();
    let summary = fam.summary()?.clone();
    let size = ConditionVerdict::at_most(
        "log2(|F|) <= d^alpha",
        (summary.size as f64).log2(),
        profile.log2_size_threshold(d),
    );
    let rank = ConditionVerdict::at_most(
        "rank(F) <= d^(1-delta)",
        summary.max_min_kraus_rank as f64,
        profile.rank_threshold(d),
    );
    let fidelity = ConditionVerdict::at_most(
        "F_e(F) <= 2/d^(delta/2)",
        summary.max_entanglement_fidelity,
        profile.fidelity_threshold(d),
    );

    let traces: Vec<f64> = fam
        .channels()
        .iter()
        .filter_map(|ch| ch.as_unitary().map(|u| u.trace().norm()))
        .collect();
    let unitary_trace = (!traces.is_empty()).then(|| {
        ConditionVerdict::at_most(
            "|Tr V| <= sqrt(2)*d^(3/4)",
            traces.iter().copied().fold(0.0, f64::max),
            ConstraintProfile::unitary_trace_threshold(d),
        )
    });

    let classical: Vec<ClassicalStats> = fam
        .channels()
        .par_iter()
        .filter_map(|ch| detect_classical(ch).map(|f| classical_stats(&f)))
        .collect();
    let n = d.trailing_zeros();
    let (min_entropy, fixed_points) = if classical.is_empty() {
        (None, None)
    } else {
        (
            Some(ConditionVerdict::at_least(
                "H_min(f(X)) >= n*delta",
                classical.iter().map(|s| s.min_entropy).fold(f64::INFINITY, f64::min),
                profile.min_entropy_threshold(n),
            )),
            Some(ConditionVerdict::at_most(
                "p_fix <= sqrt(2)*2^(-n*delta/4)",
                classical.iter().map(|s| s.p_fix).fold(0.0, f64::max),
                profile.fixed_point_threshold(n),
            )),
        )
    };

    let theorem_conditions_pass = size.pass && rank.pass && fidelity.pass;
    let pass = theorem_conditions_pass
        && [&unitary_trace, &min_entropy, &fixed_points]
            .iter()
            .all(|c| c.as_ref().is_none_or(|v| v.pass));
    Ok(FamilyAudit {
        label: fam.label().to_string(),
        d,
        alpha: profile.alpha(),
        delta: profile.delta(),
        summary,
        size,
        rank,
        entanglement_fidelity: fidelity,
        unitary_trace,
        classical_min_entropy: min_entropy,
        classical_fixed_points: fixed_points,
        unitary_members: traces.len(),
        classical_members: classical.len(),
        theorem_conditions_pass,
        pass,
    })
}

/// `Φ(ρ)` for the lift evaluated directly from `f` (reference for tests).
pub fn classical_action_on_basis(f: &ClassicalFunction, x: usize) -> Result<ComplexMatrix> {
    let d = f.domain_size();
    let mut out = ComplexMatrix::zeros(d, d)?;
    out.set(f.eval(x), f.eval(x), ONE);
    Ok(out)
}
