//! Encoding/decoding schemes.
//!
//! Register layout for the Haar schemes: the message register `A` holds the
//! high-order bits, so `|m⟩_A ⊗ |0⟩_B` is basis index `m·(d/2^k)`. Only
//! powers of two are accepted for `d`, which keeps `A` and `B` genuine
//! tensor factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::eig::hermitian_eigenvalues;
use crate::qmath::haar::sample_haar_unitary;
use crate::qmath::matrix::{inner, ComplexMatrix, UnitVector, C64, ONE, ZERO};
use crate::qmath::rng::{SeededRng, StreamTag};

/// Tolerance on the unitarity of a scheme's encoder.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on trace, Hermiticity and positivity of decoder inputs.
pub const STATE_TOL: f64 = 1e-9;
/// Acceptance probability below which no post-measurement state is reported.
pub const ACCEPT_FLOOR: f64 = 1e-12;

/// Checks that `rho` is a `d×d` density matrix.
pub fn validate_density(rho: &ComplexMatrix, d: usize) -> Result<()> {
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::InvalidState(format!(
            "state is {}x{}, expected {d}x{d}",
            rho.rows(),
            rho.cols()
        )));
    }
    let herm = rho.hermitian_residual();
    if herm > STATE_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = hermitian_eigenvalues(rho)?[0];
    if min < -STATE_TOL {
        return Err(Error::InvalidState(format!("not positive semi-definite (eigenvalue {min:.3e})")));
    }
    Ok(())
}

/// Outcome probabilities of a decoder: one entry per message plus `⊥`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeDistribution {
    pub messages: Vec<f64>,
    pub bottom: f64,
}

impl DecodeDistribution {
    pub fn accept(&self) -> f64 {
        self.messages.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.accept() + self.bottom
    }

    /// Probability of decoding a message other than `m` (and other than `⊥`).
    pub fn wrong_message(&self, m: usize) -> f64 {
        self.messages
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != m)
            .map(|(_, p)| p)
            .sum()
    }
}

fn log2_exact(d: usize) -> Option<u32> {
    d.is_power_of_two().then(|| d.trailing_zeros())
}

/// Haar random scheme `Enc_U(m) = U(|m⟩ ⊗ |0⟩)` with the PVM decoder.
#[derive(Clone, Debug, Serialize)]
pub struct HaarScheme {
    d: usize,
    k: u32,
    unitary: ComplexMatrix,
    /// Seed the unitary was sampled from, if any.
    seed: Option<u64>,
    #[serde(skip)]
    codewords: Vec<Vec<C64>>,
}

impl HaarScheme {
    pub fn new(unitary: ComplexMatrix, k: u32) -> Result<Self> {
        Self::build(unitary, k, None)
    }

    fn build(unitary: ComplexMatrix, k: u32, seed: Option<u64>) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::InvalidScheme(format!(
                "encoder is {}x{}, not square",
                unitary.rows(),
                unitary.cols()
            )));
        }
        let d = unitary.rows();
        if log2_exact(d).is_none() {
            return Err(Error::InvalidScheme(format!("d = {d} is not a power of two")));
        }
        if k >= usize::BITS || (1usize << k) > d {
            return Err(Error::InvalidScheme(format!("2^{k} messages do not fit in dimension {d}")));
        }
        let residual = unitary.unitarity_residual();
        if residual > UNITARY_TOL {
            return Err(Error::InvalidScheme(format!("encoder not unitary (residual {residual:.3e})")));
        }
        let stride = d >> k;
        let codewords = (0..1usize << k).map(|m| unitary.column(m * stride)).collect();
        Ok(Self {
            d,
            k,
            unitary,
            seed,
            codewords,
        })
    }

    /// Samples the encoder from `seed` (stream `Encoder/0`).
    pub fn from_seed(d: usize, k: u32, seed: u64) -> Result<Self> {
        Self::sample(d, k, &mut SeededRng::for_purpose(seed, StreamTag::Encoder, 0), Some(seed))
    }

    pub fn sample(d: usize, k: u32, rng: &mut SeededRng, seed: Option<u64>) -> Result<Self> {
        if log2_exact(d).is_none() {
            return Err(Error::InvalidScheme(format!("d = {d} is not a power of two")));
        }
        Self::build(sample_haar_unitary(d, rng)?, k, seed)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn num_messages(&self) -> usize {
        1 << self.k
    }

    /// Expansion factor `log₂(d)/k`.
    pub fn gamma(&self) -> f64 {
        self.d.trailing_zeros() as f64 / self.k as f64
    }

    /// Basis index of `|m⟩_A ⊗ |0⟩_B`.
    pub fn layout(&self, m: usize) -> usize {
        m * (self.d >> self.k)
    }

    fn check_message(&self, m: usize) -> Result<()> {
        if m >= self.num_messages() {
            return Err(Error::Domain(format!(
                "message {m} out of range for k = {} ({} messages)",
                self.k,
                self.num_messages()
            )));
        }
        Ok(())
    }

    pub fn encode(&self, m: usize) -> Result<UnitVector> {
        self.check_message(m)?;
        UnitVector::new(self.codewords[m].clone())
    }

    /// Codeword amplitudes, indexed by message.
    pub fn codewords(&self) -> &[Vec<C64>] {
        &self.codewords
    }

    pub fn decode_distribution(&self, rho: &ComplexMatrix) -> Result<DecodeDistribution> {
        validate_density(rho, self.d)?;
        self.decode_distribution_unchecked(rho)
    }

    /// Decoder statistics without the density-matrix checks.
    pub fn decode_distribution_unchecked(&self, rho: &ComplexMatrix) -> Result<DecodeDistribution> {
        let messages = self
            .codewords
            .iter()
            .map(|c| Ok(rho.quadratic_form(c)?.re))
            .collect::<Result<Vec<f64>>>()?;
        let bottom = rho.trace().re - messages.iter().sum::<f64>();
        Ok(DecodeDistribution { messages, bottom })
    }

    /// Decoder statistics for a pure input.
    pub fn decode_pure(&self, psi: &UnitVector) -> Result<DecodeDistribution> {
        if psi.dim() != self.d {
            return Err(Error::InvalidState(format!("state of dimension {} for d = {}", psi.dim(), self.d)));
        }
        let messages: Vec<f64> = self.codewords.iter().map(|c| inner(c, psi.as_slice()).norm_sqr()).collect();
        let bottom = 1.0 - messages.iter().sum::<f64>();
        Ok(DecodeDistribution { messages, bottom })
    }
}

/// Haar scheme used for quantum messages, decoded with `{Π_C, Π_⊥}`.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumMessageScheme {
    base: HaarScheme,
}

/// Result of the code-space measurement.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumDecode {
    pub accept_prob: f64,
    /// Renormalised state of register `A`, absent when `accept_prob ≤ 1e-12`.
    pub post_state: Option<ComplexMatrix>,
}

impl QuantumMessageScheme {
    pub fn new(base: HaarScheme) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &HaarScheme {
        &self.base
    }

    pub fn message_dim(&self) -> usize {
        self.base.num_messages()
    }

    /// `U(|v⟩_A ⊗ |0⟩_B)`.
    pub fn encode_state(&self, v: &UnitVector) -> Result<UnitVector> {
        if v.dim() != self.message_dim() {
            return Err(Error::InvalidState(format!(
                "message state of dimension {}, expected {}",
                v.dim(),
                self.message_dim()
            )));
        }
        let mut out = vec![ZERO; self.base.d];
        for (c, &a) in self.base.codewords.iter().zip(v.as_slice()) {
            for (o, &x) in out.iter_mut().zip(c) {
                *o += a * x;
            }
        }
        UnitVector::normalized(out)
    }

    /// `Π_C = U(I_A ⊗ |0⟩⟨0|_B)U*`.
    pub fn code_projector(&self) -> Result<ComplexMatrix> {
        let mut p = ComplexMatrix::zeros(self.base.d, self.base.d)?;
        for c in &self.base.codewords {
            p.add_scaled(&ComplexMatrix::outer(c, c)?, ONE)?;
        }
        Ok(p)
    }

    /// `Π_C` assembled from the rotated message basis `{W|j⟩}`.
    pub fn code_projector_in_basis(&self, w: &ComplexMatrix) -> Result<ComplexMatrix> {
        let dim = self.message_dim();
        if w.rows() != dim || w.cols() != dim || !w.is_unitary(UNITARY_TOL) {
            return Err(Error::Domain(format!("basis change must be a {dim}x{dim} unitary")));
        }
        let mut p = ComplexMatrix::zeros(self.base.d, self.base.d)?;
        for j in 0..dim {
            let v = UnitVector::normalized(w.column(j))?;
            let c = self.encode_state(&v)?;
            p.add_scaled(&c.projector(), ONE)?;
        }
        Ok(p)
    }

    /// `Π_⊥ = I − Π_C`.
    pub fn reject_projector(&self) -> Result<ComplexMatrix> {
        Ok(&ComplexMatrix::identity(self.base.d)? - &self.code_projector()?)
    }

    pub fn quantum_decode(&self, rho: &ComplexMatrix) -> Result<QuantumDecode> {
        validate_density(rho, self.base.d)?;
        let dim = self.message_dim();
        let images: Vec<Vec<C64>> = self.base.codewords.iter().map(|c| rho.mul_vec_unchecked(c)).collect();
        let mut block = ComplexMatrix::zeros(dim, dim)?;
        for (a, ca) in self.base.codewords.iter().enumerate() {
            for (b, img) in images.iter().enumerate() {
                block.set(a, b, inner(ca, img));
            }
        }
        let accept_prob = block.trace().re;
        let post_state = (accept_prob > ACCEPT_FLOOR).then(|| block.scale_real(1.0 / accept_prob));
        Ok(QuantumDecode {
            accept_prob,
            post_state,
        })
    }

    /// `Tr[Π_C ρ]` for a pure `ρ = |φ⟩⟨φ|`.
    pub fn accept_pure(&self, phi: &[C64]) -> f64 {
        self.base.codewords.iter().map(|c| inner(c, phi).norm_sqr()).sum()
    }
}

/// In-place fast Walsh–Hadamard transform, normalised so it equals `H^{⊗n}`.
pub fn walsh_hadamard(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    for x in v.iter_mut() {
        *x *= s;
    }
}

/// Largest `n` accepted by the Hadamard scheme.
pub const HADAMARD_MAX_BITS: u32 = 24;

/// `Enc(m) = H^{⊗n}|m, 0^{n−k}⟩`, decoded by undoing `H^{⊗n}` and checking
/// the padding.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct HadamardScheme {
    pub n: u32,
    pub k: u32,
}

/// Decoder statistics under the constant tampering `f_y`.
#[derive(Clone, Debug, Serialize)]
pub struct HadamardOutcome {
    pub n: u32,
    pub k: u32,
    pub y: usize,
    pub m: usize,
    pub distribution: DecodeDistribution,
    /// `Σ_{m′≠m} p(m′)`.
    pub wrong_message_prob: f64,
    /// `(2^k − 1)·2^{−n}`.
    pub wrong_message_exact: f64,
    /// `2^{2k−n}`.
    pub bound: f64,
}

impl HadamardScheme {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k > n {
            return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
        }
        if n > HADAMARD_MAX_BITS {
            return Err(Error::SizeLimit {
                what: format!("Hadamard scheme on {n} qubits"),
                entries: 1u128 << n,
                limit: 1u128 << HADAMARD_MAX_BITS,
            });
        }
        Ok(Self { n, k })
    }

    /// Decode distribution when the codeword of `m` is replaced by `|y⟩`.
    pub fn constant_tampering(&self, y: usize, m: usize) -> Result<HadamardOutcome> {
        let dim = 1usize << self.n;
        let messages = 1usize << self.k;
        if y >= dim {
            return Err(Error::Domain(format!("y = {y} is not an {}-bit string", self.n)));
        }
        if m >= messages {
            return Err(Error::Domain(format!("message {m} out of range for k = {}", self.k)));
        }
        let mut state = vec![0.0; dim];
        state[y] = 1.0;
        walsh_hadamard(&mut state);
        let pad = self.n - self.k;
        let probs: Vec<f64> = (0..messages).map(|mp| state[mp << pad].powi(2)).collect();
        let bottom = 1.0 - probs.iter().sum::<f64>();
        let distribution = DecodeDistribution { messages: probs, bottom };
        let wrong = distribution.wrong_message(m);
        let p = 2f64.powi(-(self.n as i32));
        Ok(HadamardOutcome {
            n: self.n,
            k: self.k,
            y,
            m,
            wrong_message_prob: wrong,
            wrong_message_exact: (messages - 1) as f64 * p,
            bound: 2f64.powi(2 * self.k as i32 - self.n as i32),
            distribution,
        })
    }
}

pub fn hadamard_scheme_probabilities(n: u32, k: u32, y: usize, m: usize) -> Result<HadamardOutcome> {
    HadamardScheme::new(n, k)?.constant_tampering(y, m)
}

/// Classical scheme given by explicit tables.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(try_from = "ClassicalSchemeRepr")]
pub struct ClassicalSchemeTable {
    n: u32,
    k: u32,
    /// `enc_table[m][c] = Pr[Enc(m) = c]`.
    enc_table: Vec<Vec<f64>>,
    /// `dec_table[c]`, `None` for `⊥`.
    dec_table: Vec<Option<usize>>,
}

#[derive(Deserialize)]
struct ClassicalSchemeRepr {
    n: u32,
    k: u32,
    enc_table: Vec<Vec<f64>>,
    dec_table: Vec<Option<usize>>,
}

impl TryFrom<ClassicalSchemeRepr> for ClassicalSchemeTable {
    type Error = Error;

    fn try_from(r: ClassicalSchemeRepr) -> Result<Self> {
        Self::new(r.n, r.k, r.enc_table, r.dec_table)
    }
}

/// Largest codeword length for table schemes.
pub const CLASSICAL_MAX_BITS: u32 = 16;

impl ClassicalSchemeTable {
    pub fn new(n: u32, k: u32, enc_table: Vec<Vec<f64>>, dec_table: Vec<Option<usize>>) -> Result<Self> {
        if n > CLASSICAL_MAX_BITS || k > n {
            return Err(Error::InvalidScheme(format!(
                "need k <= n <= {CLASSICAL_MAX_BITS}, got n = {n}, k = {k}"
            )));
        }
        let words = 1usize << n;
        let messages = 1usize << k;
        if enc_table.len() != messages {
            return Err(Error::InvalidScheme(format!(
                "enc_table has {} rows, expected {messages}",
                enc_table.len()
            )));
        }
        if dec_table.len() != words {
            return Err(Error::InvalidScheme(format!(
                "dec_table has {} entries, expected {words}",
                dec_table.len()
            )));
        }
        if let Some(bad) = dec_table.iter().flatten().find(|&&m| m >= messages) {
            return Err(Error::InvalidScheme(format!("dec_table outputs message {bad} >= {messages}")));
        }
        for (m, row) in enc_table.iter().enumerate() {
            if row.len() != words {
                return Err(Error::InvalidScheme(format!("enc_table[{m}] has {} entries, expected {words}", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidScheme(format!("enc_table[{m}] has a negative or non-finite entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidScheme(format!("enc_table[{m}] sums to {total}")));
            }
            for (c, &p) in row.iter().enumerate() {
                if p > 0.0 && dec_table[c] != Some(m) {
                    return Err(Error::InvalidScheme(format!(
                        "incomplete: Enc({m}) can output codeword {c} but Dec({c}) = {:?}",
                        dec_table[c]
                    )));
                }
            }
        }
        Ok(Self {
            n,
            k,
            enc_table,
            dec_table,
        })
    }

    /// `Enc(m) = m` padded with zeros, `Dec` the matching lookup.
    pub fn identity_padded(n: u32, k: u32) -> Result<Self> {
        if k > n || n > CLASSICAL_MAX_BITS {
            return Err(Error::InvalidScheme(format!("need k <= n <= {CLASSICAL_MAX_BITS}")));
        }
        let words = 1usize << n;
        let pad = n - k;
        let mut enc = vec![vec![0.0; words]; 1 << k];
        let mut dec = vec![None; words];
        for (m, row) in enc.iter_mut().enumerate() {
            row[m << pad] = 1.0;
            dec[m << pad] = Some(m);
        }
        Self::new(n, k, enc, dec)
    }

    /// Random complete scheme: every message owns `support` distinct
    /// codewords, used with random weights when `randomized`, otherwise a
    /// single codeword carries all the mass. Unused codewords decode to a
    /// random message or `⊥`.
    pub fn random(n: u32, k: u32, support: usize, randomized: bool, rng: &mut SeededRng) -> Result<Self> {
        if k > n || n > CLASSICAL_MAX_BITS {
            return Err(Error::InvalidScheme(format!("need k <= n <= {CLASSICAL_MAX_BITS}")));
        }
        let words = 1usize << n;
        let messages = 1usize << k;
        let support = support.max(1);
        if support * messages > words {
            return Err(Error::InvalidScheme(format!(
                "{messages} messages x {support} codewords exceed {words} codewords"
            )));
        }
        let mut order: Vec<usize> = (0..words).collect();
        for i in (1..words).rev() {
            order.swap(i, rng.below(i + 1));
        }
        let mut enc = vec![vec![0.0; words]; messages];
        let mut dec: Vec<Option<usize>> = (0..words)
            .map(|_| {
                let r = rng.below(messages + 1);
                (r < messages).then_some(r)
            })
            .collect();
        for (m, row) in enc.iter_mut().enumerate() {
            let owned = &order[m * support..(m + 1) * support];
            let weights: Vec<f64> = if randomized {
                owned.iter().map(|_| 0.05 + rng.uniform()).collect()
            } else {
                let mut w = vec![0.0; support];
                w[0] = 1.0;
                w
            };
            let total: f64 = weights.iter().sum();
            for (&c, &w) in owned.iter().zip(&weights) {
                row[c] = w / total;
                dec[c] = Some(m);
            }
            // Renormalise so the row sums to one exactly in floating point.
            let s: f64 = row.iter().sum();
            let last = owned[0];
            row[last] += 1.0 - s;
        }
        Self::new(n, k, enc, dec)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn num_messages(&self) -> usize {
        1 << self.k
    }

    pub fn enc_prob(&self, m: usize, c: usize) -> f64 {
        self.enc_table[m][c]
    }

    pub fn decode(&self, c: usize) -> Option<usize> {
        self.dec_table[c]
    }

    pub fn enc_table(&self) -> &[Vec<f64>] {
        &self.enc_table
    }

    pub fn dec_table(&self) -> &[Option<usize>] {
        &self.dec_table
    }

    /// `Pr[Dec(Enc(m)) = m]`.
    pub fn completeness(&self, m: usize) -> f64 {
        self.enc_table[m]
            .iter()
            .enumerate()
            .filter(|(c, _)| self.dec_table[*c] == Some(m))
            .map(|(_, p)| p)
            .sum()
    }

    /// Probability that sending `m` and tampering with `f` decodes to a
    /// message outside `{m, ⊥}`.
    pub fn wrong_decode_prob(&self, m: usize, f: impl Fn(usize) -> usize) -> f64 {
        self.enc_table[m]
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .filter(|(c, _)| matches!(self.dec_table[f(*c)], Some(out) if out != m))
            .map(|(_, p)| p)
            .sum()
    }
}

/// Constant-function attack against a classical scheme.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakCertificate {
    /// The constant `c` the adversary writes.
    pub constant: usize,
    pub constant_bits: String,
    /// Message whose encoding can be `c`; the decoder outputs it.
    pub decoded_message: usize,
    /// `Pr[Enc(m₀) = c]`.
    pub enc_probability: f64,
    /// Message `m₁ ≠ m₀` that the sender transmits.
    pub victim_message: usize,
    pub wrong_decode_prob: f64,
}

impl BreakCertificate {
    /// Recomputes the wrong-decode probability from the scheme tables.
    pub fn replay(&self, scheme: &ClassicalSchemeTable) -> f64 {
        let c = self.constant;
        scheme.wrong_decode_prob(self.victim_message, |_| c)
    }
}

/// Finds a constant tampering function that makes the decoder output a
/// wrong message with certainty.
pub fn break_classical_scheme(scheme: &ClassicalSchemeTable) -> Result<BreakCertificate> {
    if scheme.k == 0 {
        return Err(Error::NoVictim);
    }
    let m0 = 0;
    let (c, p) = scheme.enc_table[m0]
        .iter()
        .copied()
        .enumerate()
        .find(|(_, p)| *p > 0.0)
        .ok_or_else(|| Error::InvalidScheme("Enc(0) has empty support".into()))?;
    let m1 = 1;
    let mut cert = BreakCertificate {
        constant: c,
        constant_bits: format!("{c:0width$b}", width = scheme.n as usize),
        decoded_message: m0,
        enc_probability: p,
        victim_message: m1,
        wrong_decode_prob: 0.0,
    };
    cert.wrong_decode_prob = cert.replay(scheme);
    Ok(cert)
}
