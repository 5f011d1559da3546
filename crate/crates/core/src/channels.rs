//! CPTP maps in Kraus, Choi and Stinespring form.
//!
//! Choi convention: `J(Φ) = Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|`, so the output factor is
//! the high-order index: `J[(a·d + i), (b·d + j)] = Σ_k K_k[a,i]·conj(K_k[b,j])`.
//! Equivalently `J = Σ_k vec(K_k) vec(K_k)*` with `vec` the row-major
//! flattening of a `D×d` Kraus operator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::eig::hermitian_eigen;
use crate::qmath::haar::haar_columns;
use crate::qmath::matrix::{inner, ComplexMatrix, UnitVector, C64, ONE, ZERO};
use crate::qmath::rng::SeededRng;

/// Trace preservation tolerance per input dimension: `‖ΣK*K − I‖_max ≤ 1e-9·d`.
pub const TP_TOL_PER_DIM: f64 = 1e-9;
/// Complete positivity tolerance relative to `λ_max(J)`.
pub const CP_REL_TOL: f64 = 1e-9;
/// Hermiticity tolerance for Choi matrices read from files.
pub const CHOI_HERMITIAN_TOL: f64 = 1e-10;
/// Largest matrix handed to the dense eigensolver when computing ranks.
pub const MAX_EIGEN_DIM: usize = 4096;

/// Nonzero pattern kept for Kraus operators that are mostly zero
/// (depolarizing and classical-lift channels).
type Sparse = Vec<(usize, usize, C64)>;

fn sparse_pattern(k: &ComplexMatrix) -> Option<Sparse> {
    let nnz = k.as_slice().iter().filter(|z| **z != ZERO).count();
    if nnz * 8 > k.rows() * k.cols() {
        return None;
    }
    let cols = k.cols();
    Some(
        k.as_slice()
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != ZERO)
            .map(|(idx, &z)| (idx / cols, idx % cols, z))
            .collect(),
    )
}

/// A completely positive trace-preserving map `C^{d×d} → C^{D×D}`.
#[derive(Clone, Debug, Serialize)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    #[serde(skip)]
    sparse: Vec<Option<Sparse>>,
}

fn check_kraus_shapes(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> Result<()> {
    if dim_in == 0 || dim_out == 0 {
        return Err(Error::InvalidDimension(format!("channel {dim_in} -> {dim_out}")));
    }
    if kraus.is_empty() {
        return Err(Error::InvalidChannel("empty Kraus list".into()));
    }
    for (i, k) in kraus.iter().enumerate() {
        if k.rows() != dim_out || k.cols() != dim_in {
            return Err(Error::Shape(format!(
                "Kraus operator {i} is {}x{}, expected {dim_out}x{dim_in}",
                k.rows(),
                k.cols()
            )));
        }
    }
    Ok(())
}

fn tp_residual(dim_in: usize, kraus: &[ComplexMatrix]) -> Result<f64> {
    let mut sum = ComplexMatrix::zeros(dim_in, dim_in)?;
    for k in kraus {
        sum.add_scaled(&k.adjoint_mul(k)?, ONE)?;
    }
    Ok(sum.max_abs_diff(&ComplexMatrix::identity(dim_in)?))
}

/// Gram matrix `G_kl = Tr[K_k* K_l] = ⟨vec K_k, vec K_l⟩`; it shares the
/// nonzero spectrum of the Choi matrix.
fn kraus_gram(kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let r = kraus.len();
    let mut g = ComplexMatrix::zeros(r, r)?;
    for a in 0..r {
        for b in a..r {
            let z = inner(kraus[a].as_slice(), kraus[b].as_slice());
            g.set(a, b, z);
            g.set(b, a, z.conj());
        }
    }
    Ok(g)
}

fn choi_from_kraus(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let n = dim_in * dim_out;
    let mut j = ComplexMatrix::zeros(n, n)?;
    for k in kraus {
        let v = k.as_slice();
        for (row, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (col, &y) in v.iter().enumerate() {
                if y != ZERO {
                    j.add_at(row, col, x * y.conj());
                }
            }
        }
    }
    Ok(j)
}

/// Spectral data shared by rank, canonical Kraus extraction and CP checks.
struct Spectrum {
    /// Eigenvalues of `J` (descending) together with the unnormalised
    /// vectors `√λ·u` reshaped as Kraus operators.
    pairs: Vec<(f64, ComplexMatrix)>,
    lambda_max: f64,
    /// Smallest eigenvalue of `J`, zero-padded when the spectrum came from a
    /// Gram matrix smaller than `J`.
    lambda_min: f64,
}

fn spectrum(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix], with_vectors: bool) -> Result<Spectrum> {
    let n = dim_in * dim_out;
    let r = kraus.len();
    let via_gram = r < n;
    let size = r.min(n);
    if size > MAX_EIGEN_DIM {
        return Err(Error::SizeLimit {
            what: "Choi spectrum".into(),
            entries: (size * size) as u128,
            limit: (MAX_EIGEN_DIM * MAX_EIGEN_DIM) as u128,
        });
    }
    let m = if via_gram {
        kraus_gram(kraus)?
    } else {
        choi_from_kraus(dim_in, dim_out, kraus)?
    };
    let eig = hermitian_eigen(&m)?;
    let lambda_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let mut lambda_min = eig.values[0];
    if via_gram {
        lambda_min = lambda_min.min(0.0);
    }
    let threshold = n as f64 * f64::EPSILON * lambda_max;
    let mut pairs = Vec::new();
    if with_vectors {
        for idx in (0..eig.values.len()).rev() {
            let lambda = eig.values[idx];
            if lambda <= threshold {
                continue;
            }
            let u = eig.vectors.column(idx);
            let flat: Vec<C64> = if via_gram {
                // A·u, with A the matrix whose columns are vec(K_k), has norm √λ.
                let mut acc = vec![ZERO; n];
                for (k, &c) in kraus.iter().zip(&u) {
                    for (o, &x) in acc.iter_mut().zip(k.as_slice()) {
                        *o += c * x;
                    }
                }
                acc
            } else {
                let s = lambda.sqrt();
                u.iter().map(|&z| z * s).collect()
            };
            pairs.push((lambda, ComplexMatrix::from_row_major(dim_out, dim_in, phase_fix(flat))?));
        }
    } else {
        for &lambda in eig.values.iter().rev() {
            if lambda > threshold {
                pairs.push((lambda, ComplexMatrix::zeros(1, 1)?));
            }
        }
    }
    Ok(Spectrum {
        pairs,
        lambda_max,
        lambda_min,
    })
}

/// Rotates the global phase so the first entry of largest modulus is real positive.
fn phase_fix(mut v: Vec<C64>) -> Vec<C64> {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for z in &mut v {
            *z *= phase;
        }
    }
    v
}

fn lexicographic(a: &ComplexMatrix, b: &ComplexMatrix) -> std::cmp::Ordering {
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord.is_ne() {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelVerdict {
    pub cp_ok: bool,
    pub tp_ok: bool,
    /// `‖Σ K*K − I‖_max`.
    pub tp_residual: f64,
    pub tp_tolerance: f64,
    /// Smallest Choi eigenvalue; `None` when the spectrum was too large to compute.
    pub choi_min_eigenvalue: Option<f64>,
    pub choi_max_eigenvalue: Option<f64>,
}

impl ChannelVerdict {
    pub fn ok(&self) -> bool {
        self.cp_ok && self.tp_ok
    }
}

/// Checks an arbitrary Kraus list, including ones that are not trace preserving.
pub fn validate_kraus(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> Result<ChannelVerdict> {
    check_kraus_shapes(dim_in, dim_out, kraus)?;
    let tp_residual = tp_residual(dim_in, kraus)?;
    let tp_tolerance = TP_TOL_PER_DIM * dim_in as f64;
    let (cp_ok, min, max) = match spectrum(dim_in, dim_out, kraus, false) {
        Ok(s) => (s.lambda_min >= -CP_REL_TOL * s.lambda_max, Some(s.lambda_min), Some(s.lambda_max)),
        // A Kraus sum is completely positive by construction; only the report is lost.
        Err(Error::SizeLimit { .. }) => (true, None, None),
        Err(e) => return Err(e),
    };
    Ok(ChannelVerdict {
        cp_ok,
        tp_ok: tp_residual <= tp_tolerance,
        tp_residual,
        tp_tolerance,
        choi_min_eigenvalue: min,
        choi_max_eigenvalue: max,
    })
}

pub fn validate(ch: &QuantumChannel) -> Result<ChannelVerdict> {
    validate_kraus(ch.dim_in, ch.dim_out, &ch.kraus)
}

pub fn choi_of(ch: &QuantumChannel) -> Result<ChoiMatrix> {
    ch.choi()
}

pub fn min_kraus_rank(ch: &QuantumChannel) -> Result<usize> {
    ch.min_kraus_rank()
}

pub fn entanglement_fidelity(ch: &QuantumChannel) -> Result<f64> {
    ch.entanglement_fidelity()
}

pub fn stinespring_of(ch: &QuantumChannel) -> Result<StinespringIsometry> {
    ch.stinespring()
}

impl QuantumChannel {
    /// Builds a channel, rejecting shape errors and Kraus sets that are not
    /// trace preserving.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        check_kraus_shapes(dim_in, dim_out, &kraus)?;
        let residual = tp_residual(dim_in, &kraus)?;
        if residual > TP_TOL_PER_DIM * dim_in as f64 {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving: max |sum K*K - I| = {residual:.3e}"
            )));
        }
        Ok(Self::assemble(dim_in, dim_out, kraus))
    }

    fn assemble(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Self {
        let sparse = kraus.iter().map(sparse_pattern).collect();
        Self {
            dim_in,
            dim_out,
            kraus,
            sparse,
        }
    }

    /// Dimensions taken from the first Kraus operator.
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        Self::new(first.cols(), first.rows(), kraus)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, d, vec![ComplexMatrix::identity(d)?])
    }

    /// `ρ ↦ UρU*`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Shape(format!("unitary channel from {}x{} matrix", u.rows(), u.cols())));
        }
        let d = u.rows();
        Self::new(d, d, vec![u])
    }

    /// Completely depolarizing channel `ρ ↦ Tr[ρ]·I/d`, Kraus set `{|i⟩⟨j|/√d}`.
    pub fn depolarizing(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("depolarizing channel of dimension 0".into()));
        }
        let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = ComplexMatrix::zeros(d, d)?;
                k.set(i, j, s);
                kraus.push(k);
            }
        }
        Self::new(d, d, kraus)
    }

    /// Random channel on `C^d` with `rank` Kraus operators, obtained from a
    /// Haar-random Stinespring isometry.
    pub fn random(d: usize, rank: usize, rng: &mut SeededRng) -> Result<Self> {
        if d == 0 || rank == 0 {
            return Err(Error::InvalidDimension(format!("random channel d={d}, rank={rank}")));
        }
        let cols = haar_columns(d * rank, d, rng)?;
        let mut kraus = vec![ComplexMatrix::zeros(d, d)?; rank];
        for (i, col) in cols.iter().enumerate() {
            for a in 0..d {
                for (k, op) in kraus.iter_mut().enumerate() {
                    op.set(a, i, col[a * rank + k]);
                }
            }
        }
        Self::new(d, d, kraus)
    }

    /// Unitary channel of a Pauli string such as `"XIZ"` (first letter acts on
    /// the most significant qubit).
    pub fn pauli_string(label: &str) -> Result<Self> {
        Self::unitary(pauli_operator(label)?)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn num_kraus(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    /// `K_i v`.
    pub fn apply_kraus_to_vector(&self, i: usize, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim_in {
            return Err(Error::Shape(format!(
                "vector of length {} for a channel on C^{}",
                v.len(),
                self.dim_in
            )));
        }
        Ok(self.kraus_vec_unchecked(i, v))
    }

    pub(crate) fn kraus_vec_unchecked(&self, i: usize, v: &[C64]) -> Vec<C64> {
        match &self.sparse[i] {
            Some(nz) => {
                let mut out = vec![ZERO; self.dim_out];
                for &(r, c, z) in nz {
                    out[r] += z * v[c];
                }
                out
            }
            None => self.kraus[i].mul_vec_unchecked(v),
        }
    }

    /// `Φ(ρ) = Σ_i K_i ρ K_i*`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::Shape(format!(
                "input is {}x{}, channel expects {}x{}",
                rho.rows(),
                rho.cols(),
                self.dim_in,
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out)?;
        for (k, sparse) in self.kraus.iter().zip(&self.sparse) {
            match sparse {
                Some(nz) => {
                    for &(a, i, x) in nz {
                        for &(b, j, y) in nz {
                            let r = rho.get(i, j);
                            if r != ZERO {
                                out.add_at(a, b, x * r * y.conj());
                            }
                        }
                    }
                }
                None => out.add_scaled(&k.conjugate(rho)?, ONE)?,
            }
        }
        Ok(out)
    }

    /// `Φ(|ψ⟩⟨ψ|)` without forming the input projector.
    pub fn apply_pure(&self, psi: &UnitVector) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out)?;
        for i in 0..self.kraus.len() {
            let v = self.apply_kraus_to_vector(i, psi.as_slice())?;
            out.add_scaled(&ComplexMatrix::outer(&v, &v)?, ONE)?;
        }
        Ok(out)
    }

    /// `⟨φ|Φ(|ψ⟩⟨ψ|)|φ⟩ = Σ_i |⟨φ|K_i|ψ⟩|²`.
    pub fn transition_probability(&self, psi: &[C64], phi: &[C64]) -> Result<f64> {
        if psi.len() != self.dim_in || phi.len() != self.dim_out {
            return Err(Error::Shape("state dimensions do not match the channel".into()));
        }
        Ok((0..self.kraus.len())
            .map(|i| inner(phi, &self.kraus_vec_unchecked(i, psi)).norm_sqr())
            .sum())
    }

    /// `⟨t|Φ(|ψ⟩⟨ψ|)|t⟩ = Σ_i |⟨t|K_i|ψ⟩|²` for every target `t`. Sparse
    /// Kraus operators never materialise `K_i ψ`.
    pub fn transition_probabilities(&self, psi: &[C64], targets: &[Vec<C64>]) -> Result<Vec<f64>> {
        if psi.len() != self.dim_in || targets.iter().any(|t| t.len() != self.dim_out) {
            return Err(Error::Shape("state dimensions do not match the channel".into()));
        }
        let mut out = vec![0.0; targets.len()];
        let mut image: Vec<(usize, C64)> = Vec::new();
        for i in 0..self.kraus.len() {
            match &self.sparse[i] {
                Some(nz) => {
                    image.clear();
                    image.extend(nz.iter().map(|&(r, c, z)| (r, z * psi[c])).filter(|p| p.1 != ZERO));
                    for (o, t) in out.iter_mut().zip(targets) {
                        let amp: C64 = image.iter().map(|&(r, z)| t[r].conj() * z).sum();
                        *o += amp.norm_sqr();
                    }
                }
                None => {
                    let v = self.kraus[i].mul_vec_unchecked(psi);
                    for (o, t) in out.iter_mut().zip(targets) {
                        *o += inner(t, &v).norm_sqr();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn choi(&self) -> Result<ChoiMatrix> {
        Ok(ChoiMatrix {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            matrix: choi_from_kraus(self.dim_in, self.dim_out, &self.kraus)?,
        })
    }

    /// Numerical rank of `J(Φ)` with cutoff `τ = dD·ε·λ_max`.
    pub fn min_kraus_rank(&self) -> Result<usize> {
        Ok(spectrum(self.dim_in, self.dim_out, &self.kraus, false)?.pairs.len())
    }

    /// Minimal Kraus set from the eigendecomposition of `J(Φ)`: one operator
    /// per eigenvalue above the rank cutoff, ordered by descending eigenvalue,
    /// ties broken lexicographically, each phase-fixed.
    pub fn canonical_kraus(&self) -> Result<Vec<ComplexMatrix>> {
        let mut pairs = spectrum(self.dim_in, self.dim_out, &self.kraus, true)?.pairs;
        let tie = 1e-12 * pairs.first().map_or(0.0, |p| p.0);
        pairs.sort_by(|a, b| {
            if (a.0 - b.0).abs() <= tie {
                lexicographic(&a.1, &b.1)
            } else {
                b.0.total_cmp(&a.0)
            }
        });
        Ok(pairs.into_iter().map(|p| p.1).collect())
    }

    /// Same channel with its canonical Kraus set.
    pub fn canonicalized(&self) -> Result<Self> {
        Ok(Self::assemble(self.dim_in, self.dim_out, self.canonical_kraus()?))
    }

    /// `F_e(Φ) = (1/d²)·Σ_i |Tr K_i|²`, cross-checked against
    /// `⟨Ω|(Φ⊗id)(|Ω⟩⟨Ω|)|Ω⟩` when the Choi matrix is small.
    pub fn entanglement_fidelity(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Domain(format!(
                "entanglement fidelity needs dim_in = dim_out, got {} -> {}",
                self.dim_in, self.dim_out
            )));
        }
        let d = self.dim_in;
        let fe = self.kraus.iter().map(|k| k.trace().norm_sqr()).sum::<f64>() / (d * d) as f64;
        if d * d <= 256 {
            let j = self.choi()?.matrix;
            let mut omega = ZERO;
            for i in 0..d {
                for k in 0..d {
                    omega += j.get(i * d + i, k * d + k);
                }
            }
            let via_choi = omega.re / (d * d) as f64;
            if (via_choi - fe).abs() > 1e-10 {
                return Err(Error::Numerical(format!(
                    "entanglement fidelity routes disagree: {fe} vs {via_choi}"
                )));
            }
        }
        Ok(fe)
    }

    pub fn stinespring(&self) -> Result<StinespringIsometry> {
        let e = self.kraus.len();
        let mut v = ComplexMatrix::zeros(self.dim_out * e, self.dim_in)?;
        for (k, op) in self.kraus.iter().enumerate() {
            for a in 0..self.dim_out {
                for i in 0..self.dim_in {
                    v.set(a * e + k, i, op.get(a, i));
                }
            }
        }
        Ok(StinespringIsometry {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            dim_env: e,
            isometry: v,
        })
    }

    /// The unitary behind a single-Kraus channel, if it is one.
    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match self.kraus.as_slice() {
            [u] if self.is_square() && u.is_unitary(1e-10) => Some(u),
            _ => None,
        }
    }

    /// `‖J(self) − J(other)‖_F²`, computed from Kraus inner products only.
    pub fn choi_distance_sq(&self, other: &Self) -> Result<f64> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::Shape("channels have different dimensions".into()));
        }
        let cross = |a: &[ComplexMatrix], b: &[ComplexMatrix]| -> f64 {
            a.iter()
                .flat_map(|x| b.iter().map(move |y| inner(x.as_slice(), y.as_slice()).norm_sqr()))
                .sum()
        };
        let aa = cross(&self.kraus, &self.kraus);
        let bb = cross(&other.kraus, &other.kraus);
        let ab = cross(&self.kraus, &other.kraus);
        Ok((aa + bb - 2.0 * ab).max(0.0))
    }
}

/// Tensor product of single-qubit Paulis.
pub fn pauli_operator(label: &str) -> Result<ComplexMatrix> {
    if label.is_empty() {
        return Err(Error::Domain("empty Pauli string".into()));
    }
    let z = ZERO;
    let o = ONE;
    let i = C64::new(0.0, 1.0);
    let mut out = ComplexMatrix::identity(1)?;
    for ch in label.chars() {
        let p = match ch.to_ascii_uppercase() {
            'I' => [o, z, z, o],
            'X' => [z, o, o, z],
            'Y' => [z, -i, i, z],
            'Z' => [o, z, z, -o],
            other => return Err(Error::Domain(format!("unknown Pauli letter {other:?}"))),
        };
        out = out.kron(&ComplexMatrix::from_row_major(2, 2, p.to_vec())?)?;
    }
    Ok(out)
}

/// Choi matrix with the output factor first.
#[derive(Clone, Debug, Serialize)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Validates a Choi matrix of a channel: Hermitian, PSD and with output
    /// partial trace equal to `I_d`.
    pub fn new(dim_in: usize, dim_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidDimension(format!("Choi matrix for {dim_in} -> {dim_out}")));
        }
        let n = dim_in * dim_out;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::Shape(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermitian_residual();
        if herm > CHOI_HERMITIAN_TOL {
            return Err(Error::InvalidChannel(format!("Choi matrix not Hermitian (residual {herm:.3e})")));
        }
        let choi = Self {
            dim_in,
            dim_out,
            matrix,
        };
        let pt = choi.partial_trace_output()?;
        let tp = pt.max_abs_diff(&ComplexMatrix::identity(dim_in)?);
        if tp > TP_TOL_PER_DIM * dim_in as f64 {
            return Err(Error::InvalidChannel(format!(
                "partial trace over the output differs from identity by {tp:.3e}"
            )));
        }
        Ok(choi)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr_out J`, a `d×d` matrix.
    pub fn partial_trace_output(&self) -> Result<ComplexMatrix> {
        let d = self.dim_in;
        let mut out = ComplexMatrix::zeros(d, d)?;
        for a in 0..self.dim_out {
            for i in 0..d {
                for j in 0..d {
                    out.add_at(i, j, self.matrix.get(a * d + i, a * d + j));
                }
            }
        }
        Ok(out)
    }

    /// Converts back to Kraus form through the eigendecomposition, rejecting
    /// matrices that are not PSD within `CP_REL_TOL·λ_max`. Small negative
    /// eigenvalues are clipped.
    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let eig = hermitian_eigen(&self.matrix)?;
        let lambda_max = eig.values.last().copied().unwrap_or(0.0);
        let lambda_min = eig.values[0];
        if lambda_max <= 0.0 || lambda_min < -CP_REL_TOL * lambda_max {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix not PSD: eigenvalues in [{lambda_min:.3e}, {lambda_max:.3e}]"
            )));
        }
        let tau = (self.dim_in * self.dim_out) as f64 * f64::EPSILON * lambda_max;
        let mut kraus = Vec::new();
        for idx in (0..eig.values.len()).rev() {
            let lambda = eig.values[idx];
            if lambda <= tau {
                continue;
            }
            let s = lambda.sqrt();
            let flat: Vec<C64> = eig.vectors.column(idx).iter().map(|&z| z * s).collect();
            kraus.push(ComplexMatrix::from_row_major(self.dim_out, self.dim_in, phase_fix(flat))?);
        }
        QuantumChannel::new(self.dim_in, self.dim_out, kraus)
    }
}

/// `V: C^d → C^D ⊗ C^e` with `V[a·e + k, i] = K_k[a, i]`.
#[derive(Clone, Debug, Serialize)]
pub struct StinespringIsometry {
    pub dim_in: usize,
    pub dim_out: usize,
    pub dim_env: usize,
    pub isometry: ComplexMatrix,
}

impl StinespringIsometry {
    /// `‖V*V − I‖_max`.
    pub fn isometry_residual(&self) -> Result<f64> {
        Ok(self
            .isometry
            .adjoint_mul(&self.isometry)?
            .max_abs_diff(&ComplexMatrix::identity(self.dim_in)?))
    }

    /// `Tr_env[V ρ V*]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let full = self.isometry.conjugate(rho)?;
        let e = self.dim_env;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out)?;
        for a in 0..self.dim_out {
            for b in 0..self.dim_out {
                let s: C64 = (0..e).map(|k| full.get(a * e + k, b * e + k)).sum();
                out.set(a, b, s);
            }
        }
        Ok(out)
    }
}
