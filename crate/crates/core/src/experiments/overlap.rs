//! Exact tampering probabilities `X_st` and acceptance probabilities.

use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::matrix::{inner, UnitVector};
use crate::schemes::{DecodeDistribution, HaarScheme};

/// One evaluation of `X_st`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OverlapSample {
    pub s: usize,
    pub t: usize,
    pub value: f64,
}

fn check_dimensions(scheme: &HaarScheme, ch: &QuantumChannel) -> Result<()> {
    if ch.dim_in() != scheme.d() || ch.dim_out() != scheme.d() {
        return Err(Error::Domain(format!(
            "channel maps C^{} -> C^{}, scheme dimension is {}",
            ch.dim_in(),
            ch.dim_out(),
            scheme.d()
        )));
    }
    Ok(())
}

/// `X_st = ⟨ψ_t|Φ(|ψ_s⟩⟨ψ_s|)|ψ_t⟩`, by forming the output density matrix.
pub fn exact_overlap(scheme: &HaarScheme, ch: &QuantumChannel, s: usize, t: usize) -> Result<OverlapSample> {
    check_dimensions(scheme, ch)?;
    let psi_s = scheme.encode(s)?;
    let psi_t = scheme.encode(t)?;
    let rho = ch.apply_pure(&psi_s)?;
    let value = rho.quadratic_form(psi_t.as_slice())?.re;
    Ok(OverlapSample { s, t, value })
}

/// Same quantity through `Σ_i |⟨ψ_t|K_i|ψ_s⟩|²`, without density matrices.
pub fn overlap_via_kraus(scheme: &HaarScheme, ch: &QuantumChannel, s: usize, t: usize) -> Result<OverlapSample> {
    check_dimensions(scheme, ch)?;
    let psi_s = scheme.encode(s)?;
    let psi_t = scheme.encode(t)?;
    let value = ch.transition_probability(psi_s.as_slice(), psi_t.as_slice())?;
    Ok(OverlapSample { s, t, value })
}

/// Decoder distribution after encoding `m` and tampering with `Φ`.
pub fn tampered_distribution(scheme: &HaarScheme, ch: &QuantumChannel, m: usize) -> Result<DecodeDistribution> {
    check_dimensions(scheme, ch)?;
    let rho = ch.apply_pure(&scheme.encode(m)?)?;
    scheme.decode_distribution_unchecked(&rho)
}

/// `Σ_t X_mt`: probability that the decoder does not output `⊥`.
pub fn non_bottom_probability(scheme: &HaarScheme, ch: &QuantumChannel, m: usize) -> Result<f64> {
    check_dimensions(scheme, ch)?;
    let psi = scheme.encode(m)?;
    Ok(ch.transition_probabilities(psi.as_slice(), scheme.codewords())?.iter().sum())
}

/// `Z_φ = Tr[Π_C Φ(|φ⟩⟨φ|)]` for a codeword-space state `φ` on `C^d`.
pub fn code_space_acceptance(scheme: &HaarScheme, ch: &QuantumChannel, phi: &UnitVector) -> Result<f64> {
    check_dimensions(scheme, ch)?;
    if phi.dim() != scheme.d() {
        return Err(Error::InvalidState(format!("state of dimension {} for d = {}", phi.dim(), scheme.d())));
    }
    Ok(ch.transition_probabilities(phi.as_slice(), scheme.codewords())?.iter().sum())
}

/// `|⟨ψ_m|φ⟩|²` for every codeword.
pub fn codeword_overlaps(scheme: &HaarScheme, phi: &UnitVector) -> Vec<f64> {
    scheme
        .codewords()
        .iter()
        .map(|c| inner(c, phi.as_slice()).norm_sqr())
        .collect()
}
