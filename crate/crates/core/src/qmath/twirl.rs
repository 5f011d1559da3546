//! Haar moment operators `E_U[U^{⊗k} M U^{*⊗k}]`.
//!
//! Orders 1 and 2 have exact closed forms. For general `k` the map
//! `Ψ_k(M) = d^{-k} Σ_{π∈S_k} Tr[V(π)⁻¹ M]·V(π)` approximates the twirl up to
//! a multiplicative `(1 ± C·k²/d)` sandwich whose constant is not known; every
//! result built on it is labelled heuristic.

use serde::Serialize;

use super::matrix::{ComplexMatrix, C64};
use super::perm::{trace_with_inverse_permutation, Permutation};
use crate::error::{Error, Result};

/// Default value of the hidden constant `C` in `1 + O(k²/d)`-type factors.
pub const DEFAULT_MOMENT_CONSTANT: f64 = 4.0;

/// Swap operator `F(x⊗y) = y⊗x` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> Result<ComplexMatrix> {
    super::perm::tensor_permutation_operator(&Permutation::from_zero_based(vec![1, 0])?, d)
}

fn local_dimension(m: &ComplexMatrix, k: usize) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Shape(format!("twirl of a {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let d = (n as f64).powf(1.0 / k as f64).round() as usize;
    for cand in [d.saturating_sub(1), d, d + 1] {
        if cand > 0 && (cand as u128).checked_pow(k as u32) == Some(n as u128) {
            return Ok(cand);
        }
    }
    Err(Error::Shape(format!("{n} is not a perfect {k}-th power")))
}

/// Exact twirl for `k ∈ {1, 2}`. For `k = 1` the input is `d×d`, for `k = 2`
/// it is `d²×d²`.
pub fn twirl_exact(m: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    match k {
        1 => {
            let d = local_dimension(m, 1)?;
            Ok(ComplexMatrix::identity(d)?.scale(m.trace() / d as f64))
        }
        2 => {
            let d = local_dimension(m, 2)?;
            if d == 1 {
                return Ok(m.clone());
            }
            let swap = Permutation::from_zero_based(vec![1, 0])?;
            let tr_n = m.trace();
            let tr_nf = trace_with_inverse_permutation(&swap, m, d)?;
            let df = d as f64;
            let denom = df * df - 1.0;
            let c_i = (tr_n - tr_nf / df) / denom;
            let c_f = (tr_nf - tr_n / df) / denom;
            let mut out = ComplexMatrix::identity(d * d)?.scale(c_i);
            out.add_scaled(&swap_operator(d)?, c_f)?;
            Ok(out)
        }
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Coefficients `d^{-k}·Tr[V(π)⁻¹ M]` of `Ψ_k(M)`, one per element of `S_k`
/// in lexicographic order.
pub fn psi_coefficients(m: &ComplexMatrix, k: usize, d: usize) -> Result<Vec<(Permutation, C64)>> {
    let n = (d as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if !m.is_square() || m.rows() as u128 != n {
        return Err(Error::Shape(format!(
            "Psi_{k} at d={d} needs a {n}x{n} operator, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let norm = (d as f64).powi(-(k as i32));
    Permutation::all(k)?
        .into_iter()
        .map(|pi| {
            let c = trace_with_inverse_permutation(&pi, m, d)? * norm;
            Ok((pi, c))
        })
        .collect()
}

/// `Ψ_k(M)` without any condition on `d`.
pub fn psi_map(m: &ComplexMatrix, k: usize, d: usize) -> Result<ComplexMatrix> {
    let coefficients = psi_coefficients(m, k, d)?;
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols())?;
    for (pi, c) in coefficients {
        for (a, b) in pi.tensor_index_map(d)?.into_iter().enumerate() {
            out.add_at(b, a, c);
        }
    }
    Ok(out)
}

/// `Ψ_k(M)` together with its sandwich factors.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxTwirl {
    pub value: ComplexMatrix,
    pub k: usize,
    pub d: usize,
    pub constant: f64,
    /// `1 − C·k²/d`.
    pub lower_factor: f64,
    /// `1 + C·k²/d`.
    pub upper_factor: f64,
    pub heuristic: bool,
}

/// `Ψ_k(M)` in the regime `d > √6·k^{7/4}` where it sandwiches the true twirl.
pub fn twirl_approx(m: &ComplexMatrix, k: usize, d: usize, constant: f64) -> Result<ApproxTwirl> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidDimension(format!("k={k}, d={d}")));
    }
    let threshold = 6f64.sqrt() * (k as f64).powf(1.75);
    if (d as f64) <= threshold {
        return Err(Error::Precondition(format!(
            "Psi_{k} approximation needs d > sqrt(6)*k^(7/4) = {threshold:.4}, got d = {d}"
        )));
    }
    let value = psi_map(m, k, d)?;
    let slack = constant * (k * k) as f64 / d as f64;
    Ok(ApproxTwirl {
        value,
        k,
        d,
        constant,
        lower_factor: 1.0 - slack,
        upper_factor: 1.0 + slack,
        heuristic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::rng::SeededRng;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = SeededRng::new(seed, 0);
        let g = ComplexMatrix::from_fn(n, n, |_, _| rng.complex_normal()).unwrap();
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn first_order_fixes_identity() {
        let i = ComplexMatrix::identity(5).unwrap();
        assert!(twirl_exact(&i, 1).unwrap().max_abs_diff(&i) < 1e-14);
    }

    #[test]
    fn second_order_fixes_swap() {
        for d in 2..=4 {
            let f = swap_operator(d).unwrap();
            assert!(twirl_exact(&f, 2).unwrap().max_abs_diff(&f) < 1e-12);
        }
    }

    #[test]
    fn second_order_is_idempotent_and_trace_preserving() {
        let n = random_hermitian(9, 3);
        let t = twirl_exact(&n, 2).unwrap();
        assert!((t.trace() - n.trace()).norm() < 1e-12);
        assert!(twirl_exact(&t, 2).unwrap().max_abs_diff(&t) < 1e-12);
    }

    #[test]
    fn unsupported_orders() {
        let m = ComplexMatrix::identity(8).unwrap();
        assert!(matches!(twirl_exact(&m, 3), Err(Error::UnsupportedOrder(3))));
        assert!(matches!(twirl_exact(&m, 0), Err(Error::UnsupportedOrder(0))));
        assert!(matches!(twirl_exact(&ComplexMatrix::identity(5).unwrap(), 2), Err(Error::Shape(_))));
    }

    #[test]
    fn psi_order_one_is_exact() {
        let m = random_hermitian(4, 8);
        let a = psi_map(&m, 1, 4).unwrap();
        assert!(a.max_abs_diff(&twirl_exact(&m, 1).unwrap()) < 1e-14);
    }

    #[test]
    fn psi_order_two_is_close_to_exact() {
        let d = 8;
        let m = random_hermitian(d * d, 21);
        let exact = twirl_exact(&m, 2).unwrap();
        let approx = psi_map(&m, 2, d).unwrap();
        let rel = (&approx - &exact).frobenius_norm() / exact.frobenius_norm();
        assert!(rel <= 4.0 / d as f64, "relative distance {rel}");
    }

    #[test]
    fn approx_respects_precondition() {
        let m = ComplexMatrix::identity(64).unwrap();
        assert!(matches!(twirl_approx(&m, 2, 8, 4.0), Err(Error::Precondition(_))));
        let m = ComplexMatrix::identity(81).unwrap();
        let r = twirl_approx(&m, 2, 9, 4.0).unwrap();
        assert!(r.heuristic);
        assert!((r.upper_factor - (1.0 + 16.0 / 9.0)).abs() < 1e-15);
        assert!((r.value.trace().re - psi_map(&m, 2, 9).unwrap().trace().re).abs() < 1e-12);
    }

    #[test]
    fn psi_order_three_on_identity() {
        let d = 4usize;
        let m = ComplexMatrix::identity(d * d * d).unwrap();
        let psi = psi_map(&m, 3, d).unwrap();
        let df = d as f64;
        let expected: f64 = Permutation::all(3)
            .unwrap()
            .iter()
            .map(|p| df.powi(p.num_cycles() as i32).powi(2))
            .sum::<f64>()
            / df.powi(3);
        assert!((psi.trace().re - expected).abs() < 1e-9);
    }
}
