//! Haar-distributed unitaries.
//!
//! A complex Ginibre matrix is orthonormalised column by column (classical
//! Gram-Schmidt with one reorthogonalisation pass). That is the QR
//! factorisation whose `R` has a positive real diagonal, so the resulting `Q`
//! is exactly Haar distributed.

use super::matrix::{inner, ComplexMatrix, UnitVector, C64, ZERO};
use super::rng::SeededRng;
use crate::error::{Error, Result};

/// Draws `U ~ Haar(U(d))`.
pub fn sample_haar_unitary(d: usize, rng: &mut SeededRng) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("Haar unitary of dimension 0".into()));
    }
    super::matrix::check_entries("Haar unitary", d, d)?;
    let columns = haar_columns(d, d, rng)?;
    let mut data = vec![ZERO; d * d];
    for (c, col) in columns.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            data[r * d + c] = z;
        }
    }
    ComplexMatrix::from_row_major(d, d, data)
}

/// First `count` columns of a Haar unitary on `C^d`, i.e. a Haar isometry.
pub fn haar_columns(d: usize, count: usize, rng: &mut SeededRng) -> Result<Vec<Vec<C64>>> {
    if count > d {
        return Err(Error::InvalidDimension(format!(
            "cannot draw {count} orthonormal columns in dimension {d}"
        )));
    }
    // Column-major Ginibre draw keeps the stream layout independent of `count`.
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v: Vec<C64> = (0..d).map(|_| rng.complex_normal()).collect();
        for _pass in 0..2 {
            for q in &columns {
                let proj = inner(q, &v);
                for (x, &qi) in v.iter_mut().zip(q) {
                    *x -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 1e-300 {
            return Err(Error::Numerical("degenerate Ginibre column".into()));
        }
        for x in &mut v {
            *x /= norm;
        }
        columns.push(v);
    }
    Ok(columns)
}

/// Uniformly random pure state on the unit sphere of `C^d`.
pub fn random_unit_vector(d: usize, rng: &mut SeededRng) -> Result<UnitVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("state of dimension 0".into()));
    }
    UnitVector::normalized((0..d).map(|_| rng.complex_normal()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimension_is_rejected() {
        let mut rng = SeededRng::new(0, 0);
        assert!(matches!(sample_haar_unitary(0, &mut rng), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn one_by_one_is_a_phase() {
        let mut rng = SeededRng::new(5, 0);
        for _ in 0..20 {
            let u = sample_haar_unitary(1, &mut rng).unwrap();
            assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_are_unitary() {
        let mut rng = SeededRng::new(9, 0);
        for d in [2, 4, 7, 16, 64] {
            let u = sample_haar_unitary(d, &mut rng).unwrap();
            assert!(u.unitarity_residual() < 1e-10, "d={d}");
            let uu = &u * &u.adjoint();
            assert!(uu.max_abs_diff(&ComplexMatrix::identity(d).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn isometry_prefix_matches_full_draw() {
        let full = sample_haar_unitary(6, &mut SeededRng::new(3, 1)).unwrap();
        let cols = haar_columns(6, 2, &mut SeededRng::new(3, 1)).unwrap();
        for (c, col) in cols.iter().enumerate() {
            for (r, z) in col.iter().enumerate() {
                assert!((full.get(r, c) - z).norm() < 1e-15);
            }
        }
    }
}
