//! Hermitian eigendecomposition, delegated to nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending. Column `i` of
/// `vectors` belongs to `values[i]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<C64> {
    // Symmetrise so round-off asymmetry does not leak into the solver.
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5)
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Shape(format!("eigendecomposition of {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let eig = SymmetricEigen::new(to_nalgebra(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigenvalue solver returned non-finite values".into()));
    }
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])])?;
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::Shape(format!("eigenvalues of {}x{} matrix", m.rows(), m.cols())));
    }
    let mut values: Vec<f64> = to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_hermitian_matrix() {
        let m = ComplexMatrix::from_row_major(
            2,
            2,
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        )
        .unwrap();
        let e = hermitian_eigen(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        let d = ComplexMatrix::from_real_diagonal(&e.values).unwrap();
        let back = &(&e.vectors * &d) * &e.vectors.adjoint();
        assert!(back.max_abs_diff(&m) < 1e-12);
        assert_eq!(hermitian_eigenvalues(&m).unwrap().len(), 2);
    }
}
