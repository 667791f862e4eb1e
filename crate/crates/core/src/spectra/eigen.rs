use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::laplacian::LaplacianView;

/// Ascending eigenvalues of a symmetric matrix (only the lower triangle is read).
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
    }
    for j in 0..m.ncols() {
        if let Some(i) = m.col_as_slice(j).iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    let mut eigs = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::InvalidParameter(format!("eigensolver did not converge: {e:?}")))?;
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Full spectrum of a dense view, ascending.
pub fn eigenvalues_dense(view: &LaplacianView) -> Result<Vec<f64>> {
    let m = view.dense_matrix().ok_or(Error::WrongMode { expected: "dense" })?;
    symmetric_eigenvalues(m)
}
