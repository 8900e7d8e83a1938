//! Dense symmetric eigendecomposition for matrices stored as nalgebra
//! `DMatrix`.

use faer::{Mat, Side};
use nalgebra::DMatrix;

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (as
/// columns) of a real symmetric matrix.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = to_faer(m).selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let values = (0..s.nrows()).map(|i| s.read(i)).collect();
    let vectors = DMatrix::from_fn(u.nrows(), u.ncols(), |r, c| u.read(r, c));
    (values, vectors)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut values = to_faer(m).selfadjoint_eigenvalues(Side::Lower);
    values.sort_by(f64::total_cmp);
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrowhead_matrix_is_decomposed_accurately() {
        let n = 40;
        let m = DMatrix::from_fn(n, n, |r, c| match (r, c) {
            _ if r == c => -(r as f64) * 0.1 - 1e-9 * (r % 3) as f64,
            (r, c) if r == n - 1 || c == n - 1 => 1e-5 * (1 + r.min(c)) as f64,
            _ => 0.0,
        });
        let (values, vectors) = symmetric_eigen(&m);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let theta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values));
        assert!((&m * &vectors - &vectors * theta).amax() < 1e-13);
        assert!((vectors.transpose() * &vectors - DMatrix::identity(n, n)).amax() < 1e-13);
    }
}
