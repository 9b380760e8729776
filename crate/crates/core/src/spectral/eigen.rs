use num_complex::Complex64;

use crate::linalg::{adjoint_mul, identity_defect, matmul, max_abs, CMat};
use crate::model::HermitianOperator;
use crate::{Error, Result};

/// Sorted spectrum and phase-fixed orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    /// `max |HV - VΛ|` of the returned pair.
    pub residual: f64,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues `<= e`.
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l <= e)
    }
}

pub fn eigendecompose(h: &HermitianOperator) -> Result<SpectralData> {
    eigendecompose_matrix(h.matrix())
}

/// Diagonalizes a Hermitian matrix. Eigenvalues ascend; each eigenvector is
/// rotated so that its first component above `1e-8` in modulus is real and
/// positive.
pub fn eigendecompose_matrix(h: &CMat) -> Result<SpectralData> {
    let n = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical { message: "eigensolver returned non-finite values".into(), residual: f64::NAN });
    }
    let mut v = CMat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().find(|z| z.norm() > 1e-8).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let rot = pivot.conj() / pivot.norm();
        for i in 0..n {
            v[(i, k)] = col[i] * rot;
        }
    }

    let scale = max_abs(h).max(f64::MIN_POSITIVE);
    let mut hv = matmul(h, &v);
    for (k, &l) in eigenvalues.iter().enumerate() {
        for i in 0..n {
            hv[(i, k)] -= v[(i, k)] * l;
        }
    }
    let residual = max_abs(&hv);
    if residual > 1e-9 * scale {
        return Err(Error::Numerical { message: "eigenpair residual above 1e-9 ‖H‖".into(), residual });
    }
    let ortho = identity_defect(&adjoint_mul(&v, &v));
    if ortho > 1e-10 {
        return Err(Error::Numerical { message: "eigenvectors not orthonormal".into(), residual: ortho });
    }
    Ok(SpectralData { eigenvalues, eigenvectors: v, residual })
}
