use serde::Serialize;

use super::{FluxRational, LatticeGeometry};
use crate::linalg::{hermiticity_defect, CMat};
use crate::{Error, Result};

/// Labels of the matrix rows.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Basis {
    /// Row `x1 * Ly + x2` is the site `(x1, x2)`.
    Lattice(LatticeGeometry),
    /// Row `n * n_phi + j` is Landau level `n` (zero-based), guiding centre `j`.
    Landau { n_max: usize, n_phi: usize },
}

/// What was built, for the result manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub model: &'static str,
    pub gauge: &'static str,
    pub geometry: Option<LatticeGeometry>,
    pub flux: Option<FluxRational>,
    pub field: Option<f64>,
    pub lambda: f64,
    pub seed: Option<u64>,
    pub quadrature_spacing: Option<f64>,
}

/// Dense self-adjoint matrix of a finite-volume Hamiltonian.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMat,
    basis: Basis,
    meta: Provenance,
}

pub(crate) const HERMITICITY_TOL: f64 = 1e-12;

impl HermitianOperator {
    pub fn new(matrix: CMat, basis: Basis, meta: Provenance) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Argument(format!(
                "operator matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITICITY_TOL {
            return Err(Error::Numerical { message: "matrix is not self-adjoint".into(), residual: defect });
        }
        Ok(Self { matrix, basis, meta })
    }

    /// Wraps a bare Hermitian matrix with no lattice interpretation.
    pub fn from_matrix(matrix: CMat) -> Result<Self> {
        let meta = Provenance {
            model: "matrix",
            gauge: "none",
            geometry: None,
            flux: None,
            field: None,
            lambda: 0.0,
            seed: None,
            quadrature_spacing: None,
        };
        let n = matrix.nrows();
        Self::new(matrix, Basis::Landau { n_max: 1, n_phi: n }, meta)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn meta(&self) -> &Provenance {
        &self.meta
    }

    pub fn geometry(&self) -> Option<&LatticeGeometry> {
        match &self.basis {
            Basis::Lattice(g) => Some(g),
            Basis::Landau { .. } => None,
        }
    }
}
