use serde::Serialize;

use super::SpectralData;
use crate::linalg::{gram_outer, hermitize, CMat};
use crate::model::{LatticeGeometry, TraceWindow};
use crate::{Error, Result};

/// Eigenvalues closer than this to the Fermi energy flag the projection.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Spectral projection onto eigenvalues `<= fermi_energy`.
#[derive(Clone, Debug)]
pub struct FermiProjection {
    pub matrix: CMat,
    pub fermi_energy: f64,
    pub rank: usize,
    /// Some eigenvalue lies within [`DEGENERACY_TOL`] of the Fermi energy.
    pub ill_conditioned: bool,
}

impl FermiProjection {
    /// Wraps a projection matrix known by construction (tests, oracles).
    pub fn from_matrix(matrix: CMat, fermi_energy: f64, rank: usize) -> Self {
        Self { matrix, fermi_energy, rank, ill_conditioned: false }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(‖P² - P‖_max, ‖P - P†‖_max, |tr P - rank|)`.
    pub fn invariant_defects(&self) -> (f64, f64, f64) {
        let p = &self.matrix;
        let sq = crate::linalg::matmul(p, p);
        let idem = crate::linalg::max_abs(&(sq - p));
        let herm = crate::linalg::hermiticity_defect(p);
        let tr = p.trace().re;
        (idem, herm, (tr - self.rank as f64).abs())
    }
}

/// `P = Σ_{λ_i <= E} v_i v_i†`.
pub fn fermi_projection(s: &SpectralData, e: f64) -> FermiProjection {
    let rank = s.count_below(e);
    let ill_conditioned = s.eigenvalues.iter().any(|l| (l - e).abs() < DEGENERACY_TOL);
    let n = s.dim();
    let mut matrix = if rank == 0 {
        CMat::zeros(n, n)
    } else {
        gram_outer(&s.eigenvectors.columns(0, rank).into_owned())
    };
    hermitize(&mut matrix);
    FermiProjection { matrix, fermi_energy: e, rank, ill_conditioned }
}

/// Mean with its standard error over independent samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    /// Sample mean and `s/√n` (zero for a single sample).
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Argument("cannot average an empty ensemble".into()));
        }
        let n = xs.len();
        let mean = crate::linalg::pairwise_sum(xs) / n as f64;
        let stderr = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
            (crate::linalg::pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, stderr, count: n })
    }
}

/// Integrated density of states per site: the window average of `P_xx`,
/// averaged again over the ensemble.
pub fn ids_estimate(projections: &[FermiProjection], geom: &LatticeGeometry, window: &TraceWindow) -> Result<Estimate> {
    if projections.is_empty() {
        return Err(Error::Argument("ids_estimate needs at least one projection".into()));
    }
    window.validate(geom)?;
    let sites = window.sites(geom);
    let per: Vec<f64> = projections
        .iter()
        .map(|p| {
            if p.dim() != geom.n_sites() {
                return Err(Error::Geometry("projection does not match the geometry".into()));
            }
            let diag: Vec<f64> = sites.iter().map(|&i| p.matrix[(i, i)].re).collect();
            Ok(crate::linalg::pairwise_sum(&diag) / sites.len() as f64)
        })
        .collect::<Result<_>>()?;
    let mut est = Estimate::from_samples(&per)?;
    est.mean = est.mean.clamp(0.0, 1.0);
    Ok(est)
}

/// Window-averaged IDS of one spectrum on a list of energies.
///
/// Each `P_xx(E)` is accumulated as a running sum of `|v_k(x)|²` in
/// eigenvalue order, so the curve is nondecreasing in `E` bit for bit.
pub fn ids_curve(s: &SpectralData, geom: &LatticeGeometry, window: &TraceWindow, energies: &[f64]) -> Result<Vec<f64>> {
    window.validate(geom)?;
    if s.dim() != geom.n_sites() {
        return Err(Error::Geometry("spectrum does not match the geometry".into()));
    }
    let sites = window.sites(geom);
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    let mut diag = vec![0.0; sites.len()];
    let mut k = 0;
    let mut out = vec![0.0; energies.len()];
    for idx in order {
        let rank = s.count_below(energies[idx]);
        while k < rank {
            for (d, &i) in diag.iter_mut().zip(&sites) {
                *d += s.eigenvectors[(i, k)].norm_sqr();
            }
            k += 1;
        }
        let total: f64 = diag.iter().sum();
        out[idx] = (total / sites.len() as f64).min(1.0);
    }
    Ok(out)
}
