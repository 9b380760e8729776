use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{Basis, DisorderModel, DisorderRealization, HermitianOperator, Provenance};
use crate::linalg::{hermitize, join, CMat};
use crate::{Error, Result};

/// Landau levels `B_n = (2n - 1) B` for `n = 1..=n_max`.
pub fn landau_levels(b: f64, n_max: usize) -> Vec<f64> {
    (1..=n_max).map(|n| (2 * n - 1) as f64 * b).collect()
}

/// Single-site bump `u`, supported in its own cell of the disorder grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SiteProfile {
    /// Indicator of the cell, so `U = Σ_i u(· - i) ≡ 1`.
    Flat,
    /// 1 on a centred square covering `core` of the cell side, `floor`
    /// elsewhere in the cell. Then `U_- = floor`.
    Plateau { core: f64, floor: f64 },
}

impl SiteProfile {
    /// `u` at cell-relative coordinates `(s, t) ∈ [0, 1)²`.
    fn value(&self, s: f64, t: f64) -> f64 {
        match *self {
            SiteProfile::Flat => 1.0,
            SiteProfile::Plateau { core, floor } => {
                let inside = (s - 0.5).abs() <= 0.5 * core && (t - 0.5).abs() <= 0.5 * core;
                if inside {
                    1.0
                } else {
                    floor
                }
            }
        }
    }

    /// Infimum of `U = Σ_i u(· - i)`.
    pub fn u_minus(&self) -> f64 {
        match *self {
            SiteProfile::Flat => 1.0,
            SiteProfile::Plateau { core, floor } => {
                if core >= 1.0 {
                    1.0
                } else {
                    floor
                }
            }
        }
    }
}

/// Truncated Landau basis on a square torus of area `2π N_phi / B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LLLBasisSpec {
    pub b: f64,
    pub n_max: usize,
    pub n_phi: usize,
    /// Disorder cells per side; the realization has `cells[0] * cells[1]` entries.
    pub cells: [usize; 2],
    pub profile: SiteProfile,
    /// Quadrature spacing in magnetic lengths.
    pub quadrature_spacing: f64,
    pub dim_cap: usize,
}

impl LLLBasisSpec {
    /// Defaults: flat profile, cells of area close to 1, spacing 0.05, cap 4096.
    pub fn new(b: f64, n_max: usize, n_phi: usize) -> Result<Self> {
        let side = (2.0 * PI * n_phi as f64 / b).sqrt();
        let per_side = (side.round() as usize).max(1);
        let spec = Self {
            b,
            n_max,
            n_phi,
            cells: [per_side, per_side],
            profile: SiteProfile::Flat,
            quadrature_spacing: 0.05,
            dim_cap: 4096,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_profile(mut self, profile: SiteProfile) -> Result<Self> {
        self.profile = profile;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Parameter(format!("field strength must be positive, got {}", self.b)));
        }
        if self.n_max == 0 || self.n_phi == 0 {
            return Err(Error::Parameter("n_max and N_phi must be positive".into()));
        }
        if self.cells[0] == 0 || self.cells[1] == 0 {
            return Err(Error::Parameter("disorder cell grid must be nonempty".into()));
        }
        if !(self.quadrature_spacing > 0.0 && self.quadrature_spacing <= 0.05) {
            return Err(Error::Parameter(format!(
                "quadrature spacing must lie in (0, 0.05] magnetic lengths, got {}",
                self.quadrature_spacing
            )));
        }
        if let SiteProfile::Plateau { core, floor } = self.profile {
            if !(core > 0.0 && core <= 1.0 && floor > 0.0 && floor <= 1.0) {
                return Err(Error::Parameter(format!(
                    "plateau profile needs core in (0, 1] and floor in (0, 1], got core={core}, floor={floor}"
                )));
            }
        }
        if self.dim() > self.dim_cap {
            return Err(Error::Resource(format!(
                "basis dimension {} exceeds the cap {}",
                self.dim(),
                self.dim_cap
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_max * self.n_phi
    }

    pub fn n_cells(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Side length of the square torus.
    pub fn side(&self) -> f64 {
        (2.0 * PI * self.n_phi as f64 / self.b).sqrt()
    }

    pub fn magnetic_length(&self) -> f64 {
        1.0 / self.b.sqrt()
    }

    /// Energies of the basis states, level-major.
    pub fn basis_energies(&self) -> Vec<f64> {
        landau_levels(self.b, self.n_max)
            .into_iter()
            .flat_map(|e| std::iter::repeat(e).take(self.n_phi))
            .collect()
    }
}

/// Normalized Hermite functions `h_0..h_{n-1}` at `xi`.
fn hermite_functions(n: usize, xi: f64, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    for k in 0..n {
        out[k] = cur;
        let next = (2.0 / (k + 1) as f64).sqrt() * xi * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
}

/// Matrix elements of `Σ_i w_i u(· - i)` between the truncated Landau states,
/// by midpoint quadrature on a periodic grid.
///
/// States are `ψ_{n,j}(x, y) = L^{-1/2} Σ_m φ_n(x + (j/N_phi + m) L) e^{2πi (j + m N_phi) y / L}`
/// with `φ_n` the oscillator functions of magnetic length `B^{-1/2}`.
pub fn lll_potential_matrix(spec: &LLLBasisSpec, weights: &[f64]) -> Result<CMat> {
    spec.validate()?;
    if weights.len() != spec.n_cells() {
        return Err(Error::Geometry(format!(
            "realization has {} amplitudes but the cell grid has {}",
            weights.len(),
            spec.n_cells()
        )));
    }
    let side = spec.side();
    let ell = spec.magnetic_length();
    let n_grid = (side / (spec.quadrature_spacing * ell)).ceil() as usize;
    let h = side / n_grid as f64;
    let n_phi = spec.n_phi;
    let dim = spec.dim();
    let cutoff = 12.0 * ell;
    let m_range = (cutoff / side).ceil() as i64 + 2;
    let sqrt_b = spec.b.sqrt();
    let amp = spec.b.powf(0.25) / side.sqrt();

    // Real-space factors: fx[(a, m, j, n)] = φ_n(x_a + (j/N_phi + m) L).
    let n_m = (2 * m_range + 1) as usize;
    let mut fx = vec![0.0; n_grid * n_m * n_phi * spec.n_max];
    let mut herm = vec![0.0; spec.n_max];
    for a in 0..n_grid {
        let x = (a as f64 + 0.5) * h;
        for (mi, m) in (-m_range..=m_range).enumerate() {
            for j in 0..n_phi {
                let arg = x + (j as f64 / n_phi as f64 + m as f64) * side;
                if arg.abs() > cutoff {
                    continue;
                }
                hermite_functions(spec.n_max, sqrt_b * arg, &mut herm);
                let base = ((a * n_m + mi) * n_phi + j) * spec.n_max;
                fx[base..base + spec.n_max].copy_from_slice(&herm);
            }
        }
    }

    let n_points = n_grid * n_grid;
    let mut psi_re = DMatrix::<f64>::zeros(n_points, dim);
    let mut psi_im = DMatrix::<f64>::zeros(n_points, dim);
    let mut pot = vec![0.0; n_points];
    let cell_w = side / spec.cells[0] as f64;
    let cell_h = side / spec.cells[1] as f64;
    for a in 0..n_grid {
        let x = (a as f64 + 0.5) * h;
        let cx = ((x / cell_w) as usize).min(spec.cells[0] - 1);
        for b in 0..n_grid {
            let y = (b as f64 + 0.5) * h;
            let cy = ((y / cell_h) as usize).min(spec.cells[1] - 1);
            let g = a * n_grid + b;
            let s = x / cell_w - cx as f64;
            let t = y / cell_h - cy as f64;
            pot[g] = weights[cx * spec.cells[1] + cy] * spec.profile.value(s, t);
            for (mi, m) in (-m_range..=m_range).enumerate() {
                for j in 0..n_phi {
                    let k = j as i64 + m * n_phi as i64;
                    let phase = Complex64::from_polar(amp, 2.0 * PI * k as f64 * y / side);
                    let base = ((a * n_m + mi) * n_phi + j) * spec.n_max;
                    for n in 0..spec.n_max {
                        let f = fx[base + n];
                        if f != 0.0 {
                            let col = n * n_phi + j;
                            psi_re[(g, col)] += f * phase.re;
                            psi_im[(g, col)] += f * phase.im;
                        }
                    }
                }
            }
        }
    }

    let w = h * h;
    let mut wre = psi_re.clone();
    let mut wim = psi_im.clone();
    for g in 0..n_points {
        let f = w * pot[g];
        wre.row_mut(g).scale_mut(f);
        wim.row_mut(g).scale_mut(f);
    }
    let re = psi_re.tr_mul(&wre) + psi_im.tr_mul(&wim);
    let im = psi_re.tr_mul(&wim) - psi_im.tr_mul(&wre);
    let mut v = join(&re, &im);
    hermitize(&mut v);
    Ok(v)
}

/// Truncated Landau Hamiltonian `diag(B_n) + λ V_ω`.
pub fn build_lll(
    spec: &LLLBasisSpec,
    disorder: &DisorderModel,
    realization: &DisorderRealization,
) -> Result<HermitianOperator> {
    disorder.validate()?;
    let mut h = if disorder.lambda == 0.0 {
        spec.validate()?;
        if realization.len() != spec.n_cells() {
            return Err(Error::Geometry(format!(
                "realization has {} amplitudes but the cell grid has {}",
                realization.len(),
                spec.n_cells()
            )));
        }
        CMat::zeros(spec.dim(), spec.dim())
    } else {
        lll_potential_matrix(spec, &realization.omega)? * Complex64::new(disorder.lambda, 0.0)
    };
    for (i, e) in spec.basis_energies().into_iter().enumerate() {
        h[(i, i)] += Complex64::new(e, 0.0);
    }
    let meta = Provenance {
        model: "landau-truncated",
        gauge: "landau",
        geometry: None,
        flux: None,
        field: Some(spec.b),
        lambda: disorder.lambda,
        seed: Some(realization.seed),
        quadrature_spacing: Some(spec.quadrature_spacing),
    };
    HermitianOperator::new(h, Basis::Landau { n_max: spec.n_max, n_phi: spec.n_phi }, meta)
}
