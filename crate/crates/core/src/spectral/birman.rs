use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{hermitian_eigenvalues, matmul, CMat};
use crate::model::{landau_levels, lll_potential_matrix, LLLBasisSpec};
use crate::{Error, Result};

const TOL: f64 = 1e-8;
const MAX_ITER: usize = 60;
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSign {
    /// Upper edge of band `n`, pushed up by `λ M2 U`.
    Plus,
    /// Lower edge of band `n`, pushed down by `λ M1 U`.
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandEdge {
    pub n: usize,
    pub lambda: f64,
    pub sign: EdgeSign,
    pub energy: f64,
    /// No crossing inside the gap: the edge has reached the next level.
    pub saturated: bool,
    /// Extremal eigenvalue in the gap from direct diagonalization.
    pub direct: Option<f64>,
    pub iterations: usize,
}

/// Birman-Schwinger kernel data for a constant-sign potential `W = amplitude · Gram(U)`.
struct Kernel {
    sqrt_w: CMat,
    levels: Vec<f64>,
    w: CMat,
}

impl Kernel {
    fn new(spec: &LLLBasisSpec, amplitude: f64) -> Result<Self> {
        let g = lll_potential_matrix(spec, &vec![1.0; spec.n_cells()])?;
        let w = g * Complex64::new(amplitude, 0.0);
        let eig = w.clone().symmetric_eigen();
        let mut d = CMat::zeros(w.nrows(), w.nrows());
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            d[(k, k)] = Complex64::new(l.max(0.0).sqrt(), 0.0);
        }
        let sqrt_w = matmul(&matmul(&eig.eigenvectors, &d), &eig.eigenvectors.adjoint());
        Ok(Self { sqrt_w, levels: spec.basis_energies(), w })
    }

    /// Largest eigenvalue of `s √W (D - E)^{-1} √W`, with `s = -1` for the
    /// upper edge and `s = +1` for the lower one.
    fn top(&self, e: f64, s: f64) -> f64 {
        let n = self.levels.len();
        let mut scaled = self.sqrt_w.clone();
        for (k, &bk) in self.levels.iter().enumerate() {
            let f = s / (bk - e);
            for i in 0..n {
                scaled[(i, k)] *= f;
            }
        }
        let k = matmul(&scaled, &self.sqrt_w);
        *hermitian_eigenvalues(&k).last().unwrap_or(&0.0)
    }

    fn direct(&self, lambda: f64, s: f64) -> Vec<f64> {
        let mut h = self.w.clone() * Complex64::new(s * lambda, 0.0);
        for (k, &bk) in self.levels.iter().enumerate() {
            h[(k, k)] += Complex64::new(bk, 0.0);
        }
        hermitian_eigenvalues(&h)
    }
}

/// Edge of the `n`-th band of `H_B + λV` for the constant-sign potential
/// (`ω ≡ amplitude` for [`EdgeSign::Plus`], `ω ≡ -amplitude` for
/// [`EdgeSign::Minus`]), located by bisection on `λ r(E) = 1` inside the
/// adjacent gap and checked against direct diagonalization.
pub fn birman_schwinger_edge(spec: &LLLBasisSpec, n: usize, lambda: f64, amplitude: f64, sign: EdgeSign) -> Result<BandEdge> {
    if n == 0 || n > spec.n_max {
        return Err(Error::Parameter(format!("band index {n} outside 1..={}", spec.n_max)));
    }
    if !(lambda > 0.0) || !(amplitude > 0.0) {
        return Err(Error::Parameter("Birman-Schwinger edges need λ > 0 and a positive amplitude".into()));
    }
    let kernel = Kernel::new(spec, amplitude)?;
    edge_with_kernel(&kernel, spec, n, lambda, sign)
}

fn edge_with_kernel(kernel: &Kernel, spec: &LLLBasisSpec, n: usize, lambda: f64, sign: EdgeSign) -> Result<BandEdge> {
    let levels = landau_levels(spec.b, spec.n_max + 1);
    let bn = levels[n - 1];
    let w_norm = hermitian_eigenvalues(&kernel.w).last().copied().unwrap_or(0.0);
    // f(E) = λ r(E) - 1 is monotone on the gap: decreasing for Plus, increasing for Minus.
    let (s, mut lo, mut hi) = match sign {
        EdgeSign::Plus => (-1.0, bn, levels[n]),
        EdgeSign::Minus => {
            let below = if n >= 2 { levels[n - 2] } else { bn - lambda * w_norm - 1.0 };
            (1.0, below, bn)
        }
    };
    let f = |e: f64| lambda * kernel.top(e, s) - 1.0;
    let pad = 1e-12 * (1.0 + bn.abs());
    let saturated = match sign {
        EdgeSign::Plus => f(hi - pad) >= 0.0,
        EdgeSign::Minus => n >= 2 && f(lo + pad) >= 0.0,
    };
    let mut iterations = 0;
    let energy = if saturated {
        match sign {
            EdgeSign::Plus => hi,
            EdgeSign::Minus => lo,
        }
    } else {
        while hi - lo > TOL && iterations < MAX_ITER {
            let mid = 0.5 * (lo + hi);
            let inside = match sign {
                EdgeSign::Plus => f(mid) >= 0.0,
                EdgeSign::Minus => f(mid) < 0.0,
            };
            if inside {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        0.5 * (lo + hi)
    };

    let spectrum = kernel.direct(lambda, -s);
    let direct = match sign {
        EdgeSign::Plus => spectrum.iter().rev().find(|&&e| e > bn && e < levels[n]).copied(),
        EdgeSign::Minus => {
            let floor = if n >= 2 { levels[n - 2] } else { f64::NEG_INFINITY };
            spectrum.iter().find(|&&e| e < bn && e > floor).copied()
        }
    };
    if !saturated {
        match direct {
            Some(d) if (d - energy).abs() <= CROSS_CHECK_TOL => {}
            other => {
                return Err(Error::Numerical {
                    message: format!("bisection edge {energy} disagrees with direct diagonalization {other:?}"),
                    residual: other.map_or(f64::INFINITY, |d| (d - energy).abs()),
                })
            }
        }
    }
    Ok(BandEdge { n, lambda, sign, energy, saturated, direct, iterations })
}

/// `E_+` and `E_-` of band `n` over an ascending λ grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandEdgeCurve {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub e_plus: Vec<f64>,
    pub e_minus: Vec<f64>,
    pub saturated_plus: Vec<bool>,
    pub saturated_minus: Vec<bool>,
}

impl BandEdgeCurve {
    /// `E_+` nondecreasing and `E_-` nonincreasing along the grid.
    pub fn is_monotone(&self) -> bool {
        self.e_plus.windows(2).all(|w| w[1] >= w[0]) && self.e_minus.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn band_edge_curve(spec: &LLLBasisSpec, n: usize, lambdas: &[f64], m1: f64, m2: f64) -> Result<BandEdgeCurve> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("λ grid must be nonempty and strictly ascending".into()));
    }
    let plus = Kernel::new(spec, m2)?;
    let minus = Kernel::new(spec, m1)?;
    let mut curve = BandEdgeCurve {
        n,
        lambdas: lambdas.to_vec(),
        e_plus: vec![],
        e_minus: vec![],
        saturated_plus: vec![],
        saturated_minus: vec![],
    };
    for &l in lambdas {
        let p = edge_with_kernel(&plus, spec, n, l, EdgeSign::Plus)?;
        let m = edge_with_kernel(&minus, spec, n, l, EdgeSign::Minus)?;
        curve.e_plus.push(p.energy);
        curve.e_minus.push(m.energy);
        curve.saturated_plus.push(p.saturated);
        curve.saturated_minus.push(m.saturated);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SiteProfile;

    fn spec() -> LLLBasisSpec {
        LLLBasisSpec::new(1.0, 3, 4).unwrap()
    }

    #[test]
    fn flat_profile_gives_scalar_shift() {
        let s = spec();
        for lambda in [0.1, 0.5, 1.0] {
            let e = birman_schwinger_edge(&s, 1, lambda, 1.0, EdgeSign::Plus).unwrap();
            assert!(!e.saturated);
            assert!((e.energy - (1.0 + lambda)).abs() < 1e-6);
            let m = birman_schwinger_edge(&s, 2, lambda, 1.0, EdgeSign::Minus).unwrap();
            assert!((m.energy - (3.0 - lambda)).abs() < 1e-6);
        }
    }

    #[test]
    fn saturates_when_the_gap_is_filled() {
        let e = birman_schwinger_edge(&spec(), 1, 2.5, 1.0, EdgeSign::Plus).unwrap();
        assert!(e.saturated);
        assert_eq!(e.energy, 3.0);
    }

    #[test]
    fn small_coupling_approaches_the_level_from_above() {
        let s = spec();
        let mut last = f64::INFINITY;
        for lambda in [0.2, 0.05, 0.01, 0.001] {
            let e = birman_schwinger_edge(&s, 1, lambda, 1.0, EdgeSign::Plus).unwrap().energy;
            assert!(e > 1.0 && e < last);
            last = e;
        }
        assert!(last - 1.0 < 2e-3);
    }

    #[test]
    fn plateau_profile_edge_between_bounds() {
        let s = LLLBasisSpec::new(1.0, 3, 6)
            .unwrap()
            .with_profile(SiteProfile::Plateau { core: 0.5, floor: 0.4 })
            .unwrap();
        let u_minus = s.profile.u_minus();
        for lambda in [0.2, 0.8, 1.5] {
            let e = birman_schwinger_edge(&s, 1, lambda, 1.0, EdgeSign::Plus).unwrap();
            assert!(e.energy >= 1.0 + lambda * u_minus - 1e-9 && e.energy <= 1.0 + lambda + 1e-9, "{e:?}");
        }
    }

    #[test]
    fn curves_are_monotone() {
        let s = LLLBasisSpec::new(1.0, 2, 4)
            .unwrap()
            .with_profile(SiteProfile::Plateau { core: 0.7, floor: 0.5 })
            .unwrap();
        let c = band_edge_curve(&s, 2, &[0.05, 0.1, 0.3, 0.6, 1.0], 1.0, 1.0).unwrap();
        assert!(c.is_monotone(), "{c:?}");
    }
}
