use num_complex::Complex64;

use super::phase::GaugeFluxCenter;
use super::result::{HallMethod, HallResult};
use crate::linalg::{hermitian_eigenvalues, matmul, CMat};
use crate::model::LatticeGeometry;
use crate::spectral::FermiProjection;
use crate::{Error, Result};

/// Default trace radius for [`index_pair`]: a third of the shorter side.
pub fn default_index_radius(geom: &LatticeGeometry) -> usize {
    (geom.lx().min(geom.ly()) / 3).max(1)
}

fn phases(geom: &LatticeGeometry, a: &GaugeFluxCenter) -> Vec<Complex64> {
    (0..geom.n_sites()).map(|i| a.insertion_phase(geom.site(i))).collect()
}

/// `Γ_a P Γ_a^*`, entrywise `g(x) P_{xy} conj(g(y))` with `g` the insertion phase.
pub fn conjugated_projection(p: &FermiProjection, geom: &LatticeGeometry, a: &GaugeFluxCenter) -> Result<CMat> {
    if p.dim() != geom.n_sites() {
        return Err(Error::Geometry("projection does not match the geometry".into()));
    }
    let g = phases(geom, a);
    Ok(CMat::from_fn(p.dim(), p.dim(), |x, y| g[x] * p.matrix[(x, y)] * g[y].conj()))
}

/// Index of the pair `(P, Γ_a P Γ_a^*)` as `tr (P - Γ_a P Γ_a^*)^3`.
///
/// On a finite sample both projections have finite rank and the full trace
/// vanishes identically, so the trace is restricted to the sites within
/// `radius` of `a`, which must lie inside the sample. The full-sample
/// `‖P - Γ_a P Γ_a^*‖_3` is reported alongside.
pub fn index_pair(p: &FermiProjection, geom: &LatticeGeometry, a: &GaugeFluxCenter, radius: usize) -> Result<HallResult> {
    if p.dim() != geom.n_sites() {
        return Err(Error::Geometry("projection does not match the geometry".into()));
    }
    let n = p.dim();
    let pos = a.position();
    let r2 = (radius * radius) as f64;
    let disc: Vec<usize> = (0..n)
        .filter(|&i| {
            let s = geom.site(i);
            (s[0] as f64 - pos[0]).powi(2) + (s[1] as f64 - pos[1]).powi(2) <= r2
        })
        .collect();
    let ext = radius as f64;
    let inside = pos[0] - ext >= 0.0
        && pos[1] - ext >= 0.0
        && pos[0] + ext <= (geom.lx() - 1) as f64
        && pos[1] + ext <= (geom.ly() - 1) as f64;
    if radius == 0 || (!geom.is_periodic() && !inside) || disc.is_empty() {
        return Err(Error::Geometry(format!(
            "index trace disc of radius {radius} around {:?} leaves the {}x{} sample",
            pos,
            geom.lx(),
            geom.ly()
        )));
    }
    let g = phases(geom, a);
    let t = CMat::from_fn(n, n, |x, y| p.matrix[(x, y)] * (Complex64::new(1.0, 0.0) - g[x] * g[y].conj()));
    let rows = CMat::from_fn(disc.len(), n, |k, y| t[(disc[k], y)]);
    let rt = matmul(&rows, &t);
    let mut trace = Complex64::new(0.0, 0.0);
    for (k, &x) in disc.iter().enumerate() {
        for z in 0..n {
            trace += rt[(k, z)] * t[(z, x)];
        }
    }
    let s3 = hermitian_eigenvalues(&t).iter().map(|l| l.abs().powi(3)).sum::<f64>().cbrt();
    let mut out = HallResult::new(trace, HallMethod::Index);
    out.truncation_radius = Some(radius);
    out.schatten3 = Some(s3);
    Ok(out)
}
