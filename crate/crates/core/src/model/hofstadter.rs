use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Basis, DisorderModel, DisorderRealization, FluxRational, HermitianOperator, LatticeGeometry, Provenance};
use crate::linalg::CMat;
use crate::{Error, Result};

fn check_sizes(geom: &LatticeGeometry, realization: &DisorderRealization) -> Result<()> {
    if realization.len() != geom.n_sites() {
        return Err(Error::Geometry(format!(
            "realization has {} amplitudes but the sample has {} sites",
            realization.len(),
            geom.n_sites()
        )));
    }
    Ok(())
}

/// Adds the bond `x -> x + e` with `H[x, x+e] = t`, `H[x+e, x] = conj(t)`.
fn add_bond(h: &mut CMat, geom: &LatticeGeometry, x: [i64; 2], e: [i64; 2], t: Complex64) {
    let (Some(i), Some(j)) = (geom.index(x), geom.index([x[0] + e[0], x[1] + e[1]])) else {
        return;
    };
    h[(i, j)] += t;
    h[(j, i)] += t.conj();
}

/// Hofstadter Hamiltonian in the Landau gauge plus the on-site term `λ ω_i`.
///
/// Hopping amplitude is −1; bonds along direction 2 carry `exp(2πi α x1)`.
pub fn build_hofstadter(
    geom: &LatticeGeometry,
    flux: &FluxRational,
    disorder: &DisorderModel,
    realization: &DisorderRealization,
) -> Result<HermitianOperator> {
    geom.check_flux(flux)?;
    check_sizes(geom, realization)?;
    disorder.validate()?;
    let n = geom.n_sites();
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        let x = geom.site(i);
        add_bond(&mut h, geom, x, [1, 0], Complex64::new(-1.0, 0.0));
        add_bond(&mut h, geom, x, [0, 1], -flux.phase(x[0]));
        h[(i, i)] += Complex64::new(disorder.lambda * realization.omega[i], 0.0);
    }
    let meta = Provenance {
        model: "hofstadter",
        gauge: "landau",
        geometry: Some(*geom),
        flux: Some(*flux),
        field: None,
        lambda: disorder.lambda,
        seed: Some(realization.seed),
        quadrature_spacing: None,
    };
    HermitianOperator::new(h, Basis::Lattice(*geom), meta)
}

/// Disorder-free Hofstadter Hamiltonian.
pub fn clean_hofstadter(geom: &LatticeGeometry, flux: &FluxRational) -> Result<HermitianOperator> {
    build_hofstadter(geom, flux, &DisorderModel::clean(), &DisorderRealization::zeros(geom.n_sites()))
}

/// Same Hamiltonian in the symmetric gauge, `exp(-iπα x2)` on direction-1
/// bonds and `exp(iπα x1)` on direction-2 bonds. Open samples only.
pub fn build_hofstadter_symmetric_gauge(
    geom: &LatticeGeometry,
    flux: &FluxRational,
    disorder: &DisorderModel,
    realization: &DisorderRealization,
) -> Result<HermitianOperator> {
    if geom.is_periodic() {
        return Err(Error::UnsupportedBoundary("symmetric gauge is only built on open samples".into()));
    }
    check_sizes(geom, realization)?;
    disorder.validate()?;
    let n = geom.n_sites();
    let alpha = flux.alpha();
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        let x = geom.site(i);
        let t1 = -Complex64::from_polar(1.0, -PI * alpha * x[1] as f64);
        let t2 = -Complex64::from_polar(1.0, PI * alpha * x[0] as f64);
        add_bond(&mut h, geom, x, [1, 0], t1);
        add_bond(&mut h, geom, x, [0, 1], t2);
        h[(i, i)] += Complex64::new(disorder.lambda * realization.omega[i], 0.0);
    }
    let meta = Provenance {
        model: "hofstadter",
        gauge: "symmetric",
        geometry: Some(*geom),
        flux: Some(*flux),
        field: None,
        lambda: disorder.lambda,
        seed: Some(realization.seed),
        quadrature_spacing: None,
    };
    HermitianOperator::new(h, Basis::Lattice(*geom), meta)
}
