use super::{DisorderRealization, FluxRational, LatticeGeometry};
use crate::linalg::CMat;
use crate::{Error, Result};

/// Magnetic translation `U_a = G S_a` on the torus, where
/// `(S_a ψ)(x) = ψ(x - a)` and `G = diag(exp(-2πi α a1 x2))`.
///
/// It satisfies `U_a H(ω) U_a^* = H(τ_a ω)` with `(τ_a ω)_x = ω_{x-a}`.
/// Requires `α a1 Ly ∈ ℤ` so that `G` is consistent across the seam in
/// direction 2.
pub fn magnetic_translation(geom: &LatticeGeometry, flux: &FluxRational, a: [i64; 2]) -> Result<CMat> {
    if !geom.is_periodic() {
        return Err(Error::Geometry("magnetic translations need a magnetic-periodic sample".into()));
    }
    geom.check_flux(flux)?;
    if (flux.p() * a[0] * geom.ly() as i64).rem_euclid(flux.q()) != 0 {
        return Err(Error::Geometry(format!(
            "translation {:?} is not on the magnetic superlattice for flux {}/{} and Ly = {}",
            a,
            flux.p(),
            flux.q(),
            geom.ly()
        )));
    }
    let n = geom.n_sites();
    let mut u = CMat::zeros(n, n);
    for i in 0..n {
        let x = geom.site(i);
        let src = geom.index([x[0] - a[0], x[1] - a[1]]).expect("torus index");
        u[(i, src)] = flux.phase(-a[0] * x[1]);
    }
    Ok(u)
}

/// Shifted disorder `(τ_a ω)_x = ω_{x-a}` on the torus.
pub fn translate_disorder(geom: &LatticeGeometry, realization: &DisorderRealization, a: [i64; 2]) -> Result<DisorderRealization> {
    if !geom.is_periodic() {
        return Err(Error::Geometry("disorder translation needs a magnetic-periodic sample".into()));
    }
    if realization.len() != geom.n_sites() {
        return Err(Error::Geometry("realization does not match the sample".into()));
    }
    let omega = (0..geom.n_sites())
        .map(|i| {
            let x = geom.site(i);
            realization.omega[geom.index([x[0] - a[0], x[1] - a[1]]).expect("torus index")]
        })
        .collect();
    Ok(DisorderRealization { seed: realization.seed, omega })
}
