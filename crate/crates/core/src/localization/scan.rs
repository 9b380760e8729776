use serde::Serialize;

use crate::ensemble::{run_ensemble, EnsembleSpec, ModelConfig, Observable};
use crate::{Error, Result};

/// `ℓ₂` over an energy grid at several sample sizes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceScan {
    pub energies: Vec<f64>,
    pub sizes: Vec<[usize; 2]>,
    /// `ell[s][k]`: ℓ₂ at size `s` and energy `k`; NaN where every realization failed.
    pub ell: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    /// Energy index of the maximum at each size.
    pub argmax: Vec<usize>,
    /// Maximizing energy at the largest size.
    pub e_star: f64,
    /// `ℓ₂(E*, L_max) / ℓ₂(E*, L_min)`; `None` with a single size.
    pub growth: Option<f64>,
    /// `E*` is neither the first nor the last grid energy.
    pub interior: bool,
    pub failures: usize,
}

/// Finite-size scan of `ℓ₂` over the ensemble's energy and size grids, at its
/// first λ and flux. Sizes are ordered by site count.
pub fn divergence_scan(spec: &EnsembleSpec) -> Result<DivergenceScan> {
    if !matches!(spec.model, ModelConfig::Lattice { .. }) {
        return Err(Error::Parameter("divergence scans need the lattice model".into()));
    }
    let mut run = spec.clone();
    run.observables = vec![Observable::EllQ];
    run.settings.q = 2.0;
    run.grids.lambdas.truncate(1);
    run.grids.fluxes.truncate(1);
    run.grids.sizes.sort_by_key(|s| s[0] * s[1]);
    run.grids.sizes.dedup();
    let stats = run_ensemble(&run)?;

    let energies = run.grids.energies.clone();
    let mut ell = vec![];
    let mut stderr = vec![];
    for size in &run.grids.sizes {
        let row: Vec<_> = stats.points.iter().filter(|p| p.point.size == Some(*size)).collect();
        ell.push(row.iter().map(|p| p.get("ell_q").map_or(f64::NAN, |o| o.mean)).collect::<Vec<_>>());
        stderr.push(row.iter().map(|p| p.get("ell_q").map_or(f64::NAN, |o| o.stderr)).collect::<Vec<_>>());
    }
    let argmax: Vec<usize> = ell
        .iter()
        .map(|row| (0..row.len()).fold(0, |best, k| if row[k] > row[best] || row[best].is_nan() { k } else { best }))
        .collect();
    let top = *argmax.last().expect("at least one size");
    let growth = (ell.len() > 1).then(|| ell[ell.len() - 1][top] / ell[0][top]);
    Ok(DivergenceScan {
        e_star: energies[top],
        interior: top > 0 && top + 1 < energies.len(),
        energies,
        sizes: run.grids.sizes,
        ell,
        stderr,
        argmax,
        growth,
        failures: stats.failure_count(),
    })
}
