use serde::Serialize;

use super::EnsembleStats;
use crate::localization::line_fit;
use crate::{Error, Result};

/// Empirical modulus of continuity `ω(h) = sup |f(E + h) - f(E)|` on a
/// uniform grid, with the fit `ω(h) ≈ C h^δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityRecord {
    pub observable: String,
    pub h: Vec<f64>,
    pub sup_delta: Vec<f64>,
    pub c: f64,
    pub delta: f64,
    pub r_squared: f64,
    /// Fewer than two nonzero increments: `c`, `delta` and `r_squared` are NaN.
    pub degenerate: bool,
    /// Largest increment between neighbouring grid points.
    pub max_step: f64,
}

/// Modulus of continuity of `values` sampled on a uniform `energies` grid.
///
/// Lags `k = 1..=(n-1)/2` grid steps enter the fit.
pub fn modulus_of_continuity(observable: &str, energies: &[f64], values: &[f64]) -> Result<ContinuityRecord> {
    let n = energies.len();
    if n < 8 || values.len() != n {
        return Err(Error::Argument(format!("continuity scan needs at least 8 matching points, got {n}")));
    }
    let step = (energies[n - 1] - energies[0]) / (n - 1) as f64;
    let uniform = step > 0.0
        && energies.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
    if !uniform {
        return Err(Error::Argument("continuity scan needs a uniform ascending energy grid".into()));
    }
    let mut h = vec![];
    let mut sup_delta = vec![];
    for k in 1..=(n - 1) / 2 {
        let s = (0..n - k).map(|i| (values[i + k] - values[i]).abs()).fold(0.0, f64::max);
        h.push(k as f64 * step);
        sup_delta.push(s);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        h.iter().zip(&sup_delta).filter(|(_, s)| **s > 0.0).map(|(h, s)| (h.ln(), s.ln())).unzip();
    let fit = if xs.len() >= 2 { line_fit(&xs, &ys).ok() } else { None };
    let (c, delta, r_squared, degenerate) = match fit {
        Some(f) => (f.intercept.exp(), -f.rate, f.r_squared, false),
        None => (f64::NAN, f64::NAN, f64::NAN, true),
    };
    Ok(ContinuityRecord { observable: observable.into(), max_step: sup_delta[0], h, sup_delta, c, delta, r_squared, degenerate })
}

/// Continuity records of `ids` and `hall` (whichever were measured) along
/// the energy grid. The stats must cover a single λ, flux and size.
pub fn continuity_scan(stats: &EnsembleStats) -> Result<Vec<ContinuityRecord>> {
    let first = stats.points.first().ok_or_else(|| Error::Argument("no grid points".into()))?;
    let series = stats.energy_series(&first.point);
    if series.len() != stats.points.len() {
        return Err(Error::Argument("continuity scan needs stats over an energy grid only".into()));
    }
    let energies: Vec<f64> = series.iter().map(|p| p.point.energy).collect();
    let mut out = vec![];
    for name in ["ids", "hall"] {
        let values: Option<Vec<f64>> = series.iter().map(|p| p.get(name).map(|o| o.mean)).collect();
        if let Some(v) = values {
            out.push(modulus_of_continuity(name, &energies, &v)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Argument("stats carry neither ids nor hall at every point".into()));
    }
    Ok(out)
}
