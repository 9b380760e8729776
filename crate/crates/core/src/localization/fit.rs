use serde::Serialize;

use super::KernelDecayProfile;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    /// `v ~ exp(-rate |x|)`.
    Exponential,
    /// `v ~ |x|^{-rate}`.
    Power,
}

/// Least-squares line `y = intercept - rate · x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub rate: f64,
    pub r_squared: f64,
    pub exponential: LineFit,
    pub power: LineFit,
    /// `(|x|, value)` points entering the fits.
    pub points: Vec<(f64, f64)>,
}

pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Fit("abscissae are degenerate".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LineFit { rate: -slope, intercept, r_squared })
}

/// Fits the decay of a profile as exponential and as power law and returns
/// the one with the larger R².
///
/// Displacements are grouped into shells by rounded radius `|x| >= 1`; each
/// shell contributes its largest value at that value's own radius. The
/// envelope is insensitive to the nodes of the kernel inside a shell, and an
/// exact exponential or power law is recovered exactly.
pub fn decay_rate_fit(profile: &KernelDecayProfile) -> Result<DecayFit> {
    let mut shells: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    for k in 0..profile.len() {
        let r = profile.radius(k);
        let v = profile.values[k];
        if r < 0.5 || !(v > 0.0) {
            continue;
        }
        let e = shells.entry(r.round() as i64).or_insert((r, v));
        if v > e.1 {
            *e = (r, v);
        }
    }
    if shells.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 radii with positive values, got {}", shells.len())));
    }
    let points: Vec<(f64, f64)> = shells.into_values().collect();
    let r: Vec<f64> = points.iter().map(|p| p.0).collect();
    let logr: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let logv: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let exponential = line_fit(&r, &logv)?;
    let power = line_fit(&logr, &logv)?;
    let (model, best) = if exponential.r_squared >= power.r_squared {
        (DecayModel::Exponential, exponential)
    } else {
        (DecayModel::Power, power)
    };
    Ok(DecayFit { model, rate: best.rate, r_squared: best.r_squared, exponential, power, points })
}
