use serde::Serialize;

use super::KernelDecayProfile;
use crate::{Error, Result};

/// Default exponent for [`l_beta`].
pub const DEFAULT_BETA: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalizationLengthEstimate {
    pub exponent: f64,
    pub value: f64,
    pub truncation_radius: usize,
    /// Contribution of the outermost shell `R - 1 < |x| <= R`.
    pub tail_sensitivity: f64,
    /// Computed from the mean profile instead of per-realization data.
    pub mean_only: bool,
}

fn weighted_sum(profile: &KernelDecayProfile, terms: impl Fn(usize) -> f64, exponent: f64, mean_only: bool) -> LocalizationLengthEstimate {
    let r_max = profile.max_radius();
    let radius = r_max.ceil() as usize;
    let all: Vec<f64> = (0..profile.len()).map(&terms).collect();
    let outer: Vec<f64> = (0..profile.len())
        .map(|k| if profile.radius(k) > radius as f64 - 1.0 { all[k] } else { 0.0 })
        .collect();
    LocalizationLengthEstimate {
        exponent,
        value: crate::linalg::pairwise_sum(&all),
        truncation_radius: radius,
        tail_sensitivity: crate::linalg::pairwise_sum(&outer),
        mean_only,
    }
}

/// `ℓ_q = Σ_x max(|x|, 1) (E |P_{x0}|^q)^{1/q}`.
pub fn ell_q(profile: &KernelDecayProfile, q: f64) -> Result<LocalizationLengthEstimate> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Argument(format!("ℓ_q needs q >= 1, got {q}")));
    }
    if profile.is_empty() {
        return Err(Error::Argument("empty kernel profile".into()));
    }
    let (norms, mean_only) = profile.ensemble_norms(q);
    Ok(weighted_sum(profile, |k| profile.radius(k).max(1.0) * norms[k], q, mean_only))
}

/// `L_β = Σ_x |x| (E |P_{x0}|²)^{β/2}`.
pub fn l_beta(profile: &KernelDecayProfile, beta: f64) -> Result<LocalizationLengthEstimate> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Argument(format!("β must lie in (0, 1], got {beta}")));
    }
    if profile.is_empty() {
        return Err(Error::Argument("empty kernel profile".into()));
    }
    let (norms, mean_only) = profile.ensemble_norms(2.0);
    Ok(weighted_sum(profile, |k| profile.radius(k) * norms[k].powf(beta), beta, mean_only))
}

/// `Ñ_β = N^{1-β} L_β`, nonincreasing in β whenever every kernel norm is at most `N`.
pub fn n_weighted_l_beta(profile: &KernelDecayProfile, beta: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Argument(format!("normalization N must be positive, got {n}")));
    }
    Ok(n.powf(1.0 - beta) * l_beta(profile, beta)?.value)
}
