use serde::Serialize;

use crate::model::landau_levels;

/// Deterministic support `[B_n - λM1, B_n + λM2]` of the `n`-th disordered band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandInterval {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

impl BandInterval {
    pub fn contains(&self, e: f64, tol: f64) -> bool {
        e >= self.lower - tol && e <= self.upper + tol
    }
}

pub fn band_bounds(b: f64, lambda: f64, m1: f64, m2: f64, n_max: usize) -> Vec<BandInterval> {
    landau_levels(b, n_max)
        .into_iter()
        .enumerate()
        .map(|(k, bn)| BandInterval { n: k + 1, lower: bn - lambda * m1, upper: bn + lambda * m2 })
        .collect()
}

/// Disjoint bands condition `λ(M1 + M2) < 2B`.
pub fn gap_open(b: f64, lambda: f64, m1: f64, m2: f64) -> bool {
    lambda * (m1 + m2) < 2.0 * b
}

/// All internal gaps closed: `λ(M1 + M2) U_- >= 2B`.
pub fn gap_all_closed(b: f64, lambda: f64, m1: f64, m2: f64, u_minus: f64) -> bool {
    lambda * (m1 + m2) * u_minus >= 2.0 * b
}
