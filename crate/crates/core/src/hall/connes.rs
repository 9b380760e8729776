use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::phase::{GaugeFluxCenter, Orientation};
use crate::{Error, Result};

/// Truncated Connes sum with its Richardson estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnesSum {
    pub u: [i64; 2],
    pub v: [i64; 2],
    pub radius: f64,
    /// Sum over `|a| <= R`.
    pub value: Complex64,
    /// Sum over `|a| <= R/2`.
    pub half_radius_value: Complex64,
    /// `2 S(R) - S(R/2)`, cancelling an `O(1/R)` tail.
    pub extrapolated: Complex64,
    /// `|S(R) - S(R/2)|`.
    pub tail_estimate: f64,
    /// `-2πi (u1 v2 - u2 v1)`.
    pub target: Complex64,
}

impl ConnesSum {
    pub fn abs_error(&self) -> f64 {
        (self.value - self.target).norm()
    }
}

/// Connes sum for one pair with the default (flux-insertion) orientation.
pub fn connes_sum(u: [i64; 2], v: [i64; 2], radius: f64) -> Result<ConnesSum> {
    connes_sum_oriented(u, v, radius, Orientation::Clockwise)
}

pub fn connes_sum_oriented(u: [i64; 2], v: [i64; 2], radius: f64, orientation: Orientation) -> Result<ConnesSum> {
    Ok(connes_sums(&[(u, v)], radius, orientation)?[0])
}

fn norm(w: [i64; 2]) -> f64 {
    ((w[0] * w[0] + w[1] * w[1]) as f64).sqrt()
}

/// `Σ_{a ∈ ℤ²*, |a| <= R} (1 - g_a(0) conj g_a(u)) (1 - g_a(u) conj g_a(v)) (1 - g_a(v) conj g_a(0))`
/// for every pair, in one sweep over the dual lattice. `g_a` is `γ_a` or its
/// conjugate according to `orientation`.
pub fn connes_sums(pairs: &[([i64; 2], [i64; 2])], radius: f64, orientation: Orientation) -> Result<Vec<ConnesSum>> {
    let longest = pairs.iter().map(|(u, v)| norm(*u).max(norm(*v))).fold(1.0, f64::max);
    if !(radius >= 4.0 * longest) {
        return Err(Error::Argument(format!("Connes radius {radius} must be at least 4·max(|u|,|v|,1) = {}", 4.0 * longest)));
    }
    let mut vectors: Vec<[i64; 2]> = vec![[0, 0]];
    let slot = |w: [i64; 2], vs: &mut Vec<[i64; 2]>| match vs.iter().position(|&x| x == w) {
        Some(k) => k,
        None => {
            vs.push(w);
            vs.len() - 1
        }
    };
    let ids: Vec<(usize, usize)> = pairs.iter().map(|(u, v)| (slot(*u, &mut vectors), slot(*v, &mut vectors))).collect();

    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut full = vec![zero; pairs.len()];
    let mut half = vec![zero; pairs.len()];
    let mut g = vec![zero; vectors.len()];
    let r_sq = radius * radius;
    let m = radius.ceil() as i64 + 1;
    for i in -m..=m {
        let a1 = i as f64 + 0.5;
        for j in -m..=m {
            let a2 = j as f64 + 0.5;
            let d = a1 * a1 + a2 * a2;
            if d > r_sq {
                continue;
            }
            let a = GaugeFluxCenter::new(a1, a2).expect("dual lattice point").with_orientation(orientation);
            for (k, w) in vectors.iter().enumerate() {
                g[k] = a.insertion_phase(*w);
            }
            let inner = 4.0 * d <= r_sq;
            for (p, &(iu, iv)) in ids.iter().enumerate() {
                let t = (one - g[0] * g[iu].conj()) * (one - g[iu] * g[iv].conj()) * (one - g[iv] * g[0].conj());
                full[p] += t;
                if inner {
                    half[p] += t;
                }
            }
        }
    }
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(p, (u, v))| {
            let det = (u[0] * v[1] - u[1] * v[0]) as f64;
            ConnesSum {
                u: *u,
                v: *v,
                radius,
                value: full[p],
                half_radius_value: half[p],
                extrapolated: full[p] * 2.0 - half[p],
                tail_estimate: (full[p] - half[p]).norm(),
                target: Complex64::new(0.0, -2.0 * PI * det),
            }
        })
        .collect())
}
