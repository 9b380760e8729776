use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{adjoint_mul, CMat};
use crate::model::LatticeGeometry;
use crate::spectral::SpectralData;
use crate::{Error, Result};

/// Support of the bump is the window dilated by this factor about its midpoint.
pub const SHOULDER_RATIO: f64 = 1.2;

/// Smooth cutoff: 1 on `[lo, hi]`, 0 outside the dilated window, joined by
/// the C² smoothstep `1 - (6s⁵ - 15s⁴ + 10s³)`.
pub fn bump(e: f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let outer = half * SHOULDER_RATIO;
    let d = (e - mid).abs();
    if d <= half {
        return 1.0;
    }
    if d >= outer {
        return 0.0;
    }
    let s = (d - half) / (outer - half);
    1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    /// Drop all times from the first one at which the boundary weight exceeds the threshold.
    Truncate,
    /// Keep every time and only record when the threshold was first crossed.
    Flag,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransportOptions {
    pub policy: BoundaryPolicy,
    /// Fraction of the norm allowed on the outermost ring of sites.
    pub boundary_threshold: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { policy: BoundaryPolicy::Truncate, boundary_threshold: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportMoment {
    pub p: f64,
    pub energy_window: [f64; 2],
    pub shoulder_ratio: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `‖e^{-itH} 𝒳(H) χ_0‖²`, constant in `t`.
    pub norms: Vec<f64>,
    pub boundary_weight: Vec<f64>,
    /// First sampled time with boundary weight above the threshold.
    pub boundary_time: Option<f64>,
    pub truncated: bool,
    /// No eigenvalue inside the support of the bump.
    pub empty_window: bool,
    /// `(T, 𝓜(T), quadrature error estimate)`.
    pub time_averaged: Vec<(f64, f64, f64)>,
}

/// `M(p, 𝒳, t) = Σ_x ⟨x⟩^p |(e^{-itH} 𝒳(H) χ_0)(x)|²` with
/// `⟨x⟩ = (1 + |x - c|²)^{1/2}` and `χ_0` the sample-center site.
///
/// The state is expanded on the eigenvectors inside the bump's support, so
/// each time costs `O(m²)` for `m` such eigenvectors.
pub fn transport_moment(
    s: &SpectralData,
    geom: &LatticeGeometry,
    p: f64,
    energy_window: [f64; 2],
    times: &[f64],
    options: TransportOptions,
) -> Result<TransportMoment> {
    if geom.is_periodic() {
        return Err(Error::UnsupportedBoundary("transport moments need an open sample".into()));
    }
    if s.dim() != geom.n_sites() {
        return Err(Error::Geometry("spectrum does not match the geometry".into()));
    }
    if !(p >= 0.0) || !(energy_window[1] > energy_window[0]) {
        return Err(Error::Argument("need p >= 0 and a nonempty energy window".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Argument("times must be nonnegative and strictly ascending".into()));
    }
    let [lo, hi] = energy_window;
    let support: Vec<usize> = (0..s.dim()).filter(|&k| bump(s.eigenvalues[k], lo, hi) > 0.0).collect();
    let mut out = TransportMoment {
        p,
        energy_window,
        shoulder_ratio: SHOULDER_RATIO,
        times: times.to_vec(),
        values: vec![0.0; times.len()],
        norms: vec![0.0; times.len()],
        boundary_weight: vec![0.0; times.len()],
        boundary_time: None,
        truncated: false,
        empty_window: support.is_empty(),
        time_averaged: vec![],
    };
    if support.is_empty() {
        return Ok(out);
    }

    let c0 = geom.index(geom.center()).expect("center site");
    let center = geom.center();
    let n = s.dim();
    let m = support.len();
    let vs = CMat::from_fn(n, m, |i, k| s.eigenvectors[(i, support[k])]);
    let coef: Vec<Complex64> = support
        .iter()
        .map(|&k| s.eigenvectors[(c0, k)].conj() * bump(s.eigenvalues[k], lo, hi))
        .collect();
    let lam: Vec<f64> = support.iter().map(|&k| s.eigenvalues[k]).collect();

    let weighted = |w: &dyn Fn([i64; 2]) -> f64| {
        let mut scaled = vs.clone();
        for i in 0..n {
            let f = w(geom.site(i));
            for k in 0..m {
                scaled[(i, k)] *= f;
            }
        }
        adjoint_mul(&vs, &scaled)
    };
    let a = weighted(&|x| {
        let d2 = ((x[0] - center[0]).pow(2) + (x[1] - center[1]).pow(2)) as f64;
        (1.0 + d2).powf(0.5 * p)
    });
    let b = weighted(&|x| if geom.boundary_distance(x) == 0 { 1.0 } else { 0.0 });

    // Quadratic forms Σ_jk conj(c_j) c_k e^{it(λ_j - λ_k)} X_jk.
    let form = |x: &CMat, phase: &[Complex64]| {
        let mut acc = 0.0;
        for j in 0..m {
            let cj = (coef[j] * phase[j]).conj();
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..m {
                row += x[(j, k)] * coef[k] * phase[k];
            }
            acc += (cj * row).re;
        }
        acc
    };
    let mut kept = times.len();
    for (ti, &t) in times.iter().enumerate() {
        let phase: Vec<Complex64> = lam.iter().map(|&l| Complex64::from_polar(1.0, -l * t)).collect();
        out.values[ti] = form(&a, &phase).max(0.0);
        out.norms[ti] = phase.iter().zip(&coef).map(|(p, c)| (p * c).norm_sqr()).sum();
        out.boundary_weight[ti] = form(&b, &phase).max(0.0) / out.norms[ti].max(f64::MIN_POSITIVE);
        if out.boundary_time.is_none() && out.boundary_weight[ti] > options.boundary_threshold {
            out.boundary_time = Some(t);
            if options.policy == BoundaryPolicy::Truncate {
                kept = ti;
                break;
            }
        }
    }
    if kept < times.len() {
        out.truncated = true;
        out.times.truncate(kept);
        out.values.truncate(kept);
        out.norms.truncate(kept);
        out.boundary_weight.truncate(kept);
    }
    Ok(out)
}

/// `(1/T) ∫_a^b e^{-t/T} f(t) dt` for `f` linear between `(a, fa)` and `(b, fb)`.
fn segment(a: f64, b: f64, fa: f64, fb: f64, tt: f64) -> f64 {
    let (ea, eb) = ((-a / tt).exp(), (-b / tt).exp());
    let h = b - a;
    fa * (ea - eb) + (fb - fa) / h * (tt * (ea - eb) - h * eb)
}

fn averaged(times: &[f64], values: &[f64], tt: f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += segment(times[k - 1], times[k], values[k - 1], values[k], tt);
    }
    let n = times.len() - 1;
    let slope = (values[n] - values[n - 1]) / (times[n] - times[n - 1]);
    acc + (-times[n] / tt).exp() * (values[n] + slope * tt)
}

/// Exponentially weighted time average `𝓜(T) = (1/T) ∫_0^∞ M(t) e^{-t/T} dt`.
///
/// `M` is interpolated linearly between samples and extrapolated linearly
/// past the last one. Needs samples from `t = 0`, spacing at most `T/4`, and
/// a last time with `e^{-t/T} <= 1e-3`. The error estimate compares against
/// the same rule on every other sample.
pub fn time_averaged_moment(m: &TransportMoment, t_list: &[f64]) -> Result<TransportMoment> {
    let times = &m.times;
    if times.len() < 3 || times[0] != 0.0 {
        return Err(Error::Resolution("need at least three samples starting at t = 0".into()));
    }
    let max_gap = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let last = times[times.len() - 1];
    let mut out = m.clone();
    out.time_averaged.clear();
    for &tt in t_list {
        if !(tt > 0.0) {
            return Err(Error::Argument(format!("averaging time must be positive, got {tt}")));
        }
        if max_gap > 0.25 * tt || last < tt * 1e3f64.ln() {
            return Err(Error::Resolution(format!(
                "T = {tt} needs spacing <= {} and samples up to {} (have spacing {max_gap}, last {last})",
                0.25 * tt,
                tt * 1e3f64.ln()
            )));
        }
        let fine = averaged(times, &m.values, tt);
        let coarse_idx: Vec<usize> = (0..times.len()).step_by(2).chain(std::iter::once(times.len() - 1)).collect();
        let mut idx = coarse_idx;
        idx.dedup();
        let ct: Vec<f64> = idx.iter().map(|&k| times[k]).collect();
        let cv: Vec<f64> = idx.iter().map(|&k| m.values[k]).collect();
        let coarse = if ct.len() >= 2 { averaged(&ct, &cv, tt) } else { fine };
        out.time_averaged.push((tt, fine, (fine - coarse).abs()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hofstadter, clean_hofstadter, sample_disorder, DisorderModel, FluxRational};
    use crate::spectral::eigendecompose;

    fn synthetic(f: impl Fn(f64) -> f64) -> TransportMoment {
        let times: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.5).collect();
        TransportMoment {
            p: 2.0,
            energy_window: [0.0, 1.0],
            shoulder_ratio: SHOULDER_RATIO,
            values: times.iter().map(|&t| f(t)).collect(),
            norms: vec![1.0; times.len()],
            boundary_weight: vec![0.0; times.len()],
            times,
            boundary_time: None,
            truncated: false,
            empty_window: false,
            time_averaged: vec![],
        }
    }

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.5, 0.0, 1.0), 1.0);
        assert_eq!(bump(1.0, 0.0, 1.0), 1.0);
        assert_eq!(bump(1.1, 0.0, 1.0), 0.0);
        assert_eq!(bump(-0.2, 0.0, 1.0), 0.0);
        let v = bump(1.05, 0.0, 1.0);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_and_linear_averages() {
        let c = time_averaged_moment(&synthetic(|_| 3.0), &[10.0, 100.0]).unwrap();
        for (_, v, _) in &c.time_averaged {
            assert!((v - 3.0).abs() < 1e-12);
        }
        let l = time_averaged_moment(&synthetic(|t| t), &[10.0, 100.0]).unwrap();
        for (tt, v, _) in &l.time_averaged {
            assert!((v - tt).abs() < 1e-9 * tt);
        }
    }

    #[test]
    fn rejects_sparse_sampling() {
        let m = synthetic(|_| 1.0);
        assert!(matches!(time_averaged_moment(&m, &[1.0]), Err(Error::Resolution(_))));
        assert!(matches!(time_averaged_moment(&m, &[1000.0]), Err(Error::Resolution(_))));
    }

    fn disordered(l: usize) -> (LatticeGeometry, SpectralData) {
        let g = LatticeGeometry::open(l, l).unwrap();
        let d = DisorderModel::uniform(1.0, 1.0, 0.3).unwrap();
        let r = sample_disorder(&d, g.n_sites(), 12).unwrap();
        let s = eigendecompose(&build_hofstadter(&g, &FluxRational::new(1, 3).unwrap(), &d, &r).unwrap()).unwrap();
        (g, s)
    }

    #[test]
    fn norm_is_conserved_and_moments_nonnegative() {
        let (g, s) = disordered(12);
        let times: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let opts = TransportOptions { policy: BoundaryPolicy::Flag, boundary_threshold: 0.01 };
        let m = transport_moment(&s, &g, 2.0, [-2.5, -2.2], &times, opts).unwrap();
        assert!(!m.empty_window);
        assert!(m.values.iter().all(|&v| v >= 0.0));
        assert!(m.norms.iter().all(|&x| (x - m.norms[0]).abs() <= 1e-9));
        assert!(m.values[0] > 0.0);
    }

    #[test]
    fn matches_direct_time_evolution() {
        // Oracle: evolve the full state in the eigenbasis and sum over sites.
        let (g, s) = disordered(8);
        let (lo, hi) = (-2.6, -2.0);
        let opts = TransportOptions { policy: BoundaryPolicy::Flag, boundary_threshold: 0.01 };
        let m = transport_moment(&s, &g, 2.0, [lo, hi], &[0.0, 3.0, 7.5], opts).unwrap();
        let c0 = g.index(g.center()).unwrap();
        for (ti, &t) in m.times.iter().enumerate() {
            let mut total = 0.0;
            for i in 0..g.n_sites() {
                let mut psi = Complex64::new(0.0, 0.0);
                for k in 0..s.dim() {
                    let w = bump(s.eigenvalues[k], lo, hi);
                    psi += s.eigenvectors[(i, k)] * s.eigenvectors[(c0, k)].conj() * w * Complex64::from_polar(1.0, -s.eigenvalues[k] * t);
                }
                let x = g.displacement(g.center(), g.site(i));
                total += (1.0 + (x[0] * x[0] + x[1] * x[1]) as f64) * psi.norm_sqr();
            }
            assert!((total - m.values[ti]).abs() < 1e-10 * total.max(1.0));
        }
    }

    #[test]
    fn zero_bump_and_gap_window() {
        let g = LatticeGeometry::open(12, 12).unwrap();
        let s = eigendecompose(&clean_hofstadter(&g, &FluxRational::new(1, 3).unwrap()).unwrap()).unwrap();
        let m = transport_moment(&s, &g, 2.0, [10.0, 11.0], &[0.0, 1.0], TransportOptions::default()).unwrap();
        assert!(m.empty_window && m.values.iter().all(|&v| v == 0.0));
        assert!(transport_moment(&s, &g, 2.0, [1.0, 0.0], &[0.0], TransportOptions::default()).is_err());
    }

    #[test]
    fn truncates_at_boundary() {
        let g = LatticeGeometry::open(8, 8).unwrap();
        let s = eigendecompose(&clean_hofstadter(&g, &FluxRational::zero()).unwrap()).unwrap();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.5).collect();
        let m = transport_moment(&s, &g, 2.0, [-4.0, 4.0], &times, TransportOptions::default()).unwrap();
        assert!(m.truncated);
        assert_eq!(m.times.last().copied().unwrap() + 0.5, m.boundary_time.unwrap());
    }
}
