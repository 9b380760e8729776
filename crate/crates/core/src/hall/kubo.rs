use num_complex::Complex64;

use super::result::{HallMethod, HallResult};
use crate::linalg::{matmul, CMat};
use crate::model::{LatticeGeometry, TraceWindow};
use crate::spectral::FermiProjection;
use crate::{Error, Result};

const MINUS_TWO_PI_I: Complex64 = Complex64::new(0.0, -2.0 * std::f64::consts::PI);

fn require_open(geom: &LatticeGeometry, p: &FermiProjection) -> Result<()> {
    if geom.is_periodic() {
        return Err(Error::UnsupportedBoundary(
            "position operators are only defined on open samples".into(),
        ));
    }
    if p.dim() != geom.n_sites() {
        return Err(Error::Geometry("projection does not match the geometry".into()));
    }
    Ok(())
}

fn mean(xs: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = xs.iter().map(|z| z.re).collect();
    let im: Vec<f64> = xs.iter().map(|z| z.im).collect();
    let n = xs.len().max(1) as f64;
    Complex64::new(crate::linalg::pairwise_sum(&re) / n, crate::linalg::pairwise_sum(&im) / n)
}

/// Window average of `-2πi ⟨x| P [[P, X1], [P, X2]] |x⟩`.
pub fn hall_kubo_streda(p: &FermiProjection, geom: &LatticeGeometry, window: &TraceWindow) -> Result<HallResult> {
    require_open(geom, p)?;
    window.validate(geom)?;
    let sites = window.sites(geom);
    let n = geom.n_sites();
    let pm = &p.matrix;
    let coord: Vec<[f64; 2]> = (0..n).map(|i| geom.site(i).map(|c| c as f64)).collect();

    // Rows r = P[x, :] and their coordinate-weighted copies.
    let k = sites.len();
    let rows = CMat::from_fn(k, n, |a, y| pm[(sites[a], y)]);
    let rows1 = CMat::from_fn(k, n, |a, y| pm[(sites[a], y)] * coord[y][0]);
    let rows2 = CMat::from_fn(k, n, |a, y| pm[(sites[a], y)] * coord[y][1]);
    let rp = matmul(&rows, pm);
    let r1p = matmul(&rows1, pm);
    let r2p = matmul(&rows2, pm);

    let mut per_site = Vec::with_capacity(k);
    for (a, &x) in sites.iter().enumerate() {
        // (P [P, X_j])_{x z} = z_j (P P)_{x z} - (P X_j P)_{x z}.
        let mut pab = Complex64::new(0.0, 0.0);
        let mut pba = Complex64::new(0.0, 0.0);
        for z in 0..n {
            let pa = rp[(a, z)] * coord[z][0] - r1p[(a, z)];
            let pb = rp[(a, z)] * coord[z][1] - r2p[(a, z)];
            let pzx = pm[(z, x)];
            pab += pa * pzx * (coord[x][1] - coord[z][1]);
            pba += pb * pzx * (coord[x][0] - coord[z][0]);
        }
        per_site.push(MINUS_TWO_PI_I * (pab - pba));
    }
    let mut out = HallResult::new(mean(&per_site), HallMethod::KuboStreda);
    out.window = Some(*window);
    Ok(out)
}

/// Lattice vectors with `|u| <= radius`.
fn disc(radius: usize) -> Vec<[i64; 2]> {
    let r = radius as i64;
    let mut out = vec![];
    for u1 in -r..=r {
        for u2 in -r..=r {
            if u1 * u1 + u2 * u2 <= r * r {
                out.push([u1, u2]);
            }
        }
    }
    out
}

/// Sum of `w(u, v) P_{x,x+u} P_{x+u,x+v} P_{x+v,x}` over kept pairs, split
/// into the full sum and the part with both `|u|, |v| <= inner`.
pub(crate) fn lattice_sum_at(
    pm: &CMat,
    geom: &LatticeGeometry,
    x: [i64; 2],
    vectors: &[[i64; 2]],
    inner: i64,
    keep: impl Fn([i64; 2], [i64; 2]) -> bool,
) -> (Complex64, Complex64) {
    let xi = geom.index(x).expect("window site inside the sample");
    let idx: Vec<Option<usize>> = vectors.iter().map(|u| geom.index([x[0] + u[0], x[1] + u[1]])).collect();
    let mut full = Complex64::new(0.0, 0.0);
    let mut core = Complex64::new(0.0, 0.0);
    for (a, u) in vectors.iter().enumerate() {
        let Some(yu) = idx[a] else { continue };
        let pxu = pm[(xi, yu)];
        let u_in = u[0] * u[0] + u[1] * u[1] <= inner * inner;
        for (b, v) in vectors.iter().enumerate() {
            let Some(yv) = idx[b] else { continue };
            let w = u[0] * v[1] - u[1] * v[0];
            if w == 0 || !keep(*u, *v) {
                continue;
            }
            let t = pxu * pm[(yu, yv)] * pm[(yv, xi)] * w as f64;
            full += t;
            if u_in && v[0] * v[0] + v[1] * v[1] <= inner * inner {
                core += t;
            }
        }
    }
    (full, core)
}

/// Real-space sum `-2πi Σ_{u,v} (u1 v2 - u2 v1) P_{x,x+u} P_{x+u,x+v} P_{x+v,x}`
/// over `|u|, |v| <= radius`, averaged over the window. Terms leaving the
/// sample are absent; the radius only has to fit inside the sample.
pub fn hall_lattice_sum(p: &FermiProjection, geom: &LatticeGeometry, window: &TraceWindow, radius: usize) -> Result<HallResult> {
    require_open(geom, p)?;
    window.validate(geom)?;
    if radius == 0 || radius >= geom.lx().min(geom.ly()) {
        return Err(Error::Geometry(format!(
            "lattice-sum radius {radius} does not fit in a {}x{} sample",
            geom.lx(),
            geom.ly()
        )));
    }
    let vectors = disc(radius);
    let inner = radius as i64 - 2;
    let mut full = vec![];
    let mut core = vec![];
    for i in window.sites(geom) {
        let (f, c) = lattice_sum_at(&p.matrix, geom, geom.site(i), &vectors, inner, |_, _| true);
        full.push(MINUS_TWO_PI_I * f);
        core.push(MINUS_TWO_PI_I * c);
    }
    let raw = mean(&full);
    let mut out = HallResult::new(raw, HallMethod::LatticeSum);
    out.window = Some(*window);
    out.truncation_radius = Some(radius);
    out.tail_sensitivity = Some((raw.re - mean(&core).re).abs());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{clean_hofstadter, FluxRational};
    use crate::spectral::{eigendecompose, fermi_projection};

    fn gapped(l: usize) -> (LatticeGeometry, FermiProjection) {
        let g = LatticeGeometry::open(l, l).unwrap();
        let s = eigendecompose(&clean_hofstadter(&g, &FluxRational::new(1, 3).unwrap()).unwrap()).unwrap();
        (g, fermi_projection(&s, -1.366))
    }

    #[test]
    fn trivial_projections_give_zero() {
        let g = LatticeGeometry::open(12, 12).unwrap();
        let w = TraceWindow::centered(&g, 2).unwrap();
        let n = g.n_sites();
        for p in [FermiProjection::from_matrix(CMat::zeros(n, n), 0.0, 0), FermiProjection::from_matrix(CMat::identity(n, n), 0.0, n)] {
            let k = hall_kubo_streda(&p, &g, &w).unwrap();
            assert_eq!((k.value, k.imag_residual), (0.0, 0.0));
            assert_eq!(hall_lattice_sum(&p, &g, &w, 3).unwrap().value, 0.0);
        }
    }

    #[test]
    fn torus_is_rejected() {
        let g = LatticeGeometry::torus(6, 6).unwrap();
        let p = FermiProjection::from_matrix(CMat::zeros(36, 36), 0.0, 0);
        let w = TraceWindow::new([3, 3], 1, 1).unwrap();
        assert!(matches!(hall_kubo_streda(&p, &g, &w), Err(Error::UnsupportedBoundary(_))));
        assert!(matches!(hall_lattice_sum(&p, &g, &w, 2), Err(Error::UnsupportedBoundary(_))));
    }

    #[test]
    fn diagonal_pairs_contribute_nothing() {
        let (g, p) = gapped(12);
        let vs = disc(4);
        let (only_diag, _) = lattice_sum_at(&p.matrix, &g, g.center(), &vs, 2, |u, v| u == v);
        assert_eq!(only_diag, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lowest_band_has_unit_conductance() {
        let (g, p) = gapped(18);
        let w = TraceWindow::centered(&g, 3).unwrap();
        let k = hall_kubo_streda(&p, &g, &w).unwrap();
        assert!((k.value - 1.0).abs() < 0.05, "kubo {}", k.value);
        assert!(k.imag_residual < 1e-8);
        let s = hall_lattice_sum(&p, &g, &w, 6).unwrap();
        assert!((s.value - k.value).abs() < 0.05, "lattice sum {} kubo {}", s.value, k.value);
        assert!(s.tail_sensitivity.unwrap() >= 0.0);
        assert!(hall_lattice_sum(&p, &g, &w, 18).is_err());
    }
}
