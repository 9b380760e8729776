use serde::Serialize;

use crate::model::{LatticeGeometry, Site};
use crate::spectral::{Estimate, FermiProjection};
use crate::{Error, Result};

/// Ensemble statistics of `|P_{x+r, r}|` against the displacement `x` from a
/// reference site `r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelDecayProfile {
    pub reference: Site,
    /// Sorted by `|x|²`, then lexicographically.
    pub displacements: Vec<[i64; 2]>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// `samples[d][k]`: realization `k` at displacement `d`, when kept.
    #[serde(skip)]
    pub samples: Option<Vec<Vec<f64>>>,
}

impl KernelDecayProfile {
    /// Mean-only profile, e.g. synthetic data.
    pub fn from_values(displacements: Vec<[i64; 2]>, values: Vec<f64>) -> Result<Self> {
        if displacements.len() != values.len() {
            return Err(Error::Argument("displacements and values differ in length".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Argument("kernel values must be nonnegative".into()));
        }
        let n = values.len();
        Ok(Self { reference: [0, 0], displacements, values, stderrs: vec![0.0; n], samples: None })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn radius(&self, k: usize) -> f64 {
        let d = self.displacements[k];
        ((d[0] * d[0] + d[1] * d[1]) as f64).sqrt()
    }

    pub fn max_radius(&self) -> f64 {
        (0..self.len()).map(|k| self.radius(k)).fold(0.0, f64::max)
    }

    /// `(E |v|^q)^{1/q}` per displacement from the per-realization data, or the
    /// mean profile when no samples are kept (second field `true`).
    pub fn ensemble_norms(&self, q: f64) -> (Vec<f64>, bool) {
        match &self.samples {
            Some(s) => (
                s.iter()
                    .map(|xs| {
                        let m: Vec<f64> = xs.iter().map(|x| x.powf(q)).collect();
                        (crate::linalg::pairwise_sum(&m) / xs.len() as f64).powf(1.0 / q)
                    })
                    .collect(),
                false,
            ),
            None => (self.values.clone(), true),
        }
    }

    /// Same profile built from a subset of realizations (jackknife support).
    pub fn subset(&self, keep: &[usize]) -> Option<Self> {
        let samples = self.samples.as_ref()?;
        let picked: Vec<Vec<f64>> = samples.iter().map(|xs| keep.iter().map(|&k| xs[k]).collect()).collect();
        let mut values = vec![];
        let mut stderrs = vec![];
        for xs in &picked {
            let e = Estimate::from_samples(xs).ok()?;
            values.push(e.mean);
            stderrs.push(e.stderr);
        }
        Some(Self {
            reference: self.reference,
            displacements: self.displacements.clone(),
            values,
            stderrs,
            samples: Some(picked),
        })
    }
}

/// Kernel decay profile over `|x| <= max_radius` around `reference`.
///
/// Open samples need `reference` at least `max_radius + margin` sites from
/// the edge. On the torus displacements are minimal images and every site
/// is counted once.
pub fn kernel_decay(
    projections: &[FermiProjection],
    geom: &LatticeGeometry,
    reference: Site,
    max_radius: usize,
    margin: usize,
) -> Result<KernelDecayProfile> {
    if projections.is_empty() {
        return Err(Error::Argument("kernel_decay needs at least one projection".into()));
    }
    if projections.iter().any(|p| p.dim() != geom.n_sites()) {
        return Err(Error::Geometry("projection does not match the geometry".into()));
    }
    let r0 = geom
        .index(reference)
        .ok_or_else(|| Error::Geometry(format!("reference {reference:?} outside the sample")))?;
    if !geom.is_periodic() && geom.boundary_distance(reference) < (max_radius + margin) as i64 {
        return Err(Error::Geometry(format!(
            "reference {:?} is {} sites from the edge, need {}",
            reference,
            geom.boundary_distance(reference),
            max_radius + margin
        )));
    }
    let columns: Vec<Vec<f64>> = projections
        .iter()
        .map(|p| (0..geom.n_sites()).map(|i| p.matrix[(i, r0)].norm()).collect())
        .collect();
    kernel_decay_columns(&columns, geom, reference, max_radius)
}

/// Kernel profile from per-realization columns `|P_{x, r}|` indexed by site.
pub(crate) fn kernel_decay_columns(
    columns: &[Vec<f64>],
    geom: &LatticeGeometry,
    reference: Site,
    max_radius: usize,
) -> Result<KernelDecayProfile> {
    if columns.is_empty() {
        return Err(Error::Argument("kernel profile needs at least one realization".into()));
    }
    let r2 = (max_radius * max_radius) as i64;
    let mut entries: Vec<([i64; 2], usize)> = (0..geom.n_sites())
        .filter_map(|i| {
            let d = geom.displacement(reference, geom.site(i));
            (d[0] * d[0] + d[1] * d[1] <= r2).then_some((d, i))
        })
        .collect();
    entries.sort_by_key(|(d, _)| (d[0] * d[0] + d[1] * d[1], d[0], d[1]));
    profile_from_columns(columns, reference, entries)
}

fn profile_from_columns(
    columns: &[Vec<f64>],
    reference: Site,
    entries: Vec<([i64; 2], usize)>,
) -> Result<KernelDecayProfile> {
    let mut values = Vec::with_capacity(entries.len());
    let mut stderrs = Vec::with_capacity(entries.len());
    let mut samples = Vec::with_capacity(entries.len());
    for (_, i) in &entries {
        let xs: Vec<f64> = columns.iter().map(|c| c[*i]).collect();
        let e = Estimate::from_samples(&xs)?;
        values.push(e.mean);
        stderrs.push(e.stderr);
        samples.push(xs);
    }
    Ok(KernelDecayProfile {
        reference,
        displacements: entries.into_iter().map(|(d, _)| d).collect(),
        values,
        stderrs,
        samples: Some(samples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use crate::model::{build_hofstadter, magnetic_translation, sample_disorder, translate_disorder, DisorderModel, FluxRational};
    use crate::spectral::{eigendecompose, fermi_projection};

    #[test]
    fn zero_and_identity_projections() {
        let g = LatticeGeometry::open(10, 10).unwrap();
        let zero = FermiProjection::from_matrix(CMat::zeros(100, 100), 0.0, 0);
        let prof = kernel_decay(&[zero], &g, [5, 5], 3, 1).unwrap();
        assert!(prof.values.iter().all(|&v| v == 0.0));
        let id = FermiProjection::from_matrix(CMat::identity(100, 100), 0.0, 100);
        let prof = kernel_decay(&[id.clone(), id], &g, [5, 5], 3, 1).unwrap();
        assert_eq!(prof.displacements[0], [0, 0]);
        assert_eq!(prof.values[0], 1.0);
        assert!(prof.values[1..].iter().all(|&v| v == 0.0));
        assert!(prof.stderrs.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn reference_too_close_to_edge() {
        let g = LatticeGeometry::open(10, 10).unwrap();
        let zero = FermiProjection::from_matrix(CMat::zeros(100, 100), 0.0, 0);
        assert!(kernel_decay(&[zero.clone()], &g, [5, 5], 4, 2).is_err());
        assert!(kernel_decay(&[], &g, [5, 5], 2, 1).is_err());
    }

    #[test]
    fn covariant_under_magnetic_translation() {
        let g = LatticeGeometry::torus(6, 6).unwrap();
        let f = FluxRational::new(1, 3).unwrap();
        let d = DisorderModel::uniform(1.0, 1.0, 0.5).unwrap();
        let r = sample_disorder(&d, 36, 4).unwrap();
        let a = [3, 2];
        assert!(magnetic_translation(&g, &f, a).is_ok());
        let shifted = translate_disorder(&g, &r, a).unwrap();
        let p = |real| {
            let s = eigendecompose(&build_hofstadter(&g, &f, &d, real).unwrap()).unwrap();
            fermi_projection(&s, -1.2)
        };
        let base = kernel_decay(&[p(&r)], &g, [1, 1], 3, 0).unwrap();
        let moved = kernel_decay(&[p(&shifted)], &g, [4, 3], 3, 0).unwrap();
        assert_eq!(base.displacements, moved.displacements);
        for (x, y) in base.values.iter().zip(&moved.values) {
            assert!((x - y).abs() <= 1e-10);
        }
    }
}
