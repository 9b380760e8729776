use num_complex::Complex64;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::spec::{EnsembleSpec, HallMethodChoice, ModelConfig, Observable};
use crate::hall::{default_index_radius, hall_kubo_streda, hall_lattice_sum, index_pair, GaugeFluxCenter, TraceWindow};
use crate::localization::{
    decay_rate_fit, ell_q, l_beta, time_averaged_moment, transport_moment, KernelDecayProfile, TransportOptions,
};
use crate::model::{
    build_hofstadter, build_lll, sample_disorder, DisorderModel, FluxRational, LLLBasisSpec, LatticeGeometry,
};
use crate::spectral::{
    birman_schwinger_edge, eigendecompose, fermi_projection, ids_curve, EdgeSign, Estimate, SpectralData,
};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub energy: f64,
    pub lambda: f64,
    pub flux: Option<FluxRational>,
    pub size: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableStats {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl ObservableStats {
    fn from_samples(name: &str, xs: &[f64]) -> Option<Self> {
        let e = Estimate::from_samples(xs).ok()?;
        Some(Self {
            name: name.to_string(),
            mean: e.mean,
            stderr: e.stderr,
            count: e.count,
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Full-sample value with the jackknife standard error; `min`/`max` span
    /// the leave-one-out replicates.
    fn jackknife(name: &str, full: f64, replicates: &[f64], count: usize) -> Self {
        let n = replicates.len();
        let stderr = if n > 1 {
            let m = crate::linalg::pairwise_sum(replicates) / n as f64;
            let dev: Vec<f64> = replicates.iter().map(|r| (r - m).powi(2)).collect();
            ((n - 1) as f64 / n as f64 * crate::linalg::pairwise_sum(&dev)).sqrt()
        } else {
            0.0
        };
        let (min, max) = if n > 1 {
            (
                replicates.iter().copied().fold(f64::INFINITY, f64::min),
                replicates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        } else {
            (full, full)
        };
        Self { name: name.to_string(), mean: full, stderr, count, min, max }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub realization: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointStats {
    pub point: GridPoint,
    pub observables: Vec<ObservableStats>,
    pub failures: Vec<Failure>,
    /// Ensemble kernel profile around the sample center, when requested.
    #[serde(skip)]
    pub profile: Option<KernelDecayProfile>,
}

impl PointStats {
    pub fn get(&self, name: &str) -> Option<&ObservableStats> {
        self.observables.iter().find(|o| o.name == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleStats {
    pub points: Vec<PointStats>,
    pub seeds: Vec<u64>,
    pub n_realizations: usize,
    pub code_version: &'static str,
}

impl EnsembleStats {
    pub fn failure_count(&self) -> usize {
        self.points.iter().map(|p| p.failures.len()).sum()
    }

    /// Points whose grid coordinates other than the energy match `like`,
    /// in energy order.
    pub fn energy_series(&self, like: &GridPoint) -> Vec<&PointStats> {
        self.points
            .iter()
            .filter(|p| p.point.lambda == like.lambda && p.point.flux == like.flux && p.point.size == like.size)
            .collect()
    }
}

/// Runs `f(0..n)` on up to `workers` threads and returns the results in index order.
fn parallel_map<T: Send>(n: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                slots.lock().expect("worker poisoned the result table")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("worker poisoned the result table").into_iter().map(|r| r.expect("every index ran")).collect()
}

/// Per-realization output at one energy: named scalars and, optionally, the
/// kernel column `|P_{x, center}|`.
#[derive(Default)]
struct Sample {
    scalars: Vec<(String, f64)>,
    column: Option<Vec<f64>>,
}

type Realization = std::result::Result<Vec<std::result::Result<Sample, String>>, String>;

struct LatticeRun<'a> {
    spec: &'a EnsembleSpec,
    geom: LatticeGeometry,
    flux: FluxRational,
    disorder: DisorderModel,
}

impl LatticeRun<'_> {
    fn wants(&self, o: Observable) -> bool {
        self.spec.observables.contains(&o)
    }

    fn wants_kernel(&self) -> bool {
        self.wants(Observable::Kernel) || self.wants(Observable::EllQ) || self.wants(Observable::LBeta)
    }

    fn window(&self) -> Result<TraceWindow> {
        let r = self.spec.settings.window_radius.unwrap_or((self.geom.lx().min(self.geom.ly()) / 6).max(1));
        TraceWindow::centered(&self.geom, r)
    }

    fn kernel_radius(&self) -> usize {
        if let Some(r) = self.spec.settings.kernel_radius {
            return r;
        }
        if self.geom.is_periodic() {
            let (hx, hy) = ((self.geom.lx() / 2) as f64, (self.geom.ly() / 2) as f64);
            (hx * hx + hy * hy).sqrt().ceil() as usize
        } else {
            (self.geom.boundary_distance(self.geom.center()) - 1).max(0) as usize
        }
    }

    fn realization(&self, i: usize) -> Realization {
        let seed = self.spec.seed(i);
        let omega = sample_disorder(&self.disorder, self.geom.n_sites(), seed).map_err(|e| e.to_string())?;
        let h = build_hofstadter(&self.geom, &self.flux, &self.disorder, &omega).map_err(|e| e.to_string())?;
        let s = eigendecompose(&h).map_err(|e| e.to_string())?;
        let energies = &self.spec.grids.energies;
        let ids = if self.wants(Observable::Ids) && !self.geom.is_periodic() {
            Some(self.window().and_then(|w| ids_curve(&s, &self.geom, &w, energies)).map_err(|e| e.to_string())?)
        } else {
            None
        };
        let columns = if self.wants_kernel() { Some(self.kernel_columns(&s)) } else { None };
        Ok(energies
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                let mut out = Sample::default();
                if self.wants(Observable::Ids) {
                    let v = match &ids {
                        Some(c) => c[k],
                        None => s.count_below(e) as f64 / s.dim() as f64,
                    };
                    out.scalars.push(("ids".into(), v));
                }
                if self.wants(Observable::Hall) {
                    out.scalars.push(("hall".into(), self.hall(&s, e).map_err(|e| e.to_string())?));
                }
                if self.wants(Observable::Moments) {
                    for (t, m) in self.moments(&s, e).map_err(|e| e.to_string())? {
                        out.scalars.push((format!("moments@{t}"), m));
                    }
                }
                out.column = columns.as_ref().map(|c| c[k].clone());
                Ok(out)
            })
            .collect())
    }

    fn hall(&self, s: &SpectralData, e: f64) -> Result<f64> {
        let p = fermi_projection(s, e);
        let settings = &self.spec.settings;
        let method = match settings.hall_method {
            HallMethodChoice::Auto if self.geom.is_periodic() => HallMethodChoice::Index,
            HallMethodChoice::Auto => HallMethodChoice::KuboStreda,
            m => m,
        };
        let r = match method {
            HallMethodChoice::Index => {
                let a = GaugeFluxCenter::next_to(self.geom.center());
                let radius = settings.index_radius.unwrap_or_else(|| default_index_radius(&self.geom));
                index_pair(&p, &self.geom, &a, radius)?
            }
            HallMethodChoice::LatticeSum => hall_lattice_sum(&p, &self.geom, &self.window()?, settings.lattice_sum_radius)?,
            _ => hall_kubo_streda(&p, &self.geom, &self.window()?)?,
        };
        Ok(r.value)
    }

    fn moments(&self, s: &SpectralData, e: f64) -> Result<Vec<(f64, f64)>> {
        let st = &self.spec.settings;
        let t_top = st.moment_averaging_times.iter().copied().fold(0.0, f64::max);
        let n_steps = (7.0 * t_top / st.moment_dt).ceil() as usize;
        let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * st.moment_dt).collect();
        let options = TransportOptions { policy: st.moment_boundary, boundary_threshold: st.moment_boundary_threshold };
        let w = st.moment_half_width;
        let m = transport_moment(s, &self.geom, st.moment_p, [e - w, e + w], &times, options)?;
        let avg = time_averaged_moment(&m, &st.moment_averaging_times)?;
        Ok(avg.time_averaged.iter().map(|&(t, v, _)| (t, v)).collect())
    }

    /// `|P_{x, c}|` for every energy, accumulated in eigenvalue order.
    fn kernel_columns(&self, s: &SpectralData) -> Vec<Vec<f64>> {
        let n = s.dim();
        let c = self.geom.index(self.geom.center()).expect("center site");
        let energies = &self.spec.grids.energies;
        let mut order: Vec<usize> = (0..energies.len()).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        let mut out = vec![vec![]; energies.len()];
        let mut k = 0;
        for idx in order {
            let rank = s.count_below(energies[idx]);
            while k < rank {
                let vc = s.eigenvectors[(c, k)].conj();
                for (i, z) in col.iter_mut().enumerate() {
                    *z += s.eigenvectors[(i, k)] * vc;
                }
                k += 1;
            }
            out[idx] = col.iter().map(|z| z.norm()).collect();
        }
        out
    }

    /// Kernel-derived observables with jackknife errors over realizations.
    fn kernel_stats(&self, columns: &[Vec<f64>], stats: &mut PointStats) -> std::result::Result<(), String> {
        let profile = crate::localization::kernel_decay_columns(columns, &self.geom, self.geom.center(), self.kernel_radius())
            .map_err(|e| e.to_string())?;
        let n = columns.len();
        let replicates: Vec<KernelDecayProfile> = if n > 1 {
            (0..n)
                .map(|drop| {
                    let keep: Vec<usize> = (0..n).filter(|&k| k != drop).collect();
                    profile.subset(&keep).expect("profile keeps samples")
                })
                .collect()
        } else {
            vec![]
        };
        let st = &self.spec.settings;
        let mut push = |name: &str, f: &dyn Fn(&KernelDecayProfile) -> Result<f64>| -> std::result::Result<(), String> {
            let full = f(&profile).map_err(|e| format!("{name}: {e}"))?;
            let reps: Vec<f64> = replicates.iter().map(f).collect::<Result<_>>().map_err(|e| format!("{name}: {e}"))?;
            stats.observables.push(ObservableStats::jackknife(name, full, &reps, n));
            Ok(())
        };
        if self.wants(Observable::Kernel) {
            push("kernel", &|p| decay_rate_fit(p).map(|f| f.rate))?;
        }
        if self.wants(Observable::EllQ) {
            push("ell_q", &|p| ell_q(p, st.q).map(|l| l.value))?;
        }
        if self.wants(Observable::LBeta) {
            push("L_beta", &|p| l_beta(p, st.beta).map(|l| l.value))?;
        }
        stats.profile = Some(profile);
        Ok(())
    }
}

struct LandauRun<'a> {
    spec: &'a EnsembleSpec,
    basis: &'a LLLBasisSpec,
    disorder: DisorderModel,
}

impl LandauRun<'_> {
    fn realization(&self, i: usize) -> Realization {
        let seed = self.spec.seed(i);
        let omega = sample_disorder(&self.disorder, self.basis.n_cells(), seed).map_err(|e| e.to_string())?;
        let h = build_lll(self.basis, &self.disorder, &omega).map_err(|e| e.to_string())?;
        let s = eigendecompose(&h).map_err(|e| e.to_string())?;
        Ok(self
            .spec
            .grids
            .energies
            .iter()
            .map(|&e| {
                let mut out = Sample::default();
                if self.spec.observables.contains(&Observable::Ids) {
                    out.scalars.push(("ids".into(), s.count_below(e) as f64 / self.basis.n_phi as f64));
                }
                Ok(out)
            })
            .collect())
    }

    /// Disorder-independent edge bounds of the configured level.
    fn edges(&self) -> std::result::Result<Vec<ObservableStats>, String> {
        let d = &self.disorder;
        let n = self.spec.settings.edge_level;
        let plus = birman_schwinger_edge(self.basis, n, d.lambda, d.m2, EdgeSign::Plus).map_err(|e| e.to_string())?;
        let minus = birman_schwinger_edge(self.basis, n, d.lambda, d.m1, EdgeSign::Minus).map_err(|e| e.to_string())?;
        let one = |name: &str, v: f64| ObservableStats { name: name.into(), mean: v, stderr: 0.0, count: 1, min: v, max: v };
        Ok(vec![one("edges.plus", plus.energy), one("edges.minus", minus.energy)])
    }
}

/// Reduces per-realization samples of one grid configuration into point stats.
fn reduce(
    spec: &EnsembleSpec,
    base: GridPoint,
    realizations: &[Realization],
    mut extra: impl FnMut(usize, &[Vec<f64>], &mut PointStats),
) -> Vec<PointStats> {
    let mut points = vec![];
    for (k, &energy) in spec.grids.energies.iter().enumerate() {
        let mut stats = PointStats {
            point: GridPoint { energy, ..base },
            observables: vec![],
            failures: vec![],
            profile: None,
        };
        let mut ok: Vec<&Sample> = vec![];
        for (i, r) in realizations.iter().enumerate() {
            let res = r.as_ref().map_err(Clone::clone).and_then(|v| v[k].as_ref().map_err(Clone::clone));
            match res {
                Ok(s) => ok.push(s),
                Err(message) => stats.failures.push(Failure { realization: i, seed: spec.seed(i), message }),
            }
        }
        if let Some(first) = ok.first() {
            for (j, (name, _)) in first.scalars.iter().enumerate() {
                let xs: Vec<f64> = ok.iter().map(|s| s.scalars[j].1).collect();
                stats.observables.extend(ObservableStats::from_samples(name, &xs));
            }
            let columns: Vec<Vec<f64>> = ok.iter().filter_map(|s| s.column.clone()).collect();
            extra(k, &columns, &mut stats);
        }
        points.push(stats);
    }
    points
}

/// Runs every realization at every grid point. Realization `i` always uses
/// seed `base_seed ^ i`; failures are recorded per point and never abort the run.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleStats> {
    spec.validate()?;
    let n = spec.n_realizations;
    let mut points = vec![];
    for &lambda in &spec.grids.lambdas {
        let disorder = DisorderModel { lambda, ..spec.disorder };
        match &spec.model {
            ModelConfig::Lattice { boundary, .. } => {
                for &size in &spec.grids.sizes {
                    for &flux in &spec.grids.fluxes {
                        let geom = LatticeGeometry::new(size[0], size[1], *boundary)?;
                        let run = LatticeRun { spec, geom, flux, disorder };
                        let results = parallel_map(n, spec.workers, |i| run.realization(i));
                        let base = GridPoint { energy: 0.0, lambda, flux: Some(flux), size: Some(size) };
                        let wants_kernel = run.wants_kernel();
                        points.extend(reduce(spec, base, &results, |_, columns, stats| {
                            if wants_kernel && !columns.is_empty() {
                                if let Err(message) = run.kernel_stats(columns, stats) {
                                    stats.failures.push(Failure { realization: usize::MAX, seed: spec.base_seed, message });
                                }
                            }
                        }));
                    }
                }
            }
            ModelConfig::Landau(basis) => {
                let run = LandauRun { spec, basis, disorder };
                let results = parallel_map(n, spec.workers, |i| run.realization(i));
                let edges = if spec.observables.contains(&Observable::Edges) { Some(run.edges()) } else { None };
                let base = GridPoint { energy: 0.0, lambda, flux: None, size: None };
                points.extend(reduce(spec, base, &results, |_, _, stats| match &edges {
                    Some(Ok(e)) => stats.observables.extend(e.iter().cloned()),
                    Some(Err(message)) => {
                        stats.failures.push(Failure { realization: usize::MAX, seed: spec.base_seed, message: message.clone() })
                    }
                    None => {}
                }));
            }
        }
    }
    Ok(EnsembleStats {
        points,
        seeds: (0..n).map(|i| spec.seed(i)).collect(),
        n_realizations: n,
        code_version: env!("CARGO_PKG_VERSION"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Grids, ModelConfig};
    use crate::model::{Boundary, DisorderKind};

    fn lattice_spec(n: usize, disorder: DisorderModel, obs: Vec<Observable>) -> EnsembleSpec {
        let model = ModelConfig::Lattice { lx: 12, ly: 12, boundary: Boundary::Open, flux: FluxRational::new(1, 3).unwrap() };
        let grids = Grids { energies: vec![-2.5, -1.5, -0.5], ..Grids::default() };
        EnsembleSpec::new(model, disorder, n, 7, grids, obs).unwrap()
    }

    #[test]
    fn constant_disorder_has_zero_stderr() {
        let d = DisorderModel::new(1.0, 1.0, 0.3, DisorderKind::Constant { c: 0.5 }).unwrap();
        let spec = lattice_spec(4, d, vec![Observable::Ids, Observable::Hall, Observable::EllQ]);
        let stats = run_ensemble(&spec).unwrap();
        assert_eq!(stats.failure_count(), 0);
        for p in &stats.points {
            for o in &p.observables {
                assert!(o.stderr.abs() < 1e-12, "{} stderr {}", o.name, o.stderr);
                assert_eq!(o.count, 4);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let d = DisorderModel::uniform(1.0, 1.0, 0.5).unwrap();
        let mut spec = lattice_spec(5, d, vec![Observable::Ids, Observable::Hall, Observable::LBeta]);
        let a = run_ensemble(&spec).unwrap();
        spec.workers = 3;
        let b = run_ensemble(&spec).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn seeds_follow_the_xor_schedule() {
        let d = DisorderModel::uniform(1.0, 1.0, 0.5).unwrap();
        let spec = lattice_spec(3, d, vec![Observable::Ids]);
        let stats = run_ensemble(&spec).unwrap();
        assert_eq!(stats.seeds, vec![7, 6, 5]);
    }

    #[test]
    fn ids_mean_is_nondecreasing() {
        let d = DisorderModel::uniform(1.0, 1.0, 0.5).unwrap();
        let model = ModelConfig::Lattice { lx: 12, ly: 12, boundary: Boundary::MagneticPeriodic, flux: FluxRational::new(1, 3).unwrap() };
        let energies: Vec<f64> = (0..30).map(|k| -3.5 + 0.2 * k as f64).collect();
        let grids = Grids { energies, ..Grids::default() };
        let spec = EnsembleSpec::new(model, d, 3, 1, grids, vec![Observable::Ids]).unwrap();
        let stats = run_ensemble(&spec).unwrap();
        let ids: Vec<f64> = stats.points.iter().map(|p| p.get("ids").unwrap().mean).collect();
        assert!(ids.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let d = DisorderModel::uniform(1.0, 1.0, 0.5).unwrap();
        let mut spec = lattice_spec(2, d, vec![Observable::Ids, Observable::Hall]);
        // Window too large for the margin: every Hall evaluation fails.
        spec.settings.window_radius = Some(5);
        let stats = run_ensemble(&spec).unwrap();
        assert!(stats.failure_count() > 0);
        assert!(stats.points[0].failures.iter().all(|f| f.seed == spec.seed(f.realization)));
    }

    #[test]
    fn landau_ids_and_edges() {
        let basis = LLLBasisSpec::new(1.0, 2, 4).unwrap();
        let d = DisorderModel::uniform(1.0, 1.0, 0.2).unwrap();
        let grids = Grids { energies: vec![0.0, 2.0, 4.0], ..Grids::default() };
        let mut spec =
            EnsembleSpec::new(ModelConfig::Landau(basis), d, 2, 3, grids, vec![Observable::Ids, Observable::Edges]).unwrap();
        spec.settings.edge_level = 1;
        let stats = run_ensemble(&spec).unwrap();
        assert_eq!(stats.failure_count(), 0);
        let ids: Vec<f64> = stats.points.iter().map(|p| p.get("ids").unwrap().mean).collect();
        assert_eq!(ids[0], 0.0);
        assert!((ids[1] - 1.0).abs() < 1e-12);
        assert!((ids[2] - 2.0).abs() < 1e-12);
        let plus = stats.points[0].get("edges.plus").unwrap().mean;
        assert!(plus > 1.0 && plus <= 1.2 + 1e-9);
    }
}
