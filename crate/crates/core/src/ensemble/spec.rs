use serde::Serialize;

use crate::localization::{BoundaryPolicy, DEFAULT_BETA};
use crate::model::{Boundary, DisorderModel, FluxRational, LLLBasisSpec, LatticeGeometry};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelConfig {
    Lattice { lx: usize, ly: usize, boundary: Boundary, flux: FluxRational },
    Landau(LLLBasisSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Observable {
    #[serde(rename = "hall")]
    Hall,
    #[serde(rename = "ids")]
    Ids,
    #[serde(rename = "kernel")]
    Kernel,
    #[serde(rename = "ell_q")]
    EllQ,
    #[serde(rename = "L_beta")]
    LBeta,
    #[serde(rename = "moments")]
    Moments,
    #[serde(rename = "edges")]
    Edges,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Hall,
        Observable::Ids,
        Observable::Kernel,
        Observable::EllQ,
        Observable::LBeta,
        Observable::Moments,
        Observable::Edges,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::Hall => "hall",
            Observable::Ids => "ids",
            Observable::Kernel => "kernel",
            Observable::EllQ => "ell_q",
            Observable::LBeta => "L_beta",
            Observable::Moments => "moments",
            Observable::Edges => "edges",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }

    fn needs_lattice(&self) -> bool {
        !matches!(self, Observable::Ids | Observable::Edges)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HallMethodChoice {
    /// Kubo-Středa on open samples, index on the torus.
    Auto,
    KuboStreda,
    LatticeSum,
    Index,
}

/// Per-observable knobs. `None` means "derive from the geometry".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSettings {
    /// Trace window radius; default `max(1, L/6)`.
    pub window_radius: Option<usize>,
    pub hall_method: HallMethodChoice,
    pub lattice_sum_radius: usize,
    /// Index trace radius; default a third of the shorter side.
    pub index_radius: Option<usize>,
    /// Kernel radius; default: whole torus, or up to one site from the edge.
    pub kernel_radius: Option<usize>,
    pub q: f64,
    pub beta: f64,
    pub moment_p: f64,
    /// The moment window is `[E - w, E + w]`.
    pub moment_half_width: f64,
    pub moment_dt: f64,
    pub moment_averaging_times: Vec<f64>,
    pub moment_boundary: BoundaryPolicy,
    pub moment_boundary_threshold: f64,
    pub edge_level: usize,
}

impl Default for ObservableSettings {
    fn default() -> Self {
        Self {
            window_radius: None,
            hall_method: HallMethodChoice::Auto,
            lattice_sum_radius: 8,
            index_radius: None,
            kernel_radius: None,
            q: 2.0,
            beta: DEFAULT_BETA,
            moment_p: 2.0,
            moment_half_width: 0.05,
            moment_dt: 1.0,
            moment_averaging_times: vec![50.0, 500.0],
            moment_boundary: BoundaryPolicy::Truncate,
            moment_boundary_threshold: 0.01,
            edge_level: 1,
        }
    }
}

/// Parameter grids. Empty `lambdas`, `fluxes` or `sizes` are filled from the
/// base model by [`EnsembleSpec::new`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Grids {
    pub energies: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub fluxes: Vec<FluxRational>,
    pub sizes: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub model: ModelConfig,
    pub disorder: DisorderModel,
    pub n_realizations: usize,
    pub base_seed: u64,
    pub grids: Grids,
    pub observables: Vec<Observable>,
    pub settings: ObservableSettings,
    pub workers: usize,
}

impl EnsembleSpec {
    pub fn new(
        model: ModelConfig,
        disorder: DisorderModel,
        n_realizations: usize,
        base_seed: u64,
        mut grids: Grids,
        observables: Vec<Observable>,
    ) -> Result<Self> {
        if grids.lambdas.is_empty() {
            grids.lambdas.push(disorder.lambda);
        }
        if let ModelConfig::Lattice { lx, ly, flux, .. } = &model {
            if grids.fluxes.is_empty() {
                grids.fluxes.push(*flux);
            }
            if grids.sizes.is_empty() {
                grids.sizes.push([*lx, *ly]);
            }
        }
        let spec = Self {
            model,
            disorder,
            n_realizations,
            base_seed,
            grids,
            observables,
            settings: ObservableSettings::default(),
            workers: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::Parameter("n_realizations must be at least 1".into()));
        }
        if self.grids.energies.is_empty() || self.grids.lambdas.is_empty() {
            return Err(Error::Parameter("energy and λ grids must be nonempty".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::Parameter("at least one observable is required".into()));
        }
        if self.grids.lambdas.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::Parameter("λ grid values must be nonnegative".into()));
        }
        self.disorder.validate()?;
        match &self.model {
            ModelConfig::Lattice { boundary, .. } => {
                if self.grids.fluxes.is_empty() || self.grids.sizes.is_empty() {
                    return Err(Error::Parameter("flux and size grids must be nonempty".into()));
                }
                for size in &self.grids.sizes {
                    let g = LatticeGeometry::new(size[0], size[1], *boundary)?;
                    for f in &self.grids.fluxes {
                        g.check_flux(f)?;
                    }
                }
                if self.observables.contains(&Observable::Edges) {
                    return Err(Error::Parameter("observable 'edges' needs the Landau model".into()));
                }
                let open = *boundary == Boundary::Open;
                if self.observables.contains(&Observable::Moments) && !open {
                    return Err(Error::Parameter("observable 'moments' needs open boundaries".into()));
                }
                let hall_needs_open = matches!(self.settings.hall_method, HallMethodChoice::KuboStreda | HallMethodChoice::LatticeSum);
                if self.observables.contains(&Observable::Hall) && hall_needs_open && !open {
                    return Err(Error::Parameter("Kubo-Středa and lattice-sum Hall need open boundaries".into()));
                }
            }
            ModelConfig::Landau(spec) => {
                spec.validate()?;
                if self.grids.fluxes.len() > 1 || self.grids.sizes.len() > 1 {
                    return Err(Error::Parameter("flux and size grids do not apply to the Landau model".into()));
                }
                if let Some(o) = self.observables.iter().find(|o| o.needs_lattice()) {
                    return Err(Error::Parameter(format!("observable '{}' needs the lattice model", o.name())));
                }
                if self.settings.edge_level == 0 || self.settings.edge_level > spec.n_max {
                    return Err(Error::Parameter(format!("edge level must lie in 1..={}", spec.n_max)));
                }
            }
        }
        if self.workers == 0 {
            return Err(Error::Parameter("worker count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seed(&self, realization: usize) -> u64 {
        self.base_seed ^ realization as u64
    }
}
