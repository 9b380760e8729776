//! Reproducible disorder ensembles over parameter grids.
//!
//! Realization `i` is drawn with seed `base_seed ^ i` at every grid point.
//! Realizations may run on several workers; all reductions happen afterwards
//! in realization order with pairwise summation, so the statistics do not
//! depend on the worker count.

mod continuity;
mod run;
mod spec;

pub use continuity::{continuity_scan, modulus_of_continuity, ContinuityRecord};
pub use run::{run_ensemble, EnsembleStats, Failure, GridPoint, ObservableStats, PointStats};
pub use spec::{EnsembleSpec, Grids, HallMethodChoice, ModelConfig, Observable, ObservableSettings};
