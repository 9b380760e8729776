//! Fermi-kernel decay, localization lengths, decay fits, transport moments
//! and the finite-size divergence scan.

mod fit;
mod kernel;
mod lengths;
mod scan;
mod transport;

pub use fit::{decay_rate_fit, DecayFit, DecayModel, LineFit};
pub use kernel::{kernel_decay, KernelDecayProfile};
pub(crate) use fit::line_fit;
pub(crate) use kernel::kernel_decay_columns;
pub use lengths::{ell_q, l_beta, n_weighted_l_beta, LocalizationLengthEstimate, DEFAULT_BETA};
pub use scan::{divergence_scan, DivergenceScan};
pub use transport::{
    bump, time_averaged_moment, transport_moment, BoundaryPolicy, TransportMoment, TransportOptions, SHOULDER_RATIO,
};
