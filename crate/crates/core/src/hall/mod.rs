//! Hall conductance of a Fermi projection by three routes, plus the gauge
//! phase, Schatten norms and the Connes sum over the dual lattice.
//!
//! Orientation convention. [`gauge_phase`] is the literal
//! `γ_a(x) = (x1 - a1 + i(x2 - a2)) / |x - a|`. The flux-insertion unitary
//! `Γ_a` used by [`index_pair`], [`conjugated_projection`] and
//! [`connes_sum`] multiplies by `conj(γ_a)` ([`Orientation::Clockwise`]). With
//! that choice `tr(P - Γ_a P Γ_a^*)^3` has the sign of the Kubo-Středa value
//! `-2πi tr P[[P,X1],[P,X2]]`, and the Connes sum equals `-2πi (u1 v2 - u2 v1)`.
//! Using `γ_a` itself flips both signs; it stays available through
//! [`Orientation::Counterclockwise`].

mod connes;
mod index;
mod kubo;
mod phase;
mod result;
mod schatten;

pub use crate::model::TraceWindow;
pub use connes::{connes_sum, connes_sum_oriented, connes_sums, ConnesSum};
pub use index::{conjugated_projection, default_index_radius, index_pair};
pub use kubo::{hall_kubo_streda, hall_lattice_sum};
pub use phase::{gauge_phase, GaugeFluxCenter, Orientation};
pub use result::{HallMethod, HallResult, Quantization, INDETERMINATE_THRESHOLD, INTEGER_THRESHOLD};
pub use schatten::schatten_norm;
