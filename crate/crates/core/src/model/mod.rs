//! Finite-volume disordered magnetic Hamiltonians.
//!
//! Two families are provided: the Hofstadter lattice with Peierls phases and
//! an Anderson on-site term, and the continuum Landau Hamiltonian truncated to
//! the lowest `n_max` Landau levels on a torus. Both come out as dense
//! [`HermitianOperator`]s carrying a provenance record.

mod disorder;
mod flux;
mod geometry;
mod hofstadter;
mod lll;
mod operator;
mod translation;

pub use disorder::{sample_disorder, DisorderKind, DisorderModel, DisorderRealization};
pub use flux::FluxRational;
pub use geometry::{Boundary, LatticeGeometry, Site, TraceWindow};
pub use hofstadter::{build_hofstadter, build_hofstadter_symmetric_gauge, clean_hofstadter};
pub use lll::{build_lll, landau_levels, lll_potential_matrix, LLLBasisSpec, SiteProfile};
pub use operator::{Basis, HermitianOperator, Provenance};
pub use translation::{magnetic_translation, translate_disorder};
