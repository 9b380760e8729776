//! Finite-volume numerics for the quantized Hall conductance of disordered
//! magnetic Hamiltonians.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] builds lattice (Hofstadter plus Anderson) and truncated
//!   Landau-level Hamiltonians, together with magnetic translations.
//! * [`spectral`] diagonalizes them and forms Fermi projections, densities of
//!   states, deterministic band bounds and Birman-Schwinger band edges.
//! * [`hall`] evaluates the Hall conductance three ways (Kubo-Středa
//!   commutator trace, real-space lattice sum, index of a projection pair)
//!   and provides the Connes sum over the dual lattice.
//! * [`localization`] covers kernel-decay profiles, localization lengths and
//!   transport moments.
//! * [`ensemble`] runs reproducible disorder ensembles over parameter grids.

pub mod ensemble;
pub mod error;
pub mod hall;
pub mod linalg;
pub mod localization;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::CMat;
