//! Exact diagonalization, Fermi projections, the integrated density of
//! states, deterministic band bounds and Birman-Schwinger band edges.

mod bands;
mod birman;
mod eigen;
mod projection;

pub use bands::{band_bounds, gap_all_closed, gap_open, BandInterval};
pub use birman::{band_edge_curve, birman_schwinger_edge, BandEdge, BandEdgeCurve, EdgeSign};
pub use eigen::{eigendecompose, eigendecompose_matrix, SpectralData};
pub use projection::{fermi_projection, ids_curve, ids_estimate, Estimate, FermiProjection, DEGENERACY_TOL};
