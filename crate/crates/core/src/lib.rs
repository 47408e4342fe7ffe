//! Numerical model of an unseeded SU(1,1) interferometer built from two
//! passes through a single high-gain parametric down-conversion crystal.
//!
//! The pipeline integrates the transfer functions of each pass on a
//! transverse-momentum lattice, extracts joint Schmidt modes, composes the
//! passes, and evaluates overlap matrices and quadrature squeezing of the
//! interferometer output.

pub mod error;
pub mod asymmetry;
pub mod calibration;
pub mod exec;
pub mod interferometer;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod overlaps;
pub mod physics;
pub mod jointdecomp;
pub mod propagator;
pub mod squeezing;

pub use error::{Error, ErrorClass, Result};
pub use lattice::Lattice;
pub use propagator::TransferPair;
