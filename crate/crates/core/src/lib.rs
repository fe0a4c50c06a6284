//! Synthesis and estimation of 2-microlocal frontiers.
//!
//! The crate closes a synthesize -> estimate -> verify loop around wavelet
//! coefficient fields: prescribe a decreasing concave (or linear) frontier
//! curve, synthesize a coefficient field realizing it, estimate the frontier
//! back from any field, and extract the classical regularity exponents.
//!
//! Modules follow the pipeline:
//! - [`frontier`]: admissible curves and their analytic quantities
//! - [`kernel`]: the central log-domain infimum and its oracles
//! - [`indexing`]: popcount classes, the dense ratio sequence, forced-equality subscripts
//! - [`field`]: the sparse dyadic coefficient container
//! - [`synthesis`]: general/linear synthesizers plus the Meyer and LVS schemes
//! - [`analysis`]: membership margins, frontier estimation, the linear checker
//! - [`signal`]: Meyer wavelet table and signal reconstruction
//! - [`cli`]: coefficient file format and the command drivers

pub mod analysis;
pub mod cli;
pub mod error;
pub mod field;
pub mod frontier;
pub mod grid;
pub mod indexing;
pub mod kernel;
pub mod signal;
pub mod synthesis;

pub use error::{Error, Result};
pub use field::CoefficientField;
pub use frontier::{FrontierCurve, RegularityExponents};
pub use grid::SigmaGrid;
