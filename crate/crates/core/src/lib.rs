//! Block-band random matrices and their supersymmetric description.
//!
//! * [`ensemble`]: covariance profiles and Gaussian block-band sampling.
//! * [`spectra`]: eigenvalue statistics and determinant-ratio Monte Carlo.
//! * [`berezin`]: exact Grassmann algebra, Berezin integration and the
//!   nilpotent expansion feeding the transfer operator.
//! * [`scalars`]: bulk constants and closed-form limit formulas.
//! * [`transfer`]: zonal transfer operators on the compact and hyperbolic
//!   symmetric spaces and their sector spectra.
//! * [`harness`]: configuration, experiments and run manifests.

// Guards are written as `!(x < bound)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berezin;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod scalars;
pub mod seed;
pub mod spectra;
pub mod transfer;

pub use error::{Error, Result};
