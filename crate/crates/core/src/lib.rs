//! Schur analysis for slice hyperholomorphic functions of a quaternionic variable.

pub mod blaschke;
pub mod cli;
pub mod error;
pub mod interp;
pub mod kernels;
pub mod qlinalg;
pub mod quat;
pub mod realize;
pub mod series;

pub use error::{Error, Result};
pub use qlinalg::QMatrix;
pub use quat::{ImagUnit, Quaternion, TwoSphere};
pub use series::{LSeries, MatrixSeries, RSeries};
