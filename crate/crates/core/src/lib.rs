//! Deep linear state-space models with diagonal state matrices.
//!
//! The crate simulates deep models, computes their convolution kernels
//! (by simulation and in closed form through complete homogeneous symmetric
//! polynomials of the eigenvalues), converts between deep and one-layer
//! realizations with explicit parameter-norm bounds, and runs small
//! teacher-student and impulse-fitting experiments.

#![allow(clippy::needless_range_loop)]

pub mod convert;
pub mod error;
pub mod fit;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod membership;
pub mod model;
pub mod sample;
pub mod symfun;

pub type C64 = num_complex::Complex64;

pub use convert::{
    collapse, expand_coefficients, factorize, minimal_depth, reduce_normal, DepthPlan, ExpansionTable,
    FactorizeOptions, NormCertificate,
};
pub use error::{Error, Result};
pub use kernel::{convolve, kernel_by_simulation, kernel_closed_form, simulate, Recurrence, DEFAULT_HORIZON};
pub use membership::{check_membership, MembershipReport, Violation};
pub use model::{
    ConvolutionKernel, DeepLinearSsm, DenseLayer, DenseSsm, DiagLayer, Mode, ShallowRealization, StabilityPolicy,
};
