//! Constructive conversions between deep and shallow linear SSMs.
//!
//! * [`collapse`]: depth `l`, width `m` to one dense layer of width `l m`.
//! * [`factorize`]: a width `l(m-1)+1` modal model to depth `l`, width `m`,
//!   with every parameter bounded by `2 (max |b_i c_i|)^(1/(l+1))`.
//! * [`minimal_depth`]: the depth needed to reach a target norm bound.
//! * [`expand_coefficients`]: per-eigenvalue weights of the equivalent
//!   one-layer model.
//! * [`reduce_normal`] and [`diagonalize_general`]: bring non-diagonal state
//!   matrices back to the diagonal class.

mod collapse;
mod depth;
mod diagonalize;
mod expand;
mod factorize;
mod normal;

pub use collapse::{collapse, collapse_dense};
pub use depth::{minimal_depth, DepthPlan};
pub use diagonalize::{diagonalize_general, Diagonalized, DEFAULT_CONDITION_CEILING};
pub use expand::{expand_coefficients, ExpansionEntry, ExpansionTable};
pub use factorize::{
    effective_width, factorize, factorize_normal, factorize_with_width, minimal_width,
    FactorizeOptions, NormCertificate, CERTIFICATE_RTOL,
};
pub use normal::{reduce_normal, NORMALITY_TOL};
