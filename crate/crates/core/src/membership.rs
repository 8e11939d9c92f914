//! Norm-constrained hypothesis-space membership.
//!
//! A model belongs to the class with bound `c` when every state matrix has
//! spectral radius below one and every read-in, mixing and read-out entry
//! has modulus at most `c`. Violations are reported individually.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DeepLinearSsm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub measured: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub is_member: bool,
    pub width: usize,
    pub depth: usize,
    pub bound: f64,
    /// Largest parameter modulus over `B_1`, `B_2..B_l` and `C`.
    pub measured_norm: f64,
    pub max_spectral_radius: f64,
    pub violations: Vec<Violation>,
}

pub fn check_membership(model: &DeepLinearSsm, bound: f64) -> Result<MembershipReport> {
    if !bound.is_finite() || bound <= 0.0 {
        return Err(Error::Domain(format!("norm bound must be positive, got {bound}")));
    }
    let mut violations = Vec::new();
    let radii = model.spectral_radii();
    for (i, &r) in radii.iter().enumerate() {
        if r >= 1.0 {
            violations.push(Violation {
                constraint: format!("spectral_radius(A{})", i + 1),
                measured: r,
            });
        }
    }
    for (i, layer) in model.layers().iter().enumerate() {
        for r in 0..layer.input.nrows() {
            for c in 0..layer.input.ncols() {
                let v = layer.input[(r, c)].norm();
                if v > bound {
                    let name = if i == 0 {
                        format!("B1[{}]", r + 1)
                    } else {
                        format!("B{}[{},{}]", i + 1, r + 1, c + 1)
                    };
                    violations.push(Violation {
                        constraint: name,
                        measured: v,
                    });
                }
            }
        }
    }
    for (j, z) in model.read_out().iter().enumerate() {
        if z.norm() > bound {
            violations.push(Violation {
                constraint: format!("C[{}]", j + 1),
                measured: z.norm(),
            });
        }
    }
    Ok(MembershipReport {
        is_member: violations.is_empty(),
        width: model.width(),
        depth: model.depth(),
        bound,
        measured_norm: model.max_param_modulus(),
        max_spectral_radius: radii.iter().copied().fold(0.0, f64::max),
        violations,
    })
}
