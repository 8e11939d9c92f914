use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Depth and width that bring a one-layer model with parameter bound `c1`
/// under the bound `c2`, at roughly the same parameter count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthPlan {
    pub depth: usize,
    pub width: usize,
    /// `2 c1^(2/(l+1))`, the factorization bound at the planned depth.
    pub predicted_bound: f64,
}

/// `l = ceil(2 ln c1 / ln(c2/2) - 1)` (at least 1) and `m = ceil(K/l) + 1`,
/// for a teacher of up to `K + 1` modes: `l(m-1)+1 >= K+1`, with equality
/// when `l` divides `K`.
pub fn minimal_depth(c1: f64, c2: f64, k: usize) -> Result<DepthPlan> {
    if !c1.is_finite() || c1 <= 1.0 {
        return Err(Error::Domain(format!("c1 must exceed 1, got {c1}")));
    }
    if !c2.is_finite() || c2 <= 2.0 {
        return Err(Error::Domain(format!("c2 must exceed 2, got {c2}")));
    }
    if k < 2 {
        return Err(Error::Domain(format!("K must be at least 2, got {k}")));
    }
    let raw = 2.0 * c1.ln() / (c2 / 2.0).ln() - 1.0;
    let depth = (raw.ceil() as usize).max(1);
    Ok(DepthPlan {
        depth,
        width: k.div_ceil(depth) + 1,
        predicted_bound: 2.0 * c1.powf(2.0 / (depth as f64 + 1.0)),
    })
}
