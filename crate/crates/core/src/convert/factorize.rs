//! Shallow-to-deep factorization with a norm certificate.
//!
//! Sorted teacher modes `sigma_1..sigma_K`, `K = l(m-1)+1`, are laid out on
//! a grid `alpha(i, j)`: layer 1 holds `sigma_1..sigma_m`, layer `i >= 2`
//! holds the next `m-1` modes in columns `1..m-1` and a zero in column `m`.
//! Each column `j < m` is a chain `alpha(1,j), .., alpha(l,j)` whose
//! telescoping weights `H(i,j)` turn the path sums `F_t(alpha(1,j)..
//! alpha(i,j))` back into plain exponentials. The read-in and read-out are
//! `Z_0 1_m`; the mixing matrices carry `Z_0` on the pass-through paths and
//! `H / Z_0^l` where a path terminates, so every entry is at most `Z_0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeepLinearSsm, DenseSsm, DiagLayer, Mode, ShallowRealization};
use crate::symfun::{coincide, find_coincident, modulus_order, telescope_coefficients};
use crate::C64;

use super::normal::reduce_normal;

/// Slack on the certificate comparison for floating-point rounding.
pub const CERTIFICATE_RTOL: f64 = 1e-9;

const PERTURB_SCALE: f64 = 1e-8;
const PAD_SCALE: f64 = 1e-6;
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizeOptions {
    /// Jitter repeated or zero teacher eigenvalues instead of rejecting them.
    pub allow_perturb: bool,
    /// Pad a teacher narrower than `l(m-1)+1` with zero-weight modes.
    pub allow_padding: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    /// `2 (max_i |b_i c_i|)^(1/(l+1))`.
    pub z0: f64,
    /// Largest modulus over the student's read-in, mixing and read-out.
    pub measured_max: f64,
    pub satisfied: bool,
    pub depth: usize,
    pub width: usize,
    pub teacher_width: usize,
    pub padded_modes: usize,
    pub perturbed_modes: usize,
}

/// One-layer width a depth-`depth`, width-`width` diagonal model can match.
pub fn effective_width(depth: usize, width: usize) -> usize {
    depth * (width - 1) + 1
}

/// Smallest `m` with `l(m-1)+1 >= modes`.
pub fn minimal_width(modes: usize, depth: usize) -> usize {
    (modes.saturating_sub(1)).div_ceil(depth) + 1
}

/// Factorizes `teacher` into a depth-`depth` model of the smallest width
/// that holds it. Without padding the teacher width must be exactly
/// `l(m-1)+1`.
pub fn factorize(
    teacher: &ShallowRealization,
    depth: usize,
    opts: FactorizeOptions,
) -> Result<(DeepLinearSsm, NormCertificate)> {
    if depth == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    let width = minimal_width(teacher.width(), depth);
    factorize_with_width(teacher, depth, width, opts)
}

/// Reduces a normal one-layer model to modal form, then factorizes it.
pub fn factorize_normal(
    teacher: &DenseSsm,
    depth: usize,
    opts: FactorizeOptions,
) -> Result<(DeepLinearSsm, NormCertificate)> {
    factorize(&reduce_normal(teacher)?, depth, opts)
}

pub fn factorize_with_width(
    teacher: &ShallowRealization,
    depth: usize,
    width: usize,
    opts: FactorizeOptions,
) -> Result<(DeepLinearSsm, NormCertificate)> {
    if depth == 0 || width == 0 {
        return Err(Error::Domain("depth and width must be at least 1".into()));
    }
    let teacher = ShallowRealization::new(teacher.modes.clone())?;
    let k = teacher.width();
    let target = effective_width(depth, width);
    if k > target || (k < target && !opts.allow_padding) {
        return Err(Error::ShapeMismatch(format!(
            "teacher has {k} modes; depth {depth} width {width} takes exactly {target}"
        )));
    }

    let mut modes = teacher.modes;
    let perturbed_modes = if opts.allow_perturb {
        perturb_degenerate(&mut modes)
    } else {
        reject_degenerate(&modes)?;
        0
    };
    let padded_modes = target - k;
    pad_modes(&mut modes, padded_modes)?;
    modes.sort_by(|a, b| modulus_order(&a.eigenvalue, &b.eigenvalue));

    let sigmas: Vec<C64> = modes.iter().map(|m| m.eigenvalue).collect();
    let weights: Vec<C64> = modes.iter().map(|m| m.weight()).collect();
    let max_weight = weights.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let z0 = 2.0 * max_weight.powf(1.0 / (depth as f64 + 1.0));

    let student = if max_weight == 0.0 {
        zero_student(&sigmas, depth, width)
    } else if depth == 1 {
        let z = C64::new(z0, 0.0);
        DeepLinearSsm {
            layers: vec![DiagLayer {
                state_diag: DVector::from_vec(sigmas),
                input: DMatrix::from_element(width, 1, z),
            }],
            read_out: DVector::from_iterator(width, weights.iter().map(|w| w / z)),
        }
    } else {
        build_student(&sigmas, &weights, depth, width, z0)?
    };

    let measured_max = student.max_param_modulus();
    let certificate = NormCertificate {
        z0,
        measured_max,
        satisfied: measured_max <= z0 * (1.0 + CERTIFICATE_RTOL),
        depth,
        width,
        teacher_width: k,
        padded_modes,
        perturbed_modes,
    };
    Ok((student, certificate))
}

fn reject_degenerate(modes: &[Mode]) -> Result<()> {
    let sigmas: Vec<C64> = modes.iter().map(|m| m.eigenvalue).collect();
    if let Some(index) = sigmas.iter().position(|s| *s == ZERO) {
        return Err(Error::ZeroEigenvalue { index });
    }
    if let Some((first, second)) = find_coincident(&sigmas) {
        return Err(Error::DegenerateEigenvalues { first, second });
    }
    Ok(())
}

/// Moves zero or repeated eigenvalues by `1e-8 max(|sigma|, 1) e^(i pi k/n)`
/// until all are distinct. Returns the number of modes moved.
fn perturb_degenerate(modes: &mut [Mode]) -> usize {
    let n = modes.len() as f64;
    let mut moved = 0;
    for idx in 0..modes.len() {
        let mut attempt = 0;
        while modes[idx].eigenvalue == ZERO
            || modes[..idx]
                .iter()
                .any(|m| coincide(m.eigenvalue, modes[idx].eigenvalue))
        {
            attempt += 1;
            let sigma = modes[idx].eigenvalue;
            let phase = PI * (idx as f64 + attempt as f64 / 7.0) / n;
            let step = PERTURB_SCALE * sigma.norm().max(1.0) * attempt as f64;
            modes[idx].eigenvalue = sigma + C64::from_polar(step, phase);
        }
        if attempt > 0 {
            moved += 1;
        }
    }
    moved
}

/// Zero-weight modes at small distinct eigenvalues of modulus about `1e-6`.
fn pad_modes(modes: &mut Vec<Mode>, count: usize) -> Result<()> {
    let n = count as f64;
    for idx in 0..count {
        let radius = PAD_SCALE * (1.0 + idx as f64 / n);
        let mut phase = 2.0 * PI * (idx as f64 + 0.5) / n;
        let mut sigma = C64::from_polar(radius, phase);
        let mut tries = 0;
        while modes.iter().any(|m| coincide(m.eigenvalue, sigma)) {
            tries += 1;
            if tries > 64 {
                return Err(Error::DegenerateEigenvalues {
                    first: modes.len(),
                    second: modes.len(),
                });
            }
            phase += 0.1;
            sigma = C64::from_polar(radius, phase);
        }
        modes.push(Mode::new(sigma, ZERO, ZERO));
    }
    Ok(())
}

/// Index into the sorted teacher for grid cell `(layer, column)`, or `None`
/// for the zero cells in the last column of layers `2..l`.
fn grid_index(layer: usize, column: usize, width: usize) -> Option<usize> {
    if layer == 0 {
        Some(column)
    } else if column + 1 == width {
        None
    } else {
        Some(layer * (width - 1) + column + 1)
    }
}

fn zero_student(sigmas: &[C64], depth: usize, width: usize) -> DeepLinearSsm {
    let layers = (0..depth)
        .map(|i| DiagLayer {
            state_diag: DVector::from_iterator(
                width,
                (0..width).map(|j| grid_index(i, j, width).map_or(ZERO, |k| sigmas[k])),
            ),
            input: DMatrix::zeros(width, if i == 0 { 1 } else { width }),
        })
        .collect();
    DeepLinearSsm {
        layers,
        read_out: DVector::zeros(width),
    }
}

fn build_student(
    sigmas: &[C64],
    weights: &[C64],
    depth: usize,
    width: usize,
    z0: f64,
) -> Result<DeepLinearSsm> {
    let (l, m) = (depth, width);
    let last = m - 1;
    let alpha = |i: usize, j: usize| grid_index(i, j, m).map_or(ZERO, |k| sigmas[k]);
    let weight = |i: usize, j: usize| grid_index(i, j, m).map_or(ZERO, |k| weights[k]);

    // h[i][j] = H(i, j) for chain columns j < m-1
    let mut h = vec![vec![ZERO; m]; l];
    for j in 0..last {
        let betas: Vec<C64> = (0..l).map(|i| alpha(i, j)).collect();
        let zs: Vec<C64> = (0..l).map(|i| weight(i, j)).collect();
        for (i, hij) in telescope_coefficients(&betas, &zs)?.into_iter().enumerate() {
            h[i][j] = hij;
        }
    }
    h[0][last] = weight(0, last);

    let z = C64::new(z0, 0.0);
    let scale = C64::new(z0.powi(l as i32), 0.0);
    let mut inputs: Vec<DMatrix<C64>> = Vec::with_capacity(l);
    inputs.push(DMatrix::from_element(m, 1, z));
    for k in 1..l {
        let mut b = DMatrix::<C64>::zeros(m, m);
        for j in 0..last {
            b[(j, j)] = if k + 1 == l { h[l - 1][j] / scale } else { z };
            b[(last, j)] = h[k - 1][j] / scale;
        }
        b[(last, last)] = if k == 1 { h[0][last] / scale } else { z };
        inputs.push(b);
    }

    let layers = inputs
        .into_iter()
        .enumerate()
        .map(|(i, input)| DiagLayer {
            state_diag: DVector::from_iterator(m, (0..m).map(|j| alpha(i, j))),
            input,
        })
        .collect();
    Ok(DeepLinearSsm {
        layers,
        read_out: DVector::from_element(m, z),
    })
}
