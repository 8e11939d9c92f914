use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ConvolutionKernel, DeepLinearSsm};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Gradient of a real loss with respect to complex parameters, stored as
/// `dL/dRe p + i dL/dIm p`, so steepest descent is `p -= lr * g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGradient {
    pub state_diag: Vec<DVector<C64>>,
    pub input: Vec<DMatrix<C64>>,
    pub read_out: DVector<C64>,
}

impl ModelGradient {
    fn zeros_like(model: &DeepLinearSsm) -> Self {
        ModelGradient {
            state_diag: model.layers().iter().map(|l| DVector::zeros(l.state_diag.len())).collect(),
            input: model
                .layers()
                .iter()
                .map(|l| DMatrix::zeros(l.input.nrows(), l.input.ncols()))
                .collect(),
            read_out: DVector::zeros(model.width()),
        }
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut C64> {
        self.state_diag
            .iter_mut()
            .flat_map(|v| v.iter_mut())
            .chain(self.input.iter_mut().flat_map(|m| m.iter_mut()))
            .chain(self.read_out.iter_mut())
    }

    pub fn values(&self) -> impl Iterator<Item = &C64> {
        self.state_diag
            .iter()
            .flat_map(|v| v.iter())
            .chain(self.input.iter().flat_map(|m| m.iter()))
            .chain(self.read_out.iter())
    }

    /// Euclidean norm over all real coordinates.
    pub fn norm(&self) -> f64 {
        self.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Drops the imaginary directions, for models constrained to be real.
    pub fn make_real(&mut self) {
        for z in self.values_mut() {
            z.im = 0.0;
        }
    }
}

/// Loss and its gradient, by backpropagation through the recurrence driven
/// by a unit impulse over the target's horizon.
///
/// With `S = sum_t conj(e_t) d rho(t)/dp` for the error `e = rho - target`,
/// the gradient is `2 conj(S)`. The adjoint of layer `i` at time `t` is
/// `a_i * lam_i(t+1) + B_{i+1}^T lam_{i+1}(t)`, seeded by `conj(e_t) C` on
/// the top layer.
pub fn kernel_gradient(model: &DeepLinearSsm, target: &ConvolutionKernel) -> Result<(f64, ModelGradient)> {
    let horizon = target.horizon();
    if horizon == 0 {
        return Err(Error::Empty("target kernel"));
    }
    let depth = model.depth();
    let m = model.width();
    let layers = model.layers();

    // states[t][i] = h_i(t) under a delta input
    let mut states: Vec<Vec<Vec<C64>>> = Vec::with_capacity(horizon);
    let mut prev = vec![vec![ZERO; m]; depth];
    let mut errors = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let mut cur = vec![vec![ZERO; m]; depth];
        for (i, layer) in layers.iter().enumerate() {
            for r in 0..m {
                let drive = if i == 0 {
                    if t == 0 {
                        layer.input[(r, 0)]
                    } else {
                        ZERO
                    }
                } else {
                    (0..m).map(|c| layer.input[(r, c)] * cur[i - 1][c]).sum()
                };
                cur[i][r] = layer.state_diag[r] * prev[i][r] + drive;
            }
        }
        let y: C64 = (0..m).map(|j| model.read_out()[j] * cur[depth - 1][j]).sum();
        errors.push(y - target.taps[t]);
        states.push(cur.clone());
        prev = cur;
    }
    let loss = errors.iter().map(|e| e.norm_sqr()).sum();
    if !f64::is_finite(loss) {
        return Err(Error::NonFinite("kernel loss"));
    }

    let mut s = ModelGradient::zeros_like(model);
    let mut lam_next = vec![vec![ZERO; m]; depth];
    let mut lam = vec![vec![ZERO; m]; depth];
    for t in (0..horizon).rev() {
        let g = errors[t].conj();
        for i in (0..depth).rev() {
            for r in 0..m {
                let from_above = if i + 1 == depth {
                    g * model.read_out()[r]
                } else {
                    let up = &layers[i + 1].input;
                    (0..m).map(|q| up[(q, r)] * lam[i + 1][q]).sum()
                };
                lam[i][r] = layers[i].state_diag[r] * lam_next[i][r] + from_above;
            }
        }
        for j in 0..m {
            s.read_out[j] += g * states[t][depth - 1][j];
        }
        for i in 0..depth {
            if t > 0 {
                for r in 0..m {
                    s.state_diag[i][r] += lam[i][r] * states[t - 1][i][r];
                }
            }
            if i == 0 {
                if t == 0 {
                    for r in 0..m {
                        s.input[0][(r, 0)] += lam[0][r];
                    }
                }
            } else {
                for r in 0..m {
                    for c in 0..m {
                        s.input[i][(r, c)] += lam[i][r] * states[t][i - 1][c];
                    }
                }
            }
        }
        std::mem::swap(&mut lam, &mut lam_next);
    }
    for z in s.values_mut() {
        *z = z.conj() * 2.0;
    }
    Ok((loss, s))
}
