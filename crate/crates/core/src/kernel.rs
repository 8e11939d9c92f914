//! Sequence simulation and convolution kernels.
//!
//! [`kernel_by_simulation`] drives the recurrence with a unit impulse and is
//! the ground truth every conversion is checked against.
//! [`kernel_closed_form`] sums `F_t` of the eigenvalues along every path
//! `j_1 -> .. -> j_l` through the layers, weighted by the product of the
//! read-in, mixing and read-out entries on that path.

use crate::error::{Error, Result};
use crate::model::{ConvolutionKernel, DeepLinearSsm, DenseSsm};
use crate::symfun::{append_argument, ensure_finite};
use crate::C64;

pub const DEFAULT_HORIZON: usize = 64;

const ZERO: C64 = C64::new(0.0, 0.0);

pub fn real_sequence(xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// Unit impulse of length `horizon`.
pub fn delta(horizon: usize) -> Vec<C64> {
    let mut x = vec![ZERO; horizon];
    if let Some(first) = x.first_mut() {
        *first = C64::new(1.0, 0.0);
    }
    x
}

/// Anything that maps a scalar input sequence to a scalar output sequence
/// through a zero-initialised linear recurrence.
pub trait Recurrence {
    fn simulate(&self, input: &[C64]) -> Result<Vec<C64>>;

    fn kernel_by_simulation(&self, horizon: usize) -> Result<ConvolutionKernel> {
        if horizon == 0 {
            return Err(Error::Empty("kernel horizon"));
        }
        ConvolutionKernel::new(self.simulate(&delta(horizon))?)
    }
}

impl Recurrence for DeepLinearSsm {
    fn simulate(&self, input: &[C64]) -> Result<Vec<C64>> {
        ensure_finite(input, "input sequence")?;
        let m = self.width();
        let mut states = vec![vec![ZERO; m]; self.depth()];
        let mut output = Vec::with_capacity(input.len());
        for &x in input {
            for (i, layer) in self.layers.iter().enumerate() {
                let (below, rest) = states.split_at_mut(i);
                let h = &mut rest[0];
                for r in 0..m {
                    let drive = if i == 0 {
                        layer.input[(r, 0)] * x
                    } else {
                        let prev = &below[i - 1];
                        (0..m).map(|c| layer.input[(r, c)] * prev[c]).sum()
                    };
                    h[r] = layer.state_diag[r] * h[r] + drive;
                }
            }
            let top = &states[self.depth() - 1];
            output.push((0..m).map(|j| self.read_out[j] * top[j]).sum());
        }
        Ok(output)
    }
}

impl Recurrence for DenseSsm {
    fn simulate(&self, input: &[C64]) -> Result<Vec<C64>> {
        ensure_finite(input, "input sequence")?;
        let m = self.width();
        let mut states = vec![nalgebra::DVector::<C64>::zeros(m); self.depth()];
        let mut output = Vec::with_capacity(input.len());
        for &x in input {
            for (i, layer) in self.layers.iter().enumerate() {
                let drive = if i == 0 {
                    layer.input.column(0) * x
                } else {
                    &layer.input * &states[i - 1]
                };
                states[i] = &layer.state * &states[i] + drive;
            }
            let top = &states[self.depth() - 1];
            output.push(self.read_out.iter().zip(top.iter()).map(|(c, h)| c * h).sum());
        }
        Ok(output)
    }
}

/// `y = rho * x` for a model, by running the recurrence.
pub fn simulate<M: Recurrence>(model: &M, input: &[C64]) -> Result<Vec<C64>> {
    model.simulate(input)
}

pub fn kernel_by_simulation<M: Recurrence>(model: &M, horizon: usize) -> Result<ConvolutionKernel> {
    model.kernel_by_simulation(horizon)
}

/// Kernel from the path-sum formula over eigenvalue tuples. Paths with a
/// zero coefficient product are pruned. Cost is `O(m^l T)` in the worst
/// case, so the simulation route is preferable for large `l * m`.
pub fn kernel_closed_form(model: &DeepLinearSsm, horizon: usize) -> Result<ConvolutionKernel> {
    if horizon == 0 {
        return Err(Error::Empty("kernel horizon"));
    }
    let depth = model.depth();
    let m = model.width();
    let mut taps = vec![ZERO; horizon];
    // scratch[k] holds F_t of the eigenvalues chosen on layers 0..=k
    let mut scratch = vec![vec![ZERO; horizon]; depth];

    fn walk(
        model: &DeepLinearSsm,
        layer: usize,
        index: usize,
        weight: C64,
        scratch: &mut [Vec<C64>],
        taps: &mut [C64],
    ) {
        let depth = model.depth();
        if layer + 1 == depth {
            let w = weight * model.read_out[index];
            if w != ZERO {
                for (tap, f) in taps.iter_mut().zip(&scratch[layer]) {
                    *tap += w * f;
                }
            }
            return;
        }
        let next = &model.layers[layer + 1];
        for j in 0..model.width() {
            let w = weight * next.input[(j, index)];
            if w == ZERO {
                continue;
            }
            let (done, todo) = scratch.split_at_mut(layer + 1);
            todo[0].copy_from_slice(&done[layer]);
            append_argument(&mut todo[0], next.state_diag[j]);
            walk(model, layer + 1, j, w, scratch, taps);
        }
    }

    let first = &model.layers[0];
    for j in 0..m {
        let w = first.input[(j, 0)];
        if w == ZERO {
            continue;
        }
        let seq = &mut scratch[0];
        seq.fill(ZERO);
        seq[0] = C64::new(1.0, 0.0);
        append_argument(seq, first.state_diag[j]);
        walk(model, 0, j, w, &mut scratch, &mut taps);
    }
    ConvolutionKernel::new(taps)
}

/// Causal convolution `y(t) = sum_{s<=t} rho(s) x(t-s)`; taps beyond the
/// kernel horizon are treated as zero. Output has the input's length.
pub fn convolve(kernel: &ConvolutionKernel, input: &[C64]) -> Vec<C64> {
    (0..input.len())
        .map(|t| {
            let reach = t.min(kernel.horizon() - 1);
            (0..=reach).map(|s| kernel.taps[s] * input[t - s]).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_layer() -> DeepLinearSsm {
        DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.1), c(-0.3, 0.4)], vec![c(0.7, 0.0), c(0.2, -0.6)]],
            vec![
                vec![c(1.0, 0.5), c(-0.4, 0.2)],
                vec![c(0.3, 0.0), c(1.1, -0.2), c(-0.5, 0.7), c(0.9, 0.1)],
            ],
            vec![c(0.6, -0.3), c(1.2, 0.4)],
        )
        .unwrap()
    }

    #[test]
    fn zero_state_matrices_give_single_tap() {
        let mut model = two_layer();
        for layer in &mut model.layers {
            layer.state_diag.fill(ZERO);
        }
        let k = model.kernel_by_simulation(6).unwrap();
        let b1 = &model.layers[0].input;
        let b2 = &model.layers[1].input;
        let expected = (model.read_out.transpose() * b2 * b1)[(0, 0)];
        assert_relative_eq!((k.taps[0] - expected).norm(), 0.0, epsilon = 1e-15);
        assert!(k.taps[1..].iter().all(|z| *z == ZERO));
    }

    #[test]
    fn scalar_geometric_response() {
        let (a, b, cc) = (c(0.8, 0.0), c(2.0, 0.0), c(-1.5, 0.0));
        let model = DeepLinearSsm::from_parts(vec![vec![a]], vec![vec![b]], vec![cc]).unwrap();
        let k = model.kernel_by_simulation(10).unwrap();
        for (t, tap) in k.taps.iter().enumerate() {
            assert_relative_eq!((tap - cc * a.powi(t as i32) * b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_read_out_gives_zero_kernel() {
        let mut model = two_layer();
        model.read_out.fill(ZERO);
        let k = model.kernel_by_simulation(8).unwrap();
        assert!(k.taps.iter().all(|z| *z == ZERO));
        assert!(kernel_closed_form(&model, 8).unwrap().taps.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn one_layer_closed_form_is_modal_sum() {
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.9, 0.0), c(0.1, 0.5), c(-0.4, 0.0)]],
            vec![vec![c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0)]],
            vec![c(0.3, 0.0), c(-1.0, 0.0), c(0.0, 2.0)],
        )
        .unwrap();
        let k = kernel_closed_form(&model, 12).unwrap();
        for t in 0..12 {
            let expected: C64 = (0..3)
                .map(|j| {
                    model.read_out[j] * model.layers[0].input[(j, 0)] * model.eigenvalue(0, j).powi(t as i32)
                })
                .sum();
            assert_relative_eq!((k.taps[t] - expected).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_simulation_two_layer() {
        let model = two_layer();
        let sim = model.kernel_by_simulation(40).unwrap();
        let closed = kernel_closed_form(&model, 40).unwrap();
        assert!(closed.relative_error(&sim) < 1e-12);
    }

    #[test]
    fn zero_eigenvalue_is_absorbed() {
        // A zero entry in layer 2 adds no argument to F_t: the kernel equals
        // the hand-computed sum with that argument dropped.
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.0), c(0.3, 0.2)], vec![c(0.0, 0.0), c(0.6, -0.1)]],
            vec![
                vec![c(1.0, 0.0), c(0.7, 0.0)],
                vec![c(0.4, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.8, 0.0)],
            ],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let closed = kernel_closed_form(&model, 16).unwrap();
        let (a1, a2, b2) = (c(0.5, 0.0), c(0.3, 0.2), c(0.6, -0.1));
        for t in 0..16 {
            let ti = t as i32;
            let f2: C64 = (0..=t).map(|s| a2.powi(s as i32) * b2.powi(ti - s as i32)).sum();
            let expected = a1.powi(ti) * 0.4 + f2 * 0.7 * 0.8;
            assert_relative_eq!((closed.taps[t] - expected).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn convolution_identities() {
        let taps: Vec<C64> = (0..6).map(|i| c(i as f64 * 0.5 - 1.0, 0.1 * i as f64)).collect();
        let kernel = ConvolutionKernel::new(taps.clone()).unwrap();
        assert_eq!(convolve(&kernel, &delta(6)), taps);

        let x: Vec<C64> = (0..6).map(|i| c((i * i) as f64, -1.0)).collect();
        let ident = ConvolutionKernel::new(delta(4)).unwrap();
        assert_eq!(convolve(&ident, &x), x);
    }

    #[test]
    fn dense_and_diagonal_simulation_agree() {
        let model = two_layer();
        let x = real_sequence(&[1.0, -0.5, 0.25, 2.0, 0.0, 1.0, -1.0, 0.3]);
        let a = model.simulate(&x).unwrap();
        let b = model.to_dense().simulate(&x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_relative_eq!((p - q).norm(), 0.0, epsilon = 1e-14);
        }
    }
}
