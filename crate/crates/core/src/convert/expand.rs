//! Coefficient expansion of a deep diagonal model into exponential modes.
//!
//! For a path `j_1 -> .. -> j_l` with distinct nonzero eigenvalues the
//! partial-fraction form `F_t(b_1..b_n) = sum_i b_i^t / prod_{k != i}(1 -
//! b_k/b_i)` splits the path's contribution across its eigenvalues. Summing
//! over every path through `(layer, index)` gives the weight `xi` of that
//! eigenvalue. Zero eigenvalues drop out of `F_t`; a path made only of
//! zeros contributes `0^t`, which is booked on its first-layer entry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConvolutionKernel, DeepLinearSsm, Mode, ShallowRealization};
use crate::symfun::coincide;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEntry {
    /// 1-based layer.
    pub layer: usize,
    /// 1-based position on the layer's diagonal.
    pub index: usize,
    #[serde(with = "crate::io::complex")]
    pub lambda: C64,
    #[serde(with = "crate::io::complex")]
    pub xi: C64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTable {
    pub entries: Vec<ExpansionEntry>,
}

impl ExpansionTable {
    /// `sum xi lambda^t`, with `0^0 = 1`.
    pub fn kernel(&self, horizon: usize) -> ConvolutionKernel {
        let taps = (0..horizon)
            .map(|t| {
                self.entries
                    .iter()
                    .map(|e| e.xi * e.lambda.powi(t as i32))
                    .sum()
            })
            .collect();
        ConvolutionKernel { taps }
    }

    pub fn max_coefficient_modulus(&self) -> f64 {
        self.entries.iter().map(|e| e.xi.norm()).fold(0.0, f64::max)
    }

    /// The table as a one-layer modal model with unit read-out.
    pub fn to_realization(&self) -> Result<ShallowRealization> {
        ShallowRealization::new(
            self.entries
                .iter()
                .map(|e| Mode::new(e.lambda, e.xi, C64::new(1.0, 0.0)))
                .collect(),
        )
    }
}

pub fn expand_coefficients(model: &DeepLinearSsm) -> Result<ExpansionTable> {
    let l = model.depth();
    let m = model.width();
    check_resonance(model)?;

    let mut xi = vec![vec![ZERO; m]; l];
    let mut path = vec![0usize; l];

    fn walk(
        model: &DeepLinearSsm,
        layer: usize,
        weight: C64,
        path: &mut [usize],
        xi: &mut [Vec<C64>],
    ) {
        let l = model.depth();
        if layer == l {
            let w = weight * model.read_out()[path[l - 1]];
            if w == ZERO {
                return;
            }
            let lambdas: Vec<C64> = (0..l).map(|i| model.eigenvalue(i, path[i])).collect();
            if lambdas.iter().all(|z| *z == ZERO) {
                xi[0][path[0]] += w;
                return;
            }
            for (target, &lam) in lambdas.iter().enumerate() {
                if lam == ZERO {
                    continue;
                }
                let denom: C64 = lambdas
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != target)
                    .map(|(_, &other)| C64::new(1.0, 0.0) - other / lam)
                    .product();
                xi[target][path[target]] += w / denom;
            }
            return;
        }
        let input = &model.layers()[layer].input;
        for j in 0..model.width() {
            let coeff = if layer == 0 {
                input[(j, 0)]
            } else {
                input[(j, path[layer - 1])]
            };
            let w = weight * coeff;
            if w == ZERO {
                continue;
            }
            path[layer] = j;
            walk(model, layer + 1, w, path, xi);
        }
    }

    walk(model, 0, C64::new(1.0, 0.0), &mut path, &mut xi);

    let entries = (0..l)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| ExpansionEntry {
            layer: i + 1,
            index: j + 1,
            lambda: model.eigenvalue(i, j),
            xi: xi[i][j],
        })
        .collect();
    Ok(ExpansionTable { entries })
}

/// Nonzero eigenvalues on different layers must not coincide: they would
/// share a path and zero out a partial-fraction denominator.
fn check_resonance(model: &DeepLinearSsm) -> Result<()> {
    let l = model.depth();
    let m = model.width();
    for a in 0..l {
        for b in a + 1..l {
            for i in 0..m {
                for j in 0..m {
                    let (x, y) = (model.eigenvalue(a, i), model.eigenvalue(b, j));
                    if x != ZERO && y != ZERO && coincide(x, y) {
                        return Err(Error::ResonantEigenvalues {
                            layer_a: a + 1,
                            index_a: i + 1,
                            layer_b: b + 1,
                            index_b: j + 1,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Recurrence;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_layer_coefficients_are_products() {
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.0), c(0.1, 0.3), c(0.0, 0.0)]],
            vec![vec![c(2.0, 0.0), c(1.0, -1.0), c(3.0, 0.0)]],
            vec![c(0.5, 0.0), c(0.0, 2.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let table = expand_coefficients(&model).unwrap();
        let xis: Vec<C64> = table.entries.iter().map(|e| e.xi).collect();
        assert_eq!(xis, vec![c(1.0, 0.0), c(2.0, 2.0), c(-3.0, 0.0)]);
        let err = table
            .kernel(20)
            .relative_error(&model.kernel_by_simulation(20).unwrap());
        assert!(err < 1e-15);
    }

    #[test]
    fn two_layer_reproduces_kernel() {
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.1), c(-0.3, 0.4)], vec![c(0.7, 0.0), c(0.2, -0.6)]],
            vec![
                vec![c(1.0, 0.5), c(-0.4, 0.2)],
                vec![c(0.3, 0.0), c(1.1, -0.2), c(-0.5, 0.7), c(0.9, 0.1)],
            ],
            vec![c(0.6, -0.3), c(1.2, 0.4)],
        )
        .unwrap();
        let table = expand_coefficients(&model).unwrap();
        assert_eq!(table.entries.len(), 4);
        let err = table
            .kernel(64)
            .relative_error(&model.kernel_by_simulation(64).unwrap());
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn all_zero_path_books_delta() {
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.0, 0.0), c(0.4, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]],
            vec![
                vec![c(1.0, 0.0), c(1.0, 0.0)],
                vec![c(2.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            ],
            vec![c(1.0, 0.0), c(3.0, 0.0)],
        )
        .unwrap();
        let table = expand_coefficients(&model).unwrap();
        let err = table
            .kernel(12)
            .max_abs_diff(&model.kernel_by_simulation(12).unwrap());
        assert!(err < 1e-15);
    }

    #[test]
    fn cross_layer_coincidence_rejected() {
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.0), c(0.2, 0.0)], vec![c(0.3, 0.0), c(0.5, 0.0)]],
            vec![
                vec![c(1.0, 0.0), c(1.0, 0.0)],
                vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            ],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            expand_coefficients(&model),
            Err(Error::ResonantEigenvalues {
                layer_a: 1,
                index_a: 1,
                layer_b: 2,
                index_b: 2
            })
        ));
    }
}
