use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, eigen_decomposition};
use crate::model::{DeepLinearSsm, DenseSsm, DiagLayer};
use crate::C64;

pub const DEFAULT_CONDITION_CEILING: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct Diagonalized {
    pub model: DeepLinearSsm,
    /// Eigenvector condition number per layer (1 for layers that were
    /// already diagonal).
    pub conditions: Vec<f64>,
}

impl Diagonalized {
    pub fn worst_condition(&self) -> f64 {
        self.conditions.iter().copied().fold(1.0, f64::max)
    }
}

/// Conjugates each layer into its eigenbasis: with `A_i = P_i D_i P_i^-1`
/// the diagonal model has `B_1' = P_1^-1 B_1`, `B_i' = P_i^-1 B_i P_{i-1}`
/// and `C' = P_l^T C`. No norm bound survives this: entries can grow with
/// the condition numbers.
pub fn diagonalize_general(model: &DenseSsm, ceiling: f64) -> Result<Diagonalized> {
    let mut bases: Vec<(Vec<C64>, DMatrix<C64>, DMatrix<C64>)> = Vec::new();
    let mut conditions = Vec::new();
    for (i, layer) in model.layers().iter().enumerate() {
        let m = layer.state.nrows();
        let already = (0..m).all(|r| (0..m).all(|c| r == c || layer.state[(r, c)] == C64::new(0.0, 0.0)));
        if already {
            let eye = DMatrix::identity(m, m);
            bases.push((layer.state.diagonal().iter().copied().collect(), eye.clone(), eye));
            conditions.push(1.0);
            continue;
        }
        let (values, p) = eigen_decomposition(&layer.state)?;
        let condition = condition_number(&p);
        if condition.is_nan() || condition > ceiling {
            return Err(Error::IllConditionedDiagonalization {
                layer: i + 1,
                condition,
                ceiling,
            });
        }
        let p_inv = p.clone().try_inverse().ok_or(Error::IllConditionedDiagonalization {
            layer: i + 1,
            condition: f64::INFINITY,
            ceiling,
        })?;
        bases.push((values, p, p_inv));
        conditions.push(condition);
    }

    let mut layers = Vec::with_capacity(model.depth());
    for (i, layer) in model.layers().iter().enumerate() {
        let (values, _, p_inv) = &bases[i];
        let input = if i == 0 {
            p_inv * &layer.input
        } else {
            p_inv * &layer.input * &bases[i - 1].1
        };
        layers.push(DiagLayer {
            state_diag: nalgebra::DVector::from_column_slice(values),
            input,
        });
    }
    let read_out = bases[model.depth() - 1].1.transpose() * model.read_out();
    Ok(Diagonalized {
        model: DeepLinearSsm::new(layers, read_out)?,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Recurrence;
    use crate::model::DenseLayer;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_input_untouched() {
        let diag = DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.0), c(0.2, 0.1)], vec![c(0.3, 0.0), c(-0.6, 0.0)]],
            vec![
                vec![c(1.0, 0.0), c(2.0, 0.0)],
                vec![c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0), c(0.4, 0.0)],
            ],
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let out = diagonalize_general(&diag.to_dense(), DEFAULT_CONDITION_CEILING).unwrap();
        assert_eq!(out.model, diag);
        assert_eq!(out.worst_condition(), 1.0);
    }

    #[test]
    fn dense_layers_preserve_kernel() {
        let a1 = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(-0.2, 0.0), c(0.1, 0.0)]);
        let a2 = DMatrix::from_row_slice(2, 2, &[c(0.2, 0.1), c(0.0, 0.4), c(0.3, 0.0), c(-0.5, 0.0)]);
        let model = DenseSsm::new(
            vec![
                DenseLayer {
                    state: a1,
                    input: DMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(-0.5, 0.0)]),
                },
                DenseLayer {
                    state: a2,
                    input: DMatrix::from_row_slice(2, 2, &[c(0.4, 0.0), c(1.0, 0.0), c(-0.7, 0.0), c(0.2, 0.0)]),
                },
            ],
            DVector::from_vec(vec![c(1.0, 0.0), c(0.8, 0.0)]),
        )
        .unwrap();
        let out = diagonalize_general(&model, DEFAULT_CONDITION_CEILING).unwrap();
        let err = out
            .model
            .kernel_by_simulation(64)
            .unwrap()
            .relative_error(&model.kernel_by_simulation(64).unwrap());
        assert!(err < 1e-7 * out.worst_condition().max(1.0), "{err}");
    }

    #[test]
    fn jordan_block_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let model = DenseSsm::single(
            a,
            DVector::from_element(2, c(1.0, 0.0)),
            DVector::from_element(2, c(1.0, 0.0)),
        )
        .unwrap();
        assert!(matches!(
            diagonalize_general(&model, DEFAULT_CONDITION_CEILING),
            Err(Error::IllConditionedDiagonalization { layer: 1, .. })
        ));
    }
}
