use nalgebra::{DMatrix, DVector};

use crate::model::{DeepLinearSsm, DenseLayer, DenseSsm};
use crate::C64;

/// One-layer model of width `l m` whose hidden state stacks the `l` hidden
/// states of `model`.
pub fn collapse(model: &DeepLinearSsm) -> DenseSsm {
    collapse_dense(&model.to_dense())
}

/// Block lower-triangular realization of a (possibly dense) deep model:
/// diagonal blocks `A_i`, block `(i, j)` below the diagonal equal to
/// `B_i B_{i-1} .. B_{j+1} A_j`, read-in blocks `B_i .. B_1` and read-out
/// `(0, .., 0, C)`.
pub fn collapse_dense(model: &DenseSsm) -> DenseSsm {
    let l = model.depth();
    if l == 1 {
        return model.clone();
    }
    let m = model.width();
    let n = l * m;
    let layers = model.layers();

    let mut state = DMatrix::<C64>::zeros(n, n);
    for j in 0..l {
        state.view_mut((j * m, j * m), (m, m)).copy_from(&layers[j].state);
        // running product B_i .. B_{j+1}
        let mut chain = DMatrix::<C64>::identity(m, m);
        for i in j + 1..l {
            chain = &layers[i].input * chain;
            let block = &chain * &layers[j].state;
            state.view_mut((i * m, j * m), (m, m)).copy_from(&block);
        }
    }

    let mut read_in = DMatrix::<C64>::zeros(n, 1);
    let mut drive = layers[0].input.clone();
    read_in.view_mut((0, 0), (m, 1)).copy_from(&drive);
    for (i, layer) in layers.iter().enumerate().skip(1) {
        drive = &layer.input * drive;
        read_in.view_mut((i * m, 0), (m, 1)).copy_from(&drive);
    }

    let mut read_out = DVector::<C64>::zeros(n);
    read_out.rows_mut((l - 1) * m, m).copy_from(model.read_out());

    DenseSsm {
        layers: vec![DenseLayer {
            state,
            input: read_in,
        }],
        read_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Recurrence;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_by_two() -> DeepLinearSsm {
        DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.2), c(-0.6, 0.1)], vec![c(0.3, -0.3), c(0.8, 0.0)]],
            vec![
                vec![c(1.0, 0.0), c(0.5, -0.5)],
                vec![c(0.2, 0.1), c(-1.0, 0.0), c(0.4, 0.4), c(0.9, -0.3)],
            ],
            vec![c(1.5, 0.0), c(-0.7, 0.2)],
        )
        .unwrap()
    }

    #[test]
    fn single_layer_unchanged() {
        let model = DeepLinearSsm::from_parts(
            vec![vec![c(0.5, 0.0), c(0.1, 0.2)]],
            vec![vec![c(1.0, 0.0), c(2.0, 0.0)]],
            vec![c(0.3, 0.0), c(0.4, 0.0)],
        )
        .unwrap();
        assert_eq!(collapse(&model), model.to_dense());
    }

    #[test]
    fn two_layers_preserve_kernel() {
        let model = two_by_two();
        let flat = collapse(&model);
        assert_eq!(flat.width(), 4);
        assert_eq!(flat.depth(), 1);
        let a = model.kernel_by_simulation(48).unwrap();
        let b = flat.kernel_by_simulation(48).unwrap();
        assert!(b.relative_error(&a) < 1e-12);
    }

    #[test]
    fn zero_state_collapses_to_nilpotent() {
        let mut model = two_by_two();
        for layer in &mut model.layers {
            layer.state_diag.fill(c(0.0, 0.0));
        }
        let flat = collapse(&model);
        let a0 = &flat.layers()[0].state;
        assert!((a0 * a0).iter().all(|z| z.norm() == 0.0));
        let k = flat.kernel_by_simulation(8).unwrap();
        assert!(k.taps[1..].iter().all(|z| z.norm() == 0.0));
        assert!(k.taps[0].norm() > 0.0);
    }
}
