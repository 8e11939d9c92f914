use crate::error::{Error, Result};
use crate::linalg::{normality_defect, schur};
use crate::model::{DenseSsm, Mode, ShallowRealization};

/// Largest `||A A^* - A^* A||_F / ||A||_F^2` accepted as normal.
pub const NORMALITY_TOL: f64 = 1e-10;

/// Unitary diagonalization `A = U S U^*` of a normal one-layer model. The
/// modal read-in is `U^* b` and the read-out `U^T c`; both keep their
/// two-norms, so their infinity norms grow by at most `sqrt(K)`.
pub fn reduce_normal(model: &DenseSsm) -> Result<ShallowRealization> {
    if model.depth() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "expected a one-layer model, got depth {}",
            model.depth()
        )));
    }
    let layer = &model.layers()[0];
    let ratio = normality_defect(&layer.state);
    if ratio > NORMALITY_TOL {
        return Err(Error::NotNormal { ratio });
    }
    let (u, t) = schur(&layer.state)?;
    let read_in = u.adjoint() * &layer.input;
    let read_out = u.transpose() * model.read_out();
    ShallowRealization::new(
        (0..model.width())
            .map(|j| Mode::new(t[(j, j)], read_in[(j, 0)], read_out[j]))
            .collect(),
    )
}
