//! Dense complex helpers on top of nalgebra's Schur decomposition.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::C64;

const SCHUR_EPS: f64 = 1e-15;

/// `A = Q T Q^*` with `Q` unitary and `T` upper triangular.
pub fn schur(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let schur = Schur::try_new(a.clone(), SCHUR_EPS, 0)
        .ok_or_else(|| Error::Decomposition("Schur iteration did not converge".into()))?;
    Ok(schur.unpack())
}

pub fn eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let (_, t) = schur(a)?;
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenvalues and unit-norm right eigenvectors (as columns), recovered by
/// back-substitution on the Schur factor. A defective matrix yields nearly
/// parallel columns, which shows up in [`condition_number`].
pub fn eigen_decomposition(a: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let (q, t) = schur(a)?;
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * scale;
    let values: Vec<C64> = t.diagonal().iter().copied().collect();

    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut rhs = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                rhs -= t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            y[(i, k)] = rhs / denom;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 && norm.is_finite() {
            col /= C64::new(norm, 0.0);
        }
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Decomposition("non-finite eigenvector".into()));
    }
    Ok((values, v))
}

/// Two-norm condition number `sigma_max / sigma_min`; infinite if singular.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `||A A^* - A^* A||_F / ||A||_F^2`, zero for normal matrices.
pub fn normality_defect(a: &DMatrix<C64>) -> f64 {
    let adj = a.adjoint();
    let comm = a * &adj - &adj * a;
    let scale = a.norm_squared();
    if scale == 0.0 {
        0.0
    } else {
        comm.norm() / scale
    }
}

pub fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.4, 0.1),
                c(0.2, 0.0),
                c(-0.3, 0.2),
                c(0.0, 0.5),
                c(-0.1, 0.0),
                c(0.6, -0.2),
                c(0.3, 0.0),
                c(0.1, 0.1),
                c(0.2, 0.3),
            ],
        );
        let (values, v) = eigen_decomposition(&a).unwrap();
        for (k, lambda) in values.iter().enumerate() {
            let col = v.column(k).into_owned();
            let residual = (&a * &col - col * *lambda).norm();
            assert!(residual < 1e-12, "residual {residual}");
        }
        assert!(condition_number(&v) < 1e3);
    }

    #[test]
    fn jordan_block_is_ill_conditioned() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let (_, v) = eigen_decomposition(&a).unwrap();
        assert!(condition_number(&v) > 1e8);
    }

    #[test]
    fn rotation_is_normal() {
        let (s, co) = (0.3f64.sin(), 0.3f64.cos());
        let a = DMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
        assert!(normality_defect(&a) < 1e-15);
        let mut vals = eigenvalues(&a).unwrap();
        vals.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert_relative_eq!(vals[0].im, -s, epsilon = 1e-14);
        assert_relative_eq!(vals[1].re, co, epsilon = 1e-14);

        let shear = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(normality_defect(&shear) > 0.1);
    }
}
