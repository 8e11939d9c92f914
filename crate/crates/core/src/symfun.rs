//! Complete homogeneous symmetric sums and the identities built on them.
//!
//! `F_k(a_1, .., a_n)` denotes the sum of all monomials of total degree `k`
//! in `n` variables. For pairwise distinct arguments it also has the
//! rational form `sum_i a_i^(k+n-1) / prod_{j != i} (a_i - a_j)`. The
//! recurrence form used by [`homogeneous_sum`] is valid for repeated and
//! zero arguments, so it is the one every kernel evaluation goes through;
//! [`f_rational`] is kept for cross-checking.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Relative tolerance below which two eigenvalues count as coincident.
pub const DISTINCT_RTOL: f64 = 1e-10;

/// `|a - b| <= 1e-10 * max(|a|, |b|, 1)`.
pub fn coincide(a: C64, b: C64) -> bool {
    (a - b).norm() <= DISTINCT_RTOL * a.norm().max(b.norm()).max(1.0)
}

/// Principal argument mapped into `[-pi, pi)`.
pub fn principal_arg(z: C64) -> f64 {
    let arg = z.arg();
    if arg >= PI {
        arg - 2.0 * PI
    } else {
        arg
    }
}

/// Orders by modulus, ties broken by principal argument.
pub fn modulus_order(a: &C64, b: &C64) -> Ordering {
    a.norm()
        .total_cmp(&b.norm())
        .then_with(|| principal_arg(*a).total_cmp(&principal_arg(*b)))
}

pub(crate) fn ensure_finite(values: &[C64], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// First pair `(i, j)`, `i < j`, of coincident entries.
pub fn find_coincident(values: &[C64]) -> Option<(usize, usize)> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if coincide(values[i], values[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Complete homogeneous sum of degree `k` in `alphas`.
pub fn homogeneous_sum(alphas: &[C64], k: usize) -> Result<C64> {
    if alphas.is_empty() {
        return Err(Error::Empty("homogeneous_sum arguments"));
    }
    ensure_finite(alphas, "homogeneous_sum arguments")?;
    Ok(homogeneous_sequence(alphas, k + 1)[k])
}

/// `F_0, .., F_{len-1}` of `alphas`. With no arguments this is the unit
/// impulse, the empty product.
pub fn homogeneous_sequence(alphas: &[C64], len: usize) -> Vec<C64> {
    let mut seq = vec![C64::new(0.0, 0.0); len];
    if let Some(first) = seq.first_mut() {
        *first = C64::new(1.0, 0.0);
    }
    for &alpha in alphas {
        append_argument(&mut seq, alpha);
    }
    seq
}

/// Turns `F_t(a_1..a_{n-1})` into `F_t(a_1..a_n)` in place via
/// `F_t(.., a_n) = F_t(..) + a_n * F_{t-1}(.., a_n)`.
pub fn append_argument(seq: &mut [C64], alpha: C64) {
    for t in 1..seq.len() {
        let prev = seq[t - 1];
        seq[t] += alpha * prev;
    }
}

/// Rational (Lagrange) form of `F_k`. Requires pairwise distinct inputs.
pub fn f_rational(alphas: &[C64], k: usize) -> Result<C64> {
    if alphas.is_empty() {
        return Err(Error::Empty("f_rational arguments"));
    }
    ensure_finite(alphas, "f_rational arguments")?;
    if let Some((first, second)) = find_coincident(alphas) {
        return Err(Error::DegenerateEigenvalues { first, second });
    }
    let n = alphas.len();
    let exponent = (k + n - 1) as i32;
    let total = alphas
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            let denom: C64 = alphas
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &aj)| ai - aj)
                .product();
            ai.powi(exponent) / denom
        })
        .sum();
    Ok(total)
}

/// Weights `H_1..H_n` with `sum_k H_k F_t(b_1..b_k) = sum_k Z_k b_k^t` for
/// every `t >= 0`.
///
/// `betas` must be nonzero, pairwise distinct and sorted by non-decreasing
/// modulus; under that ordering every `|H_k| <= 2^n max |Z|`.
pub fn telescope_coefficients(betas: &[C64], zs: &[C64]) -> Result<Vec<C64>> {
    if betas.len() != zs.len() {
        return Err(Error::LengthMismatch {
            expected: betas.len(),
            actual: zs.len(),
        });
    }
    ensure_finite(betas, "telescope eigenvalues")?;
    ensure_finite(zs, "telescope weights")?;
    if let Some(index) = betas.iter().position(|b| *b == C64::new(0.0, 0.0)) {
        return Err(Error::ZeroEigenvalue { index });
    }
    if let Some(index) = (1..betas.len()).find(|&i| betas[i].norm() < betas[i - 1].norm()) {
        return Err(Error::UnsortedInput { index });
    }
    if let Some((first, second)) = find_coincident(betas) {
        return Err(Error::DegenerateEigenvalues { first, second });
    }

    let n = betas.len();
    let mut hs = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for j in k..n {
            // ratios kept below 2 in modulus by the sort order
            let mut term = zs[j] * (betas[k] / betas[j]);
            for p in 0..k {
                term *= (betas[j] - betas[p]) / betas[j];
            }
            acc += term;
        }
        hs.push(acc);
    }
    Ok(hs)
}
