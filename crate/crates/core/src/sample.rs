//! Seeded random models and teachers.
//!
//! Every generator takes an explicit RNG. [`stream`] derives independent
//! ChaCha streams from one seed, so parallel cells never share state.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{DeepLinearSsm, DenseSsm, DiagLayer, Mode, ShallowRealization};
use crate::symfun::find_coincident;
use crate::C64;

/// Stream `id` of the generator seeded with `seed`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform modulus in `[r_min, r_max]`, uniform phase; real when `real`
/// (random sign).
pub fn eigenvalue<R: Rng + ?Sized>(rng: &mut R, r_min: f64, r_max: f64, real: bool) -> C64 {
    let r = rng.random_range(r_min..=r_max);
    if real {
        if rng.random_bool(0.5) {
            C64::new(r, 0.0)
        } else {
            C64::new(-r, 0.0)
        }
    } else {
        C64::from_polar(r, rng.random_range(-PI..PI))
    }
}

/// Circular complex Gaussian with `E|z|^2 = scale^2` (real Gaussian with
/// standard deviation `scale` when `real`).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, scale: f64, real: bool) -> C64 {
    if real {
        let x: f64 = rng.sample(StandardNormal);
        C64::new(scale * x, 0.0)
    } else {
        let (x, y): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        C64::new(x, y) * (scale / 2f64.sqrt())
    }
}

/// Uniform on the disk of radius `radius` (the interval when `real`).
pub fn in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64, real: bool) -> C64 {
    if real {
        C64::new(rng.random_range(-radius..=radius), 0.0)
    } else {
        C64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(-PI..PI))
    }
}

/// `count` eigenvalues with moduli in `[r_min, r_max]`, pairwise distinct.
pub fn distinct_eigenvalues<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    r_min: f64,
    r_max: f64,
    real: bool,
) -> Vec<C64> {
    loop {
        let values: Vec<C64> = (0..count).map(|_| eigenvalue(rng, r_min, r_max, real)).collect();
        if !has_close_pair(&values, 1e-6) {
            return values;
        }
    }
}

fn has_close_pair(values: &[C64], gap: f64) -> bool {
    find_coincident(values).is_some()
        || values
            .iter()
            .enumerate()
            .any(|(i, a)| values[i + 1..].iter().any(|b| (a - b).norm() < gap))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub r_min: f64,
    pub r_max: f64,
    /// Standard deviation of the read-in, mixing and read-out entries.
    pub scale: f64,
    pub real: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            r_min: 0.3,
            r_max: 0.95,
            scale: 1.0,
            real: false,
        }
    }
}

/// Diagonal deep model with Gaussian couplings. Eigenvalues are distinct
/// within each layer and across layers.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, depth: usize, width: usize, spec: ModelSpec) -> DeepLinearSsm {
    let all = distinct_eigenvalues(rng, depth * width, spec.r_min, spec.r_max, spec.real);
    let mut layers = Vec::with_capacity(depth);
    for (i, diag) in all.chunks(width).enumerate() {
        let cols = if i == 0 { 1 } else { width };
        layers.push(DiagLayer {
            state_diag: DVector::from_column_slice(diag),
            input: DMatrix::from_fn(width, cols, |_, _| gaussian(rng, spec.scale, spec.real)),
        });
    }
    let read_out = DVector::from_fn(width, |_, _| gaussian(rng, spec.scale, spec.real));
    DeepLinearSsm::new(layers, read_out).expect("generated shapes are consistent")
}

/// Dense deep model `A_i = P_i D_i P_i^-1` with random well-conditioned
/// `P_i` (identity plus a small Gaussian perturbation).
pub fn random_dense_model<R: Rng + ?Sized>(rng: &mut R, depth: usize, width: usize, spec: ModelSpec) -> DenseSsm {
    let diag = random_model(rng, depth, width, spec);
    let layers = diag
        .layers()
        .iter()
        .map(|l| {
            let p = DMatrix::<C64>::identity(width, width)
                + DMatrix::from_fn(width, width, |_, _| gaussian(rng, 0.3, spec.real));
            let p_inv = p.clone().try_inverse().expect("perturbed identity is invertible");
            crate::model::DenseLayer {
                state: &p * DMatrix::from_diagonal(&l.state_diag) * p_inv,
                input: l.input.clone(),
            }
        })
        .collect();
    DenseSsm::new(layers, diag.read_out().clone()).expect("generated shapes are consistent")
}

/// Teacher with `modes` distinct eigenvalues and `|b_i|, |c_i| <= c1`, i.e.
/// a member of the one-layer class with bound `c1`.
pub fn random_teacher<R: Rng + ?Sized>(rng: &mut R, modes: usize, c1: f64, real: bool) -> ShallowRealization {
    let eig = distinct_eigenvalues(rng, modes, 0.3, 0.95, real);
    let modes = eig
        .into_iter()
        .map(|s| Mode::new(s, in_disk(rng, c1, real), in_disk(rng, c1, real)))
        .collect();
    ShallowRealization::new(modes).expect("generated modes are finite")
}

/// Rescales read-ins so that `max_i |b_i c_i|` equals `target`.
pub fn with_max_weight(teacher: &ShallowRealization, target: f64) -> ShallowRealization {
    let current = teacher.max_weight();
    let factor = if current > 0.0 { target / current } else { 0.0 };
    ShallowRealization {
        modes: teacher
            .modes
            .iter()
            .map(|m| Mode::new(m.eigenvalue, m.read_in * factor, m.read_out))
            .collect(),
    }
}

/// Haar-like unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng, 1.0, false));
    g.qr().q()
}

/// One-layer model `A = U diag(sigma) U^*` with a random unitary `U`, and
/// read-in/read-out entries in the disk of radius `c1`.
pub fn random_normal_teacher<R: Rng + ?Sized>(rng: &mut R, modes: usize, c1: f64) -> DenseSsm {
    let sigma = distinct_eigenvalues(rng, modes, 0.3, 0.95, false);
    let u = random_unitary(rng, modes);
    let a = &u * DMatrix::from_diagonal(&DVector::from_vec(sigma)) * u.adjoint();
    let b = DVector::from_fn(modes, |_, _| in_disk(rng, c1, false));
    let c = DVector::from_fn(modes, |_, _| in_disk(rng, c1, false));
    DenseSsm::single(a, b, c).expect("generated shapes are consistent")
}
