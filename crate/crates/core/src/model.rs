//! Model types: diagonal deep linear SSMs, their dense generalisation,
//! one-layer modal realizations and finite convolution kernels.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symfun::ensure_finite;
use crate::C64;

/// One layer of a diagonal deep SSM: `h(t) = diag(a) h(t-1) + B u(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagLayer {
    pub state_diag: DVector<C64>,
    /// `m x 1` for the first layer, `m x m` for the rest.
    pub input: DMatrix<C64>,
}

/// One layer with a general (dense) state matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub state: DMatrix<C64>,
    pub input: DMatrix<C64>,
}

/// Deep linear SSM with diagonal state matrices and identity activations.
///
/// Layer `i` feeds layer `i + 1` at the same time step; the scalar output
/// is `y(t) = C^T h_l(t)`. Hidden states start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DeepLinearSsm {
    pub(crate) layers: Vec<DiagLayer>,
    pub(crate) read_out: DVector<C64>,
}

/// Deep linear SSM whose state matrices are arbitrary square matrices.
/// A one-layer `DenseSsm` is the general single-layer model.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSsm {
    pub(crate) layers: Vec<DenseLayer>,
    pub(crate) read_out: DVector<C64>,
}

/// What to do when a state matrix has spectral radius `>= 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StabilityPolicy {
    #[default]
    Warn,
    Strict,
}

fn check_shapes(dims: &[(usize, usize, (usize, usize))], read_out: usize) -> Result<usize> {
    let Some(&(first_state, _, _)) = dims.first() else {
        return Err(Error::Empty("model layers"));
    };
    let m = first_state;
    if m == 0 {
        return Err(Error::WidthMismatch("width must be at least 1".into()));
    }
    for (i, &(state_rows, state_cols, (in_rows, in_cols))) in dims.iter().enumerate() {
        let expected_in = if i == 0 { (m, 1) } else { (m, m) };
        if state_rows != m || state_cols != m {
            return Err(Error::WidthMismatch(format!(
                "layer {}: state is {state_rows}x{state_cols}, expected {m}x{m}",
                i + 1
            )));
        }
        if (in_rows, in_cols) != expected_in {
            return Err(Error::WidthMismatch(format!(
                "layer {}: input matrix is {in_rows}x{in_cols}, expected {}x{}",
                i + 1,
                expected_in.0,
                expected_in.1
            )));
        }
    }
    if read_out != m {
        return Err(Error::WidthMismatch(format!(
            "read-out has length {read_out}, expected {m}"
        )));
    }
    Ok(m)
}

fn apply_policy(radii: &[f64], policy: StabilityPolicy) -> Result<()> {
    for (i, &radius) in radii.iter().enumerate() {
        if radius >= 1.0 {
            match policy {
                StabilityPolicy::Warn => {
                    warn!("layer {} has spectral radius {radius} >= 1", i + 1)
                }
                StabilityPolicy::Strict => {
                    return Err(Error::Unstable {
                        layer: i + 1,
                        radius,
                    })
                }
            }
        }
    }
    Ok(())
}

impl DeepLinearSsm {
    pub fn new(layers: Vec<DiagLayer>, read_out: DVector<C64>) -> Result<Self> {
        let dims: Vec<_> = layers
            .iter()
            .map(|l| (l.state_diag.len(), l.state_diag.len(), l.input.shape()))
            .collect();
        check_shapes(&dims, read_out.len())?;
        for layer in &layers {
            ensure_finite(layer.state_diag.as_slice(), "state diagonal")?;
            ensure_finite(layer.input.as_slice(), "input matrix")?;
        }
        ensure_finite(read_out.as_slice(), "read-out")?;
        Ok(Self { layers, read_out })
    }

    /// Builds a model from plain vectors: `state_diags[i]` is the diagonal of
    /// `A_{i+1}`, `inputs[0]` the read-in vector and `inputs[i]` (row-major,
    /// `m x m`) the mixing matrix `B_{i+1}`.
    pub fn from_parts(
        state_diags: Vec<Vec<C64>>,
        inputs: Vec<Vec<C64>>,
        read_out: Vec<C64>,
    ) -> Result<Self> {
        if state_diags.len() != inputs.len() {
            return Err(Error::LengthMismatch {
                expected: state_diags.len(),
                actual: inputs.len(),
            });
        }
        let m = read_out.len();
        let mut layers = Vec::with_capacity(state_diags.len());
        for (i, (diag, input)) in state_diags.into_iter().zip(inputs).enumerate() {
            let cols = if i == 0 { 1 } else { m };
            if input.len() != m * cols {
                return Err(Error::WidthMismatch(format!(
                    "layer {}: input has {} entries, expected {}",
                    i + 1,
                    input.len(),
                    m * cols
                )));
            }
            layers.push(DiagLayer {
                state_diag: DVector::from_vec(diag),
                input: DMatrix::from_row_slice(m, cols, &input),
            });
        }
        Self::new(layers, DVector::from_vec(read_out))
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self) -> usize {
        self.read_out.len()
    }

    pub fn layers(&self) -> &[DiagLayer] {
        &self.layers
    }

    pub fn read_out(&self) -> &DVector<C64> {
        &self.read_out
    }

    /// `alpha(i, j)`, the `j`-th diagonal entry of layer `i` (zero-based).
    pub fn eigenvalue(&self, layer: usize, index: usize) -> C64 {
        self.layers[layer].state_diag[index]
    }

    pub fn spectral_radii(&self) -> Vec<f64> {
        self.layers
            .iter()
            .map(|l| l.state_diag.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect()
    }

    pub fn check_stability(&self, policy: StabilityPolicy) -> Result<()> {
        apply_policy(&self.spectral_radii(), policy)
    }

    /// Largest modulus over the read-in, mixing and read-out entries.
    pub fn max_param_modulus(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.input.iter())
            .chain(self.read_out.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseSsm {
        DenseSsm {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer {
                    state: DMatrix::from_diagonal(&l.state_diag),
                    input: l.input.clone(),
                })
                .collect(),
            read_out: self.read_out.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.layers
            .iter()
            .flat_map(|l| l.state_diag.iter().chain(l.input.iter()))
            .chain(self.read_out.iter())
            .all(|z| z.im == 0.0)
    }
}

impl DenseSsm {
    pub fn new(layers: Vec<DenseLayer>, read_out: DVector<C64>) -> Result<Self> {
        let dims: Vec<_> = layers
            .iter()
            .map(|l| (l.state.nrows(), l.state.ncols(), l.input.shape()))
            .collect();
        check_shapes(&dims, read_out.len())?;
        for layer in &layers {
            ensure_finite(layer.state.as_slice(), "state matrix")?;
            ensure_finite(layer.input.as_slice(), "input matrix")?;
        }
        ensure_finite(read_out.as_slice(), "read-out")?;
        Ok(Self { layers, read_out })
    }

    /// One-layer model `(A, b, c)`.
    pub fn single(state: DMatrix<C64>, read_in: DVector<C64>, read_out: DVector<C64>) -> Result<Self> {
        let n = read_in.len();
        Self::new(
            vec![DenseLayer {
                state,
                input: DMatrix::from_column_slice(n, 1, read_in.as_slice()),
            }],
            read_out,
        )
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self) -> usize {
        self.read_out.len()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn read_out(&self) -> &DVector<C64> {
        &self.read_out
    }

    /// Returns the diagonal model if every state matrix is exactly diagonal.
    pub fn as_diagonal(&self) -> Option<DeepLinearSsm> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let n = l.state.nrows();
            for r in 0..n {
                for c in 0..n {
                    if r != c && l.state[(r, c)] != C64::new(0.0, 0.0) {
                        return None;
                    }
                }
            }
            layers.push(DiagLayer {
                state_diag: l.state.diagonal(),
                input: l.input.clone(),
            });
        }
        Some(DeepLinearSsm {
            layers,
            read_out: self.read_out.clone(),
        })
    }

    pub fn spectral_radii(&self) -> Result<Vec<f64>> {
        self.layers
            .iter()
            .map(|l| {
                let eig = linalg::eigenvalues(&l.state)?;
                Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
            })
            .collect()
    }

    pub fn check_stability(&self, policy: StabilityPolicy) -> Result<()> {
        apply_policy(&self.spectral_radii()?, policy)
    }

    pub fn max_param_modulus(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.input.iter())
            .chain(self.read_out.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// A single mode `(sigma, b, c)` of a one-layer diagonal SSM; it contributes
/// `c * b * sigma^t` to the kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub eigenvalue: C64,
    pub read_in: C64,
    pub read_out: C64,
}

impl Mode {
    pub fn new(eigenvalue: C64, read_in: C64, read_out: C64) -> Self {
        Self {
            eigenvalue,
            read_in,
            read_out,
        }
    }

    pub fn weight(&self) -> C64 {
        self.read_in * self.read_out
    }
}

/// Width-`K` one-layer diagonal SSM in modal form.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShallowRealization {
    pub modes: Vec<Mode>,
}

impl ShallowRealization {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Empty("realization modes"));
        }
        for m in &modes {
            ensure_finite(&[m.eigenvalue, m.read_in, m.read_out], "mode")?;
        }
        Ok(Self { modes })
    }

    pub fn width(&self) -> usize {
        self.modes.len()
    }

    /// Largest `|b_i c_i|`.
    pub fn max_weight(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.weight().norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|b_i|` or `|c_i|`.
    pub fn max_param_modulus(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| [m.read_in.norm(), m.read_out.norm()])
            .fold(0.0, f64::max)
    }

    pub fn kernel(&self, horizon: usize) -> ConvolutionKernel {
        let mut taps = vec![C64::new(0.0, 0.0); horizon];
        for mode in &self.modes {
            let w = mode.weight();
            let mut power = C64::new(1.0, 0.0);
            for tap in taps.iter_mut() {
                *tap += w * power;
                power *= mode.eigenvalue;
            }
        }
        ConvolutionKernel { taps }
    }

    /// The same modes as a one-layer diagonal deep model.
    pub fn to_model(&self) -> DeepLinearSsm {
        let diag = DVector::from_iterator(self.width(), self.modes.iter().map(|m| m.eigenvalue));
        let read_in = DMatrix::from_iterator(self.width(), 1, self.modes.iter().map(|m| m.read_in));
        let read_out = DVector::from_iterator(self.width(), self.modes.iter().map(|m| m.read_out));
        DeepLinearSsm {
            layers: vec![DiagLayer {
                state_diag: diag,
                input: read_in,
            }],
            read_out,
        }
    }

    /// Reads the modes of a one-layer diagonal model.
    pub fn from_model(model: &DeepLinearSsm) -> Result<Self> {
        if model.depth() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "expected a one-layer model, got depth {}",
                model.depth()
            )));
        }
        let layer = &model.layers[0];
        Self::new(
            (0..model.width())
                .map(|j| Mode::new(layer.state_diag[j], layer.input[(j, 0)], model.read_out[j]))
                .collect(),
        )
    }
}

/// Finite prefix `rho(0..T-1)` of an impulse response.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionKernel {
    pub taps: Vec<C64>,
}

impl ConvolutionKernel {
    pub fn new(taps: Vec<C64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Empty("kernel taps"));
        }
        ensure_finite(&taps, "kernel taps")?;
        Ok(Self { taps })
    }

    pub fn horizon(&self) -> usize {
        self.taps.len()
    }

    /// `max_t |a(t) - b(t)| / max_t |b(t)|`, or the absolute difference when
    /// `other` is identically zero.
    pub fn relative_error(&self, other: &ConvolutionKernel) -> f64 {
        let diff = self
            .taps
            .iter()
            .zip(&other.taps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = other.taps.iter().map(|b| b.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    pub fn max_abs_diff(&self, other: &ConvolutionKernel) -> f64 {
        self.taps
            .iter()
            .zip(&other.taps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
