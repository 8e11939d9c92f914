use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("width mismatch: {0}")]
    WidthMismatch(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("eigenvalues {first} and {second} coincide within tolerance")]
    DegenerateEigenvalues { first: usize, second: usize },

    #[error("eigenvalue {index} is zero")]
    ZeroEigenvalue { index: usize },

    #[error("eigenvalues are not sorted by non-decreasing modulus at index {index}")]
    UnsortedInput { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "resonant eigenvalues: layer {layer_a} index {index_a} and layer {layer_b} index {index_b}"
    )]
    ResonantEigenvalues {
        layer_a: usize,
        index_a: usize,
        layer_b: usize,
        index_b: usize,
    },

    #[error("state matrix is not normal (commutator ratio {ratio:.3e})")]
    NotNormal { ratio: f64 },

    #[error("layer {layer}: eigenvector condition number {condition:.3e} exceeds {ceiling:.3e}")]
    IllConditionedDiagonalization {
        layer: usize,
        condition: f64,
        ceiling: f64,
    },

    #[error("layer {layer} is unstable: spectral radius {radius}")]
    Unstable { layer: usize, radius: f64 },

    #[error("impulse shift {shift} is outside horizon {horizon}")]
    ShiftOutOfHorizon { shift: usize, horizon: usize },

    #[error("horizon mismatch: model kernel has {expected} taps, target has {actual}")]
    HorizonMismatch { expected: usize, actual: usize },

    #[error("training diverged at step {step}: loss {loss:e} (initial {initial:e})")]
    DivergenceDetected { step: usize, loss: f64, initial: f64 },

    #[error("depth {depth}: parameter modulus {measured} exceeds certified bound {bound}")]
    CertificateViolated { depth: usize, measured: f64, bound: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numbers themselves rather than by
    /// malformed input: degenerate spectra, ill-conditioning, divergence.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateEigenvalues { .. }
                | Error::ZeroEigenvalue { .. }
                | Error::ResonantEigenvalues { .. }
                | Error::NotNormal { .. }
                | Error::IllConditionedDiagonalization { .. }
                | Error::Unstable { .. }
                | Error::DivergenceDetected { .. }
                | Error::CertificateViolated { .. }
                | Error::Decomposition(_)
                | Error::NonFinite(_)
        )
    }
}
