use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid qubit pair ({i}, {j})")]
    QubitPairInvalid { i: usize, j: usize },

    #[error("amplitude vector is zero")]
    ZeroVector,

    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("expectation value has imaginary part {imag:.3e}")]
    NonRealExpectation { imag: f64 },

    #[error("spectrum has no eigenvalue above the zero tolerance")]
    DegenerateSpectrum,

    #[error("selected measurement branch has squared norm {norm_sqr:.3e}")]
    DegenerateBranch { norm_sqr: f64 },

    #[error("no instance with minimum energy >= {c_target} found in {attempts} attempts")]
    CertificationFailed { c_target: f64, attempts: usize },

    #[error("invalid promise gap c = {0}")]
    InvalidPromise(f64),

    #[error("instance carries no promise")]
    MissingPromise,

    #[error("invalid convergence target p = {0}")]
    InvalidTarget(f64),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical drift {drift:.3e} at step {step}")]
    NumericalDrift { step: usize, drift: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
