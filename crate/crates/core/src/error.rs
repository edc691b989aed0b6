use thiserror::Error;

/// Failure modes shared by every layer of the crate.
///
/// Each variant maps to a stable upper-case code (see [`Error::code`]) that
/// the CLI and run manifests report verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("covariance profile is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NonPositiveCovariance { min_eigenvalue: f64 },
    #[error("invalid sample count {count} (need at least {minimum})")]
    InvalidSampleCount { count: usize, minimum: usize },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("ensemble contains {count} eigenvalues, need at least {minimum}")]
    EmptyEnsemble { count: usize, minimum: usize },
    #[error("window [{lo}, {hi}] is not inside the bulk (-2, 2)")]
    WindowOutsideBulk { lo: f64, hi: f64 },
    #[error("insufficient data: {available} {what}, need {required}")]
    InsufficientData {
        what: &'static str,
        available: usize,
        required: usize,
    },
    #[error("determinant underflow at sample {sample}")]
    SingularShift { sample: usize },
    #[error("generator universes differ ({left} vs {right} generators)")]
    UniverseMismatch { left: usize, right: usize },
    #[error("generator {generator} is outside a universe of {universe}")]
    UnknownGenerator { generator: usize, universe: usize },
    #[error("quadrature did not converge: {context} (estimate {estimate:.3e}, error {error:.3e})")]
    QuadratureNotConverged {
        context: String,
        estimate: f64,
        error: f64,
    },
    #[error("energy {energy} is outside the bulk (|E| < {bound})")]
    OutOfBulk { energy: f64, bound: f64 },
    #[error("division by zero in {context}")]
    DivisionByZero { context: &'static str },
    #[error("extrapolation did not converge: residual {residual:.3e} above {tolerance:.3e}")]
    NotConverged { residual: f64, tolerance: f64 },
    #[error("hyperbolic truncation too small: row-mass defect {defect:.3e} at s_max = {s_max}")]
    TruncationTooSmall { defect: f64, s_max: f64 },
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in manifests and CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveCovariance { .. } => "NON_POSITIVE_COVARIANCE",
            Error::InvalidSampleCount { .. } => "INVALID_SAMPLE_COUNT",
            Error::NoConvergence => "NO_CONVERGENCE",
            Error::EmptyEnsemble { .. } => "EMPTY_ENSEMBLE",
            Error::WindowOutsideBulk { .. } => "WINDOW_OUTSIDE_BULK",
            Error::InsufficientData { .. } => "INSUFFICIENT_DATA",
            Error::SingularShift { .. } => "SINGULAR_SHIFT",
            Error::UniverseMismatch { .. } => "UNIVERSE_MISMATCH",
            Error::UnknownGenerator { .. } => "UNKNOWN_GENERATOR",
            Error::QuadratureNotConverged { .. } => "QUADRATURE_NOT_CONVERGED",
            Error::OutOfBulk { .. } => "OUT_OF_BULK",
            Error::DivisionByZero { .. } => "DIVISION_BY_ZERO",
            Error::NotConverged { .. } => "NOT_CONVERGED",
            Error::TruncationTooSmall { .. } => "TRUNCATION_TOO_SMALL",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::ConfigInvalid(_) => "CONFIG_INVALID",
            Error::Module { .. } => "MODULE_ERROR",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Io(_) => "IO_ERROR",
        }
    }

    /// Wraps an error raised inside `module` so the manifest keeps its origin.
    pub fn in_module(self, module: &'static str) -> Error {
        Error::Module {
            module,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
