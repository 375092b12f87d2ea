use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the simulation, certification and protocol layers.
///
/// Parse failures of protocol scripts are reported separately through
/// [`crate::dsl::Diagnostic`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a Gaussian state needs at least one mode")]
    NoModes,
    #[error("mode {mode} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("light mode and sample mode coincide (mode {0})")]
    CoincidentModes(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("covariance matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("covariance matrix violates the uncertainty relation (min symplectic eigenvalue {0})")]
    NotBonaFide(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("cannot condition a single-mode state: no modes would remain")]
    NothingToKeep,
    #[error("eigen-solver failed to converge")]
    EigenSolver,
    #[error("symplectic spectrum is inconsistent: {0}")]
    Spectrum(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unknown sample {0}")]
    UnknownSample(usize),
    #[error("sample {0} appears more than once in one beam")]
    DuplicatePass(usize),
    #[error("coupling strength must be finite and nonnegative, got {0}")]
    InvalidCoupling(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("criterion not applicable: {0}")]
    NotApplicable(String),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("step {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// The underlying error, with step context removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }

    /// Errors caused by bad input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::UnknownSample(_)
                | Error::DuplicatePass(_)
                | Error::InvalidCoupling(_)
                | Error::InvalidArgument(_)
                | Error::InvalidPartition(_)
                | Error::DisconnectedGraph
        )
    }
}
