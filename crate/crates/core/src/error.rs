use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Fock truncation n_max = {0}")]
    InvalidTruncation(usize),

    #[error("invalid system specification: {0}")]
    InvalidSpec(String),

    #[error("site index {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),

    #[error("stationary manifold is degenerate; the trace-constrained system is singular")]
    DegenerateSteadyState,

    #[error("steady-state solve did not converge: relative residual {residual:.3e}")]
    SolverFailure { residual: f64 },

    #[error("density matrix invariant violated: {0}")]
    InvalidDensityMatrix(String),

    #[error("time step too large: |L| * dt = {0:.3e} (must be < 0.1)")]
    StepTooLarge(f64),

    #[error("trace drifted by {0:.3e} during integration")]
    TraceDrift(f64),

    #[error("mean photon number {0:.3e} too small for a normalized correlation")]
    UndefinedCorrelation(f64),

    #[error("correlation order {order} exceeds truncation n_max = {n_max}")]
    TruncationOrder { order: usize, n_max: usize },

    #[error("singular parameters: {0}")]
    SingularParameters(&'static str),

    #[error("pathway phase undefined: a pathway amplitude vanishes")]
    UndefinedPhase,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short stable code used in per-point sweep records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidTruncation(_) => "invalid-truncation",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::SiteOutOfRange { .. } => "site-out-of-range",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NegativeRate(_) => "negative-rate",
            Error::DegenerateSteadyState => "degenerate-steady-state",
            Error::SolverFailure { .. } => "solver-failure",
            Error::InvalidDensityMatrix(_) => "invalid-density-matrix",
            Error::StepTooLarge(_) => "step-too-large",
            Error::TraceDrift(_) => "trace-drift",
            Error::UndefinedCorrelation(_) => "undefined-correlation",
            Error::TruncationOrder { .. } => "truncation-order",
            Error::SingularParameters(_) => "singular-parameters",
            Error::UndefinedPhase => "undefined-phase",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }
}
