use thiserror::Error;

/// Errors raised by chart arithmetic, integration and the theorem checkers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element outside chart domain: {chart} at {coords:?}")]
    OutsideDomain { chart: String, coords: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("chart degenerate at point {coords:?}")]
    DegenerateChart { coords: Vec<f64> },

    #[error("differentiation step fell below 1e-12 at {coords:?}")]
    DifferentiationFailed { coords: Vec<f64> },

    #[error("chart invariant violated: {0}")]
    ChartInvariant(String),

    #[error("unknown group {0:?}")]
    UnknownGroup(String),

    #[error("unknown chain {0:?}")]
    UnknownChain(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("not a subgroup")]
    NotSubgroup,

    #[error("subgroup not normal")]
    NotNormal,

    #[error("subgroup not normal under chart split")]
    NotNormalUnderSplit,

    #[error("split does not trivialize fiber: {0}")]
    SplitNotTrivializing(String),

    #[error("element not decomposable in chart: {0}")]
    NotDecomposable(String),

    #[error("chain violated: N must be contained in H")]
    ChainViolated,

    #[error("incompatible coordinate splits")]
    IncompatibleSplits,

    #[error("not certifiably in M_H(G): {0}")]
    NotCertifiable(String),

    #[error("μ not certifiably in 𝓜(p, X₁): {0}")]
    MissingCertificate(String),

    #[error("route/test-function space mismatch: expected dimension {expected}, got {got}")]
    SpaceMismatch { expected: usize, got: usize },

    #[error("unbounded integrand domain along coordinate {0}")]
    UnboundedDomain(usize),

    #[error("integrand not finite at node {0:?}")]
    NonFiniteIntegrand(Vec<f64>),

    #[error("invalid integrator: {0}")]
    InvalidIntegrator(String),

    #[error("degenerate normalizer function")]
    DegenerateNormalizer,

    #[error("Weil scale inconsistent: relative spread {spread:.3e} exceeds {tolerance:.1e}")]
    WeilInconsistent { spread: f64, tolerance: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("too few informative test functions: {found} < {required}")]
    TooFewInformative { found: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
