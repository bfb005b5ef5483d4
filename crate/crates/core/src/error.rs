use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("direction has norm {norm:e}, below the zero tolerance")]
    ZeroDirection { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed body: {0}")]
    MalformedBody(String),

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("could not generate a non-degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("query point coincides with the maximizer; update direction undefined")]
    DegenerateUpdate,

    #[error("query point is (numerically) the origin")]
    ZeroQuery,

    #[error("point is not strictly interior (constraint {constraint})")]
    NotInterior { constraint: ConstraintRef },

    #[error("outer approximation has empty interior")]
    EmptyInterior,

    #[error("cannot drop a cut: only {0} droppable cut(s) present")]
    CannotDrop(usize),

    #[error("cut normal is degenerate (p - k_c parallel to c)")]
    DegenerateCut,

    #[error("analytic center collapsed onto the origin")]
    CenterOriginFailure,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("instance is {0}-dimensional; 2-D required")]
    DimensionNot2D(usize),

    #[error("i/o: {0}")]
    Io(String),

    #[error("instance parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable code used in CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroDirection { .. } => "zero_direction",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::MalformedBody(_) => "malformed_body",
            Error::NoConvergence(_) => "no_convergence",
            Error::DegenerateInstance(_) => "degenerate_instance",
            Error::DegenerateUpdate => "degenerate_update",
            Error::ZeroQuery => "zero_query",
            Error::NotInterior { .. } => "not_interior",
            Error::EmptyInterior => "empty_interior",
            Error::CannotDrop(_) => "cannot_drop",
            Error::DegenerateCut => "degenerate_cut",
            Error::CenterOriginFailure => "center_origin_failure",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Oracle(_) => "oracle_failure",
            Error::DimensionNot2D(_) => "dimension_not_2d",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

/// Which constraint of an outer approximation was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRef {
    Ball,
    Cut(usize),
}

impl std::fmt::Display for ConstraintRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintRef::Ball => write!(f, "ball"),
            ConstraintRef::Cut(i) => write!(f, "cut #{i}"),
        }
    }
}
