//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range 1..={nvars}")]
    IndexOutOfRange { index: usize, nvars: usize },

    #[error("multi-index entry {entry} invalid: family has {family} fields")]
    InvalidMultiIndexEntry { entry: usize, family: usize },

    #[error("polynomial syntax error: {0}")]
    PolySyntax(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("model file error: {0}")]
    SyntaxError(String),

    #[error("bracket generation not certified at depth {0}: raise the depth cap or check the family")]
    NotBracketGeneratingAtDepth(usize),

    #[error("no regular point found among samples")]
    NoRegularPointFound,

    #[error("immersion failure: parameter map has rank below {k} at {at}")]
    ImmersionFailure { k: usize, at: String },

    #[error("cannot realize the restricted flag with tangent bracket combinations")]
    CannotRealizeRestrictedFlag,

    #[error("chart inversion failed: {0}")]
    ChartInversionFailed(String),

    #[error("privileged-coordinate certification failed: {0}")]
    PrivilegedCertificationFailed(String),

    #[error("combinatorial budget exceeded: {considered} candidate tuples, cap {cap}")]
    CombinatorialBudgetExceeded { considered: usize, cap: usize },

    #[error("unsupported stratum shape: {0}")]
    UnsupportedStratumShape(String),

    #[error("polynomial is identically zero")]
    IdenticallyZero,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code class: 2 for input errors, 3 for budget/certification
    /// failures hit during computation.
    pub fn exit_code(&self) -> u8 {
        use Error::*;
        match self {
            ArityMismatch { .. }
            | IndexOutOfRange { .. }
            | InvalidMultiIndexEntry { .. }
            | PolySyntax(_)
            | UnknownVariable(_)
            | DimensionMismatch(_)
            | SyntaxError(_)
            | MissingInput(_)
            | Io(_) => 2,
            _ => 3,
        }
    }
}
