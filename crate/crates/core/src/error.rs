use thiserror::Error;

/// Errors raised by the library. The CLI maps each kind onto a stable exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("diagram is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid external subset: {0}")]
    InvalidSubset(String),

    #[error("alphabet mismatch between polynomial operands")]
    AlphabetMismatch,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("polynomial is not divisible by {0}")]
    NotDivisible(String),

    #[error("exponent overflow")]
    ExponentOverflow,

    #[error("missing assignment for variable `{0}`")]
    MissingAssignment(String),

    #[error("degenerate invariant basis: {0}")]
    DegenerateBasis(String),

    #[error("property (P) fails for this basis; offending subsets: {0}")]
    PropertyP(String),

    #[error("exponent regime violated: {0}")]
    Regime(String),

    #[error("malformed operator: {0}")]
    MalformedOperator(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("linear system too large: {rows} x {cols} exceeds the dense budget")]
    SystemTooLarge { rows: usize, cols: usize },

    #[error("numeric precondition failed: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
