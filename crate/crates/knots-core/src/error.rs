use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input fails a structural invariant (too few vertices, repeated
    /// consecutive vertices, non-finite coordinates, ...).
    #[error("invalid knot: {0}")]
    InvalidKnot(String),

    /// Geometry is infeasible for the requested operation (e.g. zero or
    /// negative thickness when a tube is required).
    #[error("infeasible geometry: {0}")]
    Infeasible(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// No generic projection direction was found within the retry budget.
    #[error("no generic projection direction found after {tried} attempts")]
    NonGenericProjection { tried: usize },

    /// An iterative routine stalled before reaching its target.
    #[error("stalled: {0}")]
    Stalled(String),

    /// Statistics are undefined for the given sample (e.g. zero variance).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
