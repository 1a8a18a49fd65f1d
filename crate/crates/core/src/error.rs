use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    /// A malformed line in a grid or stencil file. `offset` is the byte
    /// offset within the line.
    #[error("line {line}, offset {offset}: {message}")]
    Format {
        line: usize,
        offset: usize,
        message: String,
    },

    #[error("evaluation failed at {point:?}: {cause}")]
    Eval { point: Vec<f64>, cause: String },

    #[error("evaluation failed at node {node}: {cause}")]
    NodeEval { node: usize, cause: Box<Error> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible grids: {0}")]
    Incompatible(String),

    #[error("empty valid region: {0}")]
    EmptyRegion(String),

    #[error("kernel too coarse: discrete mass {mass} before normalization")]
    CoarseKernel { mass: f64 },

    #[error("source does not vanish on the grid boundary (node {node})")]
    NotCompactlySupported { node: usize },

    #[error("point lies outside the grid: {0}")]
    OutOfGrid(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eval { .. }
                | Error::NodeEval { .. }
                | Error::NoConvergence { .. }
                | Error::Singularity(_)
                | Error::CoarseKernel { .. }
        )
    }
}
