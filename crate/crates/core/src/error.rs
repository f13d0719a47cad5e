use thiserror::Error;

/// Errors raised by geometry, calculus and experiment routines.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("point outside the atlas: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("metric is singular or not positive-definite at the queried point")]
    SingularMetric,

    #[error(
        "model `{0}` is not Kähler; Christoffel symbols and the loop connection are undefined"
    )]
    NotKahler(String),

    #[error("loop grids do not match (M = {left} vs M = {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("finite difference did not converge: coarse {coarse:e}, fine {fine:e}, observed order {order:.3}")]
    FdNonConvergent { coarse: f64, fine: f64, order: f64 },

    #[error("field provides no analytic derivative")]
    MissingDerivative,

    #[error("antipodal endpoints have no unique minimizing geodesic (nodes {nodes:?})")]
    Antipodal { nodes: Vec<usize> },

    #[error(
        "geodesic boundary value problem failed to converge at node {node}: residual {residual:e}"
    )]
    BvpFailed { node: usize, residual: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
