use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("negative potential at node {node}: {value}")]
    NegativePotential { node: usize, value: f64 },

    #[error("singular tridiagonal system (pivot {pivot} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("minimizer is identically zero; potential recovery undefined")]
    ZeroMinimizer,

    #[error("contact set is empty at the extraction threshold")]
    DegenerateContactSet,

    #[error("sign condition violated at {} contact nodes (first at index {first})", count)]
    SignViolation { count: usize, first: usize },

    #[error("failed to bracket the multiplier root")]
    BracketingFailure,

    #[error("all field values below the support threshold")]
    AllBelowThreshold,

    #[error("grid too coarse: need at least {required} nodes, got {actual}")]
    UnderResolvedGrid { required: usize, actual: usize },

    #[error("well supports overlap; increase separation or truncation radius")]
    OverlappingSupports,

    #[error("unsupported: {0}")]
    Unsupported(String),
}
