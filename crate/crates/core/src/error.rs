use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("polygon is not convex at vertex {vertex}")]
    NonConvexPolygon { vertex: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid spacing {spacing} is too coarse: {interior} interior nodes, need at least {required}")]
    TooCoarse {
        spacing: f64,
        interior: usize,
        required: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field has {found} values but the grid has {expected} nodes")]
    GridMismatch { expected: usize, found: usize },

    #[error("region is empty")]
    EmptyRegion,

    #[error("density must be positive, found {value} at node {node}")]
    NonPositiveDensity { node: usize, value: f64 },

    #[error("Newton iteration failed after {iterations} iterations, last residual {residual:e}")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("linear system is singular: pivot {pivot:e} at row {row} (smallest pivot so far {smallest:e})")]
    SingularSystem { row: usize, pivot: f64, smallest: f64 },

    #[error("iterative solver stalled after {iterations} iterations, relative residual {residual:e}")]
    IterativeStall { iterations: usize, residual: f64 },

    #[error("potential is not convex: minimum Hessian eigenvalue {min_eigenvalue:e} at node {node}")]
    NotConvex { node: usize, min_eigenvalue: f64 },

    #[error("section centered at node {center} with height {height:e} has {cells} cells, need {required}")]
    SectionTooSmall {
        center: usize,
        height: f64,
        cells: usize,
        required: usize,
    },

    #[error("{valid} valid samples, need at least {required}")]
    TooFewSamples { valid: usize, required: usize },

    #[error("point ({x}, {y}) is outside the discretized domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("potential is not normalized at the anchor: value {value:e}, gradient norm {gradient:e}")]
    NotNormalized { value: f64, gradient: f64 },

    #[error("no node is far enough from node {node} to bound its opening")]
    NoAdmissiblePairs { node: usize },

    #[error("norm of the reference field is zero")]
    ZeroNorm,
}

pub type Result<T> = core::result::Result<T, Error>;
