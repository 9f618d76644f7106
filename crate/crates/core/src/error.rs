use thiserror::Error;

/// Errors produced by cover construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Interval bounds are not ordered.
    #[error("invalid interval: lower ({lower}) must be < upper ({upper})")]
    InvalidInterval { lower: f64, upper: f64 },

    /// Too few grid points.
    #[error("invalid count: need at least 2 grid points, got {0}")]
    InvalidCount(usize),

    /// Vector lengths do not match a grid.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Tensor shape does not match the mode grids.
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    /// Coefficient tensor has (numerically) zero norm.
    #[error("zero tensor: discrete norm {0:.3e} is below 1e-14")]
    ZeroTensor(f64),

    /// Quadratic form is not symmetric.
    #[error("quadratic matrix is not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),

    /// Real part of the quadratic form is not positive-definite.
    #[error("real part of quadratic matrix is not positive-definite: eigenvalue {index} is {value:.6e}")]
    NotPositiveDefinite { index: usize, value: f64 },

    /// Two states live on different grids.
    #[error("grid mismatch: states are defined on different mode grids")]
    GridMismatch,

    /// Bipartition does not split {1..N} into two disjoint nonempty sides.
    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    /// Conditional state requested at a node whose weight is below the floor.
    #[error("undefined conditional: weight {lambda:.3e} at node {node:?} is below the floor {floor:.3e}")]
    UndefinedConditional {
        node: Vec<usize>,
        lambda: f64,
        floor: f64,
    },

    /// Every conditioning node of a cover fell below the weight floor.
    #[error("all conditioning nodes are inactive (weight below {0:.3e}); state is degenerate")]
    AllInactive(f64),

    /// A cover operation needs at least one active row.
    #[error("cover has no active rows")]
    NoActiveRows,

    /// Pairwise distance matrix requested for a cover above the
    /// materialization cap; use per-pair evaluation instead.
    #[error("cover has {nodes} active rows, above the materialization cap {cap}")]
    CoverTooLarge { nodes: usize, cap: usize },

    /// Distance requested between vectors that are not unit-normalized.
    #[error("vector is not normalized: |norm - 1| = {0:.3e} exceeds 1e-6")]
    NotNormalized(f64),

    /// Factor extraction requested for an inseparable state.
    #[error("state is not separable across this bipartition (max pair distance {0:.3e})")]
    NotSeparable(f64),

    /// Factors failed to reproduce the coefficient tensor.
    #[error("factor reconstruction residual {residual:.3e} exceeds {allowed:.3e}")]
    ReconstructionFailed { residual: f64, allowed: f64 },

    /// Local unitary kernel fails weighted unitarity.
    #[error("kernel for mode {mode} is not weight-unitary: residual {residual:.3e}")]
    NotWeightUnitary { mode: usize, residual: f64 },

    /// Kernel size does not match the grid it acts on.
    #[error("kernel size mismatch on mode {mode}: kernel is {kernel}x{kernel}, grid has {grid} points")]
    KernelSizeMismatch {
        mode: usize,
        kernel: usize,
        grid: usize,
    },

    /// Area region lies (partly) outside the grids.
    #[error("region out of bounds on mode {mode}: [{lo}, {hi}] not inside [{grid_lo}, {grid_hi}]")]
    RegionOutOfBounds {
        mode: usize,
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    /// Central differences need at least 3 nodes along every conditioning axis.
    #[error("degenerate grid: conditioning mode {mode} has only {count} nodes (need >= 3)")]
    DegenerateGrid { mode: usize, count: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
