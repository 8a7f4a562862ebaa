//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which covariance matrix of the paired latent model fails to be
/// positive semidefinite at an infeasible point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailingMatrix {
    /// Var[(xi, omega)] — requires |rho| <= 1.
    LatentCorrelation,
    /// Sigma_ee — requires alpha <= alpha_max.
    ErrorCovX,
    /// Sigma_zz — requires alpha * |rho| >= alpha_min.
    ErrorCovY,
}

impl std::fmt::Display for FailingMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailingMatrix::LatentCorrelation => write!(f, "latent correlation matrix"),
            FailingMatrix::ErrorCovX => write!(f, "X-block error covariance"),
            FailingMatrix::ErrorCovY => write!(f, "Y-block error covariance"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("wrong dimensions: {0}")]
    WrongDimensions(String),

    #[error(
        "matrix is not symmetric (max |s_ij - s_ji| = {max_asym:.3e} exceeds tolerance {tol:.3e})"
    )]
    NotSymmetric { max_asym: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e}, allowed >= {bound:.3e})")]
    NotPsd { min_eig: f64, bound: f64 },

    #[error("cross-covariance block is not rank one (singular-value ratio {sv_ratio:.3e}, leading value {leading:.3e})")]
    RankTooHigh { sv_ratio: f64, leading: f64 },

    #[error("cross-covariance block is numerically zero; the rank-one model is undefined")]
    ZeroCrossCovariance,

    #[error("alpha must be positive and finite, got {0}")]
    NonPositiveAlpha(f64),

    #[error("failed to bracket a sign change while solving for {context}")]
    BracketingFailure { context: String },

    #[error("point (rho = {rho}, alpha = {alpha}) is infeasible: {failing} fails to be positive semidefinite")]
    InfeasiblePoint { rho: f64, alpha: f64, failing: FailingMatrix },

    #[error("alpha = {alpha} lies outside the feasible interval [{alpha_min}, {alpha_max}]")]
    InfeasibleAlpha { alpha: f64, alpha_min: f64, alpha_max: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("duplicate vertex label {0:?}")]
    DuplicateVertex(String),

    #[error("self loop at vertex {0:?}")]
    SelfLoop(String),

    #[error("vertices {0:?} and {1:?} are already joined by an edge")]
    DuplicateEdge(String, String),

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("vertex sets A, B, Z must be pairwise disjoint (vertex {0:?} repeats)")]
    NonDisjointSets(String),

    #[error("vertex sets A and B must be nonempty")]
    EmptyVertexSet,

    #[error("graph is not ancestral")]
    NotAncestral,

    #[error("graph has {n} vertices; exhaustive enumeration is capped at {max}")]
    GraphTooLarge { n: usize, max: usize },

    #[error("graphs have different vertex sets")]
    VertexSetMismatch,

    #[error("need at least {min} data rows, got {n}")]
    TooFewRows { n: usize, min: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("tetrad requires at least two variables in each block (p = {p}, q = {q})")]
    DegenerateBlock { p: usize, q: usize },

    #[error("covariance factorization failed: eigenvalue {min_eig:.3e} below clamping tolerance")]
    SingularFactorization { min_eig: f64 },

    #[error("malformed query string: {0}")]
    BadQuery(String),

    #[error("malformed input: {0}")]
    BadInput(String),
}
