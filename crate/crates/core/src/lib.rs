//! Rank-one cross-covariance latent-variable models.
//!
//! Two blocks of observed Gaussian variables, X (dimension p) and Y
//! (dimension q), are related through one-dimensional latent variables so
//! that only the cross-covariance block is constrained: it must have rank
//! one. This crate computes, exactly:
//!
//! - SVD factors of the cross block and the scale-gauge family of saliences,
//! - the feasible interval `[alpha_min, alpha_max]` for the scale gauge and
//!   the feasible `(rho, alpha)` region of the paired-latent model,
//! - explicit latent parameter sets at any feasible point, with the forward
//!   map back to the observed covariance,
//! - m-separation, ancestrality, maximality and Markov-equivalence queries
//!   on mixed graphs with directed and bidirected edges, plus builders for
//!   the standard two-block model family,
//! - Gaussian sampling, covariance estimation, rank-one projection, and the
//!   tetrad / marginal-independence statistics that distinguish the
//!   diagonal-error model variants.
//!
//! Matrices are dense and row-major at the interface; the intended regime is
//! small multivariate blocks (p, q up to a few hundred).

pub mod covariance;
pub mod error;
pub mod graph;
pub mod json;
mod linalg;
pub mod parameterization;
pub mod region;
pub mod simulation;

pub use covariance::{
    reconstruct, validate, AlphaBounds, BlockCovariance, LatentParams, RankOneFactors,
    ReconstructionParts, Tolerances,
};
pub use error::{Error, FailingMatrix, Result};
pub use parameterization::{
    alpha_bounds, decompose, eig_curve, error_cov_at_alpha, feasible_region, is_feasible,
    min_eig_curve, min_eig_f, min_eig_g, paired_params, salience_at_alpha, single_latent_params,
    symmetric_split, EigCurvePoint, FeasiblePoint, RegionSlice, SplitReport,
};

pub use nalgebra;
