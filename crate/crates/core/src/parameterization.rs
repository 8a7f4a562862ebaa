//! Constructive parameterization of rank-one cross-covariance models.
//!
//! Given a validated block covariance with rank-one cross block
//! `sigma_xy = u v^T d`, every latent parameterization is indexed by a scale
//! gauge `alpha > 0` (and a correlation `rho` for the paired model):
//!
//! ```text
//! a(alpha) = alpha u,            b(alpha) = v d / alpha,
//! sigma_ee(alpha) = sigma_xx - a a^T,
//! sigma_zz(alpha) = sigma_yy - b b^T.
//! ```
//!
//! The minimum eigenvalues of the two error covariances, `f(alpha)` and
//! `g(alpha)`, are monotone (nonincreasing and nondecreasing respectively),
//! so the set of alphas making both PSD is a closed interval
//! `[alpha_min, alpha_max]` found here by bisection. The paired model widens
//! this to the region `{(rho, alpha) : |rho| <= 1, alpha_min^2 <= alpha^2
//! rho^2, alpha <= alpha_max}`, whose right boundary `rho = 1` is the
//! single-latent model.

use nalgebra::{DMatrix, DVector};

use crate::covariance::{AlphaBounds, BlockCovariance, LatentParams, RankOneFactors, Tolerances};
use crate::error::{Error, FailingMatrix, Result};
use crate::linalg;

/// Relative slack used for closed-boundary membership tests.
const BOUNDARY_REL_TOL: f64 = 1e-9;

/// Relative interval width at which bisection stops.
const BISECT_REL_TOL: f64 = 1e-12;

const BISECT_MAX_ITER: usize = 200;

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    Ok(())
}

/// SVD factorization of the cross block with the sign convention applied:
/// the maximum-absolute-value component of u is positive, ties broken by
/// lowest index.
pub fn decompose(cov: &BlockCovariance) -> Result<RankOneFactors> {
    let floor = 1e-12 * cov.max_abs_entry();
    let (mut u, mut v, d, _ratio) = match linalg::leading_singular_triple(&cov.xy()) {
        Some(t) if t.2 > floor => t,
        _ => return Err(Error::ZeroCrossCovariance),
    };

    // Lowest index among components of maximal absolute value; floating
    // ties (equal up to relative 1e-12) resolve to the earlier index.
    let peak = u.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let pivot = (0..u.len()).find(|&i| u[i].abs() >= peak * (1.0 - 1e-12)).unwrap_or(0);
    if u[pivot] < 0.0 {
        u.neg_mut();
        v.neg_mut();
    }
    Ok(RankOneFactors { u, v, d })
}

/// Saliences at a given scale gauge: `a = alpha u`, `b = v d / alpha`.
pub fn salience_at_alpha(
    factors: &RankOneFactors,
    alpha: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_alpha(alpha)?;
    Ok((&factors.u * alpha, &factors.v * (factors.d / alpha)))
}

/// Error covariances at a given scale gauge. Symmetric by construction;
/// PSD is exactly what feasibility decides, so it is not checked here.
pub fn error_cov_at_alpha(
    cov: &BlockCovariance,
    factors: &RankOneFactors,
    alpha: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (a, b) = salience_at_alpha(factors, alpha)?;
    let sigma_ee = cov.xx() - &a * a.transpose();
    let sigma_zz = cov.yy() - &b * b.transpose();
    Ok((sigma_ee, sigma_zz))
}

/// f(alpha): minimum eigenvalue of the X-block error covariance. Monotone
/// nonincreasing in alpha.
pub fn min_eig_f(cov: &BlockCovariance, factors: &RankOneFactors, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let shift = &factors.u * factors.u.transpose() * (alpha * alpha);
    Ok(linalg::sym_min_eig(&(cov.xx() - shift)))
}

/// g(alpha): minimum eigenvalue of the Y-block error covariance. Monotone
/// nondecreasing in alpha.
pub fn min_eig_g(cov: &BlockCovariance, factors: &RankOneFactors, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = factors.d * factors.d / (alpha * alpha);
    let shift = &factors.v * factors.v.transpose() * s;
    Ok(linalg::sym_min_eig(&(cov.yy() - shift)))
}

/// One sample of the two eigenvalue curves.
#[derive(Debug, Clone, Copy)]
pub struct EigCurvePoint {
    pub alpha: f64,
    pub f_value: f64,
    pub g_value: f64,
}

/// Evaluate both eigenvalue curves over a grid of alphas.
pub fn eig_curve(
    cov: &BlockCovariance,
    factors: &RankOneFactors,
    alphas: &[f64],
) -> Result<Vec<EigCurvePoint>> {
    alphas
        .iter()
        .map(|&alpha| {
            Ok(EigCurvePoint {
                alpha,
                f_value: min_eig_f(cov, factors, alpha)?,
                g_value: min_eig_g(cov, factors, alpha)?,
            })
        })
        .collect()
}

/// Largest t >= 0 such that `min_eig(a - t c) >= -eig_floor`, assuming the
/// curve is monotone nonincreasing in t (c is PSD). `t_init` sets the scale
/// of the initial bracket. The floor widens to tolerate the input's own
/// boundary violation at t = 0, so validated-but-marginal matrices still
/// bracket.
fn sup_psd_shift(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    t_init: f64,
    eig_floor: f64,
    context: &str,
) -> Result<f64> {
    let h = |t: f64| linalg::sym_min_eig(&(a - c * t));
    let eig_floor = eig_floor.max(-h(0.0));
    let feasible = |t: f64| h(t) >= -eig_floor;

    if !feasible(0.0) {
        return Err(Error::BracketingFailure {
            context: format!("{context}: infeasible at t = 0"),
        });
    }

    // Expand [lo, hi] geometrically from the characteristic scale until the
    // right end is infeasible; shrink lo toward 0 while lo itself is
    // infeasible.
    let mut lo = 0.0f64;
    let mut hi = t_init.max(f64::MIN_POSITIVE);
    let mut expansions = 0usize;
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::BracketingFailure {
                context: format!("{context}: no sign change up to t = {hi:e}"),
            });
        }
    }

    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_REL_TOL * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The feasible interval `[alpha_min, alpha_max]` of the scale gauge, and
/// `rho_min = alpha_min / alpha_max`.
///
/// `alpha_max` is the largest alpha keeping the X-block error covariance
/// PSD; `alpha_min` the smallest keeping the Y-block error covariance PSD.
/// Both are roots of monotone min-eigenvalue curves, so bisection is
/// globally convergent. The shared bracket scale is `t = d`, where at least
/// one side is guaranteed feasible.
pub fn alpha_bounds(cov: &BlockCovariance, factors: &RankOneFactors) -> Result<AlphaBounds> {
    let xx = cov.xx();
    let yy = cov.yy();
    let uut = &factors.u * factors.u.transpose();
    let vvt = &factors.v * factors.v.transpose();

    // The bisection floor only needs to absorb eigensolver noise (a few
    // hundred ulps), well below the validation tolerance; a looser floor
    // would shift the computed roots.
    let floor_rel = 1e-12;

    // alpha_max^2 = sup { t : sigma_xx - t u u^T is PSD }
    let floor_x = floor_rel * linalg::sym_max_eig(&xx).max(1.0);
    let t_f = sup_psd_shift(&xx, &uut, factors.d, floor_x, "alpha_max")?;
    let alpha_max = t_f.sqrt();

    // alpha_min = d / sqrt(sup { s : sigma_yy - s v v^T is PSD })
    let floor_y = floor_rel * linalg::sym_max_eig(&yy).max(1.0);
    let s_g = sup_psd_shift(&yy, &vvt, factors.d, floor_y, "alpha_min")?;
    if s_g <= 0.0 {
        return Err(Error::BracketingFailure { context: "alpha_min: zero feasible shift".into() });
    }
    let alpha_min = (factors.d / s_g.sqrt()).min(alpha_max);

    Ok(AlphaBounds { alpha_min, alpha_max, rho_min: alpha_min / alpha_max })
}

/// A candidate point of the paired-model feasible region.
#[derive(Debug, Clone, Copy)]
pub struct FeasiblePoint {
    pub rho: f64,
    pub alpha: f64,
}

/// Membership in the closed feasible set
/// `{(rho, alpha) : |rho| <= 1, alpha_min^2 <= alpha^2 rho^2, alpha <= alpha_max}`.
/// Boundary points are feasible; comparisons carry a relative slack so that
/// computed bounds themselves test feasible.
pub fn is_feasible(bounds: &AlphaBounds, point: &FeasiblePoint) -> bool {
    let FeasiblePoint { rho, alpha } = *point;
    if !rho.is_finite() || !alpha.is_finite() || alpha <= 0.0 {
        return false;
    }
    rho.abs() <= 1.0 + BOUNDARY_REL_TOL
        && alpha <= bounds.alpha_max * (1.0 + BOUNDARY_REL_TOL)
        && alpha * rho.abs() >= bounds.alpha_min * (1.0 - BOUNDARY_REL_TOL)
}

/// One constant-rho slice of the feasible region: alpha ranges over
/// `[alpha_min / |rho|, alpha_max]`.
#[derive(Debug, Clone, Copy)]
pub struct RegionSlice {
    pub rho: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
}

/// Enumerate the feasible region as `n` slices with rho gridded over
/// `[rho_min, 1]`.
pub fn feasible_region(bounds: &AlphaBounds, n: usize) -> Vec<RegionSlice> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let frac = i as f64 / (n - 1) as f64;
            let rho = bounds.rho_min + frac * (1.0 - bounds.rho_min);
            RegionSlice {
                rho,
                alpha_lo: (bounds.alpha_min / rho).min(bounds.alpha_max),
                alpha_hi: bounds.alpha_max,
            }
        })
        .collect()
}

/// Explicit paired-model parameters at a feasible point:
/// `a = alpha u`, `b = v d / (alpha rho)`, error covariances by subtraction.
pub fn paired_params(
    cov: &BlockCovariance,
    factors: &RankOneFactors,
    rho: f64,
    alpha: f64,
) -> Result<LatentParams> {
    check_alpha(alpha)?;
    let bounds = alpha_bounds(cov, factors)?;
    if !is_feasible(&bounds, &FeasiblePoint { rho, alpha }) {
        let failing = if rho.abs() > 1.0 + BOUNDARY_REL_TOL {
            FailingMatrix::LatentCorrelation
        } else if alpha > bounds.alpha_max * (1.0 + BOUNDARY_REL_TOL) {
            FailingMatrix::ErrorCovX
        } else {
            FailingMatrix::ErrorCovY
        };
        return Err(Error::InfeasiblePoint { rho, alpha, failing });
    }

    let a = &factors.u * alpha;
    let b = &factors.v * (factors.d / (alpha * rho));
    let sigma_ee = cov.xx() - &a * a.transpose();
    let sigma_zz = cov.yy() - &b * b.transpose();

    // Feasibility guarantees PSD up to floating error; clamp is not needed,
    // but a genuine violation means the caller's point was outside the set.
    let tol = Tolerances::default();
    let floor_x = tol.psd * linalg::sym_max_eig(&cov.xx()).max(1.0) * 10.0;
    let floor_y = tol.psd * linalg::sym_max_eig(&cov.yy()).max(1.0) * 10.0;
    if linalg::sym_min_eig(&sigma_ee) < -floor_x {
        return Err(Error::InfeasiblePoint { rho, alpha, failing: FailingMatrix::ErrorCovX });
    }
    if linalg::sym_min_eig(&sigma_zz) < -floor_y {
        return Err(Error::InfeasiblePoint { rho, alpha, failing: FailingMatrix::ErrorCovY });
    }

    // Construct directly: the guards above already enforce the invariants,
    // with boundary points allowed to sit a hair past the constructor's
    // stricter PSD tolerance.
    Ok(LatentParams { a, b, rho: rho.clamp(-1.0, 1.0), sigma_ee, sigma_zz })
}

/// Single-latent parameters at a scale gauge in `[alpha_min, alpha_max]`;
/// equivalent to `paired_params` with `rho = 1`.
pub fn single_latent_params(
    cov: &BlockCovariance,
    factors: &RankOneFactors,
    alpha: f64,
) -> Result<LatentParams> {
    check_alpha(alpha)?;
    let bounds = alpha_bounds(cov, factors)?;
    if !is_feasible(&bounds, &FeasiblePoint { rho: 1.0, alpha }) {
        return Err(Error::InfeasibleAlpha {
            alpha,
            alpha_min: bounds.alpha_min,
            alpha_max: bounds.alpha_max,
        });
    }
    paired_params(cov, factors, 1.0, alpha)
}

/// Minimum eigenvalue of `a - alpha c` over a grid of alphas.
///
/// For symmetric `a` and PSD `c` the sequence is monotone nonincreasing on
/// an ascending grid, strictly decreasing when `c` is positive definite,
/// and diverges to minus infinity whenever `c` has a positive eigenvalue.
pub fn min_eig_curve(a: &DMatrix<f64>, c: &DMatrix<f64>, alphas: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || c.nrows() != c.ncols() || a.nrows() != c.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrices of equal size, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    Ok(alphas.iter().map(|&t| linalg::sym_min_eig(&(a - c * t))).collect())
}

/// PSD status of the two block residuals at the symmetric split
/// `u' = u sqrt(d)`, `v' = v sqrt(d)` (so that `u' v'^T` equals the cross
/// block). At least one residual is always PSD for a valid input; when the
/// input is positive definite, at least one residual is positive definite.
#[derive(Debug, Clone, Copy)]
pub struct SplitReport {
    pub x_residual_psd: bool,
    pub y_residual_psd: bool,
    pub x_residual_min_eig: f64,
    pub y_residual_min_eig: f64,
}

/// Evaluate both block residuals `sigma_xx - d u u^T` and
/// `sigma_yy - d v v^T` at the symmetric split scale.
pub fn symmetric_split(cov: &BlockCovariance, factors: &RankOneFactors) -> SplitReport {
    let tol = Tolerances::default();
    let a_star = cov.xx() - &factors.u * factors.u.transpose() * factors.d;
    let b_star = cov.yy() - &factors.v * factors.v.transpose() * factors.d;
    let x_min = linalg::sym_min_eig(&a_star);
    let y_min = linalg::sym_min_eig(&b_star);
    let floor_x = tol.psd * linalg::sym_max_eig(&cov.xx()).max(1.0);
    let floor_y = tol.psd * linalg::sym_max_eig(&cov.yy()).max(1.0);
    SplitReport {
        x_residual_psd: x_min >= -floor_x,
        y_residual_psd: y_min >= -floor_y,
        x_residual_min_eig: x_min,
        y_residual_min_eig: y_min,
    }
}
