//! Block covariance matrices, rank-one cross factors, and latent parameter
//! sets, with validation and the forward map from parameters to the induced
//! observed covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical tolerances for validation and reconstruction checks.
///
/// All model quantities are exact algebra; the tolerances only absorb
/// floating-point error. `sym`, `psd` and `rank` are relative (to the largest
/// entry, largest eigenvalue, and leading singular value respectively);
/// `recon` is absolute on unit-scale matrices.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub sym: f64,
    pub psd: f64,
    pub rank: f64,
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { sym: 1e-10, psd: 1e-9, rank: 1e-8, recon: 1e-9 }
    }
}

/// A (p+q) x (p+q) positive semidefinite matrix partitioned into X and Y
/// blocks. The cross block `sigma_xy` is the only block the rank-one model
/// constrains.
#[derive(Debug, Clone)]
pub struct BlockCovariance {
    p: usize,
    q: usize,
    sigma: DMatrix<f64>,
    cross_sv_ratio: f64,
}

impl BlockCovariance {
    /// Internal constructor; assumes `sigma` is (p+q) square and symmetric.
    pub(crate) fn from_checked(p: usize, q: usize, sigma: DMatrix<f64>) -> Self {
        let cross = sigma.view((0, p), (p, q)).clone_owned();
        let s = linalg::singular_values(&cross);
        let cross_sv_ratio = if s.len() > 1 && s[0] > 0.0 { s[1] / s[0] } else { 0.0 };
        BlockCovariance { p, q, sigma, cross_sv_ratio }
    }

    /// Relaxed construction: checks shape and symmetry only. Used for
    /// empirical covariances and other matrices that need not satisfy the
    /// PSD or rank-one constraints.
    pub fn new_relaxed(sigma: DMatrix<f64>, p: usize, q: usize) -> Result<Self> {
        check_shape(&sigma, p, q)?;
        let scale = linalg::max_abs(&sigma);
        let asym = linalg::max_asymmetry(&sigma);
        // Loose bound: sampled covariances are symmetric by construction.
        let tol = 1e-7 * scale.max(1.0);
        if asym > tol {
            return Err(Error::NotSymmetric { max_asym: asym, tol });
        }
        Ok(Self::from_checked(p, q, sigma))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn xx(&self) -> DMatrix<f64> {
        self.sigma.view((0, 0), (self.p, self.p)).clone_owned()
    }

    pub fn yy(&self) -> DMatrix<f64> {
        self.sigma.view((self.p, self.p), (self.q, self.q)).clone_owned()
    }

    pub fn xy(&self) -> DMatrix<f64> {
        self.sigma.view((0, self.p), (self.p, self.q)).clone_owned()
    }

    /// Ratio of the second to the leading singular value of the cross block;
    /// 0 means the block is numerically rank one (or rank zero).
    pub fn cross_sv_ratio(&self) -> f64 {
        self.cross_sv_ratio
    }

    pub fn max_abs_entry(&self) -> f64 {
        linalg::max_abs(&self.sigma)
    }

    /// Minimum eigenvalue of the full matrix.
    pub fn min_eig(&self) -> f64 {
        linalg::sym_min_eig(&self.sigma)
    }
}

fn check_shape(sigma: &DMatrix<f64>, p: usize, q: usize) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::WrongDimensions(format!(
            "block dimensions must be positive, got p = {p}, q = {q}"
        )));
    }
    let n = p + q;
    if sigma.nrows() != n || sigma.ncols() != n {
        return Err(Error::WrongDimensions(format!(
            "expected a {n}x{n} matrix, got {}x{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    Ok(())
}

/// Validate a raw square matrix as a block covariance: symmetry, positive
/// semidefiniteness, and (in strict mode) a rank-one cross block.
///
/// The singular-value ratio of the cross block is recorded on the returned
/// value whether or not strict mode is requested.
pub fn validate(
    sigma: DMatrix<f64>,
    p: usize,
    q: usize,
    tol: &Tolerances,
    strict_rank: bool,
) -> Result<BlockCovariance> {
    check_shape(&sigma, p, q)?;

    let scale = linalg::max_abs(&sigma);
    let asym = linalg::max_asymmetry(&sigma);
    let sym_bound = tol.sym * scale;
    if asym > sym_bound {
        return Err(Error::NotSymmetric { max_asym: asym, tol: sym_bound });
    }

    let min_eig = linalg::sym_min_eig(&sigma);
    let max_eig = linalg::sym_max_eig(&sigma);
    let psd_bound = -tol.psd * max_eig.max(0.0);
    if min_eig < psd_bound {
        return Err(Error::NotPsd { min_eig, bound: psd_bound });
    }

    let cov = BlockCovariance::from_checked(p, q, sigma);
    if strict_rank {
        let s = linalg::singular_values(&cov.xy());
        let floor = 1e-12 * scale;
        if s.len() == 0 || s[0] <= floor {
            // Rank zero: outside the rank-one model.
            return Err(Error::RankTooHigh {
                sv_ratio: 0.0,
                leading: if s.len() > 0 { s[0] } else { 0.0 },
            });
        }
        if cov.cross_sv_ratio > tol.rank {
            return Err(Error::RankTooHigh { sv_ratio: cov.cross_sv_ratio, leading: s[0] });
        }
    }
    Ok(cov)
}

/// Unit singular vectors u, v and scale d > 0 of the cross block, so that
/// `sigma_xy = u v^T d`. The sign convention makes the maximum-absolute-value
/// component of u positive (ties broken by lowest index).
#[derive(Debug, Clone)]
pub struct RankOneFactors {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub d: f64,
}

impl RankOneFactors {
    /// The reconstructed cross block u v^T d.
    pub fn cross_block(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose() * self.d
    }
}

/// The closed interval of feasible scale values together with the induced
/// lower bound on the latent correlation.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBounds {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub rho_min: f64,
}

/// Parameters of the paired latent model: saliences a, b, latent correlation
/// rho, and the within-block error covariances. `rho = 1` encodes the
/// single-latent model.
#[derive(Debug, Clone)]
pub struct LatentParams {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub rho: f64,
    pub sigma_ee: DMatrix<f64>,
    pub sigma_zz: DMatrix<f64>,
}

impl LatentParams {
    /// Validate and build a parameter set: |rho| <= 1, error covariances
    /// square, symmetric, PSD, and matching the salience dimensions.
    pub fn new(
        a: DVector<f64>,
        b: DVector<f64>,
        rho: f64,
        sigma_ee: DMatrix<f64>,
        sigma_zz: DMatrix<f64>,
    ) -> Result<Self> {
        if !rho.is_finite() || rho.abs() > 1.0 + 1e-12 {
            return Err(Error::BadInput(format!("|rho| must be <= 1, got {rho}")));
        }
        for (name, m, len) in [("sigma_ee", &sigma_ee, a.len()), ("sigma_zz", &sigma_zz, b.len())] {
            if m.nrows() != len || m.ncols() != len {
                return Err(Error::WrongDimensions(format!(
                    "{name} must be {len}x{len}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let tol = Tolerances::default();
            let scale = linalg::max_abs(m);
            let asym = linalg::max_asymmetry(m);
            if asym > tol.sym * scale.max(1.0) {
                return Err(Error::NotSymmetric { max_asym: asym, tol: tol.sym * scale.max(1.0) });
            }
            let min_eig = linalg::sym_min_eig(m);
            let bound = -tol.psd * linalg::sym_max_eig(m).max(1.0);
            if min_eig < bound {
                return Err(Error::NotPsd { min_eig, bound });
            }
        }
        if a.len() == 0 || b.len() == 0 {
            return Err(Error::WrongDimensions("saliences must be nonempty".into()));
        }
        Ok(LatentParams { a, b, rho, sigma_ee, sigma_zz })
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// True when the parameters encode the single-latent model.
    pub fn is_single_latent(&self) -> bool {
        self.rho == 1.0
    }
}

/// Decomposition of a reconstructed covariance into a structured part Q and
/// a block-diagonal error part E, with w the stacked salience vector.
#[derive(Debug, Clone)]
pub struct ReconstructionParts {
    /// stack(a, b).
    pub w: DVector<f64>,
    /// sigma - e; each block has rank at most one.
    pub q: DMatrix<f64>,
    /// diag(sigma_ee, sigma_zz).
    pub e: DMatrix<f64>,
}

/// Forward map from latent parameters to the induced observed covariance:
/// `sigma_xx = a a^T + sigma_ee`, `sigma_yy = b b^T + sigma_zz`,
/// `sigma_xy = rho a b^T`.
pub fn reconstruct(params: &LatentParams) -> (BlockCovariance, ReconstructionParts) {
    let p = params.p();
    let q = params.q();
    let n = p + q;

    let xx = &params.a * params.a.transpose() + &params.sigma_ee;
    let yy = &params.b * params.b.transpose() + &params.sigma_zz;
    let xy = (&params.a * params.b.transpose()) * params.rho;

    let mut sigma = DMatrix::zeros(n, n);
    // Assemble symmetrically; mirror the cross block exactly.
    for i in 0..p {
        for j in 0..p {
            sigma[(i, j)] = (xx[(i, j)] + xx[(j, i)]) / 2.0;
        }
        for j in 0..q {
            sigma[(i, p + j)] = xy[(i, j)];
            sigma[(p + j, i)] = xy[(i, j)];
        }
    }
    for i in 0..q {
        for j in 0..q {
            sigma[(p + i, p + j)] = (yy[(i, j)] + yy[(j, i)]) / 2.0;
        }
    }

    let mut e = DMatrix::zeros(n, n);
    e.view_mut((0, 0), (p, p)).copy_from(&params.sigma_ee);
    e.view_mut((p, p), (q, q)).copy_from(&params.sigma_zz);

    let mut w = DVector::zeros(n);
    w.rows_mut(0, p).copy_from(&params.a);
    w.rows_mut(p, q).copy_from(&params.b);

    let q_part = &sigma - &e;
    let cov = BlockCovariance::from_checked(p, q, sigma);
    (cov, ReconstructionParts { w, q: q_part, e })
}
