//! Gaussian sampling from latent parameterizations, covariance estimation,
//! rank-one projection, and the distributional statistics (tetrad residual,
//! within-block marginal covariance) that distinguish the diagonal-error
//! model variants.
//!
//! Randomness comes from ChaCha20 (seedable, counter-based) with normal
//! variates produced by the Box-Muller transform, so streams are fully
//! deterministic given the seed: identical seeds give identical data bit
//! patterns.

use std::io::{self, BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::covariance::{AlphaBounds, BlockCovariance, LatentParams, RankOneFactors, Tolerances};
use crate::error::{Error, Result};
use crate::linalg;
use crate::parameterization::{alpha_bounds, decompose, single_latent_params};

/// Observations of the p X-columns followed by the q Y-columns, one row per
/// unit.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    p: usize,
    q: usize,
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 || values.ncols() != p + q {
            return Err(Error::WrongDimensions(format!(
                "expected {} columns for p = {p}, q = {q}, got {}",
                p + q,
                values.ncols()
            )));
        }
        if values.nrows() == 0 {
            return Err(Error::TooFewRows { n: 0, min: 1 });
        }
        Ok(DataMatrix { p, q, values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_labels(&self) -> Vec<String> {
        (1..=self.p).map(|i| format!("X{i}")).chain((1..=self.q).map(|j| format!("Y{j}"))).collect()
    }

    /// Write as CSV with a header row and 17-significant-digit floats, so
    /// values round-trip exactly through the text form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.column_labels().join(","))?;
        for r in 0..self.n() {
            let mut line = String::new();
            for c in 0..self.p + self.q {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:.16e}", self.values[(r, c)]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Read a CSV produced by `write_csv`. The block split is inferred from
    /// the `X*`/`Y*` header labels; `expected_p` cross-checks it when given.
    pub fn read_csv<R: BufRead>(r: R, expected_p: Option<usize>) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::BadInput("empty CSV".into()))?
            .map_err(|e| Error::BadInput(format!("read error: {e}")))?;
        let labels: Vec<&str> = header.split(',').map(str::trim).collect();
        let p = labels.iter().take_while(|l| l.starts_with('X')).count();
        let q = labels.len() - p;
        if p == 0 || q == 0 || !labels[p..].iter().all(|l| l.starts_with('Y')) {
            return Err(Error::BadInput(format!("header must be X1..Xp,Y1..Yq, got {header:?}")));
        }
        if let Some(ep) = expected_p {
            if ep != p {
                return Err(Error::BadInput(format!(
                    "requested p = {ep} but header has {p} X-columns"
                )));
            }
        }
        let mut rows: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for (k, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::BadInput(format!("read error: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != p + q {
                return Err(Error::BadInput(format!(
                    "row {} has {} fields, expected {}",
                    k + 2,
                    fields.len(),
                    p + q
                )));
            }
            for f in fields {
                rows.push(
                    f.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::BadInput(format!("row {}: {e}", k + 2)))?,
                );
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::TooFewRows { n: 0, min: 1 });
        }
        DataMatrix::new(DMatrix::from_row_slice(n, p + q, &rows), p, q)
    }
}

/// Deterministic standard-normal stream: ChaCha20 uniforms fed through the
/// Box-Muller transform (no rejection step).
struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    fn new(seed: u64) -> Self {
        NormalStream { rng: ChaCha20Rng::seed_from_u64(seed), spare: None }
    }

    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.unit(); // in (0, 1]
        let u2 = self.unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    fn fill(&mut self, v: &mut DVector<f64>) {
        for i in 0..v.len() {
            v[i] = self.next();
        }
    }
}

/// Draw `n` observations from the paired latent model: latents (xi, omega)
/// jointly Gaussian with unit variances and correlation rho, errors
/// independent with the given covariances, `x = a xi + eps`,
/// `y = b omega + zeta`.
///
/// Error covariances are factored by symmetric eigendecomposition with
/// negative eigenvalues clamped to zero, so exactly-singular boundary
/// parameterizations sample fine.
pub fn sample_latent(params: &LatentParams, n: usize, seed: u64) -> Result<DataMatrix> {
    if n == 0 {
        return Err(Error::TooFewRows { n: 0, min: 1 });
    }
    let tol = Tolerances::default();
    let p = params.p();
    let q = params.q();
    let root_ee = linalg::psd_sqrt_clamped(
        &params.sigma_ee,
        tol.psd * linalg::max_abs(&params.sigma_ee).max(1.0),
    )?;
    let root_zz = linalg::psd_sqrt_clamped(
        &params.sigma_zz,
        tol.psd * linalg::max_abs(&params.sigma_zz).max(1.0),
    )?;
    let rho = params.rho.clamp(-1.0, 1.0);
    let omega_mix = (1.0 - rho * rho).max(0.0).sqrt();

    let mut stream = NormalStream::new(seed);
    let mut values = DMatrix::zeros(n, p + q);
    let mut z_eps = DVector::zeros(p);
    let mut z_zeta = DVector::zeros(q);
    for r in 0..n {
        let z1 = stream.next();
        let z2 = stream.next();
        let xi = z1;
        let omega = rho * z1 + omega_mix * z2;
        stream.fill(&mut z_eps);
        stream.fill(&mut z_zeta);
        let eps = &root_ee * &z_eps;
        let zeta = &root_zz * &z_zeta;
        for i in 0..p {
            values[(r, i)] = params.a[i] * xi + eps[i];
        }
        for j in 0..q {
            values[(r, p + j)] = params.b[j] * omega + zeta[j];
        }
    }
    DataMatrix::new(values, p, q)
}

/// Centered sample covariance with 1/(n-1) normalization. Validation is
/// relaxed: the result is symmetric and PSD by construction up to floating
/// error, but no rank constraint is applied.
pub fn empirical_cov(data: &DataMatrix) -> Result<BlockCovariance> {
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFewRows { n, min: 2 });
    }
    let m = data.p() + data.q();
    let vals = data.values();
    let mut means = vec![0.0f64; m];
    for c in 0..m {
        means[c] = vals.column(c).sum() / n as f64;
    }
    let mut sigma = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0f64;
            for r in 0..n {
                acc += (vals[(r, i)] - means[i]) * (vals[(r, j)] - means[j]);
            }
            let s = acc / (n as f64 - 1.0);
            sigma[(i, j)] = s;
            sigma[(j, i)] = s;
        }
    }
    BlockCovariance::new_relaxed(sigma, data.p(), data.q())
}

/// Result of projecting the cross block to its best rank-one approximation.
#[derive(Debug, Clone)]
pub struct RankOneProjection {
    pub cov: BlockCovariance,
    /// Singular-value ratio of the cross block before projection; the
    /// rank-one adequacy diagnostic.
    pub input_sv_ratio: f64,
    /// Whether the projected joint matrix is still PSD. A violation is
    /// flagged, never repaired.
    pub joint_psd: bool,
}

/// Replace the cross block by its leading singular triple, leaving the
/// within-block matrices untouched.
pub fn rank_one_project(cov: &BlockCovariance) -> RankOneProjection {
    let tol = Tolerances::default();
    let p = cov.p();
    let q = cov.q();
    let input_sv_ratio = cov.cross_sv_ratio();
    let projected_xy = match linalg::leading_singular_triple(&cov.xy()) {
        Some((u, v, d, _)) => &u * v.transpose() * d,
        None => DMatrix::zeros(p, q),
    };
    let mut sigma = cov.sigma().clone();
    for i in 0..p {
        for j in 0..q {
            sigma[(i, p + j)] = projected_xy[(i, j)];
            sigma[(p + j, i)] = projected_xy[(i, j)];
        }
    }
    let min_eig = linalg::sym_min_eig(&sigma);
    let joint_psd = min_eig >= -tol.psd * linalg::sym_max_eig(&sigma).max(0.0);
    let cov = BlockCovariance::new_relaxed(sigma, p, q).expect("projection preserves shape");
    RankOneProjection { cov, input_sv_ratio, joint_psd }
}

/// Both sides of the tetrad identity
/// `Cov(X_i, X_k) Cov(Y_j, Y_l) = Cov(X_i, Y_j) Cov(X_k, Y_l)`
/// and their difference. The identity holds exactly for covariances induced
/// by a single latent with diagonal within-block errors.
#[derive(Debug, Clone, Copy)]
pub struct TetradReport {
    pub i: usize,
    pub k: usize,
    pub j: usize,
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Tetrad residual for 0-based indices i, k into the X block and j, l into
/// the Y block.
pub fn tetrad_residual(
    cov: &BlockCovariance,
    i: usize,
    k: usize,
    j: usize,
    l: usize,
) -> Result<TetradReport> {
    let (p, q) = (cov.p(), cov.q());
    if p < 2 || q < 2 {
        return Err(Error::DegenerateBlock { p, q });
    }
    if i >= p || k >= p || j >= q || l >= q {
        return Err(Error::IndexOutOfRange(format!(
            "(i, k, j, l) = ({i}, {k}, {j}, {l}) for p = {p}, q = {q}"
        )));
    }
    if i == k || j == l {
        return Err(Error::IndexOutOfRange("need i != k and j != l".into()));
    }
    let sigma = cov.sigma();
    let lhs = sigma[(i, k)] * sigma[(p + j, p + l)];
    let rhs = sigma[(i, p + j)] * sigma[(k, p + l)];
    Ok(TetradReport { i, k, j, l, lhs, rhs, residual: lhs - rhs })
}

/// Which within-block matrix to scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSide {
    X,
    Y,
}

/// Maximum absolute off-diagonal covariance within the chosen block; zero
/// characterizes marginally independent block variables.
pub fn marginal_independence_check(cov: &BlockCovariance, block: BlockSide) -> f64 {
    let m = match block {
        BlockSide::X => cov.xx(),
        BlockSide::Y => cov.yy(),
    };
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// Output of the estimation pipeline.
#[derive(Debug, Clone)]
pub struct FitReport {
    /// The analyzed covariance: input with its cross block projected to
    /// rank one.
    pub covariance: BlockCovariance,
    pub factors: RankOneFactors,
    pub bounds: AlphaBounds,
    /// Midpoint of the feasible interval, the pipeline's default gauge.
    pub alpha: f64,
    pub params: LatentParams,
    /// Singular-value ratio of the (pre-projection) cross block.
    pub sv_ratio: f64,
    pub joint_psd: bool,
    pub warnings: Vec<String>,
}

/// Diagnostic threshold on the singular-value ratio beyond which a rank-one
/// summary of the cross block is flagged as inadequate.
pub const RANK_ONE_ADEQUACY_THRESHOLD: f64 = 0.2;

/// Estimation pipeline on a covariance: rank-one projection, SVD factors,
/// feasibility bounds, then single-latent parameters at the interval
/// midpoint.
pub fn fit_covariance(cov: &BlockCovariance) -> Result<FitReport> {
    let projection = rank_one_project(cov);
    let factors = decompose(&projection.cov)?;
    let bounds = alpha_bounds(&projection.cov, &factors)?;
    let alpha = 0.5 * (bounds.alpha_min + bounds.alpha_max);
    let params = single_latent_params(&projection.cov, &factors, alpha)?;
    let mut warnings = Vec::new();
    if projection.input_sv_ratio > RANK_ONE_ADEQUACY_THRESHOLD {
        warnings.push(format!(
            "rank-one adequacy: singular-value ratio {:.3} exceeds {}",
            projection.input_sv_ratio, RANK_ONE_ADEQUACY_THRESHOLD
        ));
    }
    if !projection.joint_psd {
        warnings.push("projected covariance is not jointly PSD".to_string());
    }
    Ok(FitReport {
        covariance: projection.cov,
        factors,
        bounds,
        alpha,
        params,
        sv_ratio: projection.input_sv_ratio,
        joint_psd: projection.joint_psd,
        warnings,
    })
}

/// Full pipeline from data: sample covariance, then `fit_covariance`.
/// Requires n >= p + q + 1 rows.
pub fn fit(data: &DataMatrix) -> Result<FitReport> {
    let min = data.p() + data.q() + 1;
    if data.n() < min {
        return Err(Error::TooFewRows { n: data.n(), min });
    }
    fit_covariance(&empirical_cov(data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{reconstruct, validate};

    fn eq10() -> BlockCovariance {
        let sigma = DMatrix::from_row_slice(
            5,
            5,
            &[
                7.0, 0.0, 0.0, 1.0, 0.5, //
                0.0, 7.0, 0.0, 2.0, 1.0, //
                0.0, 0.0, 7.0, 3.0, 1.5, //
                1.0, 2.0, 3.0, 9.0, 0.0, //
                0.5, 1.0, 1.5, 0.0, 5.0,
            ],
        );
        validate(sigma, 3, 2, &Tolerances::default(), true).unwrap()
    }

    fn zero_salience_params(p: usize, q: usize, rho: f64) -> LatentParams {
        LatentParams::new(
            DVector::zeros(p),
            DVector::zeros(q),
            rho,
            DMatrix::identity(p, p),
            DMatrix::identity(q, q),
        )
        .unwrap()
    }

    #[test]
    fn identical_seeds_reproduce_bit_patterns() {
        let params = zero_salience_params(2, 2, 0.3);
        let d1 = sample_latent(&params, 500, 42).unwrap();
        let d2 = sample_latent(&params, 500, 42).unwrap();
        assert_eq!(d1.values(), d2.values());
        let d3 = sample_latent(&params, 500, 43).unwrap();
        assert_ne!(d1.values(), d3.values());
    }

    #[test]
    fn zero_saliences_make_blocks_independent() {
        let params = zero_salience_params(2, 2, 0.9);
        let data = sample_latent(&params, 100_000, 7).unwrap();
        let cov = empirical_cov(&data).unwrap();
        assert!(linalg::max_abs(&cov.xy()) < 0.05);
        assert!((cov.xx()[(0, 0)] - 1.0).abs() < 0.05);
    }

    #[test]
    fn perfectly_correlated_latents_coincide() {
        // With unit saliences and no error the observed columns are the
        // latents themselves; rho = 1 forces them equal exactly.
        let params = LatentParams::new(
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![1.0]),
            1.0,
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let data = sample_latent(&params, 200, 5).unwrap();
        for r in 0..data.n() {
            assert_eq!(data.values()[(r, 0)], data.values()[(r, 1)]);
        }
    }

    #[test]
    fn sampler_matches_target_covariance() {
        // The estimator's expected Frobenius error at this n is
        // sqrt(((tr Sigma)^2 + |Sigma|_F^2) / n) ~ 0.086; assert a bound
        // comfortably above that floor but far below the matrix scale.
        let cov = eq10();
        let factors = decompose(&cov).unwrap();
        let params = single_latent_params(&cov, &factors, 2.0).unwrap();
        let data = sample_latent(&params, 200_000, 20260808).unwrap();
        let est = empirical_cov(&data).unwrap();
        let err = (est.sigma() - cov.sigma()).norm();
        assert!(err < 0.15, "Frobenius error {err}");
    }

    #[test]
    fn empirical_cov_hand_cases() {
        let two_identical =
            DataMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]), 1, 1).unwrap();
        let cov = empirical_cov(&two_identical).unwrap();
        assert_eq!(linalg::max_abs(cov.sigma()), 0.0);

        let pm =
            DataMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]), 1, 1).unwrap();
        let cov = empirical_cov(&pm).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(cov.sigma(), &expect);

        let single = DataMatrix::new(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), 1, 1).unwrap();
        assert!(matches!(empirical_cov(&single), Err(Error::TooFewRows { .. })));
    }

    #[test]
    fn projection_is_identity_on_rank_one_input() {
        let cov = eq10();
        let proj = rank_one_project(&cov);
        assert!((proj.cov.sigma() - cov.sigma()).abs().max() < 1e-12);
        assert!(proj.joint_psd);
        assert!(proj.input_sv_ratio < 1e-14);
    }

    #[test]
    fn projection_truncates_diagonal_cross_block() {
        let sigma = DMatrix::from_row_slice(
            4,
            4,
            &[
                10.0, 0.0, 3.0, 0.0, //
                0.0, 10.0, 0.0, 1.0, //
                3.0, 0.0, 10.0, 0.0, //
                0.0, 1.0, 0.0, 10.0,
            ],
        );
        let cov = validate(sigma, 2, 2, &Tolerances::default(), false).unwrap();
        let proj = rank_one_project(&cov);
        let xy = proj.cov.xy();
        assert!((xy[(0, 0)] - 3.0).abs() < 1e-12);
        assert!(xy[(1, 1)].abs() < 1e-12);
        assert_eq!(proj.cov.xx(), cov.xx());
        assert_eq!(proj.cov.yy(), cov.yy());
    }

    #[test]
    fn projection_stays_close_under_noise() {
        let cov = eq10();
        let mut stream = NormalStream::new(99);
        let mut noisy = cov.sigma().clone();
        for i in 0..5 {
            for j in i..5 {
                let bump = 0.01 * stream.next();
                noisy[(i, j)] += bump;
                if i != j {
                    noisy[(j, i)] += bump;
                }
            }
        }
        let noisy_cov = BlockCovariance::new_relaxed(noisy, 3, 2).unwrap();
        let proj = rank_one_project(&noisy_cov);
        assert!((proj.cov.xy() - cov.xy()).abs().max() < 0.05);
    }

    #[test]
    fn tetrad_vanishes_for_single_latent_diagonal_errors() {
        let params = LatentParams::new(
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![3.0, 4.0]),
            1.0,
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.7])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.2, 0.9])),
        )
        .unwrap();
        let (cov, _) = reconstruct(&params);
        let t = tetrad_residual(&cov, 0, 1, 0, 1).unwrap();
        assert_eq!(t.lhs, 24.0);
        assert_eq!(t.rhs, 24.0);
        assert_eq!(t.residual, 0.0);
    }

    #[test]
    fn tetrad_detects_uncorrelated_within_blocks() {
        // Diagonal within-block structure with a rank-one cross block:
        // lhs = 0 while rhs = 1.
        let cov = eq10();
        let t = tetrad_residual(&cov, 0, 1, 0, 1).unwrap();
        assert_eq!(t.lhs, 0.0);
        assert_eq!(t.rhs, 1.0);
        assert_eq!(t.residual, -1.0);
    }

    #[test]
    fn tetrad_zero_row_vanishes() {
        // X1 uncorrelated with everything: both sides are zero.
        let sigma = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.4, 0.2, //
                0.0, 0.4, 1.0, 0.0, //
                0.0, 0.2, 0.0, 1.0,
            ],
        );
        let cov = validate(sigma, 2, 2, &Tolerances::default(), false).unwrap();
        let t = tetrad_residual(&cov, 0, 1, 0, 1).unwrap();
        assert_eq!(t.residual, 0.0);
    }

    #[test]
    fn tetrad_index_validation() {
        let cov = eq10();
        assert!(matches!(tetrad_residual(&cov, 0, 0, 0, 1), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(tetrad_residual(&cov, 0, 3, 0, 1), Err(Error::IndexOutOfRange(_))));
        let scalar = validate(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]),
            1,
            1,
            &Tolerances::default(),
            false,
        )
        .unwrap();
        assert!(matches!(tetrad_residual(&scalar, 0, 1, 0, 1), Err(Error::DegenerateBlock { .. })));
    }

    #[test]
    fn marginal_independence_examples() {
        let cov = eq10();
        assert_eq!(marginal_independence_check(&cov, BlockSide::X), 0.0);
        assert_eq!(marginal_independence_check(&cov, BlockSide::Y), 0.0);

        let params = LatentParams::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![1.0]),
            0.5,
            DMatrix::identity(2, 2),
            DMatrix::identity(1, 1),
        )
        .unwrap();
        let (cov, _) = reconstruct(&params);
        assert_eq!(marginal_independence_check(&cov, BlockSide::X), 1.0);
    }

    #[test]
    fn fit_recovers_golden_numbers_from_exact_covariance() {
        let report = fit_covariance(&eq10()).unwrap();
        assert!((report.factors.d - (35.0f64 / 2.0).sqrt()).abs() < 1e-9);
        assert!((report.bounds.alpha_min - (2030.0f64).sqrt() / 30.0).abs() < 1e-9);
        assert!((report.bounds.alpha_max - 7.0f64.sqrt()).abs() < 1e-9);
        assert!((report.bounds.rho_min - (290.0f64).sqrt() / 30.0).abs() < 1e-9);
        assert!(report.warnings.is_empty());
        assert!(
            (report.alpha - 0.5 * (report.bounds.alpha_min + report.bounds.alpha_max)).abs()
                < 1e-15
        );
    }

    #[test]
    fn fit_flags_inadequate_rank_one_summary() {
        let sigma = DMatrix::from_row_slice(
            4,
            4,
            &[
                10.0, 0.0, 3.0, 0.0, //
                0.0, 10.0, 0.0, 2.0, //
                3.0, 0.0, 10.0, 0.0, //
                0.0, 2.0, 0.0, 10.0,
            ],
        );
        let cov = validate(sigma, 2, 2, &Tolerances::default(), false).unwrap();
        let report = fit_covariance(&cov).unwrap();
        assert!(report.sv_ratio > RANK_ONE_ADEQUACY_THRESHOLD);
        assert!(report.warnings.iter().any(|w| w.contains("rank-one adequacy")));
    }

    #[test]
    fn fit_rejects_zero_cross_covariance() {
        let params = zero_salience_params(2, 2, 1.0);
        let (cov, _) = reconstruct(&params);
        assert!(matches!(fit_covariance(&cov), Err(Error::ZeroCrossCovariance)));
    }

    #[test]
    fn fit_requires_enough_rows() {
        let params = zero_salience_params(2, 2, 0.0);
        let data = sample_latent(&params, 4, 1).unwrap();
        assert!(matches!(fit(&data), Err(Error::TooFewRows { n: 4, min: 5 })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let params = zero_salience_params(2, 1, 0.2);
        let data = sample_latent(&params, 50, 77).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = DataMatrix::read_csv(buf.as_slice(), Some(2)).unwrap();
        assert_eq!(data.values(), back.values());
        assert!(DataMatrix::read_csv(buf.as_slice(), Some(3)).is_err());
    }

    #[test]
    fn estimator_error_shrinks_like_root_n() {
        let cov = eq10();
        let factors = decompose(&cov).unwrap();
        let params = single_latent_params(&cov, &factors, 2.0).unwrap();
        let sizes = [1_000usize, 10_000, 100_000];
        let mut logs = Vec::new();
        for (k, &n) in sizes.iter().enumerate() {
            let mut total = 0.0;
            let reps = 4;
            for r in 0..reps {
                let data = sample_latent(&params, n, 1000 + (k * 10 + r) as u64).unwrap();
                let est = empirical_cov(&data).unwrap();
                total += (est.sigma() - cov.sigma()).norm();
            }
            logs.push(((n as f64).ln(), (total / reps as f64).ln()));
        }
        let slope = fit_slope(&logs);
        assert!((slope + 0.5).abs() < 0.15, "slope {slope}");
    }

    fn fit_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }
}
