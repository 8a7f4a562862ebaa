//! Wire formats: the matrix, parameter, and graph JSON documents consumed
//! and produced by the command-line tools, plus a serializer that writes
//! every float with 17 significant digits so emitted documents are
//! byte-stable and round-trip exactly.

use std::io;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::covariance::{BlockCovariance, LatentParams, Tolerances};
use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::{covariance, validate};

/// Matrix document: `{"p": ..., "q": ..., "sigma": [[row], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub p: usize,
    pub q: usize,
    pub sigma: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::WrongDimensions(format!("{what} must be rectangular and nonempty")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl MatrixDoc {
    pub fn from_cov(cov: &BlockCovariance) -> Self {
        MatrixDoc { p: cov.p(), q: cov.q(), sigma: matrix_to_rows(cov.sigma()) }
    }

    /// Validate into a block covariance.
    pub fn to_cov(&self, tol: &Tolerances, strict_rank: bool) -> Result<BlockCovariance> {
        validate(rows_to_matrix(&self.sigma, "sigma")?, self.p, self.q, tol, strict_rank)
    }

    /// Relaxed conversion (shape and symmetry only).
    pub fn to_cov_relaxed(&self) -> Result<BlockCovariance> {
        BlockCovariance::new_relaxed(rows_to_matrix(&self.sigma, "sigma")?, self.p, self.q)
    }
}

/// Latent parameter document:
/// `{"a": [...], "b": [...], "rho": ..., "sigma_ee": [[...]], "sigma_zz": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub rho: f64,
    pub sigma_ee: Vec<Vec<f64>>,
    pub sigma_zz: Vec<Vec<f64>>,
}

impl ParamsDoc {
    pub fn from_params(params: &LatentParams) -> Self {
        ParamsDoc {
            a: params.a.iter().copied().collect(),
            b: params.b.iter().copied().collect(),
            rho: params.rho,
            sigma_ee: matrix_to_rows(&params.sigma_ee),
            sigma_zz: matrix_to_rows(&params.sigma_zz),
        }
    }

    pub fn to_params(&self) -> Result<LatentParams> {
        LatentParams::new(
            DVector::from_vec(self.a.clone()),
            DVector::from_vec(self.b.clone()),
            self.rho,
            rows_to_matrix(&self.sigma_ee, "sigma_ee")?,
            rows_to_matrix(&self.sigma_zz, "sigma_zz")?,
        )
    }
}

/// Graph document:
/// `{"vertices": [...], "directed": [["tail","head"], ...], "bidirected": [...], "latent": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub directed: Vec<(String, String)>,
    #[serde(default)]
    pub bidirected: Vec<(String, String)>,
    #[serde(default)]
    pub latent: Vec<String>,
}

impl GraphDoc {
    pub fn from_graph(g: &MixedGraph) -> Self {
        GraphDoc {
            vertices: g.labels().to_vec(),
            directed: g.directed_edges().map(|(t, h)| (t.to_string(), h.to_string())).collect(),
            bidirected: g.bidirected_edges().map(|(x, y)| (x.to_string(), y.to_string())).collect(),
            latent: g.latent_labels().map(str::to_string).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<MixedGraph> {
        let mut g = MixedGraph::new(self.vertices.clone())?;
        for (t, h) in &self.directed {
            g.add_directed(t, h)?;
        }
        for (x, y) in &self.bidirected {
            g.add_bidirected(x, y)?;
        }
        for l in &self.latent {
            g.mark_latent(l)?;
        }
        Ok(g)
    }
}

/// Compact JSON formatter writing every finite float as `{:.16e}`
/// (17 significant digits), enough for exact f64 round trips.
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serialize to a compact JSON string with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitFormatter);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("serde_json produces UTF-8")
}

/// Convenience: the reconstructed covariance of a parameter document.
pub fn reconstruct_doc(params: &ParamsDoc) -> Result<MatrixDoc> {
    let (cov, _) = covariance::reconstruct(&params.to_params()?);
    Ok(MatrixDoc::from_cov(&cov))
}
