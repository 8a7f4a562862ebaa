//! `crosscov`: analyze rank-one cross-covariance models from the command
//! line. Subcommands cover cross-block decomposition, feasibility bounds,
//! parameter synthesis, region plots, mixed-graph queries, simulation, and
//! fitting. JSON payloads go to stdout (floats at 17 significant digits),
//! diagnostics to stderr.
//!
//! Exit codes: 0 ok, 1 internal failure, 2 invalid input, 3 infeasible
//! model state.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crosscov::covariance::Tolerances;
use crosscov::graph::{
    family_graph, markov_equivalent, Condition, FamilySpec, MixedGraph, Separation,
    SeparationQuery, Variant,
};
use crosscov::json::{GraphDoc, MatrixDoc, ParamsDoc};
use crosscov::parameterization::{alpha_bounds, decompose, min_eig_f, min_eig_g, paired_params};
use crosscov::region::{region_grid, render_ascii, render_svg};
use crosscov::simulation::{fit, sample_latent, DataMatrix};
use crosscov::{BlockCovariance, Error as CoreError};

#[derive(Parser)]
#[command(name = "crosscov", version, about = "Rank-one cross-covariance model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-block SVD factors and feasibility bounds of a matrix document.
    Decompose(DecomposeArgs),
    /// Paired-latent parameters at a chosen (rho, alpha).
    Params(ParamsArgs),
    /// Render the feasible (rho, alpha) region as ASCII art or SVG.
    Region(RegionArgs),
    /// Mixed-graph queries.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Draw Gaussian samples from a latent parameter document.
    Simulate(SimulateArgs),
    /// Estimate factors, bounds, and parameters from CSV data.
    Fit(FitArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// Matrix JSON document.
    #[arg(long)]
    input: PathBuf,
    /// Expected X-block dimension (cross-checked against the document).
    #[arg(long)]
    p: Option<usize>,
    /// Expected Y-block dimension (cross-checked against the document).
    #[arg(long)]
    q: Option<usize>,
    /// Reject inputs whose cross block is not numerically rank one.
    #[arg(long)]
    strict_rank: bool,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Latent correlation.
    #[arg(long)]
    rho: f64,
    /// Salience scale gauge.
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    strict_rank: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RegionFormat {
    Ascii,
    Svg,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    input: PathBuf,
    /// Grid resolution (cells per axis).
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = RegionFormat::Ascii)]
    format: RegionFormat,
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Ancestrality and maximality of a graph document.
    Check {
        #[arg(long)]
        input: PathBuf,
    },
    /// m-separation query, written as "A1,A2 | B1 | Z1,Z2" (empty segment
    /// for the empty set).
    Msep {
        #[arg(long)]
        input: PathBuf,
        query: String,
    },
    /// Markov equivalence of two graph documents.
    Equiv { g1: PathBuf, g2: PathBuf },
    /// Emit a member of the built-in two-block model family as graph JSON.
    Figure4 {
        /// Variant letter a-e.
        #[arg(long)]
        variant: String,
        /// Error condition I (correlated within-block errors) or II
        /// (independent errors).
        #[arg(long)]
        condition: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Latent parameter JSON document.
    #[arg(long)]
    input: PathBuf,
    /// Number of observations.
    #[arg(long)]
    n: usize,
    /// RNG seed; identical seeds give byte-identical output.
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Data CSV with header X1..Xp,Y1..Yq.
    #[arg(long)]
    input: PathBuf,
    /// X-block dimension (cross-checked against the header).
    #[arg(long)]
    p: Option<usize>,
}

/// Classify a core error into the exit-code contract.
fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::RankTooHigh { .. }
        | CoreError::ZeroCrossCovariance
        | CoreError::InfeasiblePoint { .. }
        | CoreError::InfeasibleAlpha { .. } => 3,
        CoreError::BracketingFailure { .. } => 1,
        _ => 2,
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure { code: exit_code_for(&e), message: e.to_string() }
    }
}

type CmdResult = Result<(String, Vec<String>), Failure>;

fn read_to_string(path: &Path) -> Result<String, Failure> {
    let mut buf = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut buf))
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    Ok(buf)
}

fn load_matrix(path: &Path) -> Result<MatrixDoc, Failure> {
    serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load_cov(
    path: &Path,
    p: Option<usize>,
    q: Option<usize>,
    strict_rank: bool,
) -> Result<BlockCovariance, Failure> {
    let doc = load_matrix(path)?;
    if let Some(p) = p {
        if p != doc.p {
            return Err(Failure::invalid(format!("--p {p} conflicts with document p = {}", doc.p)));
        }
    }
    if let Some(q) = q {
        if q != doc.q {
            return Err(Failure::invalid(format!("--q {q} conflicts with document q = {}", doc.q)));
        }
    }
    Ok(doc.to_cov(&Tolerances::default(), strict_rank)?)
}

fn load_graph(path: &Path) -> Result<MixedGraph, Failure> {
    let doc: GraphDoc = serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    Ok(doc.to_graph()?)
}

#[derive(Serialize)]
struct DecomposeOut {
    u: Vec<f64>,
    v: Vec<f64>,
    d: f64,
    alpha_min: f64,
    alpha_max: f64,
    rho_min: f64,
    sv_ratio: f64,
}

fn cmd_decompose(args: &DecomposeArgs) -> CmdResult {
    let cov = load_cov(&args.input, args.p, args.q, args.strict_rank)?;
    let factors = decompose(&cov)?;
    let bounds = alpha_bounds(&cov, &factors)?;

    let mut diagnostics = Vec::new();
    // A near-zero curve just inside a bound signals a flat PSD-boundary
    // segment: the bound is then the extreme point of a plateau.
    let inside = 1.0 - 1e-6;
    if min_eig_f(&cov, &factors, bounds.alpha_max * inside)?.abs() < 1e-10 {
        diagnostics.push("flat X-error eigenvalue segment at alpha_max".to_string());
    }
    if min_eig_g(&cov, &factors, bounds.alpha_min / inside)?.abs() < 1e-10 {
        diagnostics.push("flat Y-error eigenvalue segment at alpha_min".to_string());
    }

    let out = DecomposeOut {
        u: factors.u.iter().copied().collect(),
        v: factors.v.iter().copied().collect(),
        d: factors.d,
        alpha_min: bounds.alpha_min,
        alpha_max: bounds.alpha_max,
        rho_min: bounds.rho_min,
        sv_ratio: cov.cross_sv_ratio(),
    };
    Ok((crosscov::json::to_json_string(&out), diagnostics))
}

#[derive(Serialize)]
struct ParamsOut {
    #[serde(flatten)]
    params: ParamsDoc,
    min_eig_ee: f64,
    min_eig_zz: f64,
}

fn cmd_params(args: &ParamsArgs) -> CmdResult {
    let cov = load_cov(&args.input, None, None, args.strict_rank)?;
    let factors = decompose(&cov)?;
    let params = paired_params(&cov, &factors, args.rho, args.alpha)?;

    let min_eig_ee = params.sigma_ee.symmetric_eigenvalues().min();
    let min_eig_zz = params.sigma_zz.symmetric_eigenvalues().min();
    let mut diagnostics = Vec::new();
    let boundary = 1e-8 * cov.max_abs_entry().max(1.0);
    if min_eig_ee.abs() <= boundary {
        diagnostics.push("X error covariance is singular (feasibility boundary)".to_string());
    }
    if min_eig_zz.abs() <= boundary {
        diagnostics.push("Y error covariance is singular (feasibility boundary)".to_string());
    }

    let out = ParamsOut { params: ParamsDoc::from_params(&params), min_eig_ee, min_eig_zz };
    Ok((crosscov::json::to_json_string(&out), diagnostics))
}

fn cmd_region(args: &RegionArgs) -> CmdResult {
    if args.steps < 2 {
        return Err(Failure::invalid("--steps must be at least 2"));
    }
    let cov = load_cov(&args.input, None, None, false)?;
    let factors = decompose(&cov)?;
    let bounds = alpha_bounds(&cov, &factors)?;
    let grid = region_grid(&bounds, args.steps);
    let rendered = match args.format {
        RegionFormat::Ascii => render_ascii(&grid, &bounds),
        RegionFormat::Svg => render_svg(&grid, &bounds),
    };
    Ok((rendered, Vec::new()))
}

#[derive(Serialize)]
struct CheckOut {
    ancestral: bool,
    maximal: Option<bool>,
}

#[derive(Serialize)]
struct MsepOut {
    separated: bool,
}

#[derive(Serialize)]
struct SeparationOut {
    a: String,
    b: String,
    z: Vec<String>,
}

impl From<&Separation> for SeparationOut {
    fn from(s: &Separation) -> Self {
        SeparationOut { a: s.a.clone(), b: s.b.clone(), z: s.z.clone() }
    }
}

#[derive(Serialize)]
struct EquivOut {
    equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<SeparationOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn cmd_graph(cmd: &GraphCommand) -> CmdResult {
    match cmd {
        GraphCommand::Check { input } => {
            let g = load_graph(input)?;
            let ancestral = g.is_ancestral();
            let maximal = if ancestral { Some(g.is_maximal()?) } else { None };
            Ok((crosscov::json::to_json_string(&CheckOut { ancestral, maximal }), Vec::new()))
        }
        GraphCommand::Msep { input, query } => {
            let g = load_graph(input)?;
            let query = SeparationQuery::from_str(query)?;
            let separated = g.m_separated(&query)?;
            Ok((crosscov::json::to_json_string(&MsepOut { separated }), Vec::new()))
        }
        GraphCommand::Equiv { g1, g2 } => {
            let a = load_graph(g1)?;
            let b = load_graph(g2)?;
            let out = equivalence_report(&a, &b)?;
            Ok((crosscov::json::to_json_string(&out), Vec::new()))
        }
        GraphCommand::Figure4 { variant, condition, p, q } => {
            let spec = FamilySpec {
                variant: Variant::from_str(variant)?,
                condition: Condition::from_str(condition)?,
                p: *p,
                q: *q,
            };
            let g = family_graph(&spec)?;
            Ok((crosscov::json::to_json_string(&GraphDoc::from_graph(&g)), Vec::new()))
        }
    }
}

/// Markov equivalence with graceful handling of differing vertex sets:
/// graphs over different vertices are never equivalent, and the witness is
/// a separation involving a non-shared vertex.
fn equivalence_report(a: &MixedGraph, b: &MixedGraph) -> Result<EquivOut, Failure> {
    match markov_equivalent(a, b) {
        Ok(report) => Ok(EquivOut {
            equivalent: report.equivalent,
            witness: report.witness.as_ref().map(Into::into),
            note: None,
        }),
        Err(CoreError::VertexSetMismatch) => {
            let witness = vertex_mismatch_witness(b, a).or_else(|| vertex_mismatch_witness(a, b));
            Ok(EquivOut {
                equivalent: false,
                witness,
                note: Some("vertex sets differ".to_string()),
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// First separation of `g` (canonical order) that mentions a vertex absent
/// from `other`.
fn vertex_mismatch_witness(g: &MixedGraph, other: &MixedGraph) -> Option<SeparationOut> {
    let seps = g.implied_separations().ok()?;
    seps.iter()
        .find(|s| {
            std::iter::once(&s.a)
                .chain(std::iter::once(&s.b))
                .chain(s.z.iter())
                .any(|v| other.vertex(v).is_err())
        })
        .map(Into::into)
}

#[derive(Serialize)]
struct SimulateOut {
    n: usize,
    p: usize,
    q: usize,
    out: String,
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let doc: ParamsDoc = serde_json::from_str(&read_to_string(&args.input)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", args.input.display())))?;
    let params = doc.to_params()?;
    let data = sample_latent(&params, args.n, args.seed)?;
    let file = File::create(&args.out)
        .map_err(|e| Failure::invalid(format!("{}: {e}", args.out.display())))?;
    data.write_csv(BufWriter::new(file))
        .map_err(|e| Failure::invalid(format!("{}: {e}", args.out.display())))?;
    let out =
        SimulateOut { n: data.n(), p: data.p(), q: data.q(), out: args.out.display().to_string() };
    Ok((crosscov::json::to_json_string(&out), Vec::new()))
}

#[derive(Serialize)]
struct FactorsOut {
    u: Vec<f64>,
    v: Vec<f64>,
    d: f64,
}

#[derive(Serialize)]
struct FitOut {
    covariance: MatrixDoc,
    factors: FactorsOut,
    alpha_min: f64,
    alpha_max: f64,
    rho_min: f64,
    alpha: f64,
    params: ParamsDoc,
    sv_ratio: f64,
    joint_psd: bool,
}

fn cmd_fit(args: &FitArgs) -> CmdResult {
    let file = File::open(&args.input)
        .map_err(|e| Failure::invalid(format!("{}: {e}", args.input.display())))?;
    let data = DataMatrix::read_csv(BufReader::new(file), args.p)?;
    let report = fit(&data)?;
    let out = FitOut {
        covariance: MatrixDoc::from_cov(&report.covariance),
        factors: FactorsOut {
            u: report.factors.u.iter().copied().collect(),
            v: report.factors.v.iter().copied().collect(),
            d: report.factors.d,
        },
        alpha_min: report.bounds.alpha_min,
        alpha_max: report.bounds.alpha_max,
        rho_min: report.bounds.rho_min,
        alpha: report.alpha,
        params: ParamsDoc::from_params(&report.params),
        sv_ratio: report.sv_ratio,
        joint_psd: report.joint_psd,
    };
    Ok((crosscov::json::to_json_string(&out), report.warnings))
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Decompose(args) => cmd_decompose(args),
        Command::Params(args) => cmd_params(args),
        Command::Region(args) => cmd_region(args),
        Command::Graph(cmd) => cmd_graph(cmd),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((payload, diagnostics)) => {
            for d in diagnostics {
                eprintln!("warning: {d}");
            }
            println!("{payload}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
