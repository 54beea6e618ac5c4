//! `wce`: demos and verification suites for the wiener-chaos library.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! malformed flags or configuration, 3 when a computation errors out.
//! Coordinates and indices on the command line are 1-based.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wiener_chaos::gaussian_measure::MeasureDescriptor;
use wiener_chaos::mc::McConfig;
use wiener_chaos::poly::TermsDocument;
use wiener_chaos::verify::{Suite, VerifyOptions};

use commands::Outcome;
use config::{parse_grid, parse_indices, pick, resolve_seed, ConfigError, CovSpec, FileConfig, Format};

// aliases keep clap from treating the parsed lists as repeated flags
type IndexList = Vec<usize>;
type Grid = Vec<f64>;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "wce", version, about = "Exact Malliavin calculus on Gaussian polynomial functionals")]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Defaults to $WCE_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per estimate.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    confidence_multiplier: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gaussian moments by pair-partition enumeration.
    Isserlis(IsserlisArgs),
    /// Normalized Hermite polynomial coefficients.
    Hermite(HermiteArgs),
    /// Chaos decomposition of a polynomial and its J_n norms.
    Chaos(PolyArgs),
    /// Run verification suites and print the residual table.
    Verify(VerifyArgs),
    /// Itô versus Skorokhod integrals and the extended isometry.
    Skorokhod(SkorokhodArgs),
    /// Monte Carlo density estimate through the Malliavin weight.
    Density(DensityArgs),
    /// Cameron-Martin shift and gradient-relation checks.
    CameronMartin(CameronMartinArgs),
}

#[derive(Debug, Args)]
struct IsserlisArgs {
    /// `identityN` or a JSON matrix such as `[[1,0.5],[0.5,1]]`.
    #[arg(long, value_parser = CovSpec::parse_flag)]
    cov: Option<CovSpec>,
    /// Comma-separated 1-based indices; omit for a table of all moments.
    #[arg(long, value_parser = parse_indices)]
    indices: Option<IndexList>,
    /// Largest order in the table.
    #[arg(long)]
    max_order: Option<usize>,
}

#[derive(Debug, Args)]
struct HermiteArgs {
    /// A single degree; omit for the table `0..=max-degree`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Debug, Args)]
struct PolyArgs {
    /// Polynomial as a JSON terms document.
    #[arg(long, value_parser = parse_poly)]
    poly: Option<TermsDocument>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated suite names, or `all`.
    #[arg(long)]
    suite: Option<String>,
}

#[derive(Debug, Args)]
struct SkorokhodArgs {
    #[arg(long)]
    cells: Option<usize>,
    /// Emit this many sampled Brownian paths as CSV instead.
    #[arg(long)]
    paths: Option<usize>,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[arg(long, value_parser = parse_poly)]
    poly: Option<TermsDocument>,
    /// `a:b:step` or a comma-separated list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    xs: Option<Grid>,
}

#[derive(Debug, Args)]
struct CameronMartinArgs {
    /// JSON `{"mean": [...], "cov": [[...]]}`.
    #[arg(long, value_parser = parse_measure)]
    measure: Option<MeasureDescriptor>,
    /// Shift vector, comma-separated.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    h: Option<Grid>,
    #[arg(long, value_parser = parse_poly)]
    poly: Option<TermsDocument>,
    /// Evaluation points for the pointwise checks.
    #[arg(long)]
    points: Option<usize>,
}

fn parse_poly(s: &str) -> Result<TermsDocument, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn parse_measure(s: &str) -> Result<MeasureDescriptor, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn default_poly(dim: usize) -> TermsDocument {
    wiener_chaos::Poly::variable(dim, 0).to_document()
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(#[from] wiener_chaos::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Compute(
                wiener_chaos::Error::InvalidConfig(_)
                | wiener_chaos::Error::Format(_)
                | wiener_chaos::Error::NotSymmetric { .. }
                | wiener_chaos::Error::NotPsd { .. }
                | wiener_chaos::Error::DimensionMismatch { .. }
                | wiener_chaos::Error::IndexOutOfRange { .. },
            ) => EXIT_CONFIG,
            RunError::Compute(_) | RunError::Write { .. } => EXIT_RUNTIME,
        }
    }
}

/// Runs the command; the flag is `true` when the output went to a file.
fn run(cli: Cli) -> Result<(Outcome, bool), RunError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = resolve_seed(cli.seed, file.seed)?;
    let format = pick(cli.format, file.format, Format::Json);
    let workers = pick(cli.workers, file.workers, 1);
    let k = pick(cli.confidence_multiplier, file.confidence_multiplier, 4.0);
    let mc = |default_samples: usize| {
        let cfg = McConfig {
            n_samples: pick(cli.samples, file.samples, default_samples),
            seed,
            confidence_multiplier: k,
            n_workers: workers,
        };
        cfg.validate().map(|_| cfg)
    };

    let outcome = match cli.command {
        Command::Isserlis(a) => {
            let cov = pick(a.cov, file.cov.clone(), CovSpec::Named("identity2".into())).rows()?;
            let indices = a.indices.or(file.indices.clone());
            let max_order = pick(a.max_order, file.max_order, 4);
            commands::isserlis(cov, indices, max_order, seed, format)?
        }
        Command::Hermite(a) => {
            let max_degree = pick(a.max_degree, file.max_degree, 5);
            commands::hermite(a.n.or(file.n), max_degree, seed, format)?
        }
        Command::Chaos(a) => {
            let poly = pick(a.poly, file.poly.clone(), default_poly(1));
            commands::chaos(&poly, seed, format)?
        }
        Command::Verify(a) => {
            let suites = Suite::parse_list(&pick(a.suite, file.suite.clone(), "all".into()))?;
            let cfg = mc(VerifyOptions::default().mc_samples)?;
            let opts = VerifyOptions {
                seed,
                mc_samples: cfg.n_samples,
                n_workers: cfg.n_workers,
                confidence_multiplier: cfg.confidence_multiplier,
            };
            commands::verify(&suites, &opts, format)?
        }
        Command::Skorokhod(a) => {
            let cells = pick(a.cells, file.cells, 8);
            match a.paths.or(file.paths) {
                Some(paths) => commands::skorokhod_paths(cells, paths, &mc(McConfig::default().n_samples)?)?,
                None => commands::skorokhod(cells, seed, format)?,
            }
        }
        Command::Density(a) => {
            let poly = pick(a.poly, file.poly.clone(), default_poly(1));
            let xs = match a.xs.or(file.xs.clone()) {
                Some(xs) => xs,
                None => parse_grid("-3:3:0.5").expect("default grid parses"),
            };
            commands::density(&poly, &xs, &mc(McConfig::default().n_samples)?, format)?
        }
        Command::CameronMartin(a) => {
            let measure = match a.measure.or(file.measure.clone()) {
                Some(m) => m,
                None => MeasureDescriptor {
                    mean: vec![0.0; 2],
                    cov: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                },
            };
            let m = measure.mean.len();
            let h = match a.h.or(file.h.clone()) {
                Some(h) => h,
                None => (0..m).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
            };
            let poly = pick(a.poly, file.poly.clone(), default_poly(m.max(1)));
            let points = pick(a.points, file.points, 100);
            commands::cameron_martin(&measure, &h, &poly, points, &mc(McConfig::default().n_samples)?, format)?
        }
    };

    match cli.output.or(file.output) {
        Some(path) => {
            std::fs::write(&path, &outcome.body).map_err(|source| RunError::Write { path, source })?;
            Ok((outcome, true))
        }
        None => Ok((outcome, false)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((outcome, written)) => {
            if !written {
                print!("{}", outcome.body);
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("wce: one or more checks failed");
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            eprintln!("wce: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
