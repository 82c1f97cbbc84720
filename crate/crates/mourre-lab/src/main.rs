//! `mourre-lab`: command-line surface over the spectral library.
//!
//! Every pipeline stage is a subcommand: band structure, threshold sets,
//! commutator weights, Mourre positivity checks, perturbation classification,
//! the alternating-block counterexample, truncation-stable eigenvalues, the
//! half-lattice boundary mode and weighted-resolvent sweeps.
//!
//! Configuration comes from an optional JSON document (`--config`) whose
//! fields individual flags override; built-in defaults fill whatever remains.
//! Exit codes: `0` success, `1` config or validation failure, `2` numerical
//! failure (no eigenvalues in a projection window, solver breakdown).

mod commands;
mod config;
mod report;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use mourre_core::classes::ClassError;
use mourre_core::classes::families::FamilyError;
use mourre_core::lattice::LatticeError;
use mourre_core::linalg::LinalgError;
use mourre_core::model::ModelError;
use mourre_core::probe::ProbeError;
use mourre_core::seq::SeqIoError;

/// A command failure, split by the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, bad config, or inputs outside a command's domain — exit 1.
    Validation(String),
    /// The computation itself broke down — exit 2.
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::EmptyProjector { .. }
            | LatticeError::NotHermitian { .. }
            | LatticeError::Linalg(_) => Failure::Numerical(e.to_string()),
            LatticeError::Model(m) => m.into(),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<ProbeError> for Failure {
    fn from(e: ProbeError) -> Self {
        match e {
            ProbeError::EdgeEigNotFound { .. } => Failure::Numerical(e.to_string()),
            ProbeError::Linalg(_) => Failure::Numerical(e.to_string()),
            ProbeError::Lattice(inner) => inner.into(),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<ClassError> for Failure {
    fn from(e: ClassError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<FamilyError> for Failure {
    fn from(e: FamilyError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SeqIoError> for Failure {
    fn from(e: SeqIoError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("io: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "mourre-lab",
    version,
    about = "Spectral workbench for first-order block difference operators on the lattice",
    long_about = "Spectral workbench for first-order block difference operators on the \
                  lattice.\n\nPrecedence for every setting: explicit flag, then the \
                  --config JSON document, then the built-in default. The default model \
                  is (alpha, a, b) = (1, 1, -1). All floating-point output carries 17 \
                  significant digits and round-trips exactly."
)]
struct Cli {
    /// JSON config supplying defaults; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps (default: available parallelism).
    #[arg(long, global = true, value_name = "COUNT")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the essential-spectrum bands as CSV (band, lo, hi, has_gap).
    Bands(commands::spectral::BandsArgs),
    /// Print the order-k threshold energies as CSV (k, point).
    Kappa(commands::spectral::KappaArgs),
    /// Sample the commutator weight g_k over the bands as CSV (t, g).
    G(commands::spectral::GArgs),
    /// Verify Mourre positivity: symbol-side identity or truncated compression.
    Mourre(commands::spectral::MourreArgs),
    /// Test a perturbation sequence against the decay classes.
    Classify(commands::classes::ClassifyArgs),
    /// Build and verify the alternating-block counterexample sequence.
    Counterexample(commands::classes::CounterexampleArgs),
    /// Truncation-stable eigenvalues of H0 + V inside an energy window.
    Eigs(commands::probe::EigsArgs),
    /// Locate the boundary mode of the half-lattice operator.
    Edge(commands::probe::EdgeArgs),
    /// Sweep the weighted resolvent norm toward the real axis.
    Lap(commands::probe::LapArgs),
}

impl Command {
    /// Top-level config keys the command reads; anything else in the JSON
    /// document is rejected up front.
    fn config_keys(&self) -> &'static [&'static str] {
        match self {
            Command::Bands(_) => &["model"],
            Command::Kappa(_) => &["model", "k"],
            Command::G(_) => &["model", "k", "points", "t_values"],
            Command::Mourre(_) => {
                &["model", "lattice", "k", "mode", "points", "window", "potential"]
            }
            Command::Classify(_) => {
                &["potential", "class", "k", "order", "horizon", "annulus", "lattice"]
            }
            Command::Counterexample(_) => &["family", "weights", "p_max", "horizon", "blocks"],
            Command::Eigs(_) => &["model", "lattice", "sizes", "window", "potential"],
            Command::Edge(_) => &["model", "lattice"],
            Command::Lap(_) => &["model", "lattice", "s", "x_grid", "eps_list", "potential"],
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(format!("thread pool: {e}")))?;
    }

    let cfg = match &cli.config {
        None => config::RunConfig::default(),
        Some(path) => config::load(path, cli.command.config_keys())?,
    };

    let text = match &cli.command {
        Command::Bands(a) => commands::spectral::bands(a, &cfg)?,
        Command::Kappa(a) => commands::spectral::kappa(a, &cfg)?,
        Command::G(a) => commands::spectral::g(a, &cfg)?,
        Command::Mourre(a) => commands::spectral::mourre(a, &cfg)?,
        Command::Classify(a) => commands::classes::classify(a, &cfg)?,
        Command::Counterexample(a) => commands::classes::counterexample(a, &cfg)?,
        Command::Eigs(a) => commands::probe::eigs(a, &cfg)?,
        Command::Edge(a) => commands::probe::edge(a, &cfg)?,
        Command::Lap(a) => commands::probe::lap(a, &cfg)?,
    };

    match cli.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
