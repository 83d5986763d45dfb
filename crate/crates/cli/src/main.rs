//! `bellscope` command-line interface.

mod behavior;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "bellscope",
    version,
    about = "Local polytopes, Bell inequalities and quantum violations"
)]
struct Cli {
    /// Worker threads for see-saw restarts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the JSON run report here instead of to the terminal.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// An inequality given by family name or read from a file (`-` for stdin).
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct InequalitySource {
    /// Catalog family, e.g. CHSH, I3322, Imm22(4), Immnn(3,4), I3422_2.
    #[arg(long)]
    family: Option<String>,

    /// File in the inequality text format.
    #[arg(long, value_name = "FILE")]
    inequality: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SeesawArgs {
    /// Random restarts.
    #[arg(long, default_value_t = 50)]
    restarts: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Sweep cap per restart.
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,

    /// Restrict to rank-one projectors (local dimension = outcomes).
    #[arg(long)]
    rank1: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every facet of a local polytope.
    Enumerate {
        /// mA,mB,nA,nB
        #[arg(long)]
        scenario: String,

        /// Write the facet blocks here instead of to stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Group a facet file into relabeling orbits.
    Classify {
        /// Facet file (`-` for stdin).
        file: PathBuf,
    },
    /// Maximize a Bell expression over quantum states and measurements.
    Qmax {
        #[command(flatten)]
        source: InequalitySource,

        /// Local dimensions dA,dB.
        #[arg(long, default_value = "2,2")]
        dims: String,

        #[command(flatten)]
        seesaw: SeesawArgs,
    },
    /// Local (deterministic) maximum of inequalities.
    LhvBound {
        #[command(flatten)]
        source: InequalitySource,
    },
    /// Check that inequalities define facets of their local polytope.
    FacetCheck {
        /// Inequality file (`-` for stdin).
        #[arg(default_value = "-")]
        file: PathBuf,
    },
    /// Build an explicit local model for a behavior with two binary settings for Bob.
    FineCertify {
        /// Behavior JSON file (`-` for stdin).
        file: PathBuf,
    },
    /// Bisect the visibility at which a noisy entangled state starts to violate an inequality.
    WernerScan {
        #[command(flatten)]
        source: InequalitySource,

        /// Local dimension; 2 uses the Werner state, larger values the isotropic state.
        #[arg(long, default_value_t = 2)]
        dim: usize,

        #[arg(long, default_value_t = 0.5)]
        lo: f64,

        #[arg(long, default_value_t = 1.0)]
        hi: f64,

        /// Bisection steps.
        #[arg(long, default_value_t = 16)]
        iterations: usize,

        #[command(flatten)]
        seesaw: SeesawArgs,
    },
    /// Scan I3322 along the CHSH boundary of partially entangled states.
    Fig1 {
        /// Emit CSV (the only supported table format).
        #[arg(long)]
        csv: bool,

        /// Grid points strictly inside (0, π/2).
        #[arg(long, default_value_t = 25)]
        points: usize,

        #[arg(long, default_value_t = 50)]
        restarts: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 5000)]
        max_iterations: usize,

        /// Write the CSV here instead of to stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Evaluate I3322 on both two-qubit reductions of the three-qubit sharing state.
    Sharing {
        #[arg(long, default_value_t = 0.852)]
        mu: f64,
    },
    /// Print catalog inequalities.
    Family {
        /// Family name; omit with --list.
        name: Option<String>,

        /// Print in the inequality text format.
        #[arg(long)]
        emit: bool,

        /// List the available family names.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
