//! `loopsoup` command-line runner: loads graphs, groups and assignments, runs the exact
//! evaluators and identity suites, and writes reproducible CSV or JSON tables.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for invalid input or parameters.
pub const EXIT_VALIDATION: u8 = 1;
/// Exit status when a verification suite reports a failed identity.
pub const EXIT_SUITE_FAILED: u8 = 2;
/// Exit status for unreadable or malformed files.
pub const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "loopsoup", version, about = "Markov loop soups on weighted graphs, checked against exact formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Built-in graph (t2, t3, cycle4, k4, single, circleN, pathN) or a JSON graph file.
    #[arg(long, default_value = "t2")]
    pub graph: String,
    /// Root seed; required by every stochastic command.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Built-in group (z2, zN for N ≤ 12, s3, d4) or a JSON group file.
    #[arg(long, default_value = "z2")]
    pub group: String,
    /// `identity`, `random` (drawn from --seed) or a JSON assignment file.
    #[arg(long, default_value = "identity")]
    pub assignment: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Loop classes with their counts.
    Soup,
    /// Occupation field per vertex.
    Occupation,
    /// Oriented edge crossing counts.
    Network,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemma1,
    Prop1,
    Prop2,
    Iso,
    Covering,
    Decomp,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Graph invariants: transience, determinants, spectral radius, cycle rank.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Draws loop soups and dumps loops, occupation fields or edge networks.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = SampleKind::Soup)]
        what: SampleKind,
        /// Longest enumerated loop for the truncated sampler; α = 1 uses Wilson's
        /// algorithm unless a cap is given.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Runs an identity suite and reports the worst deviation against its tolerance.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Largest total jump count enumerated by the network suites.
        #[arg(long, default_value_t = 8)]
        cap: u64,
    },
    /// Law of the random homology class by torus quadrature.
    Homology {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        jmax: i64,
    },
    /// Expected holonomy class law, optionally against a Monte Carlo estimate (α = 1).
    Holonomy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Monte Carlo soups to average; 0 skips the estimate.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Convergence of soup-induced weights to the Yang–Mills weight under ε-scaling.
    Yangmills {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        group: GroupArgs,
        /// Index of the irreducible representation.
        #[arg(long, default_value_t = 1)]
        irrep: usize,
        /// U(1) holonomies on the fundamental cycles; replaces --group and --assignment.
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        epsilons: Vec<f64>,
        /// Longest enumerated loop when searching for plaquettes.
        #[arg(long, default_value_t = 8)]
        cap: usize,
    },
    /// Aggregate summary of the graph, the identity suites and the exact laws.
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
