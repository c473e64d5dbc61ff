//! The `mvca` command line: file-based pipeline from rules and traces to
//! networks and terms, and back.

mod commands;
mod files;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::run;

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Mismatch = 2,
    Precondition = 3,
    Cap = 4,
}

/// A failed command, with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn precondition(message: impl Into<String>) -> Self {
        CliError {
            code: ExitCode::Precondition,
            message: message.into(),
        }
    }

    pub fn cap(message: impl Into<String>) -> Self {
        CliError {
            code: ExitCode::Cap,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum CompilePath {
    /// DNF for k=2, simplicial interpolation otherwise.
    #[default]
    Auto,
    Dnf,
    Simplex,
}

#[derive(Debug, Parser)]
#[command(name = "mvca", version, about = "Cellular automata, many-valued logic and ReLU networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Number of states.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Neighborhood offsets, e.g. `-1,0,1` or `(0,0),(1,0)`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub offsets: Option<String>,
    /// Boundary for plain configuration files: `zero` or `periodic`.
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    /// Verification grid points per axis.
    #[arg(long, global = true, default_value_t = 5)]
    pub grid: usize,
    /// Largest interpolation dimension.
    #[arg(long, global = true, default_value_t = mvca::interp::DEFAULT_DIM_CAP)]
    pub cap: usize,
    /// Seed for commands that draw random data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print terms with `let` bindings for shared subterms.
    #[arg(long, global = true)]
    pub shared: bool,
    /// Compilation route for tables.
    #[arg(long, global = true, value_enum, default_value_t = CompilePath::Auto)]
    pub path: CompilePath,
    /// Accept tables with unobserved entries.
    #[arg(long, global = true)]
    pub allow_partial: bool,
    /// Extract even when the output range is not provably inside [0,1].
    #[arg(long, global = true)]
    pub assume_range: bool,
    /// Output file; standard output when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a transition table: an elementary rule number, `life`,
    /// `random` (with --k, --offsets, --seed) or `--term FILE`.
    Gen {
        rule: Option<String>,
        #[arg(long)]
        term: Option<PathBuf>,
    },
    /// Evolve an initial configuration and write the trace.
    Evolve {
        table: PathBuf,
        init: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
    /// Recover a transition table from a trace.
    Identify { trace: PathBuf },
    /// Compile a table or term file into a network.
    Compile { input: PathBuf },
    /// Extract a term from a network file.
    Extract { network: PathBuf },
    /// Compare a network with a term or a table.
    Verify { network: PathBuf, against: PathBuf },
    /// Compile a table, extract a term and check both against the table.
    Roundtrip { table: PathBuf },
    /// Run a sequence through the recurrent realization of a 1D rule.
    RnnEvolve {
        table: PathBuf,
        sequence: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
}
