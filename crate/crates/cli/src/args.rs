use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparsum_core::charsum::RawPoly;

#[derive(Debug, Parser)]
#[command(name = "sparsum", version, about = "Character sums, collinear triples and sumsets over prime fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SumsetKind {
    S1,
    S2,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a sparse-polynomial character sum and compare it with the known bounds.
    Expsum {
        #[arg(long)]
        p: u64,
        /// Terms as "a,k;b,l;c,m" meaning aX^k + bX^l + cX^m.
        #[arg(long)]
        poly: RawPoly,
        /// Multiplicative character index j (0 is principal).
        #[arg(long = "char", default_value_t = 0)]
        character: u64,
        /// Use the subgroup decomposition instead of direct evaluation.
        #[arg(long)]
        decomposed: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Collinear triples of a subgroup against their main term, as CSV.
    Triples {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        order: u64,
        #[arg(long, conflicts_with = "lambda_random", required_unless_present = "lambda_random")]
        lambda: Option<u64>,
        /// Number of random lambdas.
        #[arg(long)]
        lambda_random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Multiplicative energy of a shifted subgroup.
    Energy {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        order: u64,
        #[arg(long)]
        lambda: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Difference-product count of a set or subgroup.
    Dtimes {
        #[arg(long)]
        p: u64,
        /// Comma-separated residues.
        #[arg(long, value_delimiter = ',', conflicts_with = "order", required_unless_present = "order")]
        set: Option<Vec<u64>>,
        #[arg(long)]
        order: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Three-fold sumset or shifted ratio set of a subgroup.
    Sumset {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        order: u64,
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        mu: u64,
        #[arg(long, value_enum, default_value_t = SumsetKind::S1)]
        kind: SumsetKind,
        #[command(flatten)]
        output: Output,
    },
    /// Residues not of the form prime + three powers of a base.
    Romanoff {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_negative_numbers = true)]
        base: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a parameter sweep described by a JSON file.
    Sweep {
        #[arg(long)]
        /// Sweep description (JSON).
        spec: PathBuf,
        /// Overrides the worker count in the spec.
        #[arg(long)]
        jobs: Option<usize>,
        /// Run the property checks; exit 1 on any violation.
        #[arg(long)]
        check: bool,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the calibration suites and emit the fixture JSON.
    Calibrate {
        #[arg(long, default_value_t = sparsum_core::calibration::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
