//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dynledger",
    version,
    about = "Cycle, residue and counting ledger for rational maps"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct GlobalArgs {
    /// Map as an expression in `z`, e.g. "z^2 + c" or "(z^2 - 1)/(2z)".
    #[arg(long, global = true)]
    pub map: Option<String>,
    /// JSON file `{"expr": ..., "params": {...}}`.
    #[arg(long, global = true, conflicts_with = "map")]
    pub map_file: Option<PathBuf>,
    /// Parameter binding `name=value`; repeatable, overrides the map file.
    #[arg(long = "param", global = true, value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Annotation file (JSON).
    #[arg(long, global = true)]
    pub annot: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 4)]
    pub max_period: usize,
    /// Critical-orbit iteration budget.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub budget: usize,
    /// Root residual tolerance for periodic points.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, env = "DYNLEDGER_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 8)]
    pub jet_order: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Unresolved {
    Count,
    Exclude,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Fatou,
    Disc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse the map and report its normal form and critical divisor.
    Parse,
    /// Periodic cycles up to --max-period with multipliers and classes.
    Cycles,
    /// Parabolic invariants, with Abel-equation residuals on each petal.
    Parabolic {
        /// Iterations used for each Fatou coordinate.
        #[arg(long, default_value_t = 400)]
        abel_iters: usize,
    },
    /// Dynamical residue of a form at one cycle.
    Residue {
        /// `W(z)` as an expression in `z` (may use `nu`), or `log` for |z - z0|^-2.
        #[arg(long)]
        form: String,
        /// Degree m of the form W dz^m.
        #[arg(long, default_value_t = 1)]
        form_order: usize,
        #[arg(long, value_enum, default_value_t = Family::Fatou)]
        family: Family,
        /// Comma-separated region parameters, replacing the family default.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        /// Cycle id as reported by `cycles`.
        #[arg(long, default_value_t = 0)]
        cycle: usize,
        /// Density evaluations per region.
        #[arg(long, default_value_t = 1_000_000)]
        quad_budget: usize,
        #[arg(long, default_value_t = 1e-10)]
        quad_tol: f64,
        /// Also write the parameter trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Critical tails, the ramification split and the ε/δ marks.
    Tails {
        /// Emit the orbit of this critical point (index into the divisor) as CSV.
        #[arg(long)]
        transcript: Option<usize>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Kernel and cokernel dimensions of the global and local equalizers.
    Ext,
    /// Both counting inequalities.
    Count {
        /// Plain-text table instead of JSON.
        #[arg(long)]
        table: bool,
        #[arg(long, value_enum, default_value_t = Unresolved::Count)]
        unresolved: Unresolved,
    },
    /// Run the annotated corpus and diff against its expectations.
    CorpusRun {
        /// Corpus file replacing the built-in one.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Only entries whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Escape-time picture of the sink basins (binary PPM).
    Raster {
        #[arg(long, default_value_t = 400)]
        width: usize,
        #[arg(long, default_value_t = 400)]
        height: usize,
        /// View centre `re,im`.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.0, 0.0], allow_negative_numbers = true)]
        center: Vec<f64>,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
}
