use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::options::{Thresholds, Tuning};

/// Geodesic flags, volume asymptotics and the ρ invariant for affine
/// control systems.
#[derive(Debug, Parser)]
#[command(name = "geoflow", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full pipeline for one covector; writes a JSON report.
    Analyze {
        #[command(flatten)]
        structure: StructureArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        tuning: Tuning,
        #[command(flatten)]
        thresholds: Thresholds,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One CSV row per covector listed in a file.
    Sweep {
        #[command(flatten)]
        structure: StructureArgs,
        /// Base point shared by every row (default: origin).
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// One comma-separated covector per line; `#` starts a comment.
        #[arg(long)]
        covectors: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The `(t, r, h, model)` table of the expansion fit as CSV.
    Expansion {
        #[command(flatten)]
        structure: StructureArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the fit summary as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the exact binomial and Hilbert identities.
    VerifyIdentities {
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the builtin catalog.
    ListBuiltins,
}

#[derive(Debug, Clone, Args)]
pub struct StructureArgs {
    /// Builtin name such as `heisenberg3` or `euclidean:3:psi=x1`.
    pub name: Option<String>,
    /// Structure declared in JSON instead of a builtin.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Drift components, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub drift: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub density: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Base point, comma-separated (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    /// Initial covector, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub covector: String,
}
