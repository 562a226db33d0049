mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use commands::CliError;

/// Environment variable naming the default directory for generated files.
pub const OUT_DIR_ENV: &str = "TAILCLUST_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "tailclust", version, about = "Cluster heavy-tailed variables by extreme value index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a price table into daily loss returns (negative log-returns).
    Returns(ReturnsArgs),
    /// Cluster the columns of an observation matrix.
    Cluster(ClusterArgs),
    /// Per-column Hill estimates with confidence bands.
    Hill(HillArgs),
    /// Generate a simulated data set and its ground truth.
    Simulate(SimulateArgs),
    /// Run a simulation sweep comparing the clustering methods.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ReturnsArgs {
    /// Price CSV: a date column followed by one column per series.
    pub input: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("groups").required(true).args(["known_g", "auto_g"])))]
pub struct ClusterArgs {
    /// Observation CSV with a header of column labels.
    pub input: PathBuf,
    /// Extract exactly this many groups.
    #[arg(long, value_name = "G")]
    pub known_g: Option<usize>,
    /// Infer the number of groups.
    #[arg(long)]
    pub auto_g: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_star: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Hill sample fraction for the per-column and group estimates (defaults to k).
    #[arg(long)]
    pub k_hill: Option<usize>,
    /// Confidence level of the per-column Hill bands.
    #[arg(long, default_value_t = 0.95)]
    pub ci: f64,
    /// Output JSON (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct HillArgs {
    /// Observation CSV with a header of column labels.
    pub input: PathBuf,
    /// Number of upper order statistics (defaults to the clustering default for p).
    #[arg(long)]
    pub k: Option<usize>,
    /// Confidence level of the bands.
    #[arg(long, default_value_t = 0.95)]
    pub ci: f64,
    #[arg(long, value_enum, default_value_t = TableFormat::Json)]
    pub format: TableFormat,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// A, B, C, D, A_F, B_F or EXACT_PARETO.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub g: usize,
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the CSV and its JSON sidecar.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
    /// File stem; derived from the design when omitted.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("design").required(true).args(["preset", "config"])))]
pub struct BenchArgs {
    /// Named design: fig1, fig2, fig3 or fig5.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON sweep configuration.
    #[arg(long, conflicts_with_all = ["model"])]
    pub config: Option<PathBuf>,
    /// Model for a preset.
    #[arg(long)]
    pub model: Option<String>,
    /// Replications per point (overrides the config file).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed (overrides the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the JSON and CSV reports.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
    /// File stem of the reports.
    #[arg(long, default_value = "bench")]
    pub name: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Returns(a) => commands::returns(&a),
        Command::Cluster(a) => commands::cluster(&a),
        Command::Hill(a) => commands::hill(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind.code())
    }
}
