//! `relbelief`: relative belief assessment of two-arm equivalence trials.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relbelief::relative_belief::LawMode;

use crate::error::CliResult;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(
    name = "relbelief",
    version,
    about = "Relative belief analysis of two-arm normal trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Elicit prior hyperparameters from bounds on the means and the variance.
    Elicit(ElicitArgs),
    /// Shapiro-Wilk check of the normal model and residual QQ data.
    CheckModel(CheckModelArgs),
    /// Prior-data conflict checks for the variance and the means.
    CheckPrior(CheckPriorArgs),
    /// Bias against and in favor of equivalence for one design.
    Bias(BiasArgs),
    /// Bias over a list of sample sizes.
    Design(DesignArgs),
    /// Full analysis of a trial: model check, conflict, relative belief and bias.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FailOn {
    /// Residual Shapiro-Wilk p-value below 0.05.
    ModelMisfit,
    /// The prior conflicts with the data.
    Conflict,
    /// Evidence against equivalence, weak or strong.
    EvidenceAgainst,
    Inconclusive,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format; each command has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct ElicitArgs {
    /// Lower bound on each arm mean.
    #[arg(long, allow_hyphen_values = true)]
    pub m1: f64,
    /// Upper bound on each arm mean.
    #[arg(long, allow_hyphen_values = true)]
    pub m2: f64,
    /// Lower bound on the response variance.
    #[arg(long)]
    pub s1_sq: f64,
    /// Upper bound on the response variance.
    #[arg(long)]
    pub s2_sq: f64,
    /// Virtual certainty of the bounds.
    #[arg(long, default_value_t = relbelief::elicitation::DEFAULT_VIRTUAL_CERTAINTY)]
    pub gamma_vc: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckModelArgs {
    /// CSV with header `arm,value`, arm E or R.
    #[arg(long)]
    pub data: PathBuf,
    /// Write pooled residual QQ points here.
    #[arg(long)]
    pub qq_output: Option<PathBuf>,
    /// Include the per-arm residual series in the QQ output.
    #[arg(long)]
    pub qq_all_series: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckPriorArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON with `mu0`, `tau0_sq`, `alpha0`, `beta0`.
    #[arg(long)]
    pub prior: PathBuf,
    /// Tail probability below which a conflict is declared.
    #[arg(long, default_value_t = relbelief::checks::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DesignCommon {
    #[arg(long)]
    pub prior: PathBuf,
    /// Half width of the equivalence bin around 0.
    #[arg(long)]
    pub delta: f64,
    /// Bin index of the alternative used for bias in favor.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub alternative_bin: i64,
    #[arg(long, default_value_t = LawMode::PaperLiteral)]
    pub mode: LawMode,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    #[arg(long)]
    pub n_e: usize,
    #[arg(long)]
    pub n_r: usize,
    #[command(flatten)]
    pub common: DesignCommon,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Comma-separated sample sizes, `n` for balanced arms or `nExnR`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub sizes: Vec<String>,
    #[command(flatten)]
    pub common: DesignCommon,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub prior: PathBuf,
    #[arg(long)]
    pub delta: f64,
    /// Posterior content of the relative belief credible region.
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    #[arg(long, default_value_t = LawMode::PaperLiteral)]
    pub mode: LawMode,
    /// Also assess noninferiority `μ_E - μ_R > -MARGIN`.
    #[arg(long)]
    pub noninferiority: Option<f64>,
    /// Strength below which evidence counts as strong against.
    #[arg(long, default_value_t = 0.05)]
    pub small: f64,
    /// Strength above which evidence counts as strong in favor.
    #[arg(long, default_value_t = 0.95)]
    pub large: f64,
    #[arg(long, default_value_t = relbelief::checks::DEFAULT_THRESHOLD)]
    pub conflict_threshold: f64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub alternative_bin: i64,
    /// Leave the bias simulation out of the report.
    #[arg(long)]
    pub skip_bias: bool,
    /// Write the relative belief table as CSV.
    #[arg(long)]
    pub table_csv: Option<PathBuf>,
    /// Write prior and posterior densities and their ratio as CSV.
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 401)]
    pub curve_points: usize,
    /// Exit with status 1 when any of these holds.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub fail_on: Vec<FailOn>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Elicit(a) => commands::elicit(&a),
        Command::CheckModel(a) => commands::check_model(&a),
        Command::CheckPrior(a) => commands::check_prior(&a),
        Command::Bias(a) => commands::bias(&a),
        Command::Design(a) => commands::design(&a),
        Command::Analyze(a) => commands::analyze(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relbelief: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
