//! `rulelens`: the file-based pipeline, the curation service, and a client for it.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod failure;

use failure::{Failure, EXIT_USAGE};

macro_rules! info {
    ($($arg:tt)*) => { eprintln!("info: {}", format_args!($($arg)*)) };
}
macro_rules! warning {
    ($($arg:tt)*) => { eprintln!("warning: {}", format_args!($($arg)*)) };
}
pub(crate) use {info, warning};

#[derive(Parser)]
#[command(name = "rulelens", version, about = "Association-rule explanations for risk predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic cohort with planted rules.
    Synth(SynthArgs),
    /// Split a dataset into training and test parts.
    Split(SplitArgs),
    /// Fit entropy cut points on training data.
    Discretize(DiscretizeArgs),
    /// Mine class association rules.
    Mine(MineArgs),
    /// Remove redundant and near-duplicate rules.
    Prune(PruneArgs),
    /// Create a curation session from pruned rules.
    CurateInit(CurateInitArgs),
    /// Write the classifier of a session file without a running service.
    CurateExport(CurateExportArgs),
    /// Serve a curation session over HTTP.
    CurateServe(CurateServeArgs),
    /// Talk to a running curation service.
    Curate(CurateArgs),
    /// Explain predictions for one patient or a whole file.
    Explain(ExplainArgs),
    /// Fit a cutoff, score predictions, and measure explanation coverage.
    Evaluate(EvaluateArgs),
    /// Agreement between two reviewers' keep/remove decisions.
    Kappa(KappaArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    rows: usize,
    #[arg(long, default_value_t = 50)]
    features: usize,
    #[arg(long, default_value_t = 10)]
    planted: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    base_rate: f64,
    #[arg(long, default_value_t = 0.02)]
    missing_rate: f64,
    /// Receives schema.json, data.csv, scores.csv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long, default_value_t = 0.8)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

#[derive(Args)]
struct DiscretizeArgs {
    #[command(flatten)]
    input: DataArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SupportModeArg {
    Joint,
    Lhs,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Cut points from `discretize`; fitted on --data when absent.
    #[arg(long)]
    cuts: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    min_support: f64,
    #[arg(long, default_value_t = 0.5)]
    min_confidence: f64,
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    /// Restrict items to these features (comma separated).
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = SupportModeArg::Joint)]
    support_mode: SupportModeArg,
    /// Drop disallowed items before mining. The surviving rules after
    /// `prune --allowed` with the same file are unchanged.
    #[arg(long)]
    allowed: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    rules: PathBuf,
    #[arg(long, default_value_t = 0.10)]
    delta: f64,
    #[arg(long)]
    allowed: Option<PathBuf>,
    /// With --cuts, checks the allowed values against the schema and bins.
    #[arg(long, requires = "cuts")]
    schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    cuts: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Stage counts as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Stage counts as CSV.
    #[arg(long)]
    report_csv: Option<PathBuf>,
    /// Rules left after the confidence-difference stage for each of --sweep-deltas.
    #[arg(long, requires = "sweep_deltas")]
    sweep: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sweep_deltas: Option<Vec<f64>>,
}

#[derive(Args)]
struct CurateInitArgs {
    #[arg(long)]
    rules: PathBuf,
    /// Supplies the interesting outcome values.
    #[arg(long)]
    schema: PathBuf,
    /// Stage counts from `prune --report`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Item annotations (JSON list) to preload.
    #[arg(long)]
    items: Option<PathBuf>,
    /// Attach every suggested intervention to its rule.
    #[arg(long)]
    accept_suggestions: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurateExportArgs {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurateServeArgs {
    #[arg(long)]
    session: PathBuf,
    /// Where POST /export writes the classifier.
    #[arg(long)]
    export: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

#[derive(Args)]
struct CurateArgs {
    #[arg(long, default_value = "http://127.0.0.1:8080")]
    url: String,
    #[command(subcommand)]
    action: CurateAction,
}

#[derive(Subcommand)]
enum CurateAction {
    Stats,
    /// Ask the service to write its classifier.
    Export,
    /// List rules as JSON Lines.
    Rules {
        #[arg(long)]
        actionable: Option<bool>,
        #[arg(long)]
        kept: Option<bool>,
        #[arg(long)]
        reviewed: Option<bool>,
        #[arg(long)]
        feature: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Disjoint,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum DisjointItemsArg {
    Actionable,
    All,
}

#[derive(Args)]
struct ModelArgs {
    /// Curated classifier from `curate-export`.
    #[arg(long, conflicts_with = "rules", required_unless_present = "rules")]
    classifier: Option<PathBuf>,
    /// Uncurated rules file: every rule kept, none actionable.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    input: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Explain one patient; otherwise every patient with an interesting prediction.
    #[arg(long)]
    patient_id: Option<String>,
    /// Predicted outcome for every selected patient. Defaults to the single
    /// interesting value unless --scores is given.
    #[arg(long, conflicts_with = "scores")]
    predicted: Option<String>,
    #[arg(long, requires = "threshold")]
    scores: Option<PathBuf>,
    #[arg(long, requires = "scores")]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 5)]
    nr: usize,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Disjoint)]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value_t = DisjointItemsArg::Actionable)]
    disjoint_items: DisjointItemsArg,
    #[arg(long)]
    full_view: bool,
    #[arg(long)]
    hide_nonactionable: bool,
    /// Category weights (JSON map) overriding the classifier's.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitOn {
    Train,
    Test,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Needed to fit the cutoff on training scores.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Fixed cutoff; skips fitting.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = FitOn::Train)]
    fit_on: FitOn,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the per-patient histogram CSVs.
    #[arg(long)]
    figures: Option<PathBuf>,
    /// Per-patient tallies as JSON Lines.
    #[arg(long)]
    patients: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    /// JSON map rule id -> kept.
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RULELENS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("RULELENS_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            if e.use_stderr() {
                let text = e.to_string();
                let first = text.lines().next().unwrap_or_default();
                eprintln!("error: {}", first.trim_start_matches("error: "));
                for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
                    eprintln!("note: {}", line.trim());
                }
            } else {
                let _ = e.print();
            }
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| commands::run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
