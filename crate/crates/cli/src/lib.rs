//! The `talentbayes` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns its exit
//! status; `main` only forwards the process streams. Exit statuses:
//!
//! * 0: success
//! * 1: usage error (unknown flag, missing or conflicting arguments)
//! * 2: data or validation error (unreadable file, schema violation, bad input)
//! * 3: internal error (a model file or computation breaks an invariant)

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

const INPUT_HELP: &str = "\
Instance as comma-separated name=value pairs, e.g. \"skill=high,experience=junior\".
Names and values are trimmed. `?` or an empty value means missing, and
attributes left out are missing too. Inside names and values, `\\,` is a
literal comma, `\\=` a literal equals sign and `\\\\` a backslash; any other
backslash sequence is an error. A pair naming the class attribute sets the
label, which prediction ignores.";

#[derive(Debug, Parser)]
#[command(name = "talentbayes", version, about = "Naive Bayes decision support for staffing")]
pub struct Cli {
    /// Output style: human-readable text or canonical JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a labeled CSV and write it as JSON.
    Train(TrainArgs),
    /// Posterior for one instance or for every row of a pool CSV.
    Predict(PredictArgs),
    /// Accuracy and confusion matrix, on a labeled CSV or by cross-validation.
    Evaluate(EvaluateArgs),
    /// Single-evidence rules and attribute influence.
    Explain(ExplainArgs),
    /// Posterior change when one attribute of an instance is altered.
    Whatif(WhatIfArgs),
    /// Rank a candidate pool and propose a team.
    Recommend(RecommendArgs),
    /// Write synthetic data drawn from a generative spec.
    Generate(GenerateArgs),
    /// Serve the HTTP API for a model.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Laplace smoothing constant.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("evidence").required(true).args(["input", "pool"])))]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, long_help = INPUT_HELP)]
    pub input: Option<String>,
    /// Pool CSV: a leading `id` column, then predictor columns.
    #[arg(long)]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Evaluate this model on --data.
    #[arg(long, conflicts_with_all = ["schema", "folds"])]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    /// Cross-validate on --data under this schema (requires --folds).
    #[arg(long, requires = "folds")]
    pub schema: Option<PathBuf>,
    #[arg(long, requires = "schema")]
    pub folds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Show only the strongest N rules.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Labeled CSV to rank influence on, which also covers numeric
    /// attributes. Without it influence comes from the model's categorical
    /// counts.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WhatIfArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, long_help = INPUT_HELP)]
    pub input: String,
    /// Change as `attribute=value`, same escapes as --input; `?` clears it.
    #[arg(long)]
    pub set: String,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub team_size: usize,
    /// Class to rank by; defaults to the first declared label.
    #[arg(long)]
    pub target: Option<String>,
    /// Drop members whose target posterior is below this value.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Defaults to the spec's own seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Copy each categorical cell from the previous one with this
    /// probability, breaking conditional independence. For demonstrations.
    #[arg(long)]
    pub correlated: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Listen port; falls back to TALENTBAYES_PORT, then 8080.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match commands::execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
