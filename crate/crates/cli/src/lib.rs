//! Command-line front end: `generate`, `mine`, `evaluate` and `render`.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use manifest::RunManifest;

pub const LOG_ENV: &str = "EDT_MINER_LOG_LEVEL";

#[derive(Debug, Parser)]
#[command(
    name = "edt-miner",
    version,
    about = "Decision mining with latent comparison features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic measuring-process log as XES
    Generate(GenerateArgs),
    /// Learn decision rules from a log or case table
    Mine(MineArgs),
    /// Score a rule set against a ground-truth rule
    Evaluate(EvaluateArgs),
    /// Print a fitted tree
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of traces
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output XES file
    #[arg(long)]
    pub out: PathBuf,
    /// Per-instance movement of each range bound
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub positive_fraction: Option<f64>,
    /// Largest distance of an out-of-range measure from its bound
    #[arg(long)]
    pub margin: Option<f64>,
    /// Draw real-valued bounds and measures instead of whole numbers
    #[arg(long)]
    pub continuous: bool,
    /// TOML file with generator settings; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Also write the flattened case table
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the ground-truth rule as JSON
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Xes,
    Csv,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Event log (XES) or case table (CSV)
    #[arg(long)]
    pub log: PathBuf,
    /// Input format; inferred from the file extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// Attribute (or CSV column) holding the outcome
    #[arg(long)]
    pub result_attr: String,
    #[arg(long)]
    pub target_class: String,
    /// Mining approach: bdt or edt
    #[arg(long)]
    pub approach: Option<String>,
    /// Share of rows used for training
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    #[arg(long)]
    pub min_impurity_decrease: Option<f64>,
    /// Tolerance under which two values compare equal
    #[arg(long)]
    pub eq_epsilon: Option<f64>,
    /// Upper bound on compared column pairs
    #[arg(long)]
    pub max_pairs: Option<usize>,
    /// Trace attribute (or CSV column) with the case id
    #[arg(long, default_value = "uuid")]
    pub id_key: String,
    /// Keep the first write of an attribute within a trace
    #[arg(long)]
    pub first_write: bool,
    /// Column stem for a list attribute, as KEY=STEM (repeatable)
    #[arg(long = "alias", value_parser = parse_alias)]
    pub aliases: Vec<(String, String)>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// TOML file with mining settings; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rule name used in the report, e.g. "EDT, Synthetic"
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Rule set JSON written by `mine`
    #[arg(long)]
    pub rules: PathBuf,
    /// Ground-truth JSON: {target_class, conditions}
    #[arg(long)]
    pub ground_truth: PathBuf,
    /// Case table CSV for measuring accuracy
    #[arg(long)]
    pub test_table: Option<PathBuf>,
    /// Treat < and <= (and > and >=) as the same between variables
    #[arg(long)]
    pub strictness_tolerant: bool,
    /// Largest constant difference for matching variable-constant conditions
    #[arg(long, default_value_t = 1e-9)]
    pub const_eps: f64,
    /// Score every rule instead of the dominant one
    #[arg(long)]
    pub all_rules: bool,
    /// Row label for the results table
    #[arg(long)]
    pub label: Option<String>,
    /// Write the metrics report JSON (and a manifest next to it)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Tree JSON written by `mine`
    #[arg(long)]
    pub tree: PathBuf,
    /// ascii or dot
    #[arg(long, default_value = "ascii")]
    pub format: String,
    /// Write to a file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_alias(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected KEY=STEM, got `{s}`")),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Mine(a) => commands::mine(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Render(a) => commands::render(&a),
    }
}

/// 0 for help/version output, 2 for usage, configuration and file errors, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(e) = err.downcast_ref::<clap::Error>() {
        return e.exit_code();
    }
    if let Some(e) = err.downcast_ref::<edt_miner_core::Error>() {
        // An unreadable input document is a usage problem, like a missing file.
        let unreadable = matches!(e, edt_miner_core::Error::Json(_));
        return if e.is_usage() || unreadable { 2 } else { 1 };
    }
    let usage = err.downcast_ref::<std::io::Error>().is_some()
        || err.downcast_ref::<toml::de::Error>().is_some()
        || err.downcast_ref::<serde_json::Error>().is_some();
    if usage {
        2
    } else {
        1
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}
