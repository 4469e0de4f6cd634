//! Argument parsing and the reproducibility fingerprint.
//!
//! Every output artifact embeds a [`RunConfig`]: the exact knobs the run
//! used, serialized verbatim next to the tool version. Two artifacts with
//! equal fingerprints came from interchangeable invocations.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sfsdfc::ImputePolicy;

#[derive(Debug, Parser)]
#[command(
    name = "sfsdfc",
    version,
    about = "Feature selection for mixed continuous/discrete tabular data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a feature subset by clustering redundant features.
    Select(SelectArgs),
    /// Score a feature subset with repeated stratified cross-validation.
    Eval(EvalArgs),
    /// Select and evaluate every dataset in a directory, with baselines.
    Bench(BenchArgs),
}

/// Missing-cell handling, mirroring the library's policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputeArg {
    /// Fill continuous cells with the median, discrete with the mode.
    MedianMode,
    /// Drop every sample that has a missing cell.
    Drop,
}

impl From<ImputeArg> for ImputePolicy {
    fn from(arg: ImputeArg) -> Self {
        match arg {
            ImputeArg::MedianMode => ImputePolicy::MedianMode,
            ImputeArg::Drop => ImputePolicy::Drop,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Label column: a header name, or a 0-based index. Falls back to the
    /// schema's label line, then to "class".
    #[arg(long)]
    pub label: Option<String>,
    /// Sidecar schema file (`column=continuous|discrete|label` lines).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Missing-cell policy.
    #[arg(long, value_enum, default_value_t = ImputeArg::MedianMode)]
    pub impute: ImputeArg,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Distinct-count threshold for typing columns (default sqrt(n)).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Density kernel bandwidth override (default: estimated per kind).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Density kernel sharpening override (default 2).
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Cross-validation repetitions.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Neighbor count for the classifier.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Seed for fold shuffling (repeat r uses seed + r).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub tune: TuneArgs,
    /// Output file for the selection JSON (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write each kind's dissimilarity matrix to `<prefix>.<kind>.csv`.
    #[arg(long)]
    pub dump_dissim: Option<PathBuf>,
    /// Write the per-kind clusterings (original indices) as JSON.
    #[arg(long)]
    pub dump_clusters: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Selection JSON whose `selected[].index` entries form the subset;
    /// the full feature set when omitted.
    #[arg(long)]
    pub subset: Option<PathBuf>,
    /// Output file for the evaluation JSON (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of dataset CSVs; `<name>.schema` sidecars are honored.
    #[arg(long)]
    pub input: PathBuf,
    /// Label column used for datasets without a schema label line
    /// (default "class").
    #[arg(long)]
    pub label: Option<String>,
    /// Missing-cell policy.
    #[arg(long, value_enum, default_value_t = ImputeArg::MedianMode)]
    pub impute: ImputeArg,
    #[command(flatten)]
    pub tune: TuneArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Output file for the benchmark CSV (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// The flattened fingerprint embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub input: PathBuf,
    pub label: Option<String>,
    pub schema: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub impute: ImputeArg,
    pub folds: Option<usize>,
    pub repeats: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub subset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub dump_dissim: Option<PathBuf>,
    pub dump_clusters: Option<PathBuf>,
}

impl RunConfig {
    pub fn for_select(args: &SelectArgs) -> Self {
        RunConfig {
            command: "select",
            input: args.input.input.clone(),
            label: args.input.label.clone(),
            schema: args.input.schema.clone(),
            epsilon: args.tune.epsilon,
            beta: args.tune.beta,
            gamma: args.tune.gamma,
            impute: args.input.impute,
            folds: None,
            repeats: None,
            k: None,
            seed: None,
            subset: None,
            output: args.output.clone(),
            dump_dissim: args.dump_dissim.clone(),
            dump_clusters: args.dump_clusters.clone(),
        }
    }

    pub fn for_eval(args: &EvalArgs) -> Self {
        RunConfig {
            command: "eval",
            input: args.input.input.clone(),
            label: args.input.label.clone(),
            schema: args.input.schema.clone(),
            epsilon: None,
            beta: None,
            gamma: None,
            impute: args.input.impute,
            folds: Some(args.protocol.folds),
            repeats: Some(args.protocol.repeats),
            k: Some(args.protocol.k),
            seed: Some(args.protocol.seed),
            subset: args.subset.clone(),
            output: args.output.clone(),
            dump_dissim: None,
            dump_clusters: None,
        }
    }

    pub fn for_bench(args: &BenchArgs) -> Self {
        RunConfig {
            command: "bench",
            input: args.input.clone(),
            label: args.label.clone(),
            schema: None,
            epsilon: args.tune.epsilon,
            beta: args.tune.beta,
            gamma: args.tune.gamma,
            impute: args.impute,
            folds: Some(args.protocol.folds),
            repeats: Some(args.protocol.repeats),
            k: Some(args.protocol.k),
            seed: Some(args.protocol.seed),
            subset: None,
            output: args.output.clone(),
            dump_dissim: None,
            dump_clusters: None,
        }
    }
}
