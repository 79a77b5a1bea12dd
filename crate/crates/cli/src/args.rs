// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Classify commit messages, compute team contribution features and predict
/// student team work styles from git histories.
#[derive(Debug, Parser)]
#[command(name = "gitteams", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Random seed for generation, fold assignment and forests [default: 7]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run configuration file (.toml or .json)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output directory (dataset commands default to the dataset itself)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmArg {
    Forest,
    LogisticRfe,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Normalize git logs or commit JSONL plus a roster into a dataset directory
    Ingest(IngestArgs),
    /// Generate a synthetic corpus with ground truth
    Synth(SynthArgs),
    /// Train the commit classification cascade on a tagged CSV
    TrainCommits(TrainCommitsArgs),
    /// Cross-validate the commit cascade (per-category precision/recall/F1)
    EvalCommits(EvalCommitsArgs),
    /// Label a dataset's commits with a trained cascade
    LabelCommits(LabelCommitsArgs),
    /// Compute the team feature matrix of a labeled dataset
    Features(DatasetArgs),
    /// Label teams with the churn-share rubric
    LabelTeams(DatasetArgs),
    /// Train a team-style model
    TrainTeams(TeamModelArgs),
    /// Cross-validate a team-style model (per-style precision/recall/F1)
    EvalTeams(TeamModelArgs),
    /// Predict every team's work style
    Predict(PredictArgs),
    /// Report teams predicted to be solo submitters
    Flag(PredictArgs),
    /// Cohen's kappa between two `id,label` CSV files
    Kappa(KappaArgs),
    /// Print the team feature registry
    Registry,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Synth(_) => "synth",
            Command::TrainCommits(_) => "train-commits",
            Command::EvalCommits(_) => "eval-commits",
            Command::LabelCommits(_) => "label-commits",
            Command::Features(_) => "features",
            Command::LabelTeams(_) => "label-teams",
            Command::TrainTeams(_) => "train-teams",
            Command::EvalTeams(_) => "eval-teams",
            Command::Predict(_) => "predict",
            Command::Flag(_) => "flag",
            Command::Kappa(_) => "kappa",
            Command::Registry => "registry",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Roster CSV (team_id,project_id,member_id,exam1,project1,selected,author_keys)
    #[arg(long)]
    pub roster: PathBuf,
    /// A repository's `git log --numstat` output, as TEAM_ID=PATH (repeatable)
    #[arg(long = "log", value_name = "TEAM=PATH", required_unless_present = "commits")]
    pub logs: Vec<String>,
    /// Commit JSONL with team ids
    #[arg(long, conflicts_with = "logs")]
    pub commits: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Number of teams
    #[arg(long)]
    pub teams: Option<usize>,
    /// Probability that a message is perturbed
    #[arg(long)]
    pub noise: Option<f64>,
    /// Style mix as COLLABORATIVE,COOPERATIVE,SOLO
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub mix: Option<Vec<f64>>,
    /// Commits per team as MIN,MAX
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub commits: Option<Vec<usize>>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainCommitsArgs {
    /// Tagged CSV (message,category)
    #[arg(long)]
    pub tagged: PathBuf,
    /// Model path [default: <out>/models/cascade.json]
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalCommitsArgs {
    /// Tagged CSV (message,category)
    #[arg(long)]
    pub tagged: PathBuf,
    /// Number of folds [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelCommitsArgs {
    /// Trained cascade model
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset directory
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DatasetArgs {
    /// Dataset directory
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TeamModelArgs {
    /// Dataset directory holding features.csv
    #[arg(long)]
    pub dataset: PathBuf,
    /// Team labels CSV (team_id,style) [default: <dataset>/team_styles.csv]
    #[arg(long)]
    pub styles: Option<PathBuf>,
    /// Classifier family [default: forest]
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    /// Features kept per stage [default: 12 for forest, 26 for logistic-rfe]
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of folds (eval-teams) [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,
    /// Model path (train-teams) [default: <out>/models/team_<algorithm>.json]
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// Trained team-style model
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset directory holding features.csv
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct KappaArgs {
    /// First rater's CSV (id,label)
    pub labels_a: PathBuf,
    /// Second rater's CSV (id,label)
    pub labels_b: PathBuf,
}
