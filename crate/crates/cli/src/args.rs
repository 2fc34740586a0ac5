use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "uptake",
    version,
    about = "Measure conversational uptake in student-teacher exchanges"
)]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    /// Seed for every random operation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// TOML file with defaults for any flag; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Extract (S, T) pairs from transcripts.
    Extract(ExtractArgs),
    /// Aggregate rater judgments into z-scored gold labels.
    AnnotateAgg(AnnotateAggArgs),
    /// Score pairs with similarity metrics.
    Score(ScoreArgs),
    /// Build a next-utterance classification dataset with sampled negatives.
    NucBuild(NucBuildArgs),
    /// Train the reference next-utterance classifier.
    NucTrain(NucTrainArgs),
    /// Score pairs with a trained classifier (nuc_prob and pjsd).
    NucScore(NucScoreArgs),
    /// Spearman correlation of score columns with gold labels, with bootstrap intervals.
    EvalCorr(EvalCorrArgs),
    /// Inter-rater agreement: leave-out Spearman and Fleiss' kappa.
    EvalAgreement(EvalAgreementArgs),
    /// Pairs where one model's residual gap over another is unusually large.
    AnalyzeResiduals(AnalyzeResidualsArgs),
    /// Median score differences per dialog-act phenomenon.
    AnalyzeDamsl(AnalyzeDamslArgs),
    /// Conversation-level regressions of outcomes on uptake scores and cue rates.
    AnalyzeOutcomes(AnalyzeOutcomesArgs),
    /// Run the embedded oracle fixtures.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract(_) => "extract",
            Command::AnnotateAgg(_) => "annotate-agg",
            Command::Score(_) => "score",
            Command::NucBuild(_) => "nuc-build",
            Command::NucTrain(_) => "nuc-train",
            Command::NucScore(_) => "nuc-score",
            Command::EvalCorr(_) => "eval-corr",
            Command::EvalAgreement(_) => "eval-agreement",
            Command::AnalyzeResiduals(_) => "analyze-residuals",
            Command::AnalyzeDamsl(_) => "analyze-damsl",
            Command::AnalyzeOutcomes(_) => "analyze-outcomes",
            Command::Selftest(_) => "selftest",
        }
    }
}

pub const SUBCOMMANDS: [&str; 12] = [
    "extract",
    "annotate-agg",
    "score",
    "nuc-build",
    "nuc-train",
    "nuc-score",
    "eval-corr",
    "eval-agreement",
    "analyze-residuals",
    "analyze-damsl",
    "analyze-outcomes",
    "selftest",
];

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    /// Transcript file.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    /// Extracted pairs (JSONL).
    #[arg(long)]
    pub out: PathBuf,
    /// Minimum number of non-punctuation tokens in S.
    #[arg(long, default_value_t = 5)]
    pub min_s_tokens: usize,
    /// Pairs where S or T contains this string are dropped (case-sensitive).
    #[arg(long, default_value = "[Inaudible]")]
    pub inaudible_marker: String,
    /// Dataset tag stored on every pair.
    #[arg(long, default_value = "default")]
    pub source: String,
}

#[derive(Debug, Args, Serialize)]
pub struct AnnotateAggArgs {
    /// Annotation CSV: rater_id,pair_id,on_topic,level.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Gold labels CSV: pair_id,value,n_raters.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-rater z-scores (rater_id,pair_id,z).
    #[arg(long)]
    pub zscores_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Extracted pairs (JSONL).
    #[arg(long)]
    pub pairs: PathBuf,
    /// Comma-separated metrics, optionally `name@CODE` with CODE from P, S, T or `-`.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Word vectors in whitespace-separated text format.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Precomputed sentence vectors (JSONL: pair_id, side, vector).
    #[arg(long)]
    pub sent_vectors: Option<PathBuf>,
    /// Stopword list (one word per line) replacing the built-in English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Score table with an `external` column to merge in.
    #[arg(long)]
    pub external: Option<PathBuf>,
    /// Score table CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct NucBuildArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Negatives per pair.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Dataset JSONL.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FeatureArgs {
    /// Word vectors for the embedding features (missing indicators are set without them).
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct NucTrainArgs {
    /// Dataset JSONL from nuc-build.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub features: FeatureArgs,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    /// Hold out this fraction of pair ids and report held-out metrics.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Classifier parameters (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss and mean pJSD (CSV).
    #[arg(long)]
    pub history_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct NucScoreArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    /// Classifier parameters from nuc-train.
    #[arg(long)]
    pub params: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub features: FeatureArgs,
    /// Negatives sampled per pair for the pJSD estimate.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Score table CSV with nuc_prob and pjsd.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalCorrArgs {
    /// Score table CSV.
    #[arg(long)]
    pub scores: PathBuf,
    /// Gold labels CSV.
    #[arg(long)]
    pub labels: PathBuf,
    /// Columns to evaluate (default: all).
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Results CSV; a JSON summary is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalAgreementArgs {
    /// Raw annotation CSV (z-scores and Fleiss' kappa are derived from it).
    #[arg(long, required_unless_present = "zscores", conflicts_with = "zscores")]
    pub annotations: Option<PathBuf>,
    /// Per-rater z-scores CSV: rater_id,pair_id,z.
    #[arg(long)]
    pub zscores: Option<PathBuf>,
    /// Per-rater results CSV; a JSON summary is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeResidualsArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    /// Column of the model expected to do better.
    #[arg(long)]
    pub a: String,
    /// Column of the comparison model.
    #[arg(long)]
    pub b: String,
    #[arg(long, default_value_t = 1.5)]
    pub threshold_sd: f64,
    /// Per-pair CSV (pair_id,d,selected); a JSON summary is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeDamslArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// Dialog-act tags CSV: pair_id,tag.
    #[arg(long)]
    pub tags: PathBuf,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Per-phenomenon CSV; a JSON summary is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeOutcomesArgs {
    /// Extracted pairs (their conversation ids group the scores).
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub scores: PathBuf,
    /// Score column to aggregate.
    #[arg(long)]
    pub metric: String,
    /// Outcomes CSV: conversation,outcome.
    #[arg(long)]
    pub outcomes: PathBuf,
    /// Compare predictors between outcome groups 0 and 1 with a t-test instead of regressing.
    #[arg(long)]
    pub ttest: bool,
    /// Per-conversation CSV; a JSON summary is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SelftestArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
