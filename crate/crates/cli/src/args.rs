use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const CONFIG_HELP: &str = "TOML file of default flag values (keys are long flag names)";

#[derive(Debug, Parser)]
#[command(name = "relex", version, about = "Typed relation extraction on small annotated corpora")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic standoff corpus.
    ///
    /// The generator config is TOML: seed, documents, positives_per_document,
    /// distractor_density, negative_density, filler_density, max_inter_gap,
    /// separate_blocks, id_prefix, then [[entity_type]] tables (name,
    /// abbreviation, surfaces) and [[relation]] tables (name, left, right,
    /// intra_fraction, weight, cues, negative_cues). Without --config the
    /// built-in sixteen-relation config is used.
    GenCorpus(GenCorpus),
    /// Build per-relation datasets and seeded train/dev/test splits.
    Prepare(Prepare),
    /// Window-bounded co-occurrence extraction.
    WbcExtract(WbcExtract),
    /// Build a concept map from one training split.
    BuildConcepts(BuildConcepts),
    /// Fit a feature space on one training split and write feature matrices.
    Featurize(Featurize),
    /// Train a classifier with grid search on dev (or cross-validation).
    Train(Train),
    /// Score a feature matrix with a trained model.
    Predict(Predict),
    /// Score predictions against gold and write a single-split report.
    Evaluate(Evaluate),
    /// BoW/BoC learning curve over nested training fractions.
    LearningCurve(LearningCurve),
    /// Average reports over splits and tabulate them.
    Report(Report),
}

/// Flags every subcommand accepts.
#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Seed for every random choice of this step.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, help = CONFIG_HELP)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GenCorpus {
    #[command(flatten)]
    pub common: Common,
    /// Override the configured document count.
    #[arg(long)]
    pub documents: Option<usize>,
    /// Also write embeddings matching the generator vocabulary.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub embedding_dim: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Text {
    /// Stopword list, one word per line (default: Snowball English).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Lemmatizer exception table, `surface<TAB>lemma` per line.
    #[arg(long)]
    pub lemma_exceptions: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Prepare {
    #[command(flatten)]
    pub common: Common,
    /// Corpus directory.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Relations with fewer gold annotations are dropped.
    #[arg(long, default_value_t = relex_core::instancegen::DEFAULT_MIN_COUNT)]
    pub min_count: usize,
    #[command(flatten)]
    pub text: Text,
}

#[derive(Debug, Args, Serialize)]
pub struct WbcExtract {
    #[command(flatten)]
    pub common: Common,
    /// Corpus directory to extract from.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Relation schema (default: schema.json of the corpus).
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Window size, or `tuned` to pick one per relation on --dev.
    #[arg(long)]
    pub rho: String,
    /// Corpus directory used to tune rho.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Candidate windows for tuning.
    #[arg(long, value_delimiter = ',', default_values_t = relex_core::wbc::DEFAULT_CANDIDATES)]
    pub candidates: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct Split {
    /// Output directory of `prepare`.
    #[arg(long)]
    pub prepared: PathBuf,
    #[arg(long)]
    pub relation: String,
    /// Split id, 1 to 3.
    #[arg(long, default_value_t = 1)]
    pub split: u8,
}

#[derive(Debug, Args, Serialize)]
pub struct Embeddings {
    /// Word vectors, one `word v1 .. vd` line each (optional header line).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Label recorded in outputs (default: file stem).
    #[arg(long)]
    pub embeddings_label: Option<String>,
    /// Keep only this many of the most frequent training lemmas.
    #[arg(long, default_value_t = relex_core::pipeline::DEFAULT_VOCAB_CAP)]
    pub vocab_cap: usize,
    /// Cosine threshold for concept membership.
    #[arg(long, default_value_t = 0.9)]
    pub mu: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildConcepts {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub split: Split,
    #[command(flatten)]
    pub embeddings: Embeddings,
}

#[derive(Debug, Args, Serialize)]
pub struct Featurize {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub split: Split,
    /// BoW, BoC, SE or BoC+SE.
    #[arg(long)]
    pub kind: String,
    #[command(flatten)]
    pub embeddings: Embeddings,
    /// Concept map from `build-concepts` (default: build one here).
    #[arg(long)]
    pub concepts: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Grid {
    /// logistic, svm-linear, svm-rbf or fnn.
    #[arg(long)]
    pub model: String,
    /// Ridge strengths for logistic regression.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// SVM costs.
    #[arg(long, value_delimiter = ',')]
    pub c: Vec<f64>,
    /// RBF widths.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// FNN learning rates.
    #[arg(long, value_delimiter = ',')]
    pub learning_rate: Vec<f64>,
    /// FNN epoch counts.
    #[arg(long, value_delimiter = ',')]
    pub epochs: Vec<usize>,
    /// Weight classes by inverse frequency.
    #[arg(long)]
    pub balanced: bool,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Train {
    #[command(flatten)]
    pub common: Common,
    /// Output directory of `featurize`.
    #[arg(long)]
    pub features: PathBuf,
    #[command(flatten)]
    pub grid: Grid,
    /// Select by k-fold cross-validation on train instead of dev.
    #[arg(long)]
    pub cv: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Train,
    Dev,
    Test,
}

impl Part {
    pub fn file(self) -> &'static str {
        match self {
            Part::Train => "train.features",
            Part::Dev => "dev.features",
            Part::Test => "test.features",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct Predict {
    #[command(flatten)]
    pub common: Common,
    /// Model file from `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory of `featurize`.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum, default_value_t = Part::Test)]
    pub part: Part,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Annotation keys of a corpus.
    Rule,
    /// Instance ids of a prepared split.
    Instance,
}

#[derive(Debug, Args, Serialize)]
pub struct Evaluate {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Prediction files (one per relation in instance mode).
    #[arg(long, required = true)]
    pub pred: Vec<PathBuf>,
    /// Gold corpus directory (rule mode).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Output directory of `prepare` (instance mode).
    #[arg(long)]
    pub prepared: Option<PathBuf>,
    /// Split id recorded in the report; in instance mode also the split
    /// whose test set is scored.
    #[arg(long, default_value_t = 1)]
    pub split: u8,
    #[arg(long, value_enum, default_value_t = Part::Test)]
    pub part: Part,
}

#[derive(Debug, Args, Serialize)]
pub struct LearningCurve {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub split: Split,
    /// Feature kinds to compare.
    #[arg(long, value_delimiter = ',', default_values_t = ["BoW".to_string(), "BoC".to_string()])]
    pub kinds: Vec<String>,
    #[command(flatten)]
    pub embeddings: Embeddings,
    #[command(flatten)]
    pub grid: Grid,
}

#[derive(Debug, Args, Serialize)]
pub struct Report {
    #[command(flatten)]
    pub common: Common,
    /// Reports from `evaluate`; reports with equal configuration are
    /// averaged over their splits.
    #[arg(long = "in", required = true)]
    pub input: Vec<PathBuf>,
}
