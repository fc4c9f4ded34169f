use relex_core::boc::BocError;
use relex_core::corpus::CorpusError;
use relex_core::embeddings::EmbeddingError;
use relex_core::eval::EvalError;
use relex_core::features::FeatureError;
use relex_core::instancegen::DatasetError;
use relex_core::models::TrainError;
use relex_core::pipeline::PipelineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Integrity(String),
    #[error("{0}")]
    Training(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Integrity(_) => 2,
            CliError::Training(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn integrity(msg: impl Into<String>) -> CliError {
    CliError::Integrity(msg.into())
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Integrity(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Integrity(e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Integrity(e.to_string()),
        }
    }
}

impl From<BocError> for CliError {
    fn from(e: BocError) -> Self {
        match e {
            BocError::Config(_) => CliError::Usage(e.to_string()),
            BocError::Format(_) => CliError::Integrity(e.to_string()),
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        CliError::Integrity(format!("embeddings: {e}"))
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Hyper(_) => CliError::Usage(e.to_string()),
            TrainError::Format(_) | TrainError::Dimension { .. } => CliError::Integrity(e.to_string()),
            _ => CliError::Training(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Integrity(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Feature(e) => e.into(),
            PipelineError::Concept(e) => e.into(),
            PipelineError::Train(e) => e.into(),
            PipelineError::Data(m) => CliError::Integrity(m),
        }
    }
}
