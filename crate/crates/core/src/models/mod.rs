//! Binary classifiers trained from scratch: ridge logistic regression, linear
//! SVM, RBF-kernel SVM (SMO) and a two-layer feed-forward network, plus grid
//! search on a development split.

mod fnn;
mod grid;
mod linear;
mod rbf;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureVector, Matrix};

pub use fnn::{fnn_loss_and_gradient, train_fnn, train_fnn_checkpoints, FnnConfig, FnnModel, FnnParams};
pub use grid::{cross_validate, grid_search, GridPlan, GridTrace, TraceEntry};
pub use linear::{
    logistic_objective, logistic_objective_and_gradient, svm_objective, train_linear_svm, train_logistic,
    LinearModel, Loss, OptimizerConfig,
};
pub use rbf::{rbf_kernel, train_rbf_svm, RbfSvmModel, SmoConfig};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set has no examples")]
    Empty,
    #[error("training set has only {0} examples")]
    SingleClass(&'static str),
    #[error("non-finite loss: {0}")]
    Diverged(String),
    #[error("feature dimension {got} does not match model dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    Hyper(String),
    #[error("no grid point could be trained: {0}")]
    NoModel(String),
    #[error("model file: {0}")]
    Format(String),
}

/// Labelled examples sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Examples {
    pub dim: usize,
    pub x: Vec<FeatureVector>,
    pub y: Vec<bool>,
}

impl Examples {
    pub fn new(dim: usize, x: Vec<FeatureVector>, y: Vec<bool>) -> Self {
        assert_eq!(x.len(), y.len(), "one label per example");
        Examples { dim, x, y }
    }

    pub fn from_dense(rows: &[Vec<f64>], y: &[bool]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        Examples::new(dim, rows.iter().map(|r| FeatureVector::from_dense(r)).collect(), y.to_vec())
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Examples::new(
            m.dim,
            m.rows.iter().map(|r| r.x.clone()).collect(),
            m.rows.iter().map(|r| r.label).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Examples {
        Examples::new(
            self.dim,
            idx.iter().map(|&i| self.x[i].clone()).collect(),
            idx.iter().map(|&i| self.y[i]).collect(),
        )
    }

    /// Fails unless both classes occur.
    pub fn check_trainable(&self) -> Result<(), TrainError> {
        if self.is_empty() {
            return Err(TrainError::Empty);
        }
        let pos = self.y.iter().filter(|&&v| v).count();
        if pos == 0 {
            return Err(TrainError::SingleClass("negative"));
        }
        if pos == self.len() {
            return Err(TrainError::SingleClass("positive"));
        }
        Ok(())
    }

    /// Per-example weights: all 1, or inverse class frequency scaled so the
    /// weights sum to n.
    pub fn weights(&self, balanced: bool) -> Vec<f64> {
        if !balanced {
            return vec![1.0; self.len()];
        }
        let n = self.len() as f64;
        let pos = self.y.iter().filter(|&&v| v).count() as f64;
        let (wp, wn) = (n / (2.0 * pos.max(1.0)), n / (2.0 * (n - pos).max(1.0)));
        self.y.iter().map(|&v| if v { wp } else { wn }).collect()
    }
}

pub(crate) fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "logistic")]
    Logistic,
    #[serde(rename = "svm-linear")]
    LinearSvm,
    #[serde(rename = "svm-rbf")]
    RbfSvm,
    #[serde(rename = "fnn")]
    Fnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Logistic, ModelKind::LinearSvm, ModelKind::RbfSvm, ModelKind::Fnn];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Logistic => "logistic",
            ModelKind::LinearSvm => "svm-linear",
            ModelKind::RbfSvm => "svm-rbf",
            ModelKind::Fnn => "fnn",
        })
    }
}

impl FromStr for ModelKind {
    type Err = TrainError;
    fn from_str(s: &str) -> Result<Self, TrainError> {
        match s {
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            "svm-linear" | "linear-svm" | "lin-svm" => Ok(ModelKind::LinearSvm),
            "svm-rbf" | "rbf-svm" => Ok(ModelKind::RbfSvm),
            "fnn" => Ok(ModelKind::Fnn),
            _ => Err(TrainError::Hyper(format!(
                "unknown model {s:?} (logistic, svm-linear, svm-rbf, fnn)"
            ))),
        }
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Hyper {
    Logistic { lambda: f64 },
    #[serde(rename = "svm-linear")]
    LinearSvm { c: f64 },
    #[serde(rename = "svm-rbf")]
    RbfSvm { c: f64, gamma: f64 },
    Fnn { learning_rate: f64, epochs: usize },
}

impl Hyper {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyper::Logistic { .. } => ModelKind::Logistic,
            Hyper::LinearSvm { .. } => ModelKind::LinearSvm,
            Hyper::RbfSvm { .. } => ModelKind::RbfSvm,
            Hyper::Fnn { .. } => ModelKind::Fnn,
        }
    }
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyper::Logistic { lambda } => write!(f, "lambda={lambda}"),
            Hyper::LinearSvm { c } => write!(f, "C={c}"),
            Hyper::RbfSvm { c, gamma } => write!(f, "C={c} gamma={gamma}"),
            Hyper::Fnn { learning_rate, epochs } => write!(f, "lr={learning_rate} epochs={epochs}"),
        }
    }
}

/// Settings shared by every training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    /// Weight examples by inverse class frequency.
    pub balanced: bool,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            balanced: false,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum Model {
    #[serde(rename = "logistic")]
    Logistic(LinearModel),
    #[serde(rename = "svm-linear")]
    LinearSvm(LinearModel),
    #[serde(rename = "svm-rbf")]
    RbfSvm(RbfSvmModel),
    #[serde(rename = "fnn")]
    Fnn(FnnModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Logistic(_) => ModelKind::Logistic,
            Model::LinearSvm(_) => ModelKind::LinearSvm,
            Model::RbfSvm(_) => ModelKind::RbfSvm,
            Model::Fnn(_) => ModelKind::Fnn,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Logistic(m) | Model::LinearSvm(m) => m.weights.len(),
            Model::RbfSvm(m) => m.dim,
            Model::Fnn(m) => m.params.dim(),
        }
    }

    /// Margin for SVMs, positive-class probability for the others.
    pub fn score(&self, x: &FeatureVector) -> Result<f64, TrainError> {
        if x.dim != self.dim() {
            return Err(TrainError::Dimension {
                expected: self.dim(),
                got: x.dim,
            });
        }
        Ok(match self {
            Model::Logistic(m) => m.probability(x),
            Model::LinearSvm(m) => m.margin(x),
            Model::RbfSvm(m) => m.decision(x),
            Model::Fnn(m) => m.params.forward(x).probs[1],
        })
    }

    /// Positive iff the score is strictly above 0 (margins) or 0.5
    /// (probabilities).
    pub fn predict(&self, x: &FeatureVector) -> Result<(bool, f64), TrainError> {
        let s = self.score(x)?;
        let threshold = match self {
            Model::Logistic(_) | Model::Fnn(_) => 0.5,
            Model::LinearSvm(_) | Model::RbfSvm(_) => 0.0,
        };
        Ok((s > threshold, s))
    }
}

pub fn train(h: &Hyper, data: &Examples, cfg: &TrainConfig) -> Result<Model, TrainError> {
    data.check_trainable()?;
    let w = data.weights(cfg.balanced);
    match *h {
        Hyper::Logistic { lambda } => {
            train_logistic(data, &w, lambda, &OptimizerConfig::default()).map(Model::Logistic)
        }
        Hyper::LinearSvm { c } => train_linear_svm(data, &w, c, &SmoConfig::default()).map(Model::LinearSvm),
        Hyper::RbfSvm { c, gamma } => train_rbf_svm(data, &w, c, gamma, &SmoConfig::default()).map(Model::RbfSvm),
        Hyper::Fnn { learning_rate, epochs } => train_fnn(
            data,
            &w,
            &FnnConfig {
                learning_rate,
                epochs,
                batch_size: cfg.batch_size,
                seed: cfg.seed,
            },
        )
        .map(Model::Fnn),
    }
}

/// Positive-class F1 of `model` on `data`.
pub fn f1_on(model: &Model, data: &Examples) -> Result<f64, TrainError> {
    let mut c = crate::eval::Counts::default();
    for (x, &y) in data.x.iter().zip(&data.y) {
        match (model.predict(x)?.0, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c.f1())
}

/// What `train` writes and `predict` reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub relation: String,
    pub feature_kind: String,
    pub space_hash: String,
    pub seed: u64,
    pub hyper: Hyper,
    pub model: Model,
    #[serde(default)]
    pub trace: Option<GridTrace>,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(raw: &str) -> Result<Self, TrainError> {
        let f: ModelFile = serde_json::from_str(raw).map_err(|e| TrainError::Format(e.to_string()))?;
        if f.version != MODEL_VERSION {
            return Err(TrainError::Format(format!("unsupported model version {}", f.version)));
        }
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self, TrainError> {
        let raw = std::fs::read_to_string(path).map_err(|e| TrainError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&raw)
    }
}
