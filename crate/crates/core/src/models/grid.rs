use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{f1_on, train, train_fnn_checkpoints, Examples, FnnConfig, Hyper, Model, ModelKind, TrainConfig, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub points: Vec<Hyper>,
}

impl GridPlan {
    /// LR λ ∈ {0.001, 0.01, 0.1, 1}; linear SVM C ∈ {0.1, 1, 10};
    /// RBF C ∈ {0.1, 1, 10} × γ ∈ {0.01, 0.1, 1/d};
    /// FNN learning rate ∈ {0.01, 0.001} × epochs ∈ {2, 10, 100, 500}.
    pub fn default_for(kind: ModelKind, dim: usize) -> Self {
        let points = match kind {
            ModelKind::Logistic => [0.001, 0.01, 0.1, 1.0].map(|lambda| Hyper::Logistic { lambda }).to_vec(),
            ModelKind::LinearSvm => [0.1, 1.0, 10.0].map(|c| Hyper::LinearSvm { c }).to_vec(),
            ModelKind::RbfSvm => {
                let inv_d = 1.0 / dim.max(1) as f64;
                [0.1, 1.0, 10.0]
                    .iter()
                    .flat_map(|&c| [0.01, 0.1, inv_d].map(|gamma| Hyper::RbfSvm { c, gamma }))
                    .collect()
            }
            ModelKind::Fnn => [0.01, 0.001]
                .iter()
                .flat_map(|&learning_rate| [2, 10, 100, 500].map(|epochs| Hyper::Fnn { learning_rate, epochs }))
                .collect(),
        };
        GridPlan { points }
    }

    pub fn single(h: Hyper) -> Self {
        GridPlan { points: vec![h] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub hyper: Hyper,
    /// Dev F1, or mean F1 over folds under cross-validation.
    pub score: Option<f64>,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub epoch_dev_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTrace {
    pub entries: Vec<TraceEntry>,
    pub selected: usize,
}

/// Models for every grid point, in grid order. FNN points sharing a learning
/// rate come from one run snapshotted at each epoch count.
fn train_all(plan: &GridPlan, data: &Examples, dev: Option<&Examples>, cfg: &TrainConfig) -> Vec<Result<Model, TrainError>> {
    let mut out: Vec<Option<Result<Model, TrainError>>> = plan.points.iter().map(|_| None).collect();
    for (i, h) in plan.points.iter().enumerate() {
        if out[i].is_some() {
            continue;
        }
        let Hyper::Fnn { learning_rate, .. } = *h else {
            out[i] = Some(train(h, data, cfg));
            continue;
        };
        let group: Vec<(usize, usize)> = plan
            .points
            .iter()
            .enumerate()
            .filter_map(|(k, p)| match *p {
                Hyper::Fnn { learning_rate: lr, epochs } if lr == learning_rate && out[k].is_none() => Some((k, epochs)),
                _ => None,
            })
            .collect();
        let epochs: Vec<usize> = group.iter().map(|g| g.1).collect();
        let fcfg = FnnConfig {
            learning_rate,
            epochs: 0,
            batch_size: cfg.batch_size,
            seed: cfg.seed,
        };
        let w = data.weights(cfg.balanced);
        match train_fnn_checkpoints(data, &w, &fcfg, &epochs, dev) {
            Ok(models) => {
                for ((k, _), m) in group.iter().zip(models) {
                    out[*k] = Some(Ok(Model::Fnn(m)));
                }
            }
            Err(e) => {
                let msg = e.to_string();
                for (k, _) in &group {
                    out[*k] = Some(Err(TrainError::Diverged(msg.clone())));
                }
            }
        }
    }
    out.into_iter().map(|m| m.expect("every point visited")).collect()
}

fn pick(entries: &[TraceEntry]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in entries.iter().enumerate() {
        if let Some(s) = e.score {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    best.map(|b| b.0)
}

/// Trains every grid point on `train`, scores it by F1 on `dev` and returns
/// the best model (earliest point on ties) with the full trace.
pub fn grid_search(plan: &GridPlan, train_set: &Examples, dev: &Examples, cfg: &TrainConfig) -> Result<(Model, Hyper, GridTrace), TrainError> {
    if plan.points.is_empty() {
        return Err(TrainError::Hyper("empty grid".into()));
    }
    let mut models = Vec::new();
    let mut entries = Vec::new();
    for (h, m) in plan.points.iter().zip(train_all(plan, train_set, Some(dev), cfg)) {
        let (score, error, epoch_dev_f1) = match &m {
            Ok(model) => {
                let curve = match model {
                    Model::Fnn(f) => f.epoch_dev_f1.clone(),
                    _ => Vec::new(),
                };
                (Some(f1_on(model, dev)?), None, curve)
            }
            Err(e) => (None, Some(e.to_string()), Vec::new()),
        };
        entries.push(TraceEntry {
            hyper: *h,
            score,
            error,
            epoch_dev_f1,
        });
        models.push(m.ok());
    }
    let Some(best) = pick(&entries) else {
        let why = entries.iter().filter_map(|e| e.error.clone()).next().unwrap_or_default();
        return Err(TrainError::NoModel(why));
    };
    let model = models[best].take().expect("scored points trained");
    Ok((model, plan.points[best], GridTrace { entries, selected: best }))
}

/// k-fold cross-validation on `data`: each point is scored by its mean F1
/// over folds, and the winner is retrained on all of `data`.
pub fn cross_validate(plan: &GridPlan, data: &Examples, k: usize, cfg: &TrainConfig) -> Result<(Model, Hyper, GridTrace), TrainError> {
    if plan.points.is_empty() {
        return Err(TrainError::Hyper("empty grid".into()));
    }
    if k < 2 || k > data.len() {
        return Err(TrainError::Hyper(format!("cannot make {k} folds from {} examples", data.len())));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut sums: Vec<Option<f64>> = vec![Some(0.0); plan.points.len()];
    let mut errors: Vec<Option<String>> = vec![None; plan.points.len()];
    for f in 0..k {
        let held: Vec<usize> = order.iter().copied().skip(f).step_by(k).collect();
        let kept: Vec<usize> = order.iter().copied().enumerate().filter(|(i, _)| i % k != f).map(|(_, v)| v).collect();
        let (tr, va) = (data.subset(&kept), data.subset(&held));
        for (i, m) in train_all(plan, &tr, None, cfg).into_iter().enumerate() {
            match m {
                Ok(model) => {
                    let s = f1_on(&model, &va)?;
                    if let Some(acc) = sums[i].as_mut() {
                        *acc += s / k as f64;
                    }
                }
                Err(e) => {
                    sums[i] = None;
                    errors[i].get_or_insert(e.to_string());
                }
            }
        }
    }
    let entries: Vec<TraceEntry> = plan
        .points
        .iter()
        .zip(sums.into_iter().zip(errors))
        .map(|(h, (score, error))| TraceEntry {
            hyper: *h,
            score,
            error,
            epoch_dev_f1: Vec::new(),
        })
        .collect();
    let best = pick(&entries).ok_or_else(|| TrainError::NoModel("every point failed in some fold".into()))?;
    let model = train(&plan.points[best], data, cfg)?;
    Ok((model, plan.points[best], GridTrace { entries, selected: best }))
}
