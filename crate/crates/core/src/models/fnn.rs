use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Examples, TrainError};
use crate::features::FeatureVector;

/// d → d (ReLU) → 2 (softmax). `w1` is column-major: the weights leaving
/// input `j` are `w1[j*d .. (j+1)*d]`. `w2` is row-major 2×d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnParams {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: [f64; 2],
}

pub struct Forward {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub probs: [f64; 2],
}

impl FnnParams {
    pub fn zeros(d: usize) -> Self {
        FnnParams {
            w1: vec![0.0; d * d],
            b1: vec![0.0; d],
            w2: vec![0.0; 2 * d],
            b2: [0.0; 2],
        }
    }

    /// Uniform in ±1/sqrt(fan_in) for weights, zero biases.
    pub fn init(d: usize, rng: &mut ChaCha8Rng) -> Self {
        let r = 1.0 / (d.max(1) as f64).sqrt();
        let mut p = Self::zeros(d);
        for w in p.w1.iter_mut().chain(p.w2.iter_mut()) {
            *w = rng.random_range(-r..r);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.b1.len()
    }

    pub fn forward(&self, x: &FeatureVector) -> Forward {
        let d = self.dim();
        let mut pre = self.b1.clone();
        for &(j, v) in &x.entries {
            for (p, w) in pre.iter_mut().zip(&self.w1[j * d..(j + 1) * d]) {
                *p += w * v;
            }
        }
        let hidden: Vec<f64> = pre.iter().map(|&v| v.max(0.0)).collect();
        let mut logits = self.b2;
        for (k, l) in logits.iter_mut().enumerate() {
            *l += self.w2[k * d..(k + 1) * d].iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        let m = logits[0].max(logits[1]);
        let e = [(logits[0] - m).exp(), (logits[1] - m).exp()];
        let s = e[0] + e[1];
        Forward {
            pre,
            hidden,
            probs: [e[0] / s, e[1] / s],
        }
    }

    fn all(&self) -> impl Iterator<Item = &f64> {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2)
    }

    pub fn is_finite(&self) -> bool {
        self.all().all(|v| v.is_finite())
    }

    /// Flat parameter vector (w1, b1, w2, b2), for gradient checking.
    pub fn flatten(&self) -> Vec<f64> {
        self.all().copied().collect()
    }

    pub fn set_flat(&mut self, k: usize, v: f64) {
        let (a, b, c) = (self.w1.len(), self.b1.len(), self.w2.len());
        match k {
            k if k < a => self.w1[k] = v,
            k if k < a + b => self.b1[k - a] = v,
            k if k < a + b + c => self.w2[k - a - b] = v,
            k => self.b2[k - a - b - c] = v,
        }
    }
}

/// Gradient with only the touched columns of `w1`.
struct BatchGradient {
    loss: f64,
    w1: BTreeMap<usize, Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: [f64; 2],
}

/// Mean weighted cross-entropy over `idx` and its gradient.
fn batch_gradient(p: &FnnParams, data: &Examples, c: &[f64], idx: &[usize]) -> BatchGradient {
    let d = p.dim();
    let nb = idx.len() as f64;
    let mut g = BatchGradient {
        loss: 0.0,
        w1: BTreeMap::new(),
        b1: vec![0.0; d],
        w2: vec![0.0; 2 * d],
        b2: [0.0; 2],
    };
    let mut dpre = vec![0.0; d];
    for &i in idx {
        let x = &data.x[i];
        let f = p.forward(x);
        let target = usize::from(data.y[i]);
        g.loss += -c[i] * f.probs[target].max(f64::MIN_POSITIVE).ln() / nb;
        let mut dlogit = f.probs;
        dlogit[target] -= 1.0;
        for v in &mut dlogit {
            *v *= c[i] / nb;
        }
        for k in 0..2 {
            g.b2[k] += dlogit[k];
            for (gw, h) in g.w2[k * d..(k + 1) * d].iter_mut().zip(&f.hidden) {
                *gw += dlogit[k] * h;
            }
        }
        for h in 0..d {
            dpre[h] = if f.pre[h] > 0.0 {
                dlogit[0] * p.w2[h] + dlogit[1] * p.w2[d + h]
            } else {
                0.0
            };
            g.b1[h] += dpre[h];
        }
        for &(j, v) in &x.entries {
            let col = g.w1.entry(j).or_insert_with(|| vec![0.0; d]);
            for (gc, dp) in col.iter_mut().zip(&dpre) {
                *gc += dp * v;
            }
        }
    }
    g
}

/// Mean weighted cross-entropy over `idx` and the full gradient, laid out
/// like the parameters.
pub fn fnn_loss_and_gradient(p: &FnnParams, data: &Examples, c: &[f64], idx: &[usize]) -> (f64, FnnParams) {
    let d = p.dim();
    let g = batch_gradient(p, data, c, idx);
    let mut out = FnnParams::zeros(d);
    for (j, col) in g.w1 {
        out.w1[j * d..(j + 1) * d].copy_from_slice(&col);
    }
    out.b1 = g.b1;
    out.w2 = g.w2;
    out.b2 = g.b2;
    (g.loss, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FnnConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnnModel {
    pub params: FnnParams,
    pub config: FnnConfig,
    /// Mean training loss of each epoch.
    #[serde(default)]
    pub epoch_loss: Vec<f64>,
    /// Development-set F1 after each epoch, when a development set was given.
    #[serde(default)]
    pub epoch_dev_f1: Vec<f64>,
}

pub fn train_fnn(data: &Examples, c: &[f64], cfg: &FnnConfig) -> Result<FnnModel, TrainError> {
    let mut out = train_fnn_checkpoints(data, c, cfg, &[cfg.epochs], None)?;
    Ok(out.pop().expect("one checkpoint"))
}

/// One mini-batch SGD run, snapshotting the model after each epoch count in
/// `checkpoints`. Snapshots equal separate runs with those epoch counts,
/// because the batch order of an epoch does not depend on the total.
pub fn train_fnn_checkpoints(
    data: &Examples,
    c: &[f64],
    cfg: &FnnConfig,
    checkpoints: &[usize],
    dev: Option<&Examples>,
) -> Result<Vec<FnnModel>, TrainError> {
    data.check_trainable()?;
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(TrainError::Hyper(format!("learning rate must be > 0, got {}", cfg.learning_rate)));
    }
    if cfg.batch_size == 0 {
        return Err(TrainError::Hyper("batch size must be positive".into()));
    }
    let d = data.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut p = FnnParams::init(d, &mut rng);
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut snaps: BTreeMap<usize, FnnModel> = BTreeMap::new();
    let mut losses = Vec::new();
    let mut dev_f1 = Vec::new();
    let snapshot = |p: &FnnParams, epochs: usize, losses: &[f64], dev_f1: &[f64]| FnnModel {
        params: p.clone(),
        config: FnnConfig { epochs, ..*cfg },
        epoch_loss: losses.to_vec(),
        epoch_dev_f1: dev_f1.to_vec(),
    };
    if checkpoints.contains(&0) {
        snaps.insert(0, snapshot(&p, 0, &losses, &dev_f1));
    }
    for epoch in 1..=last {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let g = batch_gradient(&p, data, c, batch);
            if !g.loss.is_finite() {
                return Err(TrainError::Diverged(format!(
                    "loss {} in epoch {epoch} (lr {}, batch of {})",
                    g.loss,
                    cfg.learning_rate,
                    batch.len()
                )));
            }
            total += g.loss * batch.len() as f64;
            let lr = cfg.learning_rate;
            for (j, col) in g.w1 {
                for (w, gv) in p.w1[j * d..(j + 1) * d].iter_mut().zip(&col) {
                    *w -= lr * gv;
                }
            }
            for (w, gv) in p.b1.iter_mut().zip(&g.b1) {
                *w -= lr * gv;
            }
            for (w, gv) in p.w2.iter_mut().zip(&g.w2) {
                *w -= lr * gv;
            }
            for k in 0..2 {
                p.b2[k] -= lr * g.b2[k];
            }
        }
        losses.push(total / data.len() as f64);
        if !p.is_finite() {
            return Err(TrainError::Diverged(format!("non-finite parameters after epoch {epoch}")));
        }
        if let Some(dev) = dev {
            dev_f1.push(dev_f1_of(&p, dev));
        }
        if checkpoints.contains(&epoch) {
            snaps.insert(epoch, snapshot(&p, epoch, &losses, &dev_f1));
        }
    }
    Ok(checkpoints.iter().map(|e| snaps[e].clone()).collect())
}

fn dev_f1_of(p: &FnnParams, dev: &Examples) -> f64 {
    let mut c = crate::eval::Counts::default();
    for (x, &y) in dev.x.iter().zip(&dev.y) {
        match (p.forward(x).probs[1] > 0.5, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    c.f1()
}
