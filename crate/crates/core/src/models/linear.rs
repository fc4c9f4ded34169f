use serde::{Deserialize, Serialize};

use super::rbf::{check_cost, smo, SmoConfig};
use super::{sign, Examples, TrainError};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Logistic,
    Hinge,
}

/// `w·x + b`. For logistic loss `reg` is the ridge strength λ, for hinge loss
/// it is the SVM cost C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub reg: f64,
    pub loss: Loss,
    /// Objective after every iteration, starting from the all-zero model.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl LinearModel {
    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn probability(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    /// Logistic regression stops once the gradient norm falls below this.
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iter: 2000,
            tolerance: 1e-6,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^(-m)) without overflow.
fn log_loss(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

fn margins(data: &Examples, w: &[f64], b: f64) -> Vec<f64> {
    data.x.iter().map(|x| x.dot(w) + b).collect()
}

fn sq(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum()
}

/// (1/n) Σ c_i ln(1 + exp(-y_i z_i)) + λ/2 ‖w‖². The bias is not penalized.
pub fn logistic_objective(data: &Examples, c: &[f64], lambda: f64, w: &[f64], b: f64) -> f64 {
    let n = data.len() as f64;
    let z = margins(data, w, b);
    let loss: f64 = z.iter().zip(&data.y).zip(c).map(|((&z, &y), &ci)| ci * log_loss(sign(y) * z)).sum();
    loss / n + 0.5 * lambda * sq(w)
}

/// Objective plus gradient with respect to (w, b).
pub fn logistic_objective_and_gradient(
    data: &Examples,
    c: &[f64],
    lambda: f64,
    w: &[f64],
    b: f64,
) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|v| lambda * v).collect();
    let mut gb = 0.0;
    let mut loss = 0.0;
    for ((x, &y), &ci) in data.x.iter().zip(&data.y).zip(c) {
        let ys = sign(y);
        let m = ys * (x.dot(w) + b);
        loss += ci * log_loss(m);
        // d/dz ln(1 + e^(-y z)) = -y σ(-y z)
        let dz = -ys * sigmoid(-m) * ci / n;
        for &(j, v) in &x.entries {
            gw[j] += dz * v;
        }
        gb += dz;
    }
    (loss / n + 0.5 * lambda * sq(w), gw, gb)
}

/// Full-batch gradient descent with the fixed step 1/L, where
/// L = 0.25·(1/n)Σ c_i(‖x_i‖² + 1) + λ bounds the Hessian's largest
/// eigenvalue. With that step every iteration decreases the objective.
pub fn train_logistic(data: &Examples, c: &[f64], lambda: f64, opt: &OptimizerConfig) -> Result<LinearModel, TrainError> {
    data.check_trainable()?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(TrainError::Hyper(format!("lambda must be >= 0, got {lambda}")));
    }
    let n = data.len() as f64;
    let curvature: f64 = data.x.iter().zip(c).map(|(x, &ci)| ci * (x.squared_norm() + 1.0)).sum::<f64>() / n;
    let step = 1.0 / (0.25 * curvature + lambda);
    let mut w = vec![0.0; data.dim];
    let mut b = 0.0;
    let mut trace = Vec::new();
    for _ in 0..opt.max_iter {
        let (j, gw, gb) = logistic_objective_and_gradient(data, c, lambda, &w, b);
        if !j.is_finite() {
            return Err(TrainError::Diverged(format!("logistic objective {j}")));
        }
        trace.push(j);
        let gnorm = (sq(&gw) + gb * gb).sqrt();
        if gnorm < opt.tolerance {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= step * gi;
        }
        b -= step * gb;
    }
    trace.push(logistic_objective(data, c, lambda, &w, b));
    Ok(LinearModel {
        weights: w,
        bias: b,
        reg: lambda,
        loss: Loss::Logistic,
        objective_trace: trace,
    })
}

/// ½‖w‖² + C Σ c_i max(0, 1 − y_i(w·x_i + b)).
pub fn svm_objective(data: &Examples, c: &[f64], cost: f64, w: &[f64], b: f64) -> f64 {
    let z = margins(data, w, b);
    0.5 * sq(w) + cost * hinge_sum(&z, data, c)
}

fn hinge_sum(z: &[f64], data: &Examples, c: &[f64]) -> f64 {
    z.iter()
        .zip(&data.y)
        .zip(c)
        .map(|((&z, &y), &ci)| ci * (1.0 - sign(y) * z).max(0.0))
        .sum()
}

/// Solves the dual with [`smo`] on the linear kernel. The primal objective
/// is evaluated at regular checkpoints of the dual run and the best point so
/// far is kept, so the recorded trace never increases and the returned model
/// is the best one seen.
pub fn train_linear_svm(data: &Examples, c: &[f64], cost: f64, cfg: &SmoConfig) -> Result<LinearModel, TrainError> {
    data.check_trainable()?;
    check_cost(cost)?;
    let n = data.len();
    let y: Vec<f64> = data.y.iter().map(|&v| sign(v)).collect();
    let ub: Vec<f64> = c.iter().map(|ci| cost * ci).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = y[i] * y[j] * data.x[i].dot_sparse(&data.x[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let primal = |alpha: &[f64], rho: f64| -> (Vec<f64>, f64, f64) {
        let mut w = vec![0.0; data.dim];
        for (i, x) in data.x.iter().enumerate() {
            if alpha[i] > 0.0 {
                for &(col, v) in &x.entries {
                    w[col] += y[i] * alpha[i] * v;
                }
            }
        }
        let j = svm_objective(data, c, cost, &w, -rho);
        (w, -rho, j)
    };
    let mut best = (vec![0.0; data.dim], 0.0, svm_objective(data, c, cost, &vec![0.0; data.dim], 0.0));
    let mut trace = vec![best.2];
    smo(&q, &y, &ub, cfg, n.max(1), |alpha, rho| {
        let cand = primal(alpha, rho);
        if cand.2 < best.2 {
            best = cand;
        }
        trace.push(best.2);
    });
    if !best.2.is_finite() {
        return Err(TrainError::Diverged(format!("hinge objective {}", best.2)));
    }
    Ok(LinearModel {
        weights: best.0,
        bias: best.1,
        reg: cost,
        loss: Loss::Hinge,
        objective_trace: trace,
    })
}
