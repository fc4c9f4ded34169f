use serde::{Deserialize, Serialize};

use super::{sign, Examples, TrainError};
use crate::features::FeatureVector;

const TAU: f64 = 1e-12;

/// exp(−γ‖x − z‖²).
pub fn rbf_kernel(x: &FeatureVector, z: &FeatureVector, gamma: f64) -> f64 {
    (-gamma * squared_distance(x, z)).exp()
}

pub(crate) fn squared_distance(x: &FeatureVector, z: &FeatureVector) -> f64 {
    let (a, b) = (&x.entries, &z.entries);
    let (mut i, mut j, mut d) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let diff = match (a.get(i), b.get(j)) {
            (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                i += 1;
                j += 1;
                va - vb
            }
            (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                i += 1;
                va
            }
            (Some(&(_, va)), None) => {
                i += 1;
                va
            }
            (_, Some(&(_, vb))) => {
                j += 1;
                -vb
            }
            (None, None) => unreachable!(),
        };
        d += diff * diff;
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSvmModel {
    pub dim: usize,
    pub support_vectors: Vec<FeatureVector>,
    /// y_i·α_i for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub converged: bool,
    /// Dual objective after every SMO step.
    #[serde(skip)]
    pub dual_trace: Vec<f64>,
    /// Training indices of the support vectors.
    #[serde(skip)]
    pub support_indices: Vec<usize>,
}

impl RbfSvmModel {
    pub fn decision(&self, x: &FeatureVector) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * rbf_kernel(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    /// Stop when the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        SmoConfig {
            tolerance: 1e-3,
            max_iter: 200_000,
        }
    }
}

/// State of a finished SMO run.
pub(crate) struct Dual {
    pub alpha: Vec<f64>,
    /// −y·b, the offset of the decision function.
    pub rho: f64,
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// SMO on the dual with second-order working-set selection:
/// max Σα − ½ΣΣ α_i α_j Q_ij, 0 ≤ α_i ≤ ub_i, Σ y_i α_i = 0, where
/// Q_ij = y_i y_j k(x_i, x_j) is given row-major. `monitor` sees α and the
/// offset every `every` steps.
pub(crate) fn smo<F>(q: &[f64], y: &[f64], ub: &[f64], cfg: &SmoConfig, every: usize, mut monitor: F) -> Dual
where
    F: FnMut(&[f64], f64),
{
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // gradient of f(α) = ½αᵀQα − eᵀα
    let mut g = vec![-1.0; n];
    let dual = |alpha: &[f64], g: &[f64]| -> f64 { -0.5 * alpha.iter().zip(g).map(|(a, gi)| a * (gi - 1.0)).sum::<f64>() };
    let mut trace = vec![0.0];
    let up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < ub[t]) || (y[t] < 0.0 && a[t] > 0.0);
    let low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < ub[t]);
    let mut converged = false;
    for step in 0..cfg.max_iter {
        if every > 0 && step % every == 0 {
            monitor(&alpha, offset(&alpha, &g, y, ub));
        }
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(t, &alpha) && -y[t] * g[t] > gmax {
                gmax = -y[t] * g[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(t, &alpha) {
                continue;
            }
            let v = -y[t] * g[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = q[i * n + i] + q[t * n + t] - 2.0 * y[i] * y[t] * q[i * n + t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.tolerance {
            converged = true;
            break;
        }
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let (ci, cj) = (ub[i], ub[j]);
        let qii = q[i * n + i];
        let qjj = q[j * n + j];
        let qij = q[i * n + j];
        if y[i] != y[j] {
            let mut quad = qii + qjj + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let mut quad = qii + qjj - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai_old, alpha[j] - aj_old);
        for t in 0..n {
            g[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
        trace.push(dual(&alpha, &g));
    }
    if !converged {
        log::warn!("SMO stopped after {} iterations without meeting the tolerance", cfg.max_iter);
    }
    let rho = offset(&alpha, &g, y, ub);
    if every > 0 {
        monitor(&alpha, rho);
    }
    Dual {
        alpha,
        rho,
        trace,
        converged,
    }
}

/// Offset from free multipliers, else the midpoint of the feasible interval.
fn offset(alpha: &[f64], g: &[f64], y: &[f64], ub: &[f64]) -> f64 {
    let (mut sum, mut nfree) = (0.0, 0usize);
    let (mut ub_r, mut lb_r) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..y.len() {
        let yg = y[t] * g[t];
        if alpha[t] > 0.0 && alpha[t] < ub[t] {
            sum += yg;
            nfree += 1;
        } else if (alpha[t] >= ub[t] && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub_r = ub_r.min(yg);
        } else {
            lb_r = lb_r.max(yg);
        }
    }
    if nfree > 0 {
        sum / nfree as f64
    } else if ub_r.is_finite() && lb_r.is_finite() {
        (ub_r + lb_r) / 2.0
    } else if ub_r.is_finite() {
        ub_r
    } else {
        lb_r
    }
}

pub(crate) fn check_cost(cost: f64) -> Result<(), TrainError> {
    if !(cost.is_finite() && cost > 0.0) {
        return Err(TrainError::Hyper(format!("C must be > 0, got {cost}")));
    }
    Ok(())
}

/// Kernel SVM trained by [`smo`]. Running out of iterations returns the
/// current model with a warning.
pub fn train_rbf_svm(data: &Examples, c: &[f64], cost: f64, gamma: f64, cfg: &SmoConfig) -> Result<RbfSvmModel, TrainError> {
    data.check_trainable()?;
    check_cost(cost)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(TrainError::Hyper(format!("gamma must be > 0, got {gamma}")));
    }
    let n = data.len();
    let y: Vec<f64> = data.y.iter().map(|&v| sign(v)).collect();
    let ub: Vec<f64> = c.iter().map(|ci| cost * ci).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = y[i] * y[j] * rbf_kernel(&data.x[i], &data.x[j], gamma);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    let d = smo(&q, &y, &ub, cfg, 0, |_, _| {});
    let support_indices: Vec<usize> = (0..n).filter(|&t| d.alpha[t] > 0.0).collect();
    Ok(RbfSvmModel {
        dim: data.dim,
        support_vectors: support_indices.iter().map(|&t| data.x[t].clone()).collect(),
        coefficients: support_indices.iter().map(|&t| y[t] * d.alpha[t]).collect(),
        bias: -d.rho,
        gamma,
        c: cost,
        converged: d.converged,
        dual_trace: d.trace,
        support_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_distance_matches_dense() {
        let a = FeatureVector::from_dense(&[1.0, 0.0, 2.0, 0.0]);
        let b = FeatureVector::from_dense(&[0.0, 3.0, 2.0, -1.0]);
        assert_eq!(squared_distance(&a, &b), 1.0 + 9.0 + 0.0 + 1.0);
        assert_eq!(rbf_kernel(&a, &a, 0.7), 1.0);
    }
}
