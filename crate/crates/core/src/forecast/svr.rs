//! Epsilon-insensitive support vector regression solved by SMO with
//! second-order working-set selection.
//!
//! Dual over 2n variables a_t with signs s_t = +1 (t < n), −1 (t ≥ n):
//! minimise ½ aᵀQa + pᵀa subject to sᵀa = 0, 0 ≤ a ≤ C, where
//! Q_st = s_s·s_t·K(x_s mod n, x_t mod n) and p_t = ε − s_t·y_(t mod n).

use serde::Serialize;

use super::RegressionDataset;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match *self {
            Kernel::Linear => a * b,
            Kernel::Rbf { gamma } => (-gamma * (a - b) * (a - b)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SvrOptions {
    pub c: f64,
    pub epsilon: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrOptions {
    fn default() -> Self {
        SvrOptions {
            c: 1.0,
            epsilon: 0.1,
            tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// RBF width 1 / var(x), population variance of the training covariate.
pub fn default_gamma(xs: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::Degenerate("covariate variance is zero".into()));
    }
    Ok(1.0 / var)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub c: f64,
    pub epsilon: f64,
    /// α_i − α*_i for each support vector, each in [−C, C].
    pub dual_coefs: Vec<f64>,
    pub support_xs: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Maximal KKT violation at the returned point.
    pub kkt_residual: f64,
    /// (primal − dual) / max(1, |primal|).
    pub duality_gap: f64,
}

impl SvrModel {
    pub fn predict_x(&self, x: f64) -> f64 {
        self.dual_coefs
            .iter()
            .zip(&self.support_xs)
            .map(|(c, sx)| c * self.kernel.eval(*sx, x))
            .sum::<f64>()
            + self.bias
    }
}

struct Problem {
    n: usize,
    k: Vec<f64>,
    c: f64,
    p: Vec<f64>,
}

impl Problem {
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn q(&self, s: usize, t: usize) -> f64 {
        self.sign(s) * self.sign(t) * self.k[(s % self.n) * self.n + t % self.n]
    }

    fn is_upper(&self, a: f64) -> bool {
        a >= self.c
    }

    fn in_up(&self, t: usize, a: f64) -> bool {
        if self.sign(t) > 0.0 {
            !self.is_upper(a)
        } else {
            a > 0.0
        }
    }

    fn in_low(&self, t: usize, a: f64) -> bool {
        if self.sign(t) > 0.0 {
            a > 0.0
        } else {
            !self.is_upper(a)
        }
    }

    /// Working pair by maximal violation for i and second-order gain for j,
    /// or None once the violation is below `tol`. Also returns the violation.
    fn select(&self, alpha: &[f64], grad: &[f64], tol: f64) -> (Option<(usize, usize)>, f64) {
        let m = 2 * self.n;
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..m {
            if self.in_up(t, alpha[t]) {
                let v = -self.sign(t) * grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..m {
            if !self.in_low(t, alpha[t]) {
                continue;
            }
            let v = self.sign(t) * grad[t];
            gmax2 = gmax2.max(v);
            if i == usize::MAX {
                continue;
            }
            let b = gmax + v;
            if b > 0.0 {
                let a =
                    self.q(i, i) + self.q(t, t) - 2.0 * self.sign(i) * self.sign(t) * self.q(i, t);
                let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        let violation = gmax + gmax2;
        if violation < tol || i == usize::MAX || j == usize::MAX {
            (None, violation.max(0.0))
        } else {
            (Some((i, j)), violation)
        }
    }

    fn rho(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum, mut free) = (0.0, 0usize);
        for t in 0..2 * self.n {
            let yg = self.sign(t) * grad[t];
            if alpha[t] >= self.c {
                if self.sign(t) < 0.0 {
                    ub = ub.min(yg)
                } else {
                    lb = lb.max(yg)
                }
            } else if alpha[t] <= 0.0 {
                if self.sign(t) > 0.0 {
                    ub = ub.min(yg)
                } else {
                    lb = lb.max(yg)
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

pub fn fit_svr(data: &RegressionDataset, kernel: Kernel, opts: &SvrOptions) -> Result<SvrModel> {
    fit_xy(&data.xs, &data.ys, kernel, opts)
}

pub(crate) fn fit_xy(
    xs: &[f64],
    ys: &[f64],
    kernel: Kernel,
    opts: &SvrOptions,
) -> Result<SvrModel> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::invalid("SVR needs at least two points"));
    }
    if !(opts.c > 0.0) || !opts.c.is_finite() {
        return Err(Error::invalid("C must be positive"));
    }
    if !(opts.epsilon >= 0.0) {
        return Err(Error::invalid("epsilon must be non-negative"));
    }
    if let Kernel::Rbf { gamma } = kernel {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma must be positive"));
        }
    }
    let n = xs.len();
    let k: Vec<f64> = (0..n * n)
        .map(|idx| kernel.eval(xs[idx / n], xs[idx % n]))
        .collect();
    let p: Vec<f64> = (0..2 * n)
        .map(|t| {
            if t < n {
                opts.epsilon - ys[t]
            } else {
                opts.epsilon + ys[t - n]
            }
        })
        .collect();
    let prob = Problem { n, k, c: opts.c, p };

    let mut alpha = vec![0.0; 2 * n];
    let mut grad = prob.p.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut residual;
    loop {
        let (pair, viol) = prob.select(&alpha, &grad, opts.tol);
        residual = viol;
        let Some((i, j)) = pair else {
            converged = true;
            break;
        };
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        update_pair(&prob, &mut alpha, &mut grad, i, j);
    }

    let rho = prob.rho(&alpha, &grad);
    let coefs: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[i + n]).collect();
    let bias = -rho;

    // Dual objective ½aᵀQa + pᵀa equals ½Σ a_t (g_t + p_t).
    let dual_min: f64 = 0.5
        * (0..2 * n)
            .map(|t| alpha[t] * (grad[t] + prob.p[t]))
            .sum::<f64>();
    let dual = -dual_min;
    let norm2: f64 = (0..n)
        .map(|i| coefs[i] * (0..n).map(|j| prob.k[i * n + j] * coefs[j]).sum::<f64>())
        .sum();
    let hinge: f64 = (0..n)
        .map(|i| {
            let f = (0..n).map(|j| coefs[j] * prob.k[j * n + i]).sum::<f64>() + bias;
            ((ys[i] - f).abs() - opts.epsilon).max(0.0)
        })
        .sum();
    let primal = 0.5 * norm2 + opts.c * hinge;
    let duality_gap = (primal - dual) / primal.abs().max(1.0);

    let (dual_coefs, support_xs) = coefs
        .iter()
        .zip(xs)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, x)| (*c, *x))
        .unzip();
    Ok(SvrModel {
        kernel,
        c: opts.c,
        epsilon: opts.epsilon,
        dual_coefs,
        support_xs,
        bias,
        iterations,
        converged,
        kkt_residual: residual,
        duality_gap,
    })
}

/// Analytic two-variable update with box clipping, then gradient refresh.
fn update_pair(prob: &Problem, alpha: &mut [f64], grad: &mut [f64], i: usize, j: usize) {
    let c = prob.c;
    let (yi, yj) = (prob.sign(i), prob.sign(j));
    let (old_i, old_j) = (alpha[i], alpha[j]);
    let qii = prob.q(i, i);
    let qjj = prob.q(j, j);
    let qij = prob.q(i, j);
    if yi != yj {
        let mut quad = qii + qjj + 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (-grad[i] - grad[j]) / quad;
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
        if diff > 0.0 {
            if alpha[i] > c {
                alpha[i] = c;
                alpha[j] = c - diff;
            }
        } else if alpha[j] > c {
            alpha[j] = c;
            alpha[i] = c + diff;
        }
    } else {
        let mut quad = qii + qjj - 2.0 * qij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let delta = (grad[i] - grad[j]) / quad;
        let sum = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if sum > c {
            if alpha[i] > c {
                alpha[i] = c;
                alpha[j] = sum - c;
            }
        } else if alpha[j] < 0.0 {
            alpha[j] = 0.0;
            alpha[i] = sum;
        }
        if sum > c {
            if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = sum - c;
            }
        } else if alpha[i] < 0.0 {
            alpha[i] = 0.0;
            alpha[j] = sum;
        }
    }
    let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
    for (t, g) in grad.iter_mut().enumerate() {
        *g += prob.q(t, i) * di + prob.q(t, j) * dj;
    }
}
