//! Zero-inflated Poisson regression fitted by EM.
//!
//! Count part: log λ(x) = b0 + b1·u, u = x / ZIP_X_SCALE.
//! Inflation part: either a constant π or logit π(x) = g0 + g1·u.

use serde::Serialize;

use super::{solve2, RegressionDataset, ZIP_X_SCALE};
use crate::error::{Error, Result};
use crate::stats::special::ln_gamma;

const NEWTON_MAX: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InflationLink {
    /// π does not depend on x.
    Constant,
    /// logit π is linear in x.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "link", rename_all = "snake_case")]
pub enum Inflation {
    Constant { pi: f64 },
    Logit { g0: f64, g1: f64 },
}

impl Inflation {
    pub fn pi(&self, u: f64) -> f64 {
        match *self {
            Inflation::Constant { pi } => pi,
            Inflation::Logit { g0, g1 } => logistic(g0 + g1 * u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZipOptions {
    pub inflation: InflationLink,
    /// Holds π at this value and fits only the count part.
    pub frozen_pi: Option<f64>,
    pub max_iter: usize,
    /// Stop once the log-likelihood gain of an iteration falls below this.
    pub tol: f64,
}

impl Default for ZipOptions {
    fn default() -> Self {
        ZipOptions {
            inflation: InflationLink::Constant,
            frozen_pi: None,
            max_iter: 500,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZipModel {
    pub inflation: Inflation,
    pub b0: f64,
    pub b1: f64,
    pub x_scale: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after initialisation and after every EM iteration.
    pub ll_trace: Vec<f64>,
}

impl ZipModel {
    /// Model with fixed parameters and no fitting history.
    pub fn from_params(inflation: Inflation, b0: f64, b1: f64) -> Self {
        ZipModel {
            inflation,
            b0,
            b1,
            x_scale: ZIP_X_SCALE,
            log_likelihood: f64::NAN,
            iterations: 0,
            converged: true,
            ll_trace: Vec::new(),
        }
    }

    pub fn lambda(&self, x: f64) -> f64 {
        (self.b0 + self.b1 * x / self.x_scale).exp()
    }

    pub fn pi(&self, x: f64) -> f64 {
        self.inflation.pi(x / self.x_scale)
    }

    /// (1 − π(x)) · λ(x).
    pub fn predict_x(&self, x: f64) -> f64 {
        (1.0 - self.pi(x)) * self.lambda(x)
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn log_likelihood(us: &[f64], ys: &[f64], inflation: &Inflation, b: [f64; 2]) -> f64 {
    us.iter()
        .zip(ys)
        .map(|(&u, &y)| {
            let eta = b[0] + b[1] * u;
            let lam = eta.exp();
            let pi = inflation.pi(u);
            if y == 0.0 {
                (pi + (1.0 - pi) * (-lam).exp()).ln()
            } else {
                (1.0 - pi).ln() - lam + y * eta - ln_gamma(y + 1.0)
            }
        })
        .sum()
}

/// Damped Newton ascent on a concave two-parameter objective.
fn newton2(
    start: [f64; 2],
    objective: impl Fn([f64; 2]) -> f64,
    grad_hess: impl Fn([f64; 2]) -> ([f64; 2], [f64; 3]),
) -> [f64; 2] {
    let mut theta = start;
    let mut value = objective(theta);
    for _ in 0..NEWTON_MAX {
        let (g, h) = grad_hess(theta);
        // h holds the negated Hessian [a, b, d], positive definite when well posed.
        let Some(step) = solve2(h[0], h[1], h[2], g) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..HALVINGS {
            let cand = [theta[0] + t * step[0], theta[1] + t * step[1]];
            let v = objective(cand);
            if v.is_finite() && v >= value {
                theta = cand;
                value = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || (t * step[0]).abs().max((t * step[1]).abs()) < NEWTON_TOL {
            break;
        }
    }
    theta
}

/// Weighted Poisson M-step: maximise Σ w (y·η − e^η).
fn poisson_step(us: &[f64], ys: &[f64], w: &[f64], start: [f64; 2]) -> [f64; 2] {
    let obj = |b: [f64; 2]| -> f64 {
        us.iter()
            .zip(ys)
            .zip(w)
            .map(|((&u, &y), &w)| {
                let eta = b[0] + b[1] * u;
                w * (y * eta - eta.exp())
            })
            .sum()
    };
    let gh = |b: [f64; 2]| {
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for ((&u, &y), &w) in us.iter().zip(ys).zip(w) {
            let mu = (b[0] + b[1] * u).exp();
            g[0] += w * (y - mu);
            g[1] += w * (y - mu) * u;
            h[0] += w * mu;
            h[1] += w * mu * u;
            h[2] += w * mu * u * u;
        }
        (g, h)
    };
    newton2(start, obj, gh)
}

/// Logistic M-step on fractional responses z.
fn logistic_step(us: &[f64], z: &[f64], start: [f64; 2]) -> [f64; 2] {
    let obj = |g: [f64; 2]| -> f64 {
        us.iter()
            .zip(z)
            .map(|(&u, &z)| {
                let eta = g[0] + g[1] * u;
                z * eta - log1p_exp(eta)
            })
            .sum()
    };
    let gh = |g: [f64; 2]| {
        let mut gr = [0.0; 2];
        let mut h = [0.0; 3];
        for (&u, &z) in us.iter().zip(z) {
            let p = logistic(g[0] + g[1] * u);
            let v = p * (1.0 - p);
            gr[0] += z - p;
            gr[1] += (z - p) * u;
            h[0] += v;
            h[1] += v * u;
            h[2] += v * u * u;
        }
        (gr, h)
    };
    newton2(start, obj, gh)
}

/// Maximum-likelihood ZIP fit by EM. The E-step computes the probability
/// that each zero came from the inflation component; the M-step solves the
/// weighted Poisson and logistic sub-problems to convergence, so the
/// log-likelihood never decreases.
pub fn fit_zip(data: &RegressionDataset, opts: &ZipOptions) -> Result<ZipModel> {
    let ys = &data.ys;
    if ys.iter().any(|y| y.fract() != 0.0) {
        return Err(Error::invalid("ZIP targets must be non-negative integers"));
    }
    let positives: Vec<f64> = ys.iter().copied().filter(|&y| y > 0.0).collect();
    if positives.is_empty() {
        return Err(Error::Degenerate("zero-inflation unidentifiable".into()));
    }
    if let Some(p) = opts.frozen_pi {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::invalid("frozen π must lie in [0, 1)"));
        }
    }
    let us: Vec<f64> = data.xs.iter().map(|x| x / ZIP_X_SCALE).collect();
    let n = ys.len() as f64;
    let zeros = ys.iter().filter(|&&y| y == 0.0).count() as f64;

    let pi0 = opts.frozen_pi.unwrap_or(zeros / n / 2.0);
    let mut inflation = match (opts.frozen_pi, opts.inflation) {
        (Some(_), _) | (None, InflationLink::Constant) => Inflation::Constant { pi: pi0 },
        (None, InflationLink::Linear) => Inflation::Logit {
            g0: (pi0 / (1.0 - pi0)).ln().max(-30.0),
            g1: 0.0,
        },
    };
    let mean_pos = positives.iter().sum::<f64>() / positives.len() as f64;
    let mut b = [mean_pos.ln(), 0.0];

    let mut ll = log_likelihood(&us, ys, &inflation, b);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        // E-step.
        let z: Vec<f64> = us
            .iter()
            .zip(ys)
            .map(|(&u, &y)| {
                if y > 0.0 {
                    return 0.0;
                }
                let pi = inflation.pi(u);
                let p0 = (1.0 - pi) * (-(b[0] + b[1] * u).exp()).exp();
                if pi == 0.0 {
                    0.0
                } else {
                    pi / (pi + p0)
                }
            })
            .collect();
        // M-step.
        let w: Vec<f64> = z.iter().map(|z| 1.0 - z).collect();
        b = poisson_step(&us, ys, &w, b);
        inflation = match (opts.frozen_pi, inflation) {
            (Some(_), inf) => inf,
            (None, Inflation::Constant { .. }) => Inflation::Constant {
                pi: z.iter().sum::<f64>() / n,
            },
            (None, Inflation::Logit { g0, g1 }) => {
                let [g0, g1] = logistic_step(&us, &z, [g0, g1]);
                Inflation::Logit { g0, g1 }
            }
        };
        let next = log_likelihood(&us, ys, &inflation, b);
        trace.push(next);
        let gain = next - ll;
        ll = next;
        if gain.abs() < opts.tol {
            converged = true;
            break;
        }
    }

    let model = ZipModel {
        inflation,
        b0: b[0],
        b1: b[1],
        x_scale: ZIP_X_SCALE,
        log_likelihood: ll,
        iterations,
        converged,
        ll_trace: trace,
    };
    if data.xs.iter().any(|&x| !model.predict_x(x).is_finite()) {
        return Err(Error::Degenerate(
            "ZIP mean is not finite on the training range".into(),
        ));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{year_to_x, Variant};
    use rand::SeedableRng;
    use rand_distr::{Distribution, Poisson};

    fn ds(ys: Vec<f64>) -> RegressionDataset {
        let years = (0..ys.len() as i32).map(|i| 1999 + i).collect();
        RegressionDataset::new(years, ys, Variant::WithCovid).unwrap()
    }

    /// Independent oracle: Poisson regression by iteratively reweighted
    /// least squares on the working response.
    fn irls_poisson(us: &[f64], ys: &[f64]) -> (f64, f64) {
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let (mut b0, mut b1) = (mean.ln(), 0.0);
        for _ in 0..200 {
            let (mut sw, mut swu, mut swuu, mut swz, mut swuz) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (&u, &y) in us.iter().zip(ys) {
                let eta = b0 + b1 * u;
                let mu = eta.exp();
                let zw = eta + (y - mu) / mu;
                sw += mu;
                swu += mu * u;
                swuu += mu * u * u;
                swz += mu * zw;
                swuz += mu * u * zw;
            }
            let det = sw * swuu - swu * swu;
            let nb0 = (swuu * swz - swu * swuz) / det;
            let nb1 = (sw * swuz - swu * swz) / det;
            let done = (nb0 - b0).abs() + (nb1 - b1).abs() < 1e-14;
            b0 = nb0;
            b1 = nb1;
            if done {
                break;
            }
        }
        (b0, b1)
    }

    #[test]
    fn constant_inflation_mean() {
        let m = ZipModel::from_params(Inflation::Constant { pi: 0.5 }, 4f64.ln(), 0.0);
        for year in [1999, 2025, 2050] {
            assert!((m.predict_x(year_to_x(year)) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_is_degenerate() {
        let err = fit_zip(&ds(vec![0.0; 10]), &ZipOptions::default()).unwrap_err();
        assert!(err.to_string().contains("zero-inflation unidentifiable"));
    }

    #[test]
    fn fractional_counts_rejected() {
        assert!(fit_zip(&ds(vec![1.5, 2.0, 0.0]), &ZipOptions::default()).is_err());
    }

    #[test]
    fn frozen_zero_matches_poisson_regression() {
        let ys: Vec<f64> = [
            3, 0, 2, 0, 1, 0, 1, 1, 2, 1, 0, 0, 0, 3, 1, 2, 1, 2, 1, 4, 4, 0, 1, 5, 6, 2,
        ]
        .iter()
        .map(|&v| f64::from(v))
        .collect();
        let data = ds(ys.clone());
        let opts = ZipOptions {
            frozen_pi: Some(0.0),
            ..ZipOptions::default()
        };
        let m = fit_zip(&data, &opts).unwrap();
        let us: Vec<f64> = data.xs.iter().map(|x| x / ZIP_X_SCALE).collect();
        let (b0, b1) = irls_poisson(&us, &ys);
        assert!((m.b0 - b0).abs() < 1e-6, "{} vs {b0}", m.b0);
        assert!((m.b1 - b1).abs() < 1e-6, "{} vs {b1}", m.b1);
    }

    #[test]
    fn no_zeros_hits_boundary() {
        let ys: Vec<f64> = (0..20).map(|i| f64::from(2 + i % 4)).collect();
        let data = ds(ys.clone());
        let m = fit_zip(&data, &ZipOptions::default()).unwrap();
        assert_eq!(m.pi(0.0), 0.0);
        let us: Vec<f64> = data.xs.iter().map(|x| x / ZIP_X_SCALE).collect();
        let (b0, b1) = irls_poisson(&us, &ys);
        for &x in &data.xs {
            let plain = (b0 + b1 * x / ZIP_X_SCALE).exp();
            assert!((m.predict_x(x) - plain).abs() < 1e-3);
        }
    }

    #[test]
    fn synthetic_pure_poisson() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240904);
        let dist = Poisson::new(3.0).unwrap();
        let ys: Vec<f64> = (0..200).map(|_| dist.sample(&mut rng)).collect();
        let years = (0..200).map(|i| 1900 + i).collect();
        let data = RegressionDataset::new(years, ys.clone(), Variant::WithCovid).unwrap();
        let m = fit_zip(&data, &ZipOptions::default()).unwrap();
        let sample_mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let fitted = m.predict_x(0.0);
        assert!(
            (fitted - sample_mean).abs() / sample_mean < 0.10,
            "{fitted} vs {sample_mean}"
        );
        assert!((fitted - 3.0).abs() / 3.0 < 0.10);
        assert!(m.pi(0.0) < 0.05);
    }

    #[test]
    fn ll_monotone_both_links() {
        let ys: Vec<f64> = [0, 0, 0, 1, 0, 2, 0, 0, 3, 4, 0, 5, 0, 6, 2, 0, 7, 0, 1, 8]
            .iter()
            .map(|&v| f64::from(v))
            .collect();
        for link in [InflationLink::Constant, InflationLink::Linear] {
            let m = fit_zip(
                &ds(ys.clone()),
                &ZipOptions {
                    inflation: link,
                    ..ZipOptions::default()
                },
            )
            .unwrap();
            assert!(m.ll_trace.len() >= 2);
            for w in m.ll_trace.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-9 * w[0].abs(),
                    "{link:?}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
            assert!(m.data_finite(&ds(ys.clone())));
        }
    }

    impl ZipModel {
        fn data_finite(&self, d: &RegressionDataset) -> bool {
            d.xs.iter().all(|&x| {
                let p = self.predict_x(x);
                p.is_finite() && p >= 0.0
            })
        }
    }
}
