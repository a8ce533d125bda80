//! Damped least squares for `R₋(t) ≃ A / (1 + e^{−(t−t̃)/w})`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::series::ReflectionSeries;
use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-10;
const LAMBDA_MAX: f64 = 1e14;
/// Errors below this count as missing.
const MIN_ERR: f64 = 1e-12;

pub fn sigmoid(t: f64, a: f64, t_tilde: f64, w: f64) -> f64 {
    a / (1.0 + (-(t - t_tilde) / w).exp())
}

/// `∂model/∂(A, t̃, w)`.
fn model_gradient(t: f64, p: &[f64; 3]) -> [f64; 3] {
    let [a, tt, w] = *p;
    let s = 1.0 / (1.0 + (-(t - tt) / w).exp());
    let ds = s * (1.0 - s);
    [s, -a * ds / w, -a * ds * (t - tt) / (w * w)]
}

/// `Σ ((y − model)/σ)²`.
pub fn chi2(p: &[f64; 3], t: &[f64], y: &[f64], sigma: &[f64]) -> f64 {
    t.iter()
        .zip(y)
        .zip(sigma)
        .map(|((&t, &y), &s)| ((y - sigmoid(t, p[0], p[1], p[2])) / s).powi(2))
        .sum()
}

/// `∇χ² = −2·Jᵀ W r`.
pub fn chi2_gradient(p: &[f64; 3], t: &[f64], y: &[f64], sigma: &[f64]) -> [f64; 3] {
    let mut g = [0.0; 3];
    for ((&t, &y), &s) in t.iter().zip(y).zip(sigma) {
        let r = y - sigmoid(t, p[0], p[1], p[2]);
        let d = model_gradient(t, p);
        for k in 0..3 {
            g[k] -= 2.0 * r * d[k] / (s * s);
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    pub a: f64,
    pub t_tilde: f64,
    pub w: f64,
    /// Over `(A, t̃, w)`.
    pub covariance: [[f64; 3]; 3],
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
}

impl SigmoidFit {
    pub fn params(&self) -> [f64; 3] {
        [self.a, self.t_tilde, self.w]
    }

    pub fn std_errors(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| self.covariance[k][k].max(0.0).sqrt())
    }

    pub fn eval(&self, t: f64) -> f64 {
        sigmoid(t, self.a, self.t_tilde, self.w)
    }
}

pub fn fit_sigmoid(series: &ReflectionSeries) -> Result<SigmoidFit> {
    fit_sigmoid_data(&series.times(), &series.r_minus(), &series.errors())
}

fn normal_equations(p: &[f64; 3], t: &[f64], y: &[f64], sigma: &[f64]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut h = Matrix3::zeros();
    let mut g = Vector3::zeros();
    for ((&t, &y), &s) in t.iter().zip(y).zip(sigma) {
        let d = Vector3::from(model_gradient(t, p));
        let wgt = 1.0 / (s * s);
        h += d * d.transpose() * wgt;
        g += d * ((y - sigmoid(t, p[0], p[1], p[2])) * wgt);
    }
    (h, g)
}

fn initial_guess(t: &[f64], y: &[f64]) -> [f64; 3] {
    let a0 = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half = a0 / 2.0;
    let mut t0 = t[0];
    for k in 1..t.len() {
        if y[k - 1] < half && y[k] >= half {
            t0 = t[k - 1] + (half - y[k - 1]) * (t[k] - t[k - 1]) / (y[k] - y[k - 1]);
            break;
        }
    }
    [a0, t0, (t[t.len() - 1] - t[0]) / 10.0]
}

/// Weighted fit; zero errors take the median of the nonzero errors (or 1
/// if there are none).
pub fn fit_sigmoid_data(t: &[f64], y: &[f64], err: &[f64]) -> Result<SigmoidFit> {
    let n = t.len();
    if n < 4 {
        return Err(Error::Fit(format!("{n} points, need at least 4")));
    }
    if y.len() != n || err.len() != n {
        return Err(Error::Fit("times, values and errors differ in length".into()));
    }
    if t.iter().chain(y).chain(err).any(|v| !v.is_finite()) || err.iter().any(|e| *e < 0.0) {
        return Err(Error::Fit("non-finite or negative input".into()));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Fit("times must be strictly increasing".into()));
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo < 1e-12 {
        return Err(Error::Fit("flat series, no sigmoid to fit".into()));
    }
    let mut positive: Vec<f64> = err.iter().cloned().filter(|e| *e >= MIN_ERR).collect();
    positive.sort_by(f64::total_cmp);
    let fill = if positive.is_empty() { 1.0 } else { positive[positive.len() / 2] };
    let sigma: Vec<f64> = err.iter().map(|&e| if e >= MIN_ERR { e } else { fill }).collect();

    let mut p = initial_guess(t, y);
    let mut cur = chi2(&p, t, y, &sigma);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let (h, g) = normal_equations(&p, t, y, &sigma);
        let mut damped = h;
        for k in 0..3 {
            damped[(k, k)] += lambda * h[(k, k)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&g) else {
            return Err(Error::Fit("degenerate normal matrix".into()));
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
        let next = if trial[2] > 0.0 { chi2(&trial, t, y, &sigma) } else { f64::INFINITY };
        if next <= cur {
            let change = cur - next;
            p = trial;
            cur = next;
            lambda = (lambda / 10.0).max(1e-12);
            if change <= REL_TOL * cur || cur < 1e-28 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                // No descent direction left at working precision.
                converged = true;
                break;
            }
        }
    }
    let span = t[n - 1] - t[0];
    if !converged || !(p[2] > 0.0) || p[2] > 1e3 * span || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit(format!("no convergence after {iterations} iterations")));
    }
    let (h, _) = normal_equations(&p, t, y, &sigma);
    let inv = h.try_inverse().ok_or_else(|| Error::Fit("degenerate normal matrix at optimum".into()))?;
    let dof = n - 3;
    let scale = if dof > 0 && cur / dof as f64 > 1.0 { cur / dof as f64 } else { 1.0 };
    let covariance = [0, 1, 2].map(|r| [0, 1, 2].map(|k| 0.5 * (inv[(r, k)] + inv[(k, r)]) * scale));
    Ok(SigmoidFit { a: p[0], t_tilde: p[1], w: p[2], covariance, chi2: cur, dof, iterations })
}

/// `t* = t̃ − w·ln(2A − 1)` and its first-order error.
pub fn t_star(fit: &SigmoidFit) -> Result<(f64, f64)> {
    if fit.a <= 0.5 {
        return Err(Error::Undefined(format!("A = {} never reaches 0.5", fit.a)));
    }
    let l = (2.0 * fit.a - 1.0).ln();
    let value = fit.t_tilde - fit.w * l;
    let g = [-2.0 * fit.w / (2.0 * fit.a - 1.0), 1.0, -l];
    let var: f64 = (0..3).flat_map(|r| (0..3).map(move |k| (r, k))).map(|(r, k)| g[r] * fit.covariance[r][k] * g[k]).sum();
    Ok((value, var.max(0.0).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeDelayResult {
    pub t_star_free: f64,
    pub t_star_free_err: f64,
    pub t_star_int: f64,
    pub t_star_int_err: f64,
    pub delta_t_star: f64,
    pub delta_t_star_err: f64,
    pub delta_t_wigner: f64,
    pub delta_t_wigner_err: f64,
}

impl TimeDelayResult {
    pub fn from_t_stars(free: (f64, f64), int: (f64, f64)) -> Self {
        let d = int.0 - free.0;
        let e = free.1.hypot(int.1);
        Self {
            t_star_free: free.0,
            t_star_free_err: free.1,
            t_star_int: int.0,
            t_star_int_err: int.1,
            delta_t_star: d,
            delta_t_star_err: e,
            delta_t_wigner: 2.0 * d,
            delta_t_wigner_err: 2.0 * e,
        }
    }
}

pub fn time_delay(fit_free: &SigmoidFit, fit_int: &SigmoidFit) -> Result<TimeDelayResult> {
    Ok(TimeDelayResult::from_t_stars(t_star(fit_free)?, t_star(fit_int)?))
}
