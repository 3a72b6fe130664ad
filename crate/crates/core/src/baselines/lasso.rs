//! Lasso by cyclic coordinate descent with soft-thresholding.
//!
//! Minimizes (1/2n) ||y - Xw - b||^2 + lambda ||w||_1. Features are
//! standardized internally (mean 0, variance 1) and the solution is mapped
//! back to the original scale on output.

use super::{LinearKind, LinearModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LassoConfig {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda: 0.01,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub model: LinearModel,
    /// Coefficients on the standardized scale, for KKT diagnostics.
    pub std_weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub lambda: f64,
}

#[inline]
fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Column-standardized copy of the design: (columns, means, stds). Constant
/// columns get std = 0 and an all-zero column (their weight stays 0).
fn standardize(xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let p = xs[0].len();
    let inv_n = 1.0 / n as f64;
    let mut means = vec![0.0; p];
    for row in xs {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m *= inv_n);

    let mut stds = vec![0.0; p];
    for row in xs {
        for j in 0..p {
            let d = row[j] - means[j];
            stds[j] += d * d;
        }
    }
    stds.iter_mut().for_each(|s| *s = (*s * inv_n).sqrt());

    let mut cols = vec![vec![0.0; n]; p];
    for (i, row) in xs.iter().enumerate() {
        for j in 0..p {
            cols[j][i] = if stds[j] > 0.0 { (row[j] - means[j]) / stds[j] } else { 0.0 };
        }
    }
    (cols, means, stds)
}

pub fn fit_lasso(xs: &[Vec<f64>], ys: &[f64], cfg: &LassoConfig) -> Result<LassoFit> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::data("lasso needs a non-empty design with matching targets"));
    }
    if !(cfg.lambda >= 0.0) {
        return Err(Error::config("lambda must be >= 0"));
    }
    let n = xs.len();
    let p = xs[0].len();
    let inv_n = 1.0 / n as f64;
    let (cols, means, stds) = standardize(xs);
    let y_mean = ys.iter().sum::<f64>() * inv_n;
    let yc: Vec<f64> = ys.iter().map(|&y| y - y_mean).collect();

    let mut w = vec![0.0; p];
    let mut residual = yc;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..cfg.max_iter {
        iterations = iter + 1;
        let mut max_delta = 0.0f64;
        for j in 0..p {
            if stds[j] == 0.0 {
                continue;
            }
            let col = &cols[j];
            // rho = (1/n) x_j . (residual + x_j w_j); unit-variance columns
            // make the curvature term exactly 1
            let rho = col.iter().zip(&residual).map(|(&x, &r)| x * r).sum::<f64>() * inv_n + w[j];
            let w_new = soft_threshold(rho, cfg.lambda);
            let delta = w_new - w[j];
            if delta != 0.0 {
                for (r, &x) in residual.iter_mut().zip(col) {
                    *r -= x * delta;
                }
                w[j] = w_new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        if max_delta < cfg.tol {
            converged = true;
            break;
        }
    }

    // back to the original scale
    let mut weights = vec![0.0; p];
    let mut bias = y_mean;
    for j in 0..p {
        if stds[j] > 0.0 {
            weights[j] = w[j] / stds[j];
            bias -= w[j] * means[j] / stds[j];
        }
    }
    Ok(LassoFit {
        model: LinearModel {
            weights,
            bias,
            kind: LinearKind::Lasso,
        },
        std_weights: w,
        converged,
        iterations,
        lambda: cfg.lambda,
    })
}

/// Largest KKT violation of a fit on the standardized scale: for zero
/// weights `max(0, |g_j| - lambda)`, for active weights
/// `|g_j + lambda sign(w_j)|`, where g is the smooth-part gradient.
pub fn kkt_max_violation(xs: &[Vec<f64>], ys: &[f64], fit: &LassoFit) -> f64 {
    let n = xs.len();
    let inv_n = 1.0 / n as f64;
    let (cols, _, stds) = standardize(xs);
    let y_mean = ys.iter().sum::<f64>() * inv_n;

    // residual of the standardized model
    let mut residual: Vec<f64> = ys.iter().map(|&y| y - y_mean).collect();
    for j in 0..cols.len() {
        if fit.std_weights[j] != 0.0 {
            for (r, &x) in residual.iter_mut().zip(&cols[j]) {
                *r -= x * fit.std_weights[j];
            }
        }
    }
    let mut worst = 0.0f64;
    for j in 0..cols.len() {
        if stds[j] == 0.0 {
            continue;
        }
        let g = -cols[j].iter().zip(&residual).map(|(&x, &r)| x * r).sum::<f64>() * inv_n;
        let w = fit.std_weights[j];
        let violation = if w == 0.0 {
            (g.abs() - fit.lambda).max(0.0)
        } else {
            (g + fit.lambda * w.signum()).abs()
        };
        worst = worst.max(violation);
    }
    worst
}
