//! Linear epsilon-insensitive support vector regression, trained by
//! full-batch subgradient descent on
//! 0.5 ||w||^2 + C * sum_i max(0, |y_i - w.x_i - b| - eps).

use super::{LinearKind, LinearModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SvrConfig {
    pub c: f64,
    pub eps_tube: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            c: 1.0,
            eps_tube: 0.01,
            epochs: 300,
            learning_rate: 0.1,
        }
    }
}

/// Deterministic fit: w starts at zero, b at the target mean, and the step
/// size decays as lr / sqrt(epoch). The subgradient is scaled by 1/n (the
/// minimizer of P and P/n coincide), so one learning rate behaves the same
/// across dataset sizes.
pub fn fit_svr_linear(xs: &[Vec<f64>], ys: &[f64], cfg: &SvrConfig) -> Result<LinearModel> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::data("svr needs a non-empty design with matching targets"));
    }
    if !(cfg.c >= 0.0) || !(cfg.eps_tube >= 0.0) {
        return Err(Error::config("C and eps_tube must be >= 0"));
    }
    let n = xs.len();
    let p = xs[0].len();
    let inv_n = 1.0 / n as f64;
    let mut w = vec![0.0; p];
    let mut b = ys.iter().sum::<f64>() / n as f64;

    let mut grad_w = vec![0.0; p];
    for epoch in 0..cfg.epochs {
        grad_w.copy_from_slice(&w);
        let mut grad_b = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let f = w.iter().zip(x).map(|(&wj, &xj)| wj * xj).sum::<f64>() + b;
            let r = y - f;
            if r.abs() > cfg.eps_tube {
                let s = cfg.c * r.signum();
                for (g, &xj) in grad_w.iter_mut().zip(x) {
                    *g -= s * xj;
                }
                grad_b -= s;
            }
        }
        let eta = cfg.learning_rate / ((epoch + 1) as f64).sqrt();
        for (wj, &g) in w.iter_mut().zip(&grad_w) {
            *wj -= eta * g * inv_n;
            if !wj.is_finite() {
                return Err(Error::Train("svr diverged: non-finite weight".into()));
            }
        }
        b -= eta * grad_b * inv_n;
        if !b.is_finite() {
            return Err(Error::Train("svr diverged: non-finite bias".into()));
        }
    }
    Ok(LinearModel {
        weights: w,
        bias: b,
        kind: LinearKind::Svr,
    })
}
