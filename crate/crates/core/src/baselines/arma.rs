//! ARMA(p, q) per-cell forecasting via Hannan-Rissanen two-stage least
//! squares: a long autoregression estimates the innovations, then the
//! series is regressed on p lags and q lagged innovations.

use super::linalg;
use crate::risk::RiskCube;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct ArmaConfig {
    pub p: usize,
    pub q: usize,
}

impl Default for ArmaConfig {
    fn default() -> Self {
        // one day of AR context plus one innovation lag on hourly series
        ArmaConfig { p: 24, q: 1 }
    }
}

/// Coefficients for one series, in the centered parameterization
/// `z_t = sum phi_i z_{t-i} + sum theta_j e_{t-j} + e_t` with
/// `z = y - mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaCellModel {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub mean: f64,
    pub ridge_used: bool,
}

impl ArmaCellModel {
    /// Two-stage Hannan-Rissanen fit on one series.
    pub fn fit(series: &[f64], p: usize, q: usize) -> Result<Self> {
        let n = series.len();
        if n <= 10 * (p + q + 1) {
            return Err(Error::data(format!(
                "series length {n} too short for ARMA({p},{q}); need more than {}",
                10 * (p + q + 1)
            )));
        }
        let mean = series.iter().sum::<f64>() / n as f64;
        let z: Vec<f64> = series.iter().map(|&y| y - mean).collect();

        // stage 1: long AR to proxy the innovations
        let m = p + q + 5;
        let mut rows = Vec::with_capacity(n - m);
        let mut targets = Vec::with_capacity(n - m);
        for t in m..n {
            rows.push((1..=m).map(|i| z[t - i]).collect::<Vec<f64>>());
            targets.push(z[t]);
        }
        let (phi_long, ridge1) = linalg::least_squares(&rows, &targets, 1e-8)?;

        let mut innovations = vec![0.0; n];
        for t in m..n {
            let fitted: f64 = (1..=m).map(|i| phi_long[i - 1] * z[t - i]).sum();
            innovations[t] = z[t] - fitted;
        }

        // stage 2: regress on p lags and q lagged innovations
        let start = m + q;
        let mut rows2 = Vec::with_capacity(n - start);
        let mut targets2 = Vec::with_capacity(n - start);
        for t in start.max(p)..n {
            let mut row = Vec::with_capacity(p + q);
            row.extend((1..=p).map(|i| z[t - i]));
            row.extend((1..=q).map(|j| innovations[t - j]));
            rows2.push(row);
            targets2.push(z[t]);
        }
        let (beta, ridge2) = linalg::least_squares(&rows2, &targets2, 1e-8)?;
        let phi = beta[..p].to_vec();
        let theta = beta[p..].to_vec();
        if phi.iter().chain(&theta).any(|c| !c.is_finite()) {
            return Err(Error::data("non-finite ARMA coefficients"));
        }
        Ok(ArmaCellModel {
            phi,
            theta,
            mean,
            ridge_used: ridge1 || ridge2,
        })
    }

    /// Innovations over a series under this model (zero for the first
    /// max(p, q) warm-up points).
    pub fn innovations(&self, series: &[f64]) -> Vec<f64> {
        let n = series.len();
        let p = self.phi.len();
        let q = self.theta.len();
        let warmup = p.max(q);
        let z: Vec<f64> = series.iter().map(|&y| y - self.mean).collect();
        let mut e = vec![0.0; n];
        for t in warmup..n {
            let ar: f64 = (1..=p).map(|i| self.phi[i - 1] * z[t - i]).sum();
            let ma: f64 = (1..=q).map(|j| self.theta[j - 1] * e[t - j]).sum();
            e[t] = z[t] - ar - ma;
        }
        e
    }

    /// One-step-ahead forecasts aligned with the series: `forecasts[t]`
    /// predicts `series[t]` from observations before t. The first
    /// max(p, q) entries are None (not enough lags).
    pub fn forecast_series(&self, series: &[f64]) -> Vec<Option<f64>> {
        let n = series.len();
        let p = self.phi.len();
        let q = self.theta.len();
        let warmup = p.max(q);
        let z: Vec<f64> = series.iter().map(|&y| y - self.mean).collect();
        let e = self.innovations(series);
        (0..n)
            .map(|t| {
                if t < warmup {
                    return None;
                }
                let ar: f64 = (1..=p).map(|i| self.phi[i - 1] * z[t - i]).sum();
                let ma: f64 = (1..=q).map(|j| self.theta[j - 1] * e[t - j]).sum();
                Some(self.mean + ar + ma)
            })
            .collect()
    }
}

/// Per-cell ARMA models plus the series context needed to forecast.
#[derive(Debug, Clone)]
pub struct ArmaModel {
    pub p: usize,
    pub q: usize,
    pub window_days: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub cells: Vec<ArmaCellModel>,
    /// Defined risk series per cell (from `defined_from` onward).
    pub series: Vec<Vec<f64>>,
    /// One-step forecasts per cell, same indexing as `series`.
    pub forecasts: Vec<Vec<Option<f64>>>,
    /// Slot index of series position 0.
    pub defined_from: usize,
}

impl ArmaModel {
    /// Fit one model per cell on the series up to `fit_until_slot`
    /// (exclusive), then precompute one-step forecasts over the whole
    /// defined range.
    pub fn fit(risk: &RiskCube, cfg: &ArmaConfig, fit_until_slot: usize) -> Result<ArmaModel> {
        let defined_from = risk.defined_from();
        if fit_until_slot <= defined_from || fit_until_slot > risk.n_slots {
            return Err(Error::config("fit_until_slot outside the defined risk range"));
        }
        let fit_len = fit_until_slot - defined_from;
        let (n_rows, n_cols) = (risk.grid.n_rows, risk.grid.n_cols);
        let mut cells = Vec::with_capacity(n_rows * n_cols);
        let mut series = Vec::with_capacity(n_rows * n_cols);
        let mut forecasts = Vec::with_capacity(n_rows * n_cols);
        for row in 0..n_rows {
            for col in 0..n_cols {
                let full = risk.cell_series(row, col);
                let cell = ArmaCellModel::fit(&full[..fit_len], cfg.p, cfg.q)?;
                forecasts.push(cell.forecast_series(&full));
                series.push(full);
                cells.push(cell);
            }
        }
        Ok(ArmaModel {
            p: cfg.p,
            q: cfg.q,
            window_days: risk.window_days,
            n_rows,
            n_cols,
            cells,
            series,
            forecasts,
            defined_from,
        })
    }

    /// Rebuild the forecast context against a (re-derived) risk cube, e.g.
    /// after loading coefficients from a checkpoint.
    pub fn attach_context(&mut self, risk: &RiskCube) -> Result<()> {
        if risk.grid.n_rows != self.n_rows || risk.grid.n_cols != self.n_cols {
            return Err(Error::data("risk cube grid does not match the ARMA model"));
        }
        if risk.window_days != self.window_days {
            return Err(Error::data("risk cube window does not match the ARMA model"));
        }
        self.defined_from = risk.defined_from();
        self.series.clear();
        self.forecasts.clear();
        for row in 0..self.n_rows {
            for col in 0..self.n_cols {
                let full = risk.cell_series(row, col);
                let cell = &self.cells[row * self.n_cols + col];
                self.forecasts.push(cell.forecast_series(&full));
                self.series.push(full);
            }
        }
        Ok(())
    }

    /// One-step forecast of the risk at (row, col, slot), if enough history
    /// exists.
    pub fn predict_slot(&self, row: usize, col: usize, slot: usize) -> Option<f64> {
        if slot < self.defined_from {
            return None;
        }
        let idx = slot - self.defined_from;
        self.forecasts.get(row * self.n_cols + col)?.get(idx).copied().flatten()
    }
}
