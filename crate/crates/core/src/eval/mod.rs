//! Evaluation: MAE/MSE/RMSE metrics, model comparison tables, the
//! sequence-length/window sweep, and risk-map exports.

mod compare;
mod maps;
mod model;
mod sweep;

pub use compare::{compare_models, write_comparison_csv, write_ordering_report};
pub use maps::export_risk_maps;
pub use model::{load_eval_model, save_eval_model, EvalContext, EvalModel};
pub use sweep::{sweep_seq_len, write_sweep_csv, SweepCell, SweepConfig};

use crate::{Error, Result};

/// Error metrics over one test set for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub model: String,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub n: usize,
    pub window_days: usize,
    pub seq_len: usize,
}

impl MetricReport {
    pub fn with_context(mut self, model: &str, window_days: usize, seq_len: usize) -> Self {
        self.model = model.to_string();
        self.window_days = window_days;
        self.seq_len = seq_len;
        self
    }
}

/// MAE = mean |r - r^|, MSE = mean (r - r^)^2, RMSE = sqrt(MSE).
pub fn metrics(real: &[f64], predicted: &[f64]) -> Result<MetricReport> {
    if real.is_empty() {
        return Err(Error::data("metrics need at least one pair"));
    }
    if real.len() != predicted.len() {
        return Err(Error::data(format!(
            "metrics length mismatch: {} real vs {} predicted",
            real.len(),
            predicted.len()
        )));
    }
    let n = real.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (&r, &p) in real.iter().zip(predicted) {
        if !r.is_finite() || !p.is_finite() {
            return Err(Error::data("metrics inputs must be finite"));
        }
        let e = r - p;
        abs_sum += e.abs();
        sq_sum += e * e;
    }
    let mse = sq_sum / n;
    Ok(MetricReport {
        model: String::new(),
        mae: abs_sum / n,
        mse,
        rmse: mse.sqrt(),
        n: real.len(),
        window_days: 0,
        seq_len: 0,
    })
}
