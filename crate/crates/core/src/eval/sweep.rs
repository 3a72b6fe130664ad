//! The sequence-length / averaging-window sweep: one trained model per
//! (L, D) cell on identical chronological split boundaries, reported as an
//! RMSE table with windows as rows and lengths as columns.

use super::model::{EvalContext, EvalModel};
use super::{compare_models, MetricReport};
use crate::ingest::CountCube;
use crate::nn::{train_new, TarpmlHyper, TrainConfig};
use crate::risk::{build_samples, chrono_split, risk_cube};
use crate::rng::derive_seed;
use crate::{Error, Result};
use rayon::prelude::*;
use std::io::Write;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lengths: Vec<usize>,
    pub windows: Vec<usize>,
    pub train_end: i64,
    pub test_end: i64,
    /// Architecture template; seq_len and window_days are overridden per
    /// cell.
    pub hyper: TarpmlHyper,
    /// Per-cell seeds derive from `train.seed` and the cell's (D, L).
    pub train: TrainConfig,
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub window_days: usize,
    pub seq_len: usize,
    pub report: Option<MetricReport>,
    pub error: Option<String>,
}

/// Run the sweep. Cells run in parallel; results are ordered by the input
/// (windows x lengths) order and per-cell seeds are derived from the master
/// seed, so the outcome does not depend on scheduling.
pub fn sweep_seq_len(cube: &CountCube, cfg: &SweepConfig) -> Result<Vec<SweepCell>> {
    if cfg.lengths.is_empty() || cfg.windows.is_empty() {
        return Err(Error::config("sweep needs at least one length and one window"));
    }
    let mut jobs = Vec::new();
    for &window_days in &cfg.windows {
        let risk = risk_cube(cube, window_days)?;
        let risk = std::sync::Arc::new(risk);
        for &seq_len in &cfg.lengths {
            jobs.push((window_days, seq_len, risk.clone()));
        }
    }

    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|(window_days, seq_len, risk)| {
            let run = || -> Result<MetricReport> {
                let store = build_samples(risk, *seq_len)?;
                let split = chrono_split(&store, cfg.train_end, cfg.test_end)?;
                let mut hyper = cfg.hyper.clone();
                hyper.seq_len = *seq_len;
                hyper.window_days = *window_days;
                let mut train_cfg = cfg.train.clone();
                train_cfg.seed = derive_seed(cfg.train.seed, (*window_days as u64) << 32 | *seq_len as u64);
                let (model, _) = train_new(hyper, &store, &split, &train_cfg)?;
                let eval_model = EvalModel::Tarpml(model);
                let ctx = EvalContext::with_risk(risk);
                let reports = compare_models(&[&eval_model], &store, &split.test, &ctx)?;
                Ok(reports.into_iter().next().unwrap())
            };
            match run() {
                Ok(report) => SweepCell {
                    window_days: *window_days,
                    seq_len: *seq_len,
                    report: Some(report),
                    error: None,
                },
                Err(e) => SweepCell {
                    window_days: *window_days,
                    seq_len: *seq_len,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(cells)
}

/// RMSE table: header `window_days,<L...>`, one row per window. Failed
/// cells print `failed`.
pub fn write_sweep_csv<W: Write>(cells: &[SweepCell], cfg: &SweepConfig, w: &mut W) -> Result<()> {
    write!(w, "window_days")?;
    for l in &cfg.lengths {
        write!(w, ",{l}")?;
    }
    writeln!(w)?;
    for (wi, &window) in cfg.windows.iter().enumerate() {
        write!(w, "{window}")?;
        for li in 0..cfg.lengths.len() {
            let cell = &cells[wi * cfg.lengths.len() + li];
            match &cell.report {
                Some(r) => write!(w, ",{}", r.rmse)?,
                None => write!(w, ",failed")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
