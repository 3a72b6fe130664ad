//! Side-by-side model evaluation over byte-identical test samples.

use super::model::{EvalContext, EvalModel};
use super::{metrics, MetricReport};
use crate::risk::SampleStore;
use crate::{Error, Result};
use std::io::Write;

/// Evaluate each model over the same test indices. Samples a model cannot
/// cover (e.g. missing history) are skipped for that model only; `n` in the
/// report shows the effective count.
pub fn compare_models(
    models: &[&EvalModel],
    store: &SampleStore,
    test: &[usize],
    ctx: &EvalContext,
) -> Result<Vec<MetricReport>> {
    if test.is_empty() {
        return Err(Error::data("comparison needs a non-empty test set"));
    }
    let mut reports = Vec::with_capacity(models.len());
    for model in models {
        let mut real = Vec::with_capacity(test.len());
        let mut pred = Vec::with_capacity(test.len());
        for &i in test {
            let s = &store.samples[i];
            if let Some(p) = model.predict_sample(s, ctx)? {
                real.push(s.target);
                pred.push(p);
            }
        }
        if real.is_empty() {
            return Err(Error::data(format!(
                "model `{}` produced no predictions on the test set",
                model.kind()
            )));
        }
        reports.push(metrics(&real, &pred)?.with_context(model.kind(), store.window_days, store.seq_len));
    }
    Ok(reports)
}

/// Comparison table CSV, one row per model, columns MAE, MSE, RMSE.
pub fn write_comparison_csv<W: Write>(reports: &[MetricReport], w: &mut W) -> Result<()> {
    writeln!(w, "model,mae,mse,rmse")?;
    for r in reports {
        writeln!(w, "{},{},{},{}", r.model, r.mae, r.mse, r.rmse)?;
    }
    Ok(())
}

/// Text report of the headline ordering claim: whether the network beats
/// every baseline on RMSE. Violations are listed, not fatal.
pub fn write_ordering_report<W: Write>(reports: &[MetricReport], w: &mut W) -> Result<bool> {
    let Some(ours) = reports.iter().find(|r| r.model == "tarpml") else {
        writeln!(w, "no tarpml row; ordering not checked")?;
        return Ok(false);
    };
    let mut all_ok = true;
    writeln!(w, "ordering check: tarpml RMSE {} vs baselines", ours.rmse)?;
    for r in reports.iter().filter(|r| r.model != "tarpml") {
        if ours.rmse <= r.rmse {
            writeln!(w, "  ok: tarpml {} <= {} {}", ours.rmse, r.model, r.rmse)?;
        } else {
            all_ok = false;
            writeln!(
                w,
                "  exception: tarpml {} > {} {} (claim does not hold on this run)",
                ours.rmse, r.model, r.rmse
            )?;
        }
    }
    Ok(all_ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{historical_average, HavgModel};
    use crate::ingest::{CountCube, GridSpec};
    use crate::risk::{build_samples, risk_cube};

    fn periodic_store() -> (crate::risk::RiskCube, SampleStore) {
        let grid = GridSpec {
            origin_lon: 0.0,
            origin_lat: 0.0,
            cell_size_m: 1000.0,
            n_rows: 1,
            n_cols: 1,
            time_origin: 0,
            slot_seconds: 3600,
            meters_per_deg_lon: 100_000.0,
            meters_per_deg_lat: 100_000.0,
        };
        let mut cube = CountCube::zeros(grid, 24 * 8);
        for t in 0..24 * 8 {
            cube.add(0, 0, t, ((t % 24) % 4) as u32);
        }
        let risk = risk_cube(&cube, 2).unwrap();
        let store = build_samples(&risk, 6).unwrap();
        (risk, store)
    }

    #[test]
    fn model_vs_itself_identical_rows() {
        let (risk, store) = periodic_store();
        let havg = EvalModel::Havg(historical_average(&risk));
        let havg2 = EvalModel::Havg(HavgModel { window_days: risk.window_days });
        let test: Vec<usize> = (store.samples.len() - 40..store.samples.len()).collect();
        let ctx = EvalContext::with_risk(&risk);
        let reports = compare_models(&[&havg, &havg2], &store, &test, &ctx).unwrap();
        assert_eq!(reports[0].mae, reports[1].mae);
        assert_eq!(reports[0].mse, reports[1].mse);
        assert_eq!(reports[0].rmse, reports[1].rmse);
        assert_eq!(reports[0].n, reports[1].n);
    }

    #[test]
    fn periodic_risk_gives_havg_zero_metrics() {
        let (risk, store) = periodic_store();
        let havg = EvalModel::Havg(historical_average(&risk));
        // restrict to samples where the 24 h-earlier slot is defined
        let test: Vec<usize> = store
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.slot >= risk.defined_from() + 24)
            .map(|(i, _)| i)
            .collect();
        let ctx = EvalContext::with_risk(&risk);
        let reports = compare_models(&[&havg], &store, &test, &ctx).unwrap();
        assert_eq!(reports[0].mae, 0.0);
        assert_eq!(reports[0].rmse, 0.0);
    }

    #[test]
    fn csv_columns_in_table_order() {
        let reports = vec![
            MetricReport {
                model: "lasso".into(),
                mae: 0.046,
                mse: 0.006,
                rmse: 0.076,
                n: 10,
                window_days: 3,
                seq_len: 100,
            },
            MetricReport {
                model: "tarpml".into(),
                mae: 0.014,
                mse: 0.001,
                rmse: 0.034,
                n: 10,
                window_days: 3,
                seq_len: 100,
            },
        ];
        let mut buf = Vec::new();
        write_comparison_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("model,mae,mse,rmse"));
        assert_eq!(lines.next(), Some("lasso,0.046,0.006,0.076"));
        assert_eq!(lines.next(), Some("tarpml,0.014,0.001,0.034"));
    }

    #[test]
    fn ordering_report_flags_exceptions() {
        let mk = |model: &str, rmse: f64| MetricReport {
            model: model.into(),
            mae: 0.0,
            mse: rmse * rmse,
            rmse,
            n: 5,
            window_days: 3,
            seq_len: 10,
        };
        let mut buf = Vec::new();
        let ok = write_ordering_report(&[mk("tarpml", 0.1), mk("lasso", 0.2)], &mut buf).unwrap();
        assert!(ok);
        let mut buf2 = Vec::new();
        let ok2 = write_ordering_report(&[mk("tarpml", 0.3), mk("lasso", 0.2)], &mut buf2).unwrap();
        assert!(!ok2);
        assert!(String::from_utf8(buf2).unwrap().contains("exception"));
    }
}
