//! Risk-map export: real and predicted per-cell risk grids for one slot
//! (CSV + PGM, same scaling rule as the count heatmap) plus a real-vs-
//! predicted hourly curve for one chosen cell.

use super::model::{EvalContext, EvalModel};
use crate::pgm;
use crate::risk::{RiskCube, RiskSample};
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn sample_at(risk: &RiskCube, seq_len: usize, row: usize, col: usize, slot: usize) -> Option<RiskSample> {
    if slot < risk.defined_from() + seq_len || slot >= risk.n_slots {
        return None;
    }
    let sequence: Vec<f64> = (slot - seq_len..slot).map(|t| risk.at(row, col, t).unwrap()).collect();
    let center = |index: usize, count: usize| -> f64 {
        if count <= 1 {
            0.5
        } else {
            index as f64 / (count - 1) as f64
        }
    };
    Some(RiskSample {
        sequence,
        coord: [center(col, risk.grid.n_cols), center(row, risk.grid.n_rows)],
        target: risk.at(row, col, slot).unwrap(),
        row,
        col,
        slot,
    })
}

fn write_grid_csv(path: &Path, n_rows: usize, n_cols: usize, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "row,col,risk")?;
    for r in 0..n_rows {
        for c in 0..n_cols {
            writeln!(w, "{},{},{}", r, c, values[r * n_cols + c])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_grid_pgm(path: &Path, n_rows: usize, n_cols: usize, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    pgm::write_pgm(&mut w, n_cols, n_rows, values)?;
    w.flush()?;
    Ok(())
}

/// Export `map_real.{csv,pgm}`, `map_pred_<kind>.{csv,pgm}` for one slot and
/// `curve_<kind>.csv` (real and predicted hourly risk) for `curve_cell`.
/// The slot must have a fully defined history of `seq_len` risk values.
pub fn export_risk_maps(
    model: &EvalModel,
    risk: &RiskCube,
    slot: usize,
    seq_len: usize,
    curve_cell: (usize, usize),
    out_dir: &Path,
) -> Result<()> {
    let (n_rows, n_cols) = (risk.grid.n_rows, risk.grid.n_cols);
    if slot < risk.defined_from() + seq_len || slot >= risk.n_slots {
        return Err(Error::data(format!(
            "slot {slot} has no fully defined history (needs {}..{})",
            risk.defined_from() + seq_len,
            risk.n_slots
        )));
    }
    if curve_cell.0 >= n_rows || curve_cell.1 >= n_cols {
        return Err(Error::config("curve cell outside the grid"));
    }
    let ctx = EvalContext::with_risk(risk);

    let mut real = Vec::with_capacity(n_rows * n_cols);
    let mut pred = Vec::with_capacity(n_rows * n_cols);
    for row in 0..n_rows {
        for col in 0..n_cols {
            let sample = sample_at(risk, seq_len, row, col, slot).expect("slot range checked");
            real.push(sample.target);
            let p = model
                .predict_sample(&sample, &ctx)?
                .ok_or_else(|| Error::data(format!("model `{}` cannot predict slot {slot}", model.kind())))?;
            pred.push(p);
        }
    }

    write_grid_csv(&out_dir.join("map_real.csv"), n_rows, n_cols, &real)?;
    write_grid_pgm(&out_dir.join("map_real.pgm"), n_rows, n_cols, &real)?;
    let kind = model.kind();
    write_grid_csv(&out_dir.join(format!("map_pred_{kind}.csv")), n_rows, n_cols, &pred)?;
    write_grid_pgm(&out_dir.join(format!("map_pred_{kind}.pgm")), n_rows, n_cols, &pred)?;

    let mut curve = BufWriter::new(File::create(out_dir.join(format!("curve_{kind}.csv")))?);
    writeln!(curve, "slot,real,predicted")?;
    let (row, col) = curve_cell;
    for t in risk.defined_from() + seq_len..risk.n_slots {
        let sample = sample_at(risk, seq_len, row, col, t).expect("range checked");
        if let Some(p) = model.predict_sample(&sample, &ctx)? {
            writeln!(curve, "{},{},{}", t, sample.target, p)?;
        }
    }
    curve.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::historical_average;
    use crate::ingest::{CountCube, GridSpec};
    use crate::risk::risk_cube;

    fn periodic_risk(n_rows: usize, n_cols: usize) -> RiskCube {
        let grid = GridSpec {
            origin_lon: 0.0,
            origin_lat: 0.0,
            cell_size_m: 1000.0,
            n_rows,
            n_cols,
            time_origin: 0,
            slot_seconds: 3600,
            meters_per_deg_lon: 100_000.0,
            meters_per_deg_lat: 100_000.0,
        };
        let mut cube = CountCube::zeros(grid, 24 * 6);
        for t in 0..24 * 6 {
            for r in 0..n_rows {
                for c in 0..n_cols {
                    cube.add(r, c, t, ((t % 24) + r + c) as u32 % 5);
                }
            }
        }
        risk_cube(&cube, 1).unwrap()
    }

    #[test]
    fn perfect_predictor_writes_identical_maps() {
        // on 24 h-periodic risk the historical average IS the real field
        let risk = periodic_risk(2, 3);
        let model = EvalModel::Havg(historical_average(&risk));
        let dir = tempfile::tempdir().unwrap();
        export_risk_maps(&model, &risk, 24 + 30, 4, (1, 2), dir.path()).unwrap();
        let real_csv = std::fs::read(dir.path().join("map_real.csv")).unwrap();
        let mut pred_csv = std::fs::read(dir.path().join("map_pred_havg.csv")).unwrap();
        // identical except the header column name
        let real_txt = String::from_utf8(real_csv.clone()).unwrap();
        let pred_txt = String::from_utf8(pred_csv.clone()).unwrap();
        assert_eq!(
            real_txt.lines().skip(1).collect::<Vec<_>>(),
            pred_txt.lines().skip(1).collect::<Vec<_>>()
        );
        let real_pgm = std::fs::read(dir.path().join("map_real.pgm")).unwrap();
        pred_csv = std::fs::read(dir.path().join("map_pred_havg.pgm")).unwrap();
        assert_eq!(real_pgm, pred_csv);
    }

    #[test]
    fn all_zero_risk_writes_zero_maps() {
        let grid = GridSpec {
            origin_lon: 0.0,
            origin_lat: 0.0,
            cell_size_m: 1000.0,
            n_rows: 2,
            n_cols: 2,
            time_origin: 0,
            slot_seconds: 3600,
            meters_per_deg_lon: 100_000.0,
            meters_per_deg_lat: 100_000.0,
        };
        let cube = CountCube::zeros(grid, 24 * 3);
        let risk = risk_cube(&cube, 1).unwrap();
        let model = EvalModel::Havg(historical_average(&risk));
        let dir = tempfile::tempdir().unwrap();
        export_risk_maps(&model, &risk, 24 + 26, 2, (0, 0), dir.path()).unwrap();
        let pgm = std::fs::read(dir.path().join("map_real.pgm")).unwrap();
        assert!(pgm.ends_with(&[0, 0, 0, 0]));
    }

    #[test]
    fn undefined_slot_is_fatal() {
        let risk = periodic_risk(1, 1);
        let model = EvalModel::Havg(historical_average(&risk));
        let dir = tempfile::tempdir().unwrap();
        assert!(export_risk_maps(&model, &risk, 5, 4, (0, 0), dir.path()).is_err());
        assert!(export_risk_maps(&model, &risk, 24 * 6, 4, (0, 0), dir.path()).is_err());
    }

    #[test]
    fn curve_contains_real_and_predicted() {
        let risk = periodic_risk(1, 2);
        let model = EvalModel::Havg(historical_average(&risk));
        let dir = tempfile::tempdir().unwrap();
        export_risk_maps(&model, &risk, 24 + 40, 6, (0, 1), dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("curve_havg.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("slot,real,predicted"));
        assert!(lines.clone().count() > 10);
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 3);
            cells[1].parse::<f64>().unwrap();
            cells[2].parse::<f64>().unwrap();
        }
    }
}
