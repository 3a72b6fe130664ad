//! Pattern statistics over a count cube: spatial correlation by Manhattan
//! distance, its temporal autocorrelation, time-of-day aggregates, and the
//! heatmap / contour exports.
//!
//! Undefined correlations (zero-variance fields, lags with no pairs) are
//! explicit `None`s end to end; they export as empty CSV cells and never
//! enter downstream averages as zeros.

use crate::ingest::CountCube;
use crate::pgm;
use crate::{Error, Result};
use chrono::{DateTime, NaiveDate, Timelike};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Spatial correlation C(k, t) for every Manhattan distance k <= max_k and
/// every slot t. `None` where the slot field is constant or the distance has
/// no in-bounds pairs.
#[derive(Debug, Clone)]
pub struct SpatialCorr {
    pub max_k: usize,
    pub n_slots: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    values: Vec<Option<f64>>,
}

impl SpatialCorr {
    #[inline]
    pub fn at(&self, k: usize, t: usize) -> Option<f64> {
        self.values[k * self.n_slots + t]
    }
}

/// Temporal autocorrelation f(k, tau) of the C(k, ·) series.
#[derive(Debug, Clone)]
pub struct SpatioTemporalCorr {
    pub max_k: usize,
    pub max_tau: usize,
    values: Vec<Option<f64>>,
}

impl SpatioTemporalCorr {
    #[inline]
    pub fn at(&self, k: usize, tau: usize) -> Option<f64> {
        self.values[k * (self.max_tau + 1) + tau]
    }

    /// Lag in [lo, hi] with the largest defined f(k, tau), if any.
    pub fn argmax_tau(&self, k: usize, lo: usize, hi: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for tau in lo..=hi.min(self.max_tau) {
            if let Some(v) = self.at(k, tau) {
                if best.map(|(_, bv)| v > bv).unwrap_or(true) {
                    best = Some((tau, v));
                }
            }
        }
        best.map(|(tau, _)| tau)
    }
}

/// All (di, dj) offsets with |di| + |dj| == k, in a fixed scan order.
fn ring_offsets(k: usize) -> Vec<(isize, isize)> {
    let k = k as isize;
    if k == 0 {
        return vec![(0, 0)];
    }
    let mut out = Vec::with_capacity(4 * k as usize);
    for di in -k..=k {
        let rem = k - di.abs();
        if rem == 0 {
            out.push((di, 0));
        } else {
            out.push((di, -rem));
            out.push((di, rem));
        }
    }
    out
}

/// Per-cell deviations from the slot mean, and the squared-deviation sum.
fn slot_deviations(cube: &CountCube, t: usize) -> (Vec<f64>, f64) {
    let (rows, cols) = (cube.grid.n_rows, cube.grid.n_cols);
    let n = (rows * cols) as f64;
    let mut field = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            field.push(cube.at(r, c, t) as f64);
        }
    }
    let mean = field.iter().sum::<f64>() / n;
    let mut denom = 0.0;
    for v in field.iter_mut() {
        *v -= mean;
        denom += *v * *v;
    }
    (field, denom)
}

fn corr_from_deviations(dev: &[f64], denom: f64, rows: usize, cols: usize, offsets: &[(isize, isize)]) -> Option<f64> {
    if denom == 0.0 {
        return None;
    }
    let mut numerator = 0.0;
    let mut any_pair = false;
    for r in 0..rows {
        for c in 0..cols {
            let mut sum = 0.0;
            let mut cnt = 0usize;
            for &(di, dj) in offsets {
                let rr = r as isize + di;
                let cc = c as isize + dj;
                if rr >= 0 && cc >= 0 && (rr as usize) < rows && (cc as usize) < cols {
                    sum += dev[rr as usize * cols + cc as usize];
                    cnt += 1;
                }
            }
            if cnt > 0 {
                any_pair = true;
                numerator += dev[r * cols + c] * (sum / cnt as f64);
            }
        }
    }
    if !any_pair {
        return None;
    }
    Some(numerator / denom)
}

/// Spatial correlation at Manhattan distance `k` for slot `t`.
///
/// For each cell the cross product with its distance-k partners is averaged
/// over the in-bounds partner ring, then summed over cells and normalized by
/// the squared-deviation sum. C(0, t) is exactly 1 whenever defined;
/// constant fields and distances without pairs yield `None`.
pub fn spatial_corr(cube: &CountCube, k: usize, t: usize) -> Option<f64> {
    let (dev, denom) = slot_deviations(cube, t);
    corr_from_deviations(&dev, denom, cube.grid.n_rows, cube.grid.n_cols, &ring_offsets(k))
}

/// C(k, t) for all k <= max_k and all slots.
pub fn spatial_corr_table(cube: &CountCube, max_k: usize) -> SpatialCorr {
    let (rows, cols) = (cube.grid.n_rows, cube.grid.n_cols);
    let offsets: Vec<_> = (0..=max_k).map(ring_offsets).collect();
    let mut values = vec![None; (max_k + 1) * cube.n_slots];
    for t in 0..cube.n_slots {
        let (dev, denom) = slot_deviations(cube, t);
        for (k, offs) in offsets.iter().enumerate() {
            values[k * cube.n_slots + t] = corr_from_deviations(&dev, denom, rows, cols, offs);
        }
    }
    SpatialCorr {
        max_k,
        n_slots: cube.n_slots,
        n_rows: rows,
        n_cols: cols,
        values,
    }
}

/// Autocorrelation of a partially-defined series at lags 0..=max_tau.
///
/// The mean and the normalizer use every defined point; the lag-tau sum runs
/// over t where both endpoints are defined. Series with fewer than two
/// defined points or zero variance are undefined at every lag.
fn series_acf(series: &[Option<f64>], max_tau: usize) -> Vec<Option<f64>> {
    let defined: Vec<f64> = series.iter().filter_map(|&v| v).collect();
    if defined.len() < 2 {
        return vec![None; max_tau + 1];
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    let denom: f64 = series
        .iter()
        .filter_map(|&v| v)
        .map(|v| (v - mean) * (v - mean))
        .sum();
    if denom == 0.0 {
        return vec![None; max_tau + 1];
    }
    let mut out = Vec::with_capacity(max_tau + 1);
    for tau in 0..=max_tau {
        let mut num = 0.0;
        let mut pairs = 0usize;
        for t in 0..series.len().saturating_sub(tau) {
            if let (Some(a), Some(b)) = (series[t], series[t + tau]) {
                num += (a - mean) * (b - mean);
                pairs += 1;
            }
        }
        out.push(if pairs > 0 { Some(num / denom) } else { None });
    }
    out
}

/// f(k, tau) for all k <= max_k, tau <= max_tau. Requires n_slots > max_tau.
pub fn spatio_temporal_corr(cube: &CountCube, max_k: usize, max_tau: usize) -> Result<SpatioTemporalCorr> {
    if cube.n_slots <= max_tau {
        return Err(Error::data(format!(
            "max_tau {} needs more than {} slots",
            max_tau, cube.n_slots
        )));
    }
    let table = spatial_corr_table(cube, max_k);
    let mut values = Vec::with_capacity((max_k + 1) * (max_tau + 1));
    for k in 0..=max_k {
        let series: Vec<Option<f64>> = (0..cube.n_slots).map(|t| table.at(k, t)).collect();
        values.extend(series_acf(&series, max_tau));
    }
    Ok(SpatioTemporalCorr { max_k, max_tau, values })
}

/// The seven within-day periods as (start_hour, end_hour_exclusive).
pub const PERIOD_BOUNDS: [(u32, u32); 7] = [
    (0, 7),
    (7, 9),
    (9, 12),
    (12, 14),
    (14, 17),
    (17, 20),
    (20, 24),
];

fn period_of_hour(hour: u32) -> usize {
    PERIOD_BOUNDS
        .iter()
        .position(|&(lo, hi)| hour >= lo && hour < hi)
        .expect("hour < 24")
}

/// Per-day, per-period event totals.
#[derive(Debug, Clone)]
pub struct PeriodProfile {
    /// (date, period index, total count), sorted by date then period.
    pub rows: Vec<(NaiveDate, usize, u64)>,
}

impl PeriodProfile {
    /// Mean daily count for one period across all days.
    pub fn period_mean(&self, period: usize) -> f64 {
        let entries: Vec<u64> = self
            .rows
            .iter()
            .filter(|&&(_, p, _)| p == period)
            .map(|&(_, _, c)| c)
            .collect();
        if entries.is_empty() {
            0.0
        } else {
            entries.iter().sum::<u64>() as f64 / entries.len() as f64
        }
    }
}

/// Aggregate counts per calendar day (UTC) and within-day period.
/// Requires hourly slots; periods are defined over hours of the day.
pub fn period_profile(cube: &CountCube) -> Result<PeriodProfile> {
    if cube.grid.slot_seconds != 3600 {
        return Err(Error::data(format!(
            "period profile needs hourly slots, cube has {} s slots",
            cube.grid.slot_seconds
        )));
    }
    let mut buckets: BTreeMap<(NaiveDate, usize), u64> = BTreeMap::new();
    for t in 0..cube.n_slots {
        let ts = cube.grid.slot_time(t);
        let dt = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| Error::data(format!("slot time {ts} out of range")))?;
        let key = (dt.date_naive(), period_of_hour(dt.hour()));
        *buckets.entry(key).or_insert(0) += cube.slot_total(t);
    }
    Ok(PeriodProfile {
        rows: buckets.into_iter().map(|((d, p), c)| (d, p, c)).collect(),
    })
}

/// Write per-cell totals as `row,col,count` CSV plus a linearly scaled 8-bit
/// PGM (maximum count maps to 255, rounding half up).
pub fn export_heatmap(cube: &CountCube, csv_path: &Path, pgm_path: &Path) -> Result<()> {
    let (rows, cols) = (cube.grid.n_rows, cube.grid.n_cols);
    let mut totals = Vec::with_capacity(rows * cols);
    let mut csv = BufWriter::new(File::create(csv_path)?);
    writeln!(csv, "row,col,count")?;
    for r in 0..rows {
        for c in 0..cols {
            let total = cube.cell_total(r, c);
            totals.push(total as f64);
            writeln!(csv, "{r},{c},{total}")?;
        }
    }
    csv.flush()?;

    let mut out = BufWriter::new(File::create(pgm_path)?);
    pgm::write_pgm(&mut out, cols, rows, &totals)?;
    out.flush()?;
    Ok(())
}

/// Write f(k, tau) as CSV: header row of k values, first column tau,
/// undefined entries as empty cells. Values use shortest-round-trip
/// formatting, so re-parsing reproduces them exactly.
pub fn export_contour<W: Write>(stc: &SpatioTemporalCorr, w: &mut W) -> Result<()> {
    write!(w, "tau")?;
    for k in 0..=stc.max_k {
        write!(w, ",{k}")?;
    }
    writeln!(w)?;
    for tau in 0..=stc.max_tau {
        write!(w, "{tau}")?;
        for k in 0..=stc.max_k {
            match stc.at(k, tau) {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Write `date,period_index,count` CSV.
pub fn export_period_profile<W: Write>(profile: &PeriodProfile, w: &mut W) -> Result<()> {
    writeln!(w, "date,period_index,count")?;
    for &(date, period, count) in &profile.rows {
        writeln!(w, "{},{},{}", date.format("%Y-%m-%d"), period, count)?;
    }
    Ok(())
}

/// Write per-slot totals as `slot,time,count` CSV (the hourly histogram).
pub fn export_hourly_counts<W: Write>(cube: &CountCube, w: &mut W) -> Result<()> {
    writeln!(w, "slot,time,count")?;
    for t in 0..cube.n_slots {
        let ts = cube.grid.slot_time(t);
        let dt = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| Error::data(format!("slot time {ts} out of range")))?;
        writeln!(w, "{},{},{}", t, dt.format("%Y-%m-%dT%H:%M:%SZ"), cube.slot_total(t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CountCube, GridSpec};
    use crate::rng::SeededRng;

    fn grid(n_rows: usize, n_cols: usize) -> GridSpec {
        GridSpec {
            origin_lon: 0.0,
            origin_lat: 0.0,
            cell_size_m: 1000.0,
            n_rows,
            n_cols,
            time_origin: 1_451_606_400, // 2016-01-01T00:00:00Z
            slot_seconds: 3600,
            meters_per_deg_lon: 100_000.0,
            meters_per_deg_lat: 100_000.0,
        }
    }

    fn cube_from_slot_fields(n_rows: usize, n_cols: usize, fields: &[Vec<u32>]) -> CountCube {
        let mut cube = CountCube::zeros(grid(n_rows, n_cols), fields.len());
        for (t, field) in fields.iter().enumerate() {
            assert_eq!(field.len(), n_rows * n_cols);
            for r in 0..n_rows {
                for c in 0..n_cols {
                    cube.add(r, c, t, field[r * n_cols + c]);
                }
            }
        }
        cube
    }

    /// Brute-force evaluation: enumerate every cell pair at distance k by
    /// scanning all cells, average per source cell, sum, normalize.
    pub(crate) fn spatial_corr_brute(cube: &CountCube, k: usize, t: usize) -> Option<f64> {
        let (rows, cols) = (cube.grid.n_rows, cube.grid.n_cols);
        let n = (rows * cols) as f64;
        let mut field = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                field.push(cube.at(r, c, t) as f64);
            }
        }
        let mean = field.iter().sum::<f64>() / n;
        let denom: f64 = field.iter().map(|v| (v - mean) * (v - mean)).sum();
        if denom == 0.0 {
            return None;
        }
        let mut numerator = 0.0;
        let mut any = false;
        for r in 0..rows {
            for c in 0..cols {
                let mut sum = 0.0;
                let mut cnt = 0;
                for rr in 0..rows {
                    for cc in 0..cols {
                        if r.abs_diff(rr) + c.abs_diff(cc) == k {
                            sum += (field[rr * cols + cc] - mean) * (field[r * cols + c] - mean);
                            cnt += 1;
                        }
                    }
                }
                if cnt > 0 {
                    any = true;
                    numerator += sum / cnt as f64;
                }
            }
        }
        if any {
            Some(numerator / denom)
        } else {
            None
        }
    }

    #[test]
    fn k0_is_exactly_one() {
        let cube = cube_from_slot_fields(2, 2, &[vec![3, 0, 1, 7]]);
        assert_eq!(spatial_corr(&cube, 0, 0), Some(1.0));
    }

    #[test]
    fn constant_field_undefined() {
        let cube = cube_from_slot_fields(2, 2, &[vec![5, 5, 5, 5]]);
        assert_eq!(spatial_corr(&cube, 1, 0), None);
        assert_eq!(spatial_corr(&cube, 0, 0), None);
    }

    #[test]
    fn checkerboard_2x2_k1_is_minus_one() {
        let cube = cube_from_slot_fields(2, 2, &[vec![1, 0, 0, 1]]);
        let c = spatial_corr(&cube, 1, 0).unwrap();
        assert!((c - (-1.0)).abs() < 1e-15, "C(1,0) = {c}");
        let brute = spatial_corr_brute(&cube, 1, 0).unwrap();
        assert!((c - brute).abs() < 1e-15);
    }

    #[test]
    fn k_beyond_grid_diameter_undefined() {
        let cube = cube_from_slot_fields(2, 2, &[vec![1, 0, 0, 1]]);
        assert_eq!(spatial_corr(&cube, 3, 0), None);
    }

    #[test]
    fn matches_brute_force_on_random_fields() {
        let mut rng = SeededRng::new(2024);
        for _ in 0..20 {
            let field: Vec<u32> = (0..36).map(|_| rng.below(10) as u32).collect();
            let cube = cube_from_slot_fields(6, 6, &[field]);
            for k in 0..=10 {
                let fast = spatial_corr(&cube, k, 0);
                let brute = spatial_corr_brute(&cube, k, 0);
                match (fast, brute) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12, "k={k}: {a} vs {b}"),
                    (a, b) => assert_eq!(a, b, "definedness mismatch at k={k}"),
                }
            }
        }
    }

    #[test]
    fn translation_and_scale_invariance() {
        let mut rng = SeededRng::new(7);
        let base: Vec<u32> = (0..36).map(|_| rng.below(6) as u32).collect();
        let shifted: Vec<u32> = base.iter().map(|&v| v + 11).collect();
        let scaled: Vec<u32> = base.iter().map(|&v| v * 3).collect();
        let c0 = cube_from_slot_fields(6, 6, &[base]);
        let c1 = cube_from_slot_fields(6, 6, &[shifted]);
        let c2 = cube_from_slot_fields(6, 6, &[scaled]);
        for k in 0..=6 {
            let a = spatial_corr(&c0, k, 0).unwrap();
            let b = spatial_corr(&c1, k, 0).unwrap();
            let c = spatial_corr(&c2, k, 0).unwrap();
            assert!((a - b).abs() < 1e-12, "shift changed C({k})");
            assert!((a - c).abs() < 1e-12, "scale changed C({k})");
        }
    }

    #[test]
    fn corr_bounded_by_one() {
        let mut rng = SeededRng::new(99);
        for _ in 0..10 {
            let field: Vec<u32> = (0..30).map(|_| rng.below(8) as u32).collect();
            let cube = cube_from_slot_fields(5, 6, &[field]);
            for k in 0..=9 {
                if let Some(c) = spatial_corr(&cube, k, 0) {
                    assert!(c.abs() <= 1.0 + 1e-9, "C({k}) = {c}");
                }
            }
        }
    }

    #[test]
    fn acf_lag0_is_one() {
        let series: Vec<Option<f64>> = (0..50).map(|t| Some((t as f64 * 0.3).sin())).collect();
        let acf = series_acf(&series, 10);
        assert_eq!(acf[0], Some(1.0));
    }

    #[test]
    fn acf_of_sinusoid_peaks_at_period() {
        let series: Vec<Option<f64>> = (0..24 * 60)
            .map(|t| Some((2.0 * std::f64::consts::PI * t as f64 / 24.0).sin()))
            .collect();
        let acf = series_acf(&series, 40);
        let (mut best_tau, mut best) = (0, f64::NEG_INFINITY);
        for tau in 12..=36 {
            let v = acf[tau].unwrap();
            if v > best {
                best = v;
                best_tau = tau;
            }
        }
        assert_eq!(best_tau, 24);

        // independent oracle: direct autocorrelation of the same sinusoid
        let raw: Vec<f64> = (0..24 * 60)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin())
            .collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let denom: f64 = raw.iter().map(|v| (v - mean) * (v - mean)).sum();
        let oracle_at = |tau: usize| -> f64 {
            (0..raw.len() - tau)
                .map(|t| (raw[t] - mean) * (raw[t + tau] - mean))
                .sum::<f64>()
                / denom
        };
        for tau in [0usize, 12, 24, 36] {
            assert!((acf[tau].unwrap() - oracle_at(tau)).abs() < 1e-12);
        }
    }

    #[test]
    fn acf_constant_series_undefined() {
        let series: Vec<Option<f64>> = vec![Some(2.5); 40];
        assert!(series_acf(&series, 5).iter().all(|v| v.is_none()));
    }

    #[test]
    fn acf_skips_undefined_points() {
        let mut series: Vec<Option<f64>> = (0..60).map(|t| Some((t as f64 * 0.7).sin())).collect();
        series[5] = None;
        series[30] = None;
        let acf = series_acf(&series, 8);
        assert_eq!(acf[0], Some(1.0));
        assert!(acf[1].is_some());
    }

    #[test]
    fn stc_lag0_one_for_defined_series() {
        let mut rng = SeededRng::new(31);
        let fields: Vec<Vec<u32>> = (0..80)
            .map(|_| (0..16).map(|_| rng.below(5) as u32).collect())
            .collect();
        let cube = cube_from_slot_fields(4, 4, &fields);
        let stc = spatio_temporal_corr(&cube, 3, 20).unwrap();
        for k in 0..=3 {
            if let Some(v) = stc.at(k, 0) {
                assert!((v - 1.0).abs() < 1e-12, "f({k},0) = {v}");
            }
        }
    }

    #[test]
    fn stc_requires_enough_slots() {
        let cube = cube_from_slot_fields(2, 2, &[vec![1, 0, 0, 1]]);
        assert!(spatio_temporal_corr(&cube, 1, 5).is_err());
    }

    #[test]
    fn period_profile_uniform_counts() {
        // 1 cell, 1 count per hour, 2 full days starting at midnight UTC
        let mut cube = CountCube::zeros(grid(1, 1), 48);
        for t in 0..48 {
            cube.add(0, 0, t, 1);
        }
        let profile = period_profile(&cube).unwrap();
        assert_eq!(profile.rows.len(), 14);
        for &(_, period, count) in &profile.rows {
            let (lo, hi) = PERIOD_BOUNDS[period];
            assert_eq!(count, (hi - lo) as u64);
        }
        assert_eq!(profile.rows[0].2, 7); // 00:00-06:59
        assert_eq!(profile.rows[1].2, 2); // 07:00-08:59
    }

    #[test]
    fn period_profile_empty_cube_is_zero() {
        let cube = CountCube::zeros(grid(1, 1), 24);
        let profile = period_profile(&cube).unwrap();
        assert_eq!(profile.rows.len(), 7);
        assert!(profile.rows.iter().all(|&(_, _, c)| c == 0));
    }

    #[test]
    fn period_profile_rejects_non_hourly() {
        let mut g = grid(1, 1);
        g.slot_seconds = 1800;
        let cube = CountCube::zeros(g, 4);
        assert!(period_profile(&cube).is_err());
    }

    #[test]
    fn period_bounds_partition_the_day() {
        let mut covered = [false; 24];
        for &(lo, hi) in &PERIOD_BOUNDS {
            for h in lo..hi {
                assert!(!covered[h as usize], "hour {h} covered twice");
                covered[h as usize] = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn heatmap_export_values() {
        let cube = cube_from_slot_fields(1, 2, &[vec![2, 4]]);
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("h.csv");
        let pgm_path = dir.path().join("h.pgm");
        export_heatmap(&cube, &csv_path, &pgm_path).unwrap();
        let csv = std::fs::read_to_string(&csv_path).unwrap();
        assert_eq!(csv, "row,col,count\n0,0,2\n0,1,4\n");
        let pgm = std::fs::read(&pgm_path).unwrap();
        assert_eq!(&pgm, b"P5\n2 1\n255\n\x80\xff"); // 128 and 255
    }

    #[test]
    fn heatmap_all_zero() {
        let cube = CountCube::zeros(grid(2, 2), 3);
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("z.csv");
        let pgm_path = dir.path().join("z.pgm");
        export_heatmap(&cube, &csv_path, &pgm_path).unwrap();
        let pgm = std::fs::read(&pgm_path).unwrap();
        assert!(pgm.ends_with(&[0, 0, 0, 0]));
    }

    #[test]
    fn contour_export_and_reparse() {
        let stc = SpatioTemporalCorr {
            max_k: 1,
            max_tau: 2,
            values: vec![
                Some(1.0),
                Some(-0.25),
                None,
                Some(1.0),
                Some(0.1234567890123456),
                Some(0.5),
            ],
        };
        let mut buf = Vec::new();
        export_contour(&stc, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,0,1"));
        // undefined entries are empty cells, not zeros
        assert_eq!(lines.clone().nth(2), Some("2,,0.5"));
        // re-parse and compare exactly (shortest round-trip formatting)
        for (tau, line) in text.lines().skip(1).enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            for k in 0..=1usize {
                let cell = cells[k + 1];
                match stc.at(k, tau) {
                    None => assert!(cell.is_empty()),
                    Some(v) => assert_eq!(cell.parse::<f64>().unwrap(), v),
                }
            }
        }
    }

    #[test]
    fn hourly_counts_export() {
        let mut cube = CountCube::zeros(grid(1, 1), 2);
        cube.add(0, 0, 1, 3);
        let mut buf = Vec::new();
        export_hourly_counts(&cube, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "slot,time,count\n0,2016-01-01T00:00:00Z,0\n1,2016-01-01T01:00:00Z,3\n"
        );
    }
}
