//! Raw event parsing and space-time discretization.
//!
//! Events are point records (timestamp, lon, lat). A [`GridSpec`] defines a
//! uniform grid of `cell_size_m` square cells under a local equirectangular
//! projection plus hourly (or custom-width) time slots; [`discretize`] bins
//! events into a [`CountCube`] of per-cell per-slot counts.

use crate::binio;
use crate::{Error, Result};
use byteorder::{ReadBytesExt, WriteBytesExt, LE};
use chrono::DateTime;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// One point event: when and where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccidentRecord {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub lon: f64,
    pub lat: f64,
}

/// Mean meters per degree of latitude on a 6371 km sphere.
const METERS_PER_DEG: f64 = 6_371_000.0 * std::f64::consts::PI / 180.0;

/// The space-time discretization: a uniform grid anchored at its southwest
/// corner plus a slot clock anchored at `time_origin`.
///
/// Degrees are mapped to meters with fixed per-grid scales (local
/// equirectangular approximation), so cell assignment is a pure function of
/// the spec with no external geodesy.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin_lon: f64,
    pub origin_lat: f64,
    pub cell_size_m: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Seconds since epoch of slot 0.
    pub time_origin: i64,
    pub slot_seconds: u32,
    pub meters_per_deg_lon: f64,
    pub meters_per_deg_lat: f64,
}

impl GridSpec {
    /// Grid with 1000 m cells, 1 h slots and degree scales taken at
    /// `origin_lat`.
    pub fn new(origin_lon: f64, origin_lat: f64, n_rows: usize, n_cols: usize, time_origin: i64) -> Self {
        GridSpec {
            origin_lon,
            origin_lat,
            cell_size_m: 1000.0,
            n_rows,
            n_cols,
            time_origin,
            slot_seconds: 3600,
            meters_per_deg_lon: METERS_PER_DEG * origin_lat.to_radians().cos(),
            meters_per_deg_lat: METERS_PER_DEG,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size_m > 0.0) {
            return Err(Error::config("cell_size_m must be > 0"));
        }
        if self.slot_seconds == 0 {
            return Err(Error::config("slot_seconds must be > 0"));
        }
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::config("grid must have at least 1 row and 1 column"));
        }
        if !(self.meters_per_deg_lon > 0.0) || !(self.meters_per_deg_lat > 0.0) {
            return Err(Error::config("meters-per-degree scales must be > 0"));
        }
        if !self.origin_lon.is_finite() || !self.origin_lat.is_finite() {
            return Err(Error::config("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// Cell index of a point, or None when it falls outside the grid.
    /// Cells are half-open intervals [low, high): a point exactly on an
    /// interior boundary belongs to the higher-index cell.
    pub fn locate(&self, lon: f64, lat: f64) -> Option<(usize, usize)> {
        let x = (lon - self.origin_lon) * self.meters_per_deg_lon / self.cell_size_m;
        let y = (lat - self.origin_lat) * self.meters_per_deg_lat / self.cell_size_m;
        if !x.is_finite() || !y.is_finite() || x < 0.0 || y < 0.0 {
            return None;
        }
        let col = x.floor() as usize;
        let row = y.floor() as usize;
        if row < self.n_rows && col < self.n_cols {
            Some((row, col))
        } else {
            None
        }
    }

    /// Slot index of a timestamp, or None for times before `time_origin`.
    pub fn slot_of(&self, timestamp: i64) -> Option<usize> {
        let dt = timestamp.checked_sub(self.time_origin)?;
        if dt < 0 {
            return None;
        }
        Some((dt / self.slot_seconds as i64) as usize)
    }

    /// Start time of a slot, seconds since epoch.
    pub fn slot_time(&self, slot: usize) -> i64 {
        self.time_origin + slot as i64 * self.slot_seconds as i64
    }

    pub fn cell_center_lon(&self, col: usize) -> f64 {
        self.origin_lon + (col as f64 + 0.5) * self.cell_size_m / self.meters_per_deg_lon
    }

    pub fn cell_center_lat(&self, row: usize) -> f64 {
        self.origin_lat + (row as f64 + 0.5) * self.cell_size_m / self.meters_per_deg_lat
    }
}

/// Event counts on the grid, shape (n_rows, n_cols, n_slots), slot-fastest
/// row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCube {
    pub grid: GridSpec,
    pub n_slots: usize,
    counts: Vec<u32>,
}

impl CountCube {
    pub fn zeros(grid: GridSpec, n_slots: usize) -> Self {
        let len = grid.n_cells() * n_slots;
        CountCube {
            grid,
            n_slots,
            counts: vec![0; len],
        }
    }

    #[inline]
    fn idx(&self, row: usize, col: usize, slot: usize) -> usize {
        (row * self.grid.n_cols + col) * self.n_slots + slot
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, slot: usize) -> u32 {
        self.counts[self.idx(row, col, slot)]
    }

    pub fn add(&mut self, row: usize, col: usize, slot: usize, n: u32) {
        let i = self.idx(row, col, slot);
        self.counts[i] += n;
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Per-cell total across all slots.
    pub fn cell_total(&self, row: usize, col: usize) -> u64 {
        (0..self.n_slots).map(|t| self.at(row, col, t) as u64).sum()
    }

    /// Total across all cells for one slot.
    pub fn slot_total(&self, slot: usize) -> u64 {
        let mut sum = 0u64;
        for row in 0..self.grid.n_rows {
            for col in 0..self.grid.n_cols {
                sum += self.at(row, col, slot) as u64;
            }
        }
        sum
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Result of [`parse_records`]: the records plus a malformed-line tally.
#[derive(Debug)]
pub struct ParseOutcome {
    pub records: Vec<AccidentRecord>,
    pub skipped: u64,
}

/// Parse a timestamp field: integer epoch seconds or ISO-8601.
pub fn parse_time(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(epoch) = field.parse::<i64>() {
        return Some(epoch);
    }
    DateTime::parse_from_rfc3339(field).ok().map(|dt| dt.timestamp())
}

fn parse_line(fields: &csv::StringRecord) -> Option<AccidentRecord> {
    if fields.len() != 3 {
        return None;
    }
    let timestamp = parse_time(fields.get(0)?)?;
    let lon: f64 = fields.get(1)?.trim().parse().ok()?;
    let lat: f64 = fields.get(2)?.trim().parse().ok()?;
    if !lon.is_finite() || !lat.is_finite() || !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
        return None;
    }
    Some(AccidentRecord { timestamp, lon, lat })
}

/// Parse `timestamp,lon,lat` CSV. Timestamps are ISO-8601
/// (`YYYY-MM-DDThh:mm:ssZ`) or integer epoch seconds.
///
/// Malformed lines are skipped and tallied; with `strict` the first
/// malformed line is fatal. A missing or wrong header is always fatal.
pub fn parse_records<R: Read>(source: R, strict: bool) -> Result<ParseOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    {
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        let got: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        if got != ["timestamp", "lon", "lat"] {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `timestamp,lon,lat`, got `{}`", got.join(",")),
            });
        }
    }

    let mut records = Vec::new();
    let mut skipped = 0u64;
    for item in reader.records() {
        match item {
            Ok(fields) => {
                let line = fields.position().map(|p| p.line()).unwrap_or(0);
                match parse_line(&fields) {
                    Some(rec) => records.push(rec),
                    None if strict => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("malformed record `{}`", fields.iter().collect::<Vec<_>>().join(",")),
                        })
                    }
                    None => skipped += 1,
                }
            }
            Err(e) if strict => {
                return Err(Error::Parse {
                    line: e.position().map(|p| p.line()).unwrap_or(0),
                    msg: e.to_string(),
                })
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(ParseOutcome { records, skipped })
}

/// Result of [`discretize`]: the cube plus the out-of-bounds tally.
#[derive(Debug)]
pub struct DiscretizeOutcome {
    pub cube: CountCube,
    pub dropped: u64,
}

/// Bin records into a count cube. Each in-bounds record increments exactly
/// one cell; out-of-bounds records (in space or time) are counted and
/// dropped, so `cube.total() + dropped == records.len()`.
///
/// With `n_slots = None` the slot count is derived from the latest in-bounds
/// record (spatially in-bounds, at or after `time_origin`).
pub fn discretize(records: &[AccidentRecord], grid: &GridSpec, n_slots: Option<usize>) -> Result<DiscretizeOutcome> {
    grid.validate()?;
    let n_slots = match n_slots {
        Some(n) => n,
        None => records
            .iter()
            .filter(|r| grid.locate(r.lon, r.lat).is_some())
            .filter_map(|r| grid.slot_of(r.timestamp))
            .max()
            .map(|m| m + 1)
            .unwrap_or(0),
    };

    let mut cube = CountCube::zeros(grid.clone(), n_slots);
    let mut dropped = 0u64;
    for rec in records {
        let cell = grid.locate(rec.lon, rec.lat);
        let slot = grid.slot_of(rec.timestamp).filter(|&t| t < n_slots);
        match (cell, slot) {
            (Some((row, col)), Some(t)) => cube.add(row, col, t, 1),
            _ => dropped += 1,
        }
    }
    Ok(DiscretizeOutcome { cube, dropped })
}

const CUBE_MAGIC: &[u8; 8] = b"GRIDCUBE";
const CUBE_VERSION: u16 = 1;

/// Write a cube: magic, version, grid parameters, then row-major
/// (slot-fastest) 32-bit little-endian counts.
pub fn save_cube(cube: &CountCube, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, CUBE_MAGIC, CUBE_VERSION)?;
    let g = &cube.grid;
    w.write_f64::<LE>(g.origin_lon)?;
    w.write_f64::<LE>(g.origin_lat)?;
    w.write_f64::<LE>(g.cell_size_m)?;
    w.write_f64::<LE>(g.meters_per_deg_lon)?;
    w.write_f64::<LE>(g.meters_per_deg_lat)?;
    w.write_u32::<LE>(g.n_rows as u32)?;
    w.write_u32::<LE>(g.n_cols as u32)?;
    w.write_i64::<LE>(g.time_origin)?;
    w.write_u32::<LE>(g.slot_seconds)?;
    w.write_u32::<LE>(cube.n_slots as u32)?;
    for &c in &cube.counts {
        w.write_u32::<LE>(c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_cube(path: &Path) -> Result<CountCube> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, CUBE_MAGIC, CUBE_VERSION)?;
    let origin_lon = r.read_f64::<LE>()?;
    let origin_lat = r.read_f64::<LE>()?;
    let cell_size_m = r.read_f64::<LE>()?;
    let meters_per_deg_lon = r.read_f64::<LE>()?;
    let meters_per_deg_lat = r.read_f64::<LE>()?;
    let n_rows = r.read_u32::<LE>()? as usize;
    let n_cols = r.read_u32::<LE>()? as usize;
    let time_origin = r.read_i64::<LE>()?;
    let slot_seconds = r.read_u32::<LE>()?;
    let n_slots = r.read_u32::<LE>()? as usize;

    let grid = GridSpec {
        origin_lon,
        origin_lat,
        cell_size_m,
        n_rows,
        n_cols,
        time_origin,
        slot_seconds,
        meters_per_deg_lon,
        meters_per_deg_lat,
    };
    grid.validate().map_err(|e| Error::format(format!("cube grid invalid: {e}")))?;

    let len = grid
        .n_cells()
        .checked_mul(n_slots)
        .ok_or_else(|| Error::format("cube dimensions overflow"))?;
    let mut counts = vec![0u32; len];
    for slot in counts.iter_mut() {
        *slot = r
            .read_u32::<LE>()
            .map_err(|_| Error::format("truncated cube: fewer counts than the header promises"))?;
    }
    binio::expect_eof(&mut r)?;
    Ok(CountCube { grid, n_slots, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_grid(n_rows: usize, n_cols: usize) -> GridSpec {
        GridSpec {
            origin_lon: 0.0,
            origin_lat: 0.0,
            cell_size_m: 1000.0,
            n_rows,
            n_cols,
            time_origin: 0,
            slot_seconds: 3600,
            meters_per_deg_lon: 100_000.0,
            meters_per_deg_lat: 100_000.0,
        }
    }

    #[test]
    fn parse_iso_and_epoch() {
        let csv = "timestamp,lon,lat\n2016-01-01T08:30:00Z,116.40,39.90\n1451637000,10.0,20.0\n";
        let out = parse_records(csv.as_bytes(), true).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.skipped, 0);
        assert_eq!(out.records[0].timestamp, 1_451_637_000);
        assert_eq!(out.records[0].lon, 116.40);
        assert_eq!(out.records[0].lat, 39.90);
        // the two fixture rows share a timestamp on purpose
        assert_eq!(out.records[1].timestamp, out.records[0].timestamp);
    }

    #[test]
    fn parse_header_only_is_empty() {
        let out = parse_records("timestamp,lon,lat\n".as_bytes(), true).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.skipped, 0);
    }

    #[test]
    fn parse_bad_lat_skipped_with_tally() {
        let csv = "timestamp,lon,lat\n100,1.0,abc\n200,1.0,2.0\n";
        let out = parse_records(csv.as_bytes(), false).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.skipped, 1);
    }

    #[test]
    fn parse_strict_mode_fails_on_bad_line() {
        let csv = "timestamp,lon,lat\n100,1.0,abc\n";
        let err = parse_records(csv.as_bytes(), true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn parse_rejects_wrong_header() {
        let err = parse_records("time,lat,lon\n1,2,3\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn parse_rejects_out_of_range_coords() {
        let csv = "timestamp,lon,lat\n100,181.0,0.0\n100,0.0,-91.0\n100,2.0,3.0\n";
        let out = parse_records(csv.as_bytes(), false).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.skipped, 2);
    }

    #[test]
    fn discretize_origin_record() {
        let grid = test_grid(3, 3);
        let recs = vec![AccidentRecord { timestamp: 0, lon: 0.0, lat: 0.0 }];
        let out = discretize(&recs, &grid, Some(2)).unwrap();
        assert_eq!(out.cube.at(0, 0, 0), 1);
        assert_eq!(out.cube.total(), 1);
        assert_eq!(out.dropped, 0);
    }

    #[test]
    fn discretize_no_records_zero_cube() {
        let grid = test_grid(2, 2);
        let out = discretize(&[], &grid, None).unwrap();
        assert_eq!(out.cube.n_slots, 0);
        assert_eq!(out.cube.total(), 0);
    }

    #[test]
    fn discretize_additivity() {
        let grid = test_grid(2, 2);
        let rec = AccidentRecord { timestamp: 3700, lon: 0.015, lat: 0.012 };
        let out = discretize(&[rec, rec, rec], &grid, None).unwrap();
        assert_eq!(out.cube.at(1, 1, 1), 3);
        assert_eq!(out.cube.total(), 3);
    }

    #[test]
    fn boundary_point_goes_to_higher_cell() {
        // cell_size 1562.5 m and 100000 m/deg put the row-0/row-1 boundary at
        // lat = 0.015625 (exactly representable), so the floor is exact.
        let grid = GridSpec {
            cell_size_m: 1562.5,
            ..test_grid(3, 3)
        };
        let rec = AccidentRecord { timestamp: 0, lon: 0.0, lat: 0.015625 };
        let out = discretize(&[rec], &grid, Some(1)).unwrap();
        assert_eq!(out.cube.at(1, 0, 0), 1);
        assert_eq!(out.cube.at(0, 0, 0), 0);

        // same for the time axis: a record exactly on a slot boundary
        let rec2 = AccidentRecord { timestamp: 3600, lon: 0.0, lat: 0.0 };
        let out2 = discretize(&[rec2], &grid, None).unwrap();
        assert_eq!(out2.cube.at(0, 0, 1), 1);
        assert_eq!(out2.cube.n_slots, 2);
    }

    #[test]
    fn out_of_bounds_dropped_and_conserved() {
        let grid = test_grid(2, 2);
        let recs = vec![
            AccidentRecord { timestamp: 0, lon: 0.0, lat: 0.0 },
            AccidentRecord { timestamp: 0, lon: -0.001, lat: 0.0 }, // west of grid
            AccidentRecord { timestamp: -1, lon: 0.0, lat: 0.0 },   // before time origin
            AccidentRecord { timestamp: 0, lon: 0.05, lat: 0.0 },   // east of grid
        ];
        let out = discretize(&recs, &grid, Some(1)).unwrap();
        assert_eq!(out.cube.total() + out.dropped, recs.len() as u64);
        assert_eq!(out.dropped, 3);
    }

    #[test]
    fn discretize_order_independent() {
        let grid = test_grid(3, 3);
        let mut recs = Vec::new();
        for i in 0..40 {
            recs.push(AccidentRecord {
                timestamp: (i * 977) % 7200,
                lon: 0.001 * (i % 25) as f64,
                lat: 0.0013 * (i % 19) as f64,
            });
        }
        let a = discretize(&recs, &grid, None).unwrap();
        recs.reverse();
        let b = discretize(&recs, &grid, None).unwrap();
        assert_eq!(a.cube, b.cube);
        assert_eq!(a.dropped, b.dropped);
    }

    #[test]
    fn cube_round_trip_exact() {
        let grid = test_grid(2, 3);
        let recs = vec![
            AccidentRecord { timestamp: 100, lon: 0.001, lat: 0.001 },
            AccidentRecord { timestamp: 4000, lon: 0.021, lat: 0.011 },
        ];
        let cube = discretize(&recs, &grid, None).unwrap().cube;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.cube");
        save_cube(&cube, &path).unwrap();
        let back = load_cube(&path).unwrap();
        assert_eq!(cube, back);
    }

    #[test]
    fn cube_zero_slots_round_trips() {
        let cube = CountCube::zeros(test_grid(2, 2), 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.cube");
        save_cube(&cube, &path).unwrap();
        assert_eq!(load_cube(&path).unwrap(), cube);
    }

    #[test]
    fn cube_wrong_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cube");
        std::fs::write(&path, b"NOTACUBE\x01\x00rest").unwrap();
        let err = load_cube(&path).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn cube_truncated_rejected() {
        let grid = test_grid(2, 2);
        let cube = CountCube::zeros(grid, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.cube");
        save_cube(&cube, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(load_cube(&path).is_err());
    }
}
