//! The risk target and supervised sample assembly.
//!
//! Risk at (cell, slot t) is the average event count per hour at the same
//! hour of day over the preceding `window_days` days. Samples pair an
//! L-step sequence of consecutive hourly risk values with the normalized
//! cell-center coordinate and the next risk value as target. Splits are
//! strictly chronological.

use crate::binio;
use crate::ingest::{CountCube, GridSpec};
use crate::{Error, Result};
use byteorder::{ReadBytesExt, WriteBytesExt, LE};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

/// Windowed-average risk per (row, col, slot). Slots before `24 *
/// window_days` have no full history and are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskCube {
    pub grid: GridSpec,
    pub n_slots: usize,
    pub window_days: usize,
    values: Vec<f64>,
}

impl RiskCube {
    /// First slot with a defined risk value.
    pub fn defined_from(&self) -> usize {
        24 * self.window_days
    }

    #[inline]
    fn idx(&self, row: usize, col: usize, slot: usize) -> usize {
        (row * self.grid.n_cols + col) * self.n_slots + slot
    }

    /// Risk value, or None before the window has filled.
    #[inline]
    pub fn at(&self, row: usize, col: usize, slot: usize) -> Option<f64> {
        if slot >= self.defined_from() && slot < self.n_slots {
            Some(self.values[self.idx(row, col, slot)])
        } else {
            None
        }
    }

    /// Defined risk series for one cell, indexed from `defined_from()`.
    pub fn cell_series(&self, row: usize, col: usize) -> Vec<f64> {
        (self.defined_from()..self.n_slots)
            .map(|t| self.values[self.idx(row, col, t)])
            .collect()
    }

    /// Full per-slot field at one slot (None if undefined).
    pub fn slot_field(&self, slot: usize) -> Option<Vec<f64>> {
        if slot < self.defined_from() || slot >= self.n_slots {
            return None;
        }
        let mut out = Vec::with_capacity(self.grid.n_cells());
        for r in 0..self.grid.n_rows {
            for c in 0..self.grid.n_cols {
                out.push(self.values[self.idx(r, c, slot)]);
            }
        }
        Some(out)
    }
}

/// Risk per hour as the D-day same-hour average:
/// `risk[r,c,t] = (sum_{d=1..D} counts[r,c,t-24d]) / D` for `t >= 24 D`.
pub fn risk_cube(cube: &CountCube, window_days: usize) -> Result<RiskCube> {
    if window_days == 0 {
        return Err(Error::config("window_days must be >= 1"));
    }
    if cube.grid.slot_seconds != 3600 {
        return Err(Error::config("risk is defined over hourly slots"));
    }
    let lead = 24 * window_days;
    if cube.n_slots <= lead {
        return Err(Error::config(format!(
            "cube has {} slots, need more than {lead} for a {window_days}-day window",
            cube.n_slots
        )));
    }
    let grid = cube.grid.clone();
    let mut values = vec![0.0; grid.n_cells() * cube.n_slots];
    let inv_d = 1.0 / window_days as f64;
    for row in 0..grid.n_rows {
        for col in 0..grid.n_cols {
            for t in lead..cube.n_slots {
                let mut sum = 0u64;
                for d in 1..=window_days {
                    sum += cube.at(row, col, t - 24 * d) as u64;
                }
                values[(row * grid.n_cols + col) * cube.n_slots + t] = sum as f64 * inv_d;
            }
        }
    }
    Ok(RiskCube {
        grid,
        n_slots: cube.n_slots,
        window_days,
        values,
    })
}

/// One supervised example.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSample {
    /// L consecutive hourly risk values for slots t-L .. t-1.
    pub sequence: Vec<f64>,
    /// Normalized cell-center (lon, lat) in [0, 1]^2.
    pub coord: [f64; 2],
    /// Risk at slot t.
    pub target: f64,
    pub row: usize,
    pub col: usize,
    pub slot: usize,
}

/// All samples built from one risk cube, ordered by (slot, row, col).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStore {
    pub seq_len: usize,
    pub window_days: usize,
    pub time_origin: i64,
    pub slot_seconds: u32,
    pub samples: Vec<RiskSample>,
}

impl SampleStore {
    /// Wall-clock time of a sample's target slot.
    pub fn slot_time(&self, sample: &RiskSample) -> i64 {
        self.time_origin + sample.slot as i64 * self.slot_seconds as i64
    }

    pub fn feature_len(&self) -> usize {
        self.seq_len + 2
    }

    /// Flattened feature vector (sequence then coords) for baseline models.
    pub fn features(sample: &RiskSample) -> Vec<f64> {
        let mut f = Vec::with_capacity(sample.sequence.len() + 2);
        f.extend_from_slice(&sample.sequence);
        f.push(sample.coord[0]);
        f.push(sample.coord[1]);
        f
    }
}

/// Min-max position of a cell center along one axis: 0 at the first cell
/// center, 1 at the last; 0.5 for a single-cell axis.
fn center_norm(index: usize, count: usize) -> f64 {
    if count <= 1 {
        0.5
    } else {
        index as f64 / (count - 1) as f64
    }
}

/// One sample per (cell, t) where slots t-L .. t are all defined.
pub fn build_samples(risk: &RiskCube, seq_len: usize) -> Result<SampleStore> {
    if seq_len == 0 {
        return Err(Error::config("seq_len must be >= 1"));
    }
    let first_target = risk.defined_from() + seq_len;
    if first_target >= risk.n_slots {
        return Err(Error::config(format!(
            "no valid samples: need slots beyond {first_target}, have {}",
            risk.n_slots
        )));
    }
    let grid = &risk.grid;
    let mut samples = Vec::new();
    for t in first_target..risk.n_slots {
        for row in 0..grid.n_rows {
            for col in 0..grid.n_cols {
                let sequence: Vec<f64> = (t - seq_len..t)
                    .map(|s| risk.at(row, col, s).expect("slots checked defined"))
                    .collect();
                let target = risk.at(row, col, t).expect("target defined");
                samples.push(RiskSample {
                    sequence,
                    coord: [center_norm(col, grid.n_cols), center_norm(row, grid.n_rows)],
                    target,
                    row,
                    col,
                    slot: t,
                });
            }
        }
    }
    Ok(SampleStore {
        seq_len,
        window_days: risk.window_days,
        time_origin: grid.time_origin,
        slot_seconds: grid.slot_seconds,
        samples,
    })
}

/// Chronological train/validation/test partition. Index lists refer into the
/// store's sample vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub train_end: i64,
    pub test_end: i64,
    /// Slot time of the first validation slot.
    pub val_start: i64,
}

/// Samples before `train_end` form the pre-test pool; the last 20% of the
/// pool's distinct slots become validation, the rest training. Samples in
/// `[train_end, test_end)` are the test set.
pub fn chrono_split(store: &SampleStore, train_end: i64, test_end: i64) -> Result<DataSplit> {
    if train_end >= test_end {
        return Err(Error::config("train_end must be before test_end"));
    }
    let mut pool_slots: Vec<usize> = Vec::new();
    for s in &store.samples {
        let ts = store.slot_time(s);
        if ts < train_end {
            pool_slots.push(s.slot);
        }
    }
    pool_slots.sort_unstable();
    pool_slots.dedup();
    if pool_slots.is_empty() {
        return Err(Error::data("empty pre-test pool: no samples before train_end"));
    }
    let n_val = (pool_slots.len() as f64 * 0.2).floor() as usize;
    if n_val == 0 {
        return Err(Error::data(format!(
            "too few distinct pre-test slots ({}) for a 20% validation split",
            pool_slots.len()
        )));
    }
    let val_first_slot = pool_slots[pool_slots.len() - n_val];

    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (i, s) in store.samples.iter().enumerate() {
        let ts = store.slot_time(s);
        if ts < train_end {
            if s.slot >= val_first_slot {
                validation.push(i);
            } else {
                train.push(i);
            }
        } else if ts < test_end {
            test.push(i);
        }
    }
    if train.is_empty() {
        return Err(Error::data("empty train partition"));
    }
    if test.is_empty() {
        return Err(Error::data("empty test partition: no samples in [train_end, test_end)"));
    }
    let val_start = store.time_origin + val_first_slot as i64 * store.slot_seconds as i64;
    Ok(DataSplit {
        train,
        validation,
        test,
        train_end,
        test_end,
        val_start,
    })
}

const STORE_MAGIC: &[u8; 8] = b"GRIDSMPL";
const STORE_VERSION: u16 = 1;

/// Persist a sample store: header, then one fixed-width record per sample
/// (`L` sequence values, lon, lat, target, row, col, slot — all LE f64).
pub fn save_store(store: &SampleStore, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    binio::write_magic(&mut w, STORE_MAGIC, STORE_VERSION)?;
    w.write_u32::<LE>(store.seq_len as u32)?;
    w.write_u32::<LE>(store.window_days as u32)?;
    w.write_i64::<LE>(store.time_origin)?;
    w.write_u32::<LE>(store.slot_seconds)?;
    w.write_u64::<LE>(store.samples.len() as u64)?;
    for s in &store.samples {
        binio::write_f64s(&mut w, &s.sequence)?;
        binio::write_f64s(
            &mut w,
            &[
                s.coord[0],
                s.coord[1],
                s.target,
                s.row as f64,
                s.col as f64,
                s.slot as f64,
            ],
        )?;
    }
    use std::io::Write;
    w.flush()?;
    Ok(())
}

pub fn load_store(path: &Path) -> Result<SampleStore> {
    let mut r = BufReader::new(File::open(path)?);
    binio::expect_magic(&mut r, STORE_MAGIC, STORE_VERSION)?;
    let seq_len = r.read_u32::<LE>()? as usize;
    let window_days = r.read_u32::<LE>()? as usize;
    let time_origin = r.read_i64::<LE>()?;
    let slot_seconds = r.read_u32::<LE>()?;
    let count = r.read_u64::<LE>()? as usize;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let sequence = binio::read_f64s(&mut r, seq_len)?;
        let tail = binio::read_f64s(&mut r, 6)?;
        samples.push(RiskSample {
            sequence,
            coord: [tail[0], tail[1]],
            target: tail[2],
            row: tail[3] as usize,
            col: tail[4] as usize,
            slot: tail[5] as usize,
        });
    }
    binio::expect_eof(&mut r)?;
    Ok(SampleStore {
        seq_len,
        window_days,
        time_origin,
        slot_seconds,
        samples,
    })
}
