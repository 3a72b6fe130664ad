//! Synthetic event generation.
//!
//! Events are drawn from an inhomogeneous Poisson process whose per-cell
//! per-hour intensity combines a base rate, exponential hotspot kernels in
//! Manhattan distance, an hour-of-day profile and a day-of-week profile.
//! The generated streams qualitatively reproduce rush-hour peaks, weekly
//! periodicity and localized spatial hotspots.

use crate::ingest::{AccidentRecord, GridSpec};
use crate::rng::SeededRng;
use crate::{Error, Result};
use chrono::{DateTime, Datelike, Timelike, Utc};

/// One spatial hotspot: intensity `amplitude * exp(-d_manhattan / decay)`
/// around (row, col), distance measured in cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hotspot {
    pub row: usize,
    pub col: usize,
    pub amplitude: f64,
    /// Spatial decay length in cells, > 0.
    pub decay: f64,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_days: usize,
    pub grid: GridSpec,
    pub hotspots: Vec<Hotspot>,
    /// Events per cell per hour before profiles, >= 0.
    pub base_rate: f64,
    /// 24 non-negative multipliers, indexed by UTC hour of day.
    pub hour_profile: [f64; 24],
    /// 7 non-negative multipliers, indexed from Monday = 0.
    pub dow_profile: [f64; 7],
}

impl SynthConfig {
    /// Flat profiles, no hotspots.
    pub fn uniform(seed: u64, n_days: usize, grid: GridSpec, base_rate: f64) -> Self {
        SynthConfig {
            seed,
            n_days,
            grid,
            hotspots: Vec::new(),
            base_rate,
            hour_profile: [1.0; 24],
            dow_profile: [1.0; 7],
        }
    }

    /// An hour profile with morning and evening rush peaks, and a weekly
    /// profile with slightly quieter weekends.
    pub fn rush_hour_profiles() -> ([f64; 24], [f64; 7]) {
        let mut hours = [0.4; 24];
        for (h, m) in hours.iter_mut().enumerate() {
            *m = match h {
                0..=5 => 0.3,
                6 => 0.7,
                7 | 8 => 2.0,
                9..=11 => 1.0,
                12 | 13 => 1.2,
                14..=16 => 1.0,
                17..=19 => 2.2,
                20 | 21 => 0.9,
                _ => 0.5,
            };
        }
        let dow = [1.0, 1.0, 1.0, 1.0, 1.1, 0.8, 0.7];
        (hours, dow)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.grid.slot_seconds != 3600 {
            return Err(Error::config("synthesis assumes 1-hour slots"));
        }
        if !(self.base_rate >= 0.0) {
            return Err(Error::config("base_rate must be >= 0"));
        }
        for h in &self.hotspots {
            if !(h.amplitude >= 0.0) {
                return Err(Error::config("hotspot amplitude must be >= 0"));
            }
            if !(h.decay > 0.0) {
                return Err(Error::config("hotspot decay must be > 0"));
            }
        }
        if self.hour_profile.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::config("hour_profile entries must be >= 0"));
        }
        if self.dow_profile.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::config("dow_profile entries must be >= 0"));
        }
        Ok(())
    }

    /// Spatial intensity factor for one cell, before time profiles.
    pub fn cell_rate(&self, row: usize, col: usize) -> f64 {
        let mut rate = self.base_rate;
        for h in &self.hotspots {
            let d = row.abs_diff(h.row) + col.abs_diff(h.col);
            rate += h.amplitude * (-(d as f64) / h.decay).exp();
        }
        rate
    }

    /// Full intensity for a cell at an absolute slot index.
    pub fn intensity(&self, row: usize, col: usize, slot: usize) -> f64 {
        let t = self.grid.slot_time(slot);
        let dt: DateTime<Utc> = DateTime::from_timestamp(t, 0).expect("slot time in range");
        let hour = dt.hour() as usize;
        let dow = dt.weekday().num_days_from_monday() as usize;
        self.cell_rate(row, col) * self.hour_profile[hour] * self.dow_profile[dow]
    }
}

/// Hard cap on per-cell-hour intensity; beyond this the configuration is
/// considered broken rather than expensive.
const MAX_INTENSITY: f64 = 1e6;

/// Draw events for `n_days * 24` hourly slots. Event counts per (cell, hour)
/// are Poisson; timestamps are uniform within the hour and coordinates
/// uniform within the cell. Deterministic given the seed: iteration order is
/// slot-major, then row-major over cells.
pub fn generate(config: &SynthConfig) -> Result<Vec<AccidentRecord>> {
    config.validate()?;
    let grid = &config.grid;
    let n_slots = config.n_days * 24;
    let mut rng = SeededRng::new(config.seed);
    let mut events = Vec::new();

    let lon_per_cell = grid.cell_size_m / grid.meters_per_deg_lon;
    let lat_per_cell = grid.cell_size_m / grid.meters_per_deg_lat;

    for slot in 0..n_slots {
        let slot_start = grid.slot_time(slot);
        for row in 0..grid.n_rows {
            for col in 0..grid.n_cols {
                let lambda = config.intensity(row, col, slot);
                if lambda > MAX_INTENSITY {
                    return Err(Error::config(format!(
                        "intensity {lambda:.3e} at cell ({row},{col}) exceeds {MAX_INTENSITY:.0e}"
                    )));
                }
                let n = rng.poisson(lambda);
                for _ in 0..n {
                    let timestamp = slot_start + rng.below(grid.slot_seconds as u64) as i64;
                    let lon = grid.origin_lon + (col as f64 + rng.unit_f64()) * lon_per_cell;
                    let lat = grid.origin_lat + (row as f64 + rng.unit_f64()) * lat_per_cell;
                    events.push(AccidentRecord { timestamp, lon, lat });
                }
            }
        }
    }
    Ok(events)
}

/// Write events as the ingest CSV format (`timestamp,lon,lat`, ISO-8601).
pub fn write_events_csv<W: std::io::Write>(w: &mut W, events: &[AccidentRecord]) -> Result<()> {
    writeln!(w, "timestamp,lon,lat")?;
    for e in events {
        let dt = DateTime::from_timestamp(e.timestamp, 0)
            .ok_or_else(|| Error::data(format!("timestamp {} out of range", e.timestamp)))?;
        writeln!(w, "{},{},{}", dt.format("%Y-%m-%dT%H:%M:%SZ"), e.lon, e.lat)?;
    }
    Ok(())
}
