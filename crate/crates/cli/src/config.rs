//! Flat key=value run configuration. Every tunable of every pipeline stage
//! lives here; CLI flags override file values, and each run writes its
//! fully-resolved configuration next to its outputs.

use gridrisk::baselines::{ArmaConfig, LassoConfig, SvrConfig, TreeConfig};
use gridrisk::ingest::parse_time;
use gridrisk::nn::{RmspropConfig, TarpmlHyper, TrainConfig};
use gridrisk::synth::{Hotspot, SynthConfig};
use gridrisk::GridSpec;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct RunConfig {
    // grid
    pub origin_lon: f64,
    pub origin_lat: f64,
    pub cell_size_m: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub time_origin: i64,
    pub slot_seconds: u32,
    pub meters_per_deg_lon: Option<f64>,
    pub meters_per_deg_lat: Option<f64>,
    // synth
    pub synth_seed: u64,
    pub synth_n_days: usize,
    pub synth_base_rate: f64,
    pub synth_hotspots: Vec<Hotspot>,
    pub synth_hour_profile: HourProfile,
    pub synth_dow_profile: DowProfile,
    // risk / split
    pub window_days: usize,
    pub seq_len: usize,
    pub train_end: Option<i64>,
    pub test_end: Option<i64>,
    // model / training
    pub model_tiny: bool,
    pub lstm_sizes: Option<Vec<usize>>,
    pub dense_sizes: Option<Vec<usize>>,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub train_seed: u64,
    pub patience: usize,
    // baselines
    pub lasso_lambda: f64,
    pub lasso_max_iter: usize,
    pub lasso_tol: f64,
    pub svr_c: f64,
    pub svr_eps_tube: f64,
    pub svr_epochs: usize,
    pub svr_learning_rate: f64,
    pub dtr_max_depth: usize,
    pub dtr_min_samples_leaf: usize,
    pub arma_p: usize,
    pub arma_q: usize,
    // analyze
    pub max_k: usize,
    pub max_tau: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HourProfile {
    Flat,
    Rush,
    Custom([f64; 24]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DowProfile {
    Flat,
    Weekly,
    Custom([f64; 7]),
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            origin_lon: 116.0,
            origin_lat: 39.5,
            cell_size_m: 1000.0,
            n_rows: 6,
            n_cols: 6,
            time_origin: 1_451_606_400, // 2016-01-01T00:00:00Z
            slot_seconds: 3600,
            meters_per_deg_lon: None,
            meters_per_deg_lat: None,
            synth_seed: 1,
            synth_n_days: 90,
            synth_base_rate: 0.5,
            synth_hotspots: vec![Hotspot { row: 1, col: 1, amplitude: 2.0, decay: 1.5 }],
            synth_hour_profile: HourProfile::Rush,
            synth_dow_profile: DowProfile::Weekly,
            window_days: 3,
            seq_len: 24,
            train_end: None,
            test_end: None,
            model_tiny: true,
            lstm_sizes: None,
            dense_sizes: None,
            dropout_rate: 0.5,
            epochs: 10,
            batch_size: 128,
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-8,
            train_seed: 1,
            patience: 10,
            lasso_lambda: 0.01,
            lasso_max_iter: 1000,
            lasso_tol: 1e-6,
            svr_c: 1.0,
            svr_eps_tube: 0.01,
            svr_epochs: 300,
            svr_learning_rate: 0.1,
            dtr_max_depth: 12,
            dtr_min_samples_leaf: 5,
            arma_p: 24,
            arma_q: 1,
            max_k: 10,
            max_tau: 170,
        }
    }
}

fn parse_sizes(v: &str) -> Result<Vec<usize>, String> {
    v.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad size `{p}`")))
        .collect()
}

fn parse_hotspots(v: &str) -> Result<Vec<Hotspot>, String> {
    let v = v.trim();
    if v.is_empty() || v == "none" {
        return Ok(Vec::new());
    }
    v.split(';')
        .map(|spot| {
            let parts: Vec<&str> = spot.split(':').collect();
            if parts.len() != 4 {
                return Err(format!("hotspot `{spot}` must be row:col:amplitude:decay"));
            }
            Ok(Hotspot {
                row: parts[0].trim().parse().map_err(|_| format!("bad hotspot row in `{spot}`"))?,
                col: parts[1].trim().parse().map_err(|_| format!("bad hotspot col in `{spot}`"))?,
                amplitude: parts[2].trim().parse().map_err(|_| format!("bad amplitude in `{spot}`"))?,
                decay: parts[3].trim().parse().map_err(|_| format!("bad decay in `{spot}`"))?,
            })
        })
        .collect()
}

fn hotspots_to_string(spots: &[Hotspot]) -> String {
    if spots.is_empty() {
        return "none".into();
    }
    spots
        .iter()
        .map(|h| format!("{}:{}:{}:{}", h.row, h.col, h.amplitude, h.decay))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_profile_24(v: &str) -> Result<HourProfile, String> {
    match v.trim() {
        "flat" => Ok(HourProfile::Flat),
        "rush" => Ok(HourProfile::Rush),
        other => {
            let parts: Vec<f64> = other
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad profile value `{p}`")))
                .collect::<Result<_, _>>()?;
            let arr: [f64; 24] = parts
                .try_into()
                .map_err(|_| "hour profile needs exactly 24 values (or `flat`/`rush`)".to_string())?;
            Ok(HourProfile::Custom(arr))
        }
    }
}

fn parse_profile_7(v: &str) -> Result<DowProfile, String> {
    match v.trim() {
        "flat" => Ok(DowProfile::Flat),
        "weekly" => Ok(DowProfile::Weekly),
        other => {
            let parts: Vec<f64> = other
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad profile value `{p}`")))
                .collect::<Result<_, _>>()?;
            let arr: [f64; 7] = parts
                .try_into()
                .map_err(|_| "day-of-week profile needs exactly 7 values (or `flat`/`weekly`)".to_string())?;
            Ok(DowProfile::Custom(arr))
        }
    }
}

impl RunConfig {
    /// Apply one `key=value` assignment. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let bad = |what: &str| format!("bad value `{v}` for `{key}` ({what})");
        match key {
            "grid.origin_lon" => self.origin_lon = v.parse().map_err(|_| bad("float"))?,
            "grid.origin_lat" => self.origin_lat = v.parse().map_err(|_| bad("float"))?,
            "grid.cell_size_m" => self.cell_size_m = v.parse().map_err(|_| bad("float"))?,
            "grid.n_rows" => self.n_rows = v.parse().map_err(|_| bad("integer"))?,
            "grid.n_cols" => self.n_cols = v.parse().map_err(|_| bad("integer"))?,
            "grid.time_origin" => {
                self.time_origin = parse_time(v).ok_or_else(|| bad("epoch seconds or ISO-8601"))?
            }
            "grid.slot_seconds" => self.slot_seconds = v.parse().map_err(|_| bad("integer"))?,
            "grid.meters_per_deg_lon" => self.meters_per_deg_lon = Some(v.parse().map_err(|_| bad("float"))?),
            "grid.meters_per_deg_lat" => self.meters_per_deg_lat = Some(v.parse().map_err(|_| bad("float"))?),
            "synth.seed" => self.synth_seed = v.parse().map_err(|_| bad("integer"))?,
            "synth.n_days" => self.synth_n_days = v.parse().map_err(|_| bad("integer"))?,
            "synth.base_rate" => self.synth_base_rate = v.parse().map_err(|_| bad("float"))?,
            "synth.hotspots" => self.synth_hotspots = parse_hotspots(v)?,
            "synth.hour_profile" => self.synth_hour_profile = parse_profile_24(v)?,
            "synth.dow_profile" => self.synth_dow_profile = parse_profile_7(v)?,
            "risk.window_days" => self.window_days = v.parse().map_err(|_| bad("integer"))?,
            "risk.seq_len" => self.seq_len = v.parse().map_err(|_| bad("integer"))?,
            "split.train_end" => {
                self.train_end = Some(parse_time(v).ok_or_else(|| bad("epoch seconds or ISO-8601"))?)
            }
            "split.test_end" => {
                self.test_end = Some(parse_time(v).ok_or_else(|| bad("epoch seconds or ISO-8601"))?)
            }
            "model.tiny" => self.model_tiny = v.parse().map_err(|_| bad("true/false"))?,
            "model.lstm_sizes" => self.lstm_sizes = Some(parse_sizes(v)?),
            "model.dense_sizes" => self.dense_sizes = Some(parse_sizes(v)?),
            "model.dropout_rate" => self.dropout_rate = v.parse().map_err(|_| bad("float"))?,
            "train.epochs" => self.epochs = v.parse().map_err(|_| bad("integer"))?,
            "train.batch_size" => self.batch_size = v.parse().map_err(|_| bad("integer"))?,
            "train.learning_rate" => self.learning_rate = v.parse().map_err(|_| bad("float"))?,
            "train.rho" => self.rho = v.parse().map_err(|_| bad("float"))?,
            "train.epsilon" => self.epsilon = v.parse().map_err(|_| bad("float"))?,
            "train.seed" => self.train_seed = v.parse().map_err(|_| bad("integer"))?,
            "train.patience" => self.patience = v.parse().map_err(|_| bad("integer"))?,
            "lasso.lambda" => self.lasso_lambda = v.parse().map_err(|_| bad("float"))?,
            "lasso.max_iter" => self.lasso_max_iter = v.parse().map_err(|_| bad("integer"))?,
            "lasso.tol" => self.lasso_tol = v.parse().map_err(|_| bad("float"))?,
            "svr.c" => self.svr_c = v.parse().map_err(|_| bad("float"))?,
            "svr.eps_tube" => self.svr_eps_tube = v.parse().map_err(|_| bad("float"))?,
            "svr.epochs" => self.svr_epochs = v.parse().map_err(|_| bad("integer"))?,
            "svr.learning_rate" => self.svr_learning_rate = v.parse().map_err(|_| bad("float"))?,
            "dtr.max_depth" => self.dtr_max_depth = v.parse().map_err(|_| bad("integer"))?,
            "dtr.min_samples_leaf" => self.dtr_min_samples_leaf = v.parse().map_err(|_| bad("integer"))?,
            "arma.p" => self.arma_p = v.parse().map_err(|_| bad("integer"))?,
            "arma.q" => self.arma_q = v.parse().map_err(|_| bad("integer"))?,
            "analyze.max_k" => self.max_k = v.parse().map_err(|_| bad("integer"))?,
            "analyze.max_tau" => self.max_tau = v.parse().map_err(|_| bad("integer"))?,
            other => return Err(format!("unknown configuration key `{other}`")),
        }
        Ok(())
    }

    /// Parse a config file: `key = value` lines, `#` comments.
    pub fn apply_file(&mut self, text: &str, path: &Path) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            self.set(key.trim(), value)
                .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Validate cross-field constraints before any work starts.
    pub fn validate(&self) -> Result<(), String> {
        self.grid().validate().map_err(|e| e.to_string())?;
        if self.window_days == 0 {
            return Err("risk.window_days must be >= 1".into());
        }
        if self.seq_len == 0 {
            return Err("risk.seq_len must be >= 1".into());
        }
        if self.synth_n_days == 0 {
            return Err("synth.n_days must be >= 1".into());
        }
        let (train_end, test_end) = self.split_bounds();
        if train_end >= test_end {
            return Err("split.train_end must be before split.test_end".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err("model.dropout_rate must be in [0, 1)".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        let mut grid = GridSpec::new(self.origin_lon, self.origin_lat, self.n_rows, self.n_cols, self.time_origin);
        grid.cell_size_m = self.cell_size_m;
        grid.slot_seconds = self.slot_seconds;
        if let Some(m) = self.meters_per_deg_lon {
            grid.meters_per_deg_lon = m;
        }
        if let Some(m) = self.meters_per_deg_lat {
            grid.meters_per_deg_lat = m;
        }
        grid
    }

    pub fn synth(&self) -> SynthConfig {
        let (rush_hours, weekly_dow) = SynthConfig::rush_hour_profiles();
        let hour_profile = match &self.synth_hour_profile {
            HourProfile::Flat => [1.0; 24],
            HourProfile::Rush => rush_hours,
            HourProfile::Custom(p) => *p,
        };
        let dow_profile = match &self.synth_dow_profile {
            DowProfile::Flat => [1.0; 7],
            DowProfile::Weekly => weekly_dow,
            DowProfile::Custom(p) => *p,
        };
        SynthConfig {
            seed: self.synth_seed,
            n_days: self.synth_n_days,
            grid: self.grid(),
            hotspots: self.synth_hotspots.clone(),
            base_rate: self.synth_base_rate,
            hour_profile,
            dow_profile,
        }
    }

    /// Split boundaries; defaults put the last fifth of the synthetic span
    /// into the test range.
    pub fn split_bounds(&self) -> (i64, i64) {
        let day = 86_400i64;
        let train_end = self
            .train_end
            .unwrap_or(self.time_origin + (self.synth_n_days as i64 * 4 / 5) * day);
        let test_end = self
            .test_end
            .unwrap_or(self.time_origin + self.synth_n_days as i64 * day);
        (train_end, test_end)
    }

    pub fn hyper(&self) -> TarpmlHyper {
        let mut hyper = if self.model_tiny {
            TarpmlHyper::tiny(self.seq_len, self.window_days)
        } else {
            TarpmlHyper::standard(self.seq_len, self.window_days)
        };
        if let Some(sizes) = &self.lstm_sizes {
            hyper.lstm_sizes = sizes.clone();
        }
        if let Some(sizes) = &self.dense_sizes {
            hyper.dense_sizes = sizes.clone();
        }
        hyper.dropout_rate = self.dropout_rate;
        hyper
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: RmspropConfig {
                learning_rate: self.learning_rate,
                rho: self.rho,
                epsilon: self.epsilon,
            },
            seed: self.train_seed,
            patience: self.patience,
        }
    }

    pub fn lasso(&self) -> LassoConfig {
        LassoConfig {
            lambda: self.lasso_lambda,
            max_iter: self.lasso_max_iter,
            tol: self.lasso_tol,
        }
    }

    pub fn svr(&self) -> SvrConfig {
        SvrConfig {
            c: self.svr_c,
            eps_tube: self.svr_eps_tube,
            epochs: self.svr_epochs,
            learning_rate: self.svr_learning_rate,
        }
    }

    pub fn tree(&self) -> TreeConfig {
        TreeConfig {
            max_depth: self.dtr_max_depth,
            min_samples_leaf: self.dtr_min_samples_leaf,
        }
    }

    pub fn arma(&self) -> ArmaConfig {
        ArmaConfig {
            p: self.arma_p,
            q: self.arma_q,
        }
    }

    /// Fully-resolved key=value text, sorted, derived values included.
    pub fn resolved_text(&self) -> String {
        let grid = self.grid();
        let (train_end, test_end) = self.split_bounds();
        let hyper = self.hyper();
        let mut map: BTreeMap<&str, String> = BTreeMap::new();
        map.insert("grid.origin_lon", self.origin_lon.to_string());
        map.insert("grid.origin_lat", self.origin_lat.to_string());
        map.insert("grid.cell_size_m", self.cell_size_m.to_string());
        map.insert("grid.n_rows", self.n_rows.to_string());
        map.insert("grid.n_cols", self.n_cols.to_string());
        map.insert("grid.time_origin", self.time_origin.to_string());
        map.insert("grid.slot_seconds", self.slot_seconds.to_string());
        map.insert("grid.meters_per_deg_lon", grid.meters_per_deg_lon.to_string());
        map.insert("grid.meters_per_deg_lat", grid.meters_per_deg_lat.to_string());
        map.insert("synth.seed", self.synth_seed.to_string());
        map.insert("synth.n_days", self.synth_n_days.to_string());
        map.insert("synth.base_rate", self.synth_base_rate.to_string());
        map.insert("synth.hotspots", hotspots_to_string(&self.synth_hotspots));
        map.insert(
            "synth.hour_profile",
            match &self.synth_hour_profile {
                HourProfile::Flat => "flat".into(),
                HourProfile::Rush => "rush".into(),
                HourProfile::Custom(p) => p.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            },
        );
        map.insert(
            "synth.dow_profile",
            match &self.synth_dow_profile {
                DowProfile::Flat => "flat".into(),
                DowProfile::Weekly => "weekly".into(),
                DowProfile::Custom(p) => p.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            },
        );
        map.insert("risk.window_days", self.window_days.to_string());
        map.insert("risk.seq_len", self.seq_len.to_string());
        map.insert("split.train_end", train_end.to_string());
        map.insert("split.test_end", test_end.to_string());
        map.insert("model.tiny", self.model_tiny.to_string());
        map.insert(
            "model.lstm_sizes",
            hyper.lstm_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        );
        map.insert(
            "model.dense_sizes",
            hyper.dense_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        );
        map.insert("model.dropout_rate", self.dropout_rate.to_string());
        map.insert("train.epochs", self.epochs.to_string());
        map.insert("train.batch_size", self.batch_size.to_string());
        map.insert("train.learning_rate", self.learning_rate.to_string());
        map.insert("train.rho", self.rho.to_string());
        map.insert("train.epsilon", self.epsilon.to_string());
        map.insert("train.seed", self.train_seed.to_string());
        map.insert("train.patience", self.patience.to_string());
        map.insert("lasso.lambda", self.lasso_lambda.to_string());
        map.insert("lasso.max_iter", self.lasso_max_iter.to_string());
        map.insert("lasso.tol", self.lasso_tol.to_string());
        map.insert("svr.c", self.svr_c.to_string());
        map.insert("svr.eps_tube", self.svr_eps_tube.to_string());
        map.insert("svr.epochs", self.svr_epochs.to_string());
        map.insert("svr.learning_rate", self.svr_learning_rate.to_string());
        map.insert("dtr.max_depth", self.dtr_max_depth.to_string());
        map.insert("dtr.min_samples_leaf", self.dtr_min_samples_leaf.to_string());
        map.insert("arma.p", self.arma_p.to_string());
        map.insert("arma.q", self.arma_q.to_string());
        map.insert("analyze.max_k", self.max_k.to_string());
        map.insert("analyze.max_tau", self.max_tau.to_string());

        let mut out = String::new();
        for (k, v) in map {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
