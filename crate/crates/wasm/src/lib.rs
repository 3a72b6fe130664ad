//! Browser bindings for the demo page: simulate a city grid, inspect its
//! correlation structure, and train a small model live.

use gridrisk::baselines::historical_average;
use gridrisk::eval::{compare_models, EvalContext, EvalModel};
use gridrisk::ingest::discretize;
use gridrisk::nn::{train_new, TarpmlHyper, TrainConfig};
use gridrisk::patterns::spatio_temporal_corr;
use gridrisk::risk::{build_samples, chrono_split, risk_cube};
use gridrisk::synth::{generate, Hotspot, SynthConfig};
use gridrisk::{CountCube, GridSpec};
use wasm_bindgen::prelude::*;

fn demo_grid(rows: u32, cols: u32) -> GridSpec {
    GridSpec::new(116.0, 39.5, rows as usize, cols as usize, 1_451_606_400)
}

fn demo_config(
    seed: u32,
    days: u32,
    rows: u32,
    cols: u32,
    base_rate: f64,
    hotspot_amp: f64,
    hotspot_decay: f64,
) -> SynthConfig {
    let grid = demo_grid(rows, cols);
    let (hour_profile, dow_profile) = SynthConfig::rush_hour_profiles();
    let mut cfg = SynthConfig {
        seed: seed as u64,
        n_days: days as usize,
        grid,
        hotspots: Vec::new(),
        base_rate,
        hour_profile,
        dow_profile,
    };
    if hotspot_amp > 0.0 {
        cfg.hotspots.push(Hotspot {
            row: (rows as usize) / 2,
            col: (cols as usize) / 2,
            amplitude: hotspot_amp,
            decay: hotspot_decay.max(0.1),
        });
    }
    cfg
}

fn simulate_cube(cfg: &SynthConfig) -> Result<CountCube, JsValue> {
    let events = generate(cfg).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let n_slots = cfg.n_days * 24;
    let outcome =
        discretize(&events, &cfg.grid, Some(n_slots)).map_err(|e| JsValue::from_str(&e.to_string()))?;
    Ok(outcome.cube)
}

/// Per-cell event totals for the heatmap canvas.
#[wasm_bindgen]
pub struct HeatmapResult {
    rows: u32,
    cols: u32,
    totals: Vec<f64>,
    event_count: u32,
}

#[wasm_bindgen]
impl HeatmapResult {
    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> u32 {
        self.rows
    }

    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> u32 {
        self.cols
    }

    #[wasm_bindgen(getter)]
    pub fn totals(&self) -> Vec<f64> {
        self.totals.clone()
    }

    #[wasm_bindgen(getter, js_name = eventCount)]
    pub fn event_count(&self) -> u32 {
        self.event_count
    }
}

/// Simulate events and return the per-cell totals.
#[wasm_bindgen(js_name = simulateHeatmap)]
pub fn simulate_heatmap(
    seed: u32,
    days: u32,
    rows: u32,
    cols: u32,
    base_rate: f64,
    hotspot_amp: f64,
    hotspot_decay: f64,
) -> Result<HeatmapResult, JsValue> {
    if days == 0 || rows == 0 || cols == 0 {
        return Err(JsValue::from_str("days, rows and cols must be positive"));
    }
    let cfg = demo_config(seed, days, rows, cols, base_rate, hotspot_amp, hotspot_decay);
    let cube = simulate_cube(&cfg)?;
    let mut totals = Vec::with_capacity((rows * cols) as usize);
    let mut events = 0u64;
    for r in 0..rows as usize {
        for c in 0..cols as usize {
            let t = cube.cell_total(r, c);
            events += t;
            totals.push(t as f64);
        }
    }
    Ok(HeatmapResult {
        rows,
        cols,
        totals,
        event_count: events as u32,
    })
}

/// The f(k, tau) surface; NaN marks undefined entries.
#[wasm_bindgen]
pub struct ContourResult {
    max_k: u32,
    max_tau: u32,
    values: Vec<f64>,
    peak_taus: Vec<i32>,
}

#[wasm_bindgen]
impl ContourResult {
    #[wasm_bindgen(getter, js_name = maxK)]
    pub fn max_k(&self) -> u32 {
        self.max_k
    }

    #[wasm_bindgen(getter, js_name = maxTau)]
    pub fn max_tau(&self) -> u32 {
        self.max_tau
    }

    /// Row-major (k, tau) values.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Best lag in [12, 36] per k, -1 where undefined.
    #[wasm_bindgen(getter, js_name = peakTaus)]
    pub fn peak_taus(&self) -> Vec<i32> {
        self.peak_taus.clone()
    }
}

/// Simulate and compute the spatio-temporal correlation surface.
#[wasm_bindgen(js_name = correlationContour)]
pub fn correlation_contour(
    seed: u32,
    days: u32,
    rows: u32,
    cols: u32,
    base_rate: f64,
    hotspot_amp: f64,
    hotspot_decay: f64,
    max_k: u32,
    max_tau: u32,
) -> Result<ContourResult, JsValue> {
    let cfg = demo_config(seed, days, rows, cols, base_rate, hotspot_amp, hotspot_decay);
    let cube = simulate_cube(&cfg)?;
    let stc = spatio_temporal_corr(&cube, max_k as usize, max_tau as usize)
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    let mut values = Vec::with_capacity(((max_k + 1) * (max_tau + 1)) as usize);
    let mut peak_taus = Vec::with_capacity((max_k + 1) as usize);
    for k in 0..=max_k as usize {
        for tau in 0..=max_tau as usize {
            values.push(stc.at(k, tau).unwrap_or(f64::NAN));
        }
        peak_taus.push(stc.argmax_tau(k, 12, 36).map(|t| t as i32).unwrap_or(-1));
    }
    Ok(ContourResult {
        max_k,
        max_tau,
        values,
        peak_taus,
    })
}

/// Real and predicted risk for one cell plus test RMSEs.
#[wasm_bindgen]
pub struct TrainResult {
    slots: Vec<u32>,
    real: Vec<f64>,
    predicted: Vec<f64>,
    rmse_model: f64,
    rmse_havg: f64,
    epochs_run: u32,
}

#[wasm_bindgen]
impl TrainResult {
    #[wasm_bindgen(getter)]
    pub fn slots(&self) -> Vec<u32> {
        self.slots.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn real(&self) -> Vec<f64> {
        self.real.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn predicted(&self) -> Vec<f64> {
        self.predicted.clone()
    }

    #[wasm_bindgen(getter, js_name = rmseModel)]
    pub fn rmse_model(&self) -> f64 {
        self.rmse_model
    }

    #[wasm_bindgen(getter, js_name = rmseHavg)]
    pub fn rmse_havg(&self) -> f64 {
        self.rmse_havg
    }

    #[wasm_bindgen(getter, js_name = epochsRun)]
    pub fn epochs_run(&self) -> u32 {
        self.epochs_run
    }
}

/// Simulate, train a small sequence model, and return the predicted-vs-real
/// curve for the hotspot cell over the test range.
#[wasm_bindgen(js_name = trainAndPredict)]
#[allow(clippy::too_many_arguments)]
pub fn train_and_predict(
    seed: u32,
    days: u32,
    rows: u32,
    cols: u32,
    base_rate: f64,
    hotspot_amp: f64,
    hotspot_decay: f64,
    window_days: u32,
    seq_len: u32,
    epochs: u32,
) -> Result<TrainResult, JsValue> {
    let err = |e: gridrisk::Error| JsValue::from_str(&e.to_string());
    if days < 8 {
        return Err(JsValue::from_str("need at least 8 days to train"));
    }
    let cfg = demo_config(seed, days, rows, cols, base_rate, hotspot_amp, hotspot_decay);
    let cube = simulate_cube(&cfg)?;
    let risk = risk_cube(&cube, window_days as usize).map_err(err)?;
    let store = build_samples(&risk, seq_len as usize).map_err(err)?;
    let origin = cfg.grid.time_origin;
    let train_end = origin + (days as i64 * 4 / 5) * 86_400;
    let test_end = origin + days as i64 * 86_400;
    let split = chrono_split(&store, train_end, test_end).map_err(err)?;

    let hyper = TarpmlHyper {
        seq_len: seq_len as usize,
        lstm_sizes: vec![8, 16],
        dense_sizes: vec![16],
        dropout_rate: 0.2,
        window_days: window_days as usize,
    };
    let train_cfg = TrainConfig {
        epochs: epochs.clamp(1, 60) as usize,
        batch_size: 64,
        seed: seed as u64,
        patience: epochs as usize,
        ..TrainConfig::default()
    };
    let (model, report) = train_new(hyper, &store, &split, &train_cfg).map_err(err)?;

    let nn_model = EvalModel::Tarpml(model);
    let havg_model = EvalModel::Havg(historical_average(&risk));
    let ctx = EvalContext::with_risk(&risk);
    let reports =
        compare_models(&[&nn_model, &havg_model], &store, &split.test, &ctx).map_err(err)?;

    let (row, col) = (rows as usize / 2, cols as usize / 2);
    let mut slots = Vec::new();
    let mut real = Vec::new();
    let mut predicted = Vec::new();
    for &i in &split.test {
        let s = &store.samples[i];
        if s.row == row && s.col == col {
            if let Some(p) = nn_model.predict_sample(s, &ctx).map_err(err)? {
                slots.push(s.slot as u32);
                real.push(s.target);
                predicted.push(p);
            }
        }
    }
    Ok(TrainResult {
        slots,
        real,
        predicted,
        rmse_model: reports[0].rmse,
        rmse_havg: reports[1].rmse,
        epochs_run: report.history.len() as u32,
    })
}
