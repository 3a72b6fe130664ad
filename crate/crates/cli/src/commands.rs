//! Subcommand implementations over the library pipeline.

use crate::config::RunConfig;
use gridrisk::baselines::{design_matrix, fit_lasso, fit_svr_linear, fit_tree, historical_average, ArmaModel};
use gridrisk::eval::{
    compare_models, export_risk_maps, load_eval_model, save_eval_model, sweep_seq_len,
    write_comparison_csv, write_ordering_report, write_sweep_csv, EvalContext, EvalModel,
    SweepConfig,
};
use gridrisk::ingest::{discretize, load_cube, parse_records, save_cube, CountCube};
use gridrisk::nn::{train_new, write_history_csv, StopReason};
use gridrisk::patterns::{
    export_contour, export_heatmap, export_hourly_counts, export_period_profile, period_profile,
    spatio_temporal_corr,
};
use gridrisk::risk::{build_samples, chrono_split, risk_cube, save_store, RiskCube, SampleStore};
use gridrisk::synth::{generate, write_events_csv};
use gridrisk::{Error, Result};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn write_resolved_for_file(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mut path = out.as_os_str().to_owned();
    path.push(".resolved.cfg");
    fs::write(PathBuf::from(path), cfg.resolved_text())?;
    Ok(())
}

fn write_resolved_for_dir(cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::write(dir.join("resolved.cfg"), cfg.resolved_text())?;
    Ok(())
}

pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    let events = generate(&cfg.synth())?;
    ensure_parent(out)?;
    let mut w = BufWriter::new(File::create(out)?);
    write_events_csv(&mut w, &events)?;
    w.flush()?;
    write_resolved_for_file(cfg, out)?;
    println!("synth: wrote {} events to {}", events.len(), out.display());
    Ok(())
}

pub fn cmd_ingest(cfg: &RunConfig, input: &Path, out: &Path, strict: bool, n_slots: Option<usize>) -> Result<()> {
    let file = File::open(input)?;
    let parsed = parse_records(std::io::BufReader::new(file), strict)?;
    if parsed.skipped > 0 {
        eprintln!("warning: skipped {} malformed line(s)", parsed.skipped);
    }
    let grid = cfg.grid();
    let slots = n_slots.or(Some(cfg.synth_n_days * 24));
    let outcome = discretize(&parsed.records, &grid, slots)?;
    if outcome.cube.total() == 0 {
        eprintln!("warning: no in-bounds events; the cube is all zero");
    }
    ensure_parent(out)?;
    save_cube(&outcome.cube, out)?;
    write_resolved_for_file(cfg, out)?;
    println!(
        "ingest: total={} in_bounds={} dropped={} skipped_lines={} slots={} -> {}",
        parsed.records.len(),
        outcome.cube.total(),
        outcome.dropped,
        parsed.skipped,
        outcome.cube.n_slots,
        out.display()
    );
    Ok(())
}

pub fn cmd_analyze(cfg: &RunConfig, cube_path: &Path, out_dir: &Path, max_k: usize, max_tau: usize) -> Result<()> {
    let cube = load_cube(cube_path)?;
    fs::create_dir_all(out_dir)?;

    export_heatmap(&cube, &out_dir.join("heatmap.csv"), &out_dir.join("heatmap.pgm"))?;

    let stc = spatio_temporal_corr(&cube, max_k, max_tau)?;
    let mut contour = BufWriter::new(File::create(out_dir.join("contour.csv"))?);
    export_contour(&stc, &mut contour)?;
    contour.flush()?;

    let profile = period_profile(&cube)?;
    let mut profile_w = BufWriter::new(File::create(out_dir.join("period_profile.csv"))?);
    export_period_profile(&profile, &mut profile_w)?;
    profile_w.flush()?;

    let mut hourly = BufWriter::new(File::create(out_dir.join("hourly_counts.csv"))?);
    export_hourly_counts(&cube, &mut hourly)?;
    hourly.flush()?;

    write_resolved_for_dir(cfg, out_dir)?;
    println!(
        "analyze: wrote heatmap.csv heatmap.pgm contour.csv period_profile.csv hourly_counts.csv in {}",
        out_dir.display()
    );
    Ok(())
}

/// Pre-test pool (train plus validation) in chronological order, for
/// baselines that have no early stopping.
fn pool_indices(split: &gridrisk::DataSplit) -> Vec<usize> {
    let mut pool = split.train.clone();
    pool.extend_from_slice(&split.validation);
    pool
}

struct Prepared {
    risk: RiskCube,
    store: SampleStore,
    split: gridrisk::DataSplit,
}

fn prepare(cfg: &RunConfig, cube: &CountCube) -> Result<Prepared> {
    let risk = risk_cube(cube, cfg.window_days)?;
    let store = build_samples(&risk, cfg.seq_len)?;
    let (train_end, test_end) = cfg.split_bounds();
    let split = chrono_split(&store, train_end, test_end)?;
    Ok(Prepared { risk, store, split })
}

pub fn cmd_train(cfg: &RunConfig, cube_path: &Path, model_kind: &str, out_dir: &Path) -> Result<i32> {
    let cube = load_cube(cube_path)?;
    let prepared = prepare(cfg, &cube)?;
    let Prepared { risk, store, split } = &prepared;
    fs::create_dir_all(out_dir)?;
    println!(
        "train: {} samples (train {}, val {}, test {}), D={}, L={}",
        store.samples.len(),
        split.train.len(),
        split.validation.len(),
        split.test.len(),
        cfg.window_days,
        cfg.seq_len
    );

    let ckpt_path = out_dir.join(format!("{model_kind}.ckpt"));
    let mut exit = 0;
    match model_kind {
        "tarpml" => {
            let (model, report) = train_new(cfg.hyper(), store, split, &cfg.train_config())?;
            let mut history = BufWriter::new(File::create(out_dir.join("history.csv"))?);
            write_history_csv(&report, &mut history)?;
            history.flush()?;
            save_eval_model(&EvalModel::Tarpml(model), cfg.window_days, cfg.seq_len, &ckpt_path)?;
            match report.stop {
                StopReason::Diverged { at_epoch } => {
                    eprintln!("training diverged at epoch {at_epoch}; checkpoint holds the best earlier state");
                    exit = 3;
                }
                StopReason::EarlyStopped { at_epoch } => {
                    println!(
                        "train: early stop at epoch {at_epoch}, best val MSE {:.6e} (epoch {})",
                        report.best_val_mse, report.best_epoch
                    );
                }
                StopReason::CompletedAllEpochs => {
                    println!(
                        "train: completed {} epochs, best val MSE {:.6e} (epoch {})",
                        report.history.len(),
                        report.best_val_mse,
                        report.best_epoch
                    );
                }
            }
        }
        "lasso" => {
            let (xs, ys) = design_matrix(store, &pool_indices(split));
            let fit = fit_lasso(&xs, &ys, &cfg.lasso())?;
            if !fit.converged {
                eprintln!("warning: lasso hit max_iter before converging");
            }
            save_eval_model(&EvalModel::Lasso(fit.model), cfg.window_days, cfg.seq_len, &ckpt_path)?;
        }
        "svr" => {
            let (xs, ys) = design_matrix(store, &pool_indices(split));
            let model = fit_svr_linear(&xs, &ys, &cfg.svr())?;
            save_eval_model(&EvalModel::Svr(model), cfg.window_days, cfg.seq_len, &ckpt_path)?;
        }
        "dtr" => {
            let (xs, ys) = design_matrix(store, &pool_indices(split));
            let tree = fit_tree(&xs, &ys, &cfg.tree())?;
            save_eval_model(&EvalModel::Tree(tree), cfg.window_days, cfg.seq_len, &ckpt_path)?;
        }
        "arma" => {
            let fit_until = risk
                .grid
                .slot_of(split.train_end)
                .unwrap_or(risk.n_slots)
                .min(risk.n_slots);
            let model = ArmaModel::fit(risk, &cfg.arma(), fit_until)?;
            save_eval_model(&EvalModel::Arma(model), cfg.window_days, cfg.seq_len, &ckpt_path)?;
        }
        "havg" => {
            let model = historical_average(risk);
            save_eval_model(&EvalModel::Havg(model), cfg.window_days, cfg.seq_len, &ckpt_path)?;
        }
        other => {
            return Err(Error::Config(format!(
                "unknown model `{other}` (expected tarpml|lasso|svr|dtr|arma|havg)"
            )))
        }
    }
    save_store(store, &out_dir.join("samples.store"))?;
    write_resolved_for_dir(cfg, out_dir)?;
    println!("train: checkpoint {}", ckpt_path.display());
    Ok(exit)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_evaluate(
    cfg: &RunConfig,
    cube_path: &Path,
    checkpoints: &[PathBuf],
    out_dir: &Path,
    slot: Option<usize>,
    cell: Option<(usize, usize)>,
    skip_missing: bool,
) -> Result<()> {
    let cube = load_cube(cube_path)?;
    let prepared = prepare(cfg, &cube)?;
    let Prepared { risk, store, split } = &prepared;
    fs::create_dir_all(out_dir)?;

    let mut models: Vec<EvalModel> = Vec::new();
    for path in checkpoints {
        if !path.exists() {
            if skip_missing {
                eprintln!("warning: checkpoint {} missing, skipped", path.display());
                continue;
            }
            return Err(Error::Config(format!("checkpoint {} does not exist", path.display())));
        }
        let loaded = load_eval_model(path)?;
        if loaded.window_days != cfg.window_days {
            return Err(Error::Config(format!(
                "checkpoint {} was fitted with window_days={}, run config says {}",
                path.display(),
                loaded.window_days,
                cfg.window_days
            )));
        }
        let needs_seq = matches!(
            loaded.model,
            EvalModel::Tarpml(_) | EvalModel::Lasso(_) | EvalModel::Svr(_) | EvalModel::Tree(_)
        );
        if needs_seq && loaded.seq_len != cfg.seq_len {
            return Err(Error::Config(format!(
                "checkpoint {} was fitted with seq_len={}, run config says {}",
                path.display(),
                loaded.seq_len,
                cfg.seq_len
            )));
        }
        let mut model = loaded.model;
        if let EvalModel::Arma(arma) = &mut model {
            arma.attach_context(risk)?;
        }
        models.push(model);
    }
    if models.is_empty() {
        return Err(Error::Config("no checkpoints to evaluate".into()));
    }

    let refs: Vec<&EvalModel> = models.iter().collect();
    let ctx = EvalContext::with_risk(risk);
    let reports = compare_models(&refs, store, &split.test, &ctx)?;

    let mut table = BufWriter::new(File::create(out_dir.join("comparison.csv"))?);
    write_comparison_csv(&reports, &mut table)?;
    table.flush()?;

    let mut stdout_table = Vec::new();
    write_comparison_csv(&reports, &mut stdout_table)?;
    print!("{}", String::from_utf8_lossy(&stdout_table));

    if reports.iter().any(|r| r.model == "tarpml") {
        let mut report_w = BufWriter::new(File::create(out_dir.join("ordering_report.txt"))?);
        let ok = write_ordering_report(&reports, &mut report_w)?;
        report_w.flush()?;
        println!(
            "ordering: tarpml {} every baseline (see ordering_report.txt)",
            if ok { "beats" } else { "does NOT beat" }
        );
    }

    let slot = slot.unwrap_or(risk.n_slots - 1);
    let cell = cell.unwrap_or_else(|| busiest_cell(&cube));
    for model in &models {
        export_risk_maps(model, risk, slot, cfg.seq_len, cell, out_dir)?;
    }
    write_resolved_for_dir(cfg, out_dir)?;
    println!(
        "evaluate: wrote comparison.csv and risk maps for slot {slot}, curve cell ({}, {}) in {}",
        cell.0,
        cell.1,
        out_dir.display()
    );
    Ok(())
}

/// Cell with the highest total count (row-major first on ties).
fn busiest_cell(cube: &CountCube) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_total = 0u64;
    for r in 0..cube.grid.n_rows {
        for c in 0..cube.grid.n_cols {
            let total = cube.cell_total(r, c);
            if total > best_total {
                best_total = total;
                best = (r, c);
            }
        }
    }
    best
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    cube_path: &Path,
    out_dir: &Path,
    lengths: &[usize],
    windows: &[usize],
) -> Result<()> {
    let cube = load_cube(cube_path)?;
    fs::create_dir_all(out_dir)?;
    let (train_end, test_end) = cfg.split_bounds();
    let sweep_cfg = SweepConfig {
        lengths: lengths.to_vec(),
        windows: windows.to_vec(),
        train_end,
        test_end,
        hyper: cfg.hyper(),
        train: cfg.train_config(),
    };
    let cells = sweep_seq_len(&cube, &sweep_cfg)?;
    let mut w = BufWriter::new(File::create(out_dir.join("sweep.csv"))?);
    write_sweep_csv(&cells, &sweep_cfg, &mut w)?;
    w.flush()?;

    let mut stdout_csv = Vec::new();
    write_sweep_csv(&cells, &sweep_cfg, &mut stdout_csv)?;
    print!("{}", String::from_utf8_lossy(&stdout_csv));

    for cell in &cells {
        if let Some(err) = &cell.error {
            eprintln!(
                "warning: sweep cell (D={}, L={}) failed: {err}",
                cell.window_days, cell.seq_len
            );
        }
    }
    write_resolved_for_dir(cfg, out_dir)?;
    println!("sweep: wrote sweep.csv in {}", out_dir.display());
    Ok(())
}
