//! Pipeline command line: simulate events, discretize them onto the grid,
//! analyze correlation structure, train predictors and evaluate them.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 runtime or
//! training failure.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use gridrisk::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gridrisk", version, about = "Spatio-temporal event risk pipeline")]
struct Cli {
    /// Key=value configuration file (flat keys, `#` comments).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key (repeatable), e.g. --set risk.seq_len=50
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic events as ingest-format CSV.
    Synth {
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Simulation seed (overrides synth.seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse an event CSV and discretize it into a cube file.
    Ingest {
        /// Input events CSV.
        #[arg(long)]
        input: PathBuf,
        /// Output .cube path.
        #[arg(long)]
        out: PathBuf,
        /// Fail on the first malformed line instead of skipping.
        #[arg(long)]
        strict: bool,
        /// Slot count (default: synth.n_days * 24).
        #[arg(long)]
        n_slots: Option<usize>,
    },
    /// Export heatmap, correlation contour and temporal profiles.
    Analyze {
        /// Input .cube path.
        #[arg(long)]
        cube: PathBuf,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Largest Manhattan distance (overrides analyze.max_k).
        #[arg(long)]
        max_k: Option<usize>,
        /// Largest time lag in slots (overrides analyze.max_tau).
        #[arg(long)]
        max_tau: Option<usize>,
    },
    /// Build risk samples and train one model.
    Train {
        /// Input .cube path.
        #[arg(long)]
        cube: PathBuf,
        /// Model kind.
        #[arg(long, value_parser = ["tarpml", "lasso", "svr", "dtr", "arma", "havg"])]
        model: String,
        /// Output directory for checkpoint, history and samples.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Averaging window D in days (overrides risk.window_days).
        #[arg(long)]
        window_days: Option<usize>,
        /// Input sequence length L (overrides risk.seq_len).
        #[arg(long)]
        seq_len: Option<usize>,
        /// Training-range end, ISO-8601 or epoch (overrides split.train_end).
        #[arg(long)]
        train_end: Option<String>,
        /// Test-range end, ISO-8601 or epoch (overrides split.test_end).
        #[arg(long)]
        test_end: Option<String>,
        /// Training epochs (overrides train.epochs).
        #[arg(long)]
        epochs: Option<usize>,
        /// Training seed (overrides train.seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare trained checkpoints on the shared test range and export maps.
    Evaluate {
        /// Input .cube path.
        #[arg(long)]
        cube: PathBuf,
        /// Checkpoint files to evaluate.
        #[arg(long, value_name = "CKPT", num_args = 1.., required = true)]
        checkpoints: Vec<PathBuf>,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Slot for the risk maps (default: last slot).
        #[arg(long)]
        slot: Option<usize>,
        /// Cell for the risk curve as row,col (default: busiest cell).
        #[arg(long)]
        cell: Option<String>,
        /// Skip missing checkpoints with a warning instead of failing.
        #[arg(long)]
        skip_missing: bool,
    },
    /// Train one model per (window, length) pair and emit the RMSE table.
    Sweep {
        /// Input .cube path.
        #[arg(long)]
        cube: PathBuf,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Sequence lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10,20,50,100")]
        lengths: Vec<usize>,
        /// Averaging windows in days, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,3,7,30")]
        windows: Vec<usize>,
        /// Use the desk-scale architecture regardless of model.tiny.
        #[arg(long)]
        tiny: bool,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        cfg.apply_file(&text, path)?;
    }
    for assignment in &cli.sets {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| format!("--set needs KEY=VALUE, got `{assignment}`"))?;
        cfg.set(key.trim(), value)?;
    }
    Ok(cfg)
}

fn parse_cell(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or_else(|| format!("--cell needs row,col, got `{s}`"))?;
    Ok((
        r.trim().parse().map_err(|_| format!("bad cell row `{r}`"))?,
        c.trim().parse().map_err(|_| format!("bad cell col `{c}`"))?,
    ))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Format(_) | Error::Data(_) => 2,
        Error::Io(_) | Error::Train(_) => 3,
    }
}

fn run() -> Result<u8, (String, u8)> {
    let cli = Cli::parse();
    let mut cfg = build_config(&cli).map_err(|e| (e, 2u8))?;

    // fold subcommand flags into the config before validation
    match &cli.command {
        Command::Synth { seed, .. } => {
            if let Some(seed) = seed {
                cfg.synth_seed = *seed;
            }
        }
        Command::Train {
            window_days,
            seq_len,
            train_end,
            test_end,
            epochs,
            seed,
            ..
        } => {
            if let Some(d) = window_days {
                cfg.window_days = *d;
            }
            if let Some(l) = seq_len {
                cfg.seq_len = *l;
            }
            if let Some(t) = train_end {
                cfg.set("split.train_end", t).map_err(|e| (e, 2u8))?;
            }
            if let Some(t) = test_end {
                cfg.set("split.test_end", t).map_err(|e| (e, 2u8))?;
            }
            if let Some(e) = epochs {
                cfg.epochs = *e;
            }
            if let Some(s) = seed {
                cfg.train_seed = *s;
            }
        }
        Command::Sweep { tiny, .. } => {
            if *tiny {
                cfg.model_tiny = true;
                cfg.lstm_sizes = None;
                cfg.dense_sizes = None;
            }
        }
        _ => {}
    }
    cfg.validate().map_err(|e| (e, 2u8))?;

    let result = match &cli.command {
        Command::Synth { out, .. } => commands::cmd_synth(&cfg, out).map(|_| 0u8),
        Command::Ingest { input, out, strict, n_slots } => {
            commands::cmd_ingest(&cfg, input, out, *strict, *n_slots).map(|_| 0u8)
        }
        Command::Analyze { cube, out_dir, max_k, max_tau } => commands::cmd_analyze(
            &cfg,
            cube,
            out_dir,
            max_k.unwrap_or(cfg.max_k),
            max_tau.unwrap_or(cfg.max_tau),
        )
        .map(|_| 0u8),
        Command::Train { cube, model, out_dir, .. } => {
            commands::cmd_train(&cfg, cube, model, out_dir).map(|code| code as u8)
        }
        Command::Evaluate {
            cube,
            checkpoints,
            out_dir,
            slot,
            cell,
            skip_missing,
        } => {
            let cell = match cell {
                Some(s) => Some(parse_cell(s).map_err(|e| (e, 2u8))?),
                None => None,
            };
            commands::cmd_evaluate(&cfg, cube, checkpoints, out_dir, *slot, cell, *skip_missing).map(|_| 0u8)
        }
        Command::Sweep { cube, out_dir, lengths, windows, .. } => {
            commands::cmd_sweep(&cfg, cube, out_dir, lengths, windows).map(|_| 0u8)
        }
    };
    result.map_err(|e| (e.to_string(), exit_code_for(&e)))
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
