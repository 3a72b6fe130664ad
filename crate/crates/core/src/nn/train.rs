//! Mini-batch training loop: RMSProp on MSE with per-epoch validation,
//! best-epoch parameter retention and early stopping. Fully deterministic
//! given the seed — initialization, shuffling and dropout all draw from one
//! stream.

use super::model::{DropoutMode, TarpmlHyper, TarpmlModel, TarpmlParams};
use super::rmsprop::{rmsprop_step, RmspropConfig, RmspropState};
use crate::risk::{DataSplit, SampleStore};
use crate::rng::SeededRng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: RmspropConfig,
    pub seed: u64,
    /// Stop after this many epochs without validation improvement.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 128,
            optimizer: RmspropConfig::default(),
            seed: 0,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    CompletedAllEpochs,
    EarlyStopped { at_epoch: usize },
    /// Loss went non-finite; the model was rolled back to the best epoch.
    Diverged { at_epoch: usize },
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stop: StopReason,
}

/// Initialize a model and train it; everything derives from `cfg.seed`.
pub fn train_new(
    hyper: TarpmlHyper,
    store: &SampleStore,
    split: &DataSplit,
    cfg: &TrainConfig,
) -> Result<(TarpmlModel, TrainReport)> {
    let mut rng = SeededRng::new(cfg.seed);
    let mut model = TarpmlModel::new(hyper, &mut rng)?;
    let report = train(&mut model, store, split, cfg, &mut rng)?;
    Ok((model, report))
}

fn validation_mse(model: &TarpmlModel, store: &SampleStore, indices: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    for &i in indices {
        let s = &store.samples[i];
        let p = model.predict_one(&s.sequence, s.coord)?;
        let e = p - s.target;
        sum += e * e;
    }
    Ok(sum / indices.len() as f64)
}

/// Train an already-initialized model. `rng` drives shuffling and dropout;
/// pass the same stream that initialized the model to reproduce
/// [`train_new`].
pub fn train(
    model: &mut TarpmlModel,
    store: &SampleStore,
    split: &DataSplit,
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Result<TrainReport> {
    if split.train.is_empty() || split.validation.is_empty() {
        return Err(Error::data("training needs non-empty train and validation partitions"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::config("batch_size must be >= 1"));
    }
    if cfg.epochs == 0 {
        return Err(Error::config("epochs must be >= 1"));
    }
    cfg.optimizer.validate()?;
    if store.seq_len != model.hyper.seq_len {
        return Err(Error::data(format!(
            "store sequence length {} does not match the model's {}",
            store.seq_len, model.hyper.seq_len
        )));
    }

    let mut state = RmspropState::zeros_like(&model.params.tensors());
    let mut grads = TarpmlParams::zeros(&model.hyper);
    let mut order: Vec<usize> = split.train.clone();

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best_params = model.params.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut since_best = 0usize;
    let mut stop = StopReason::CompletedAllEpochs;

    'epochs: for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        let mut sq_err_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.zero_all();
            let inv = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &idx in batch {
                let s = &store.samples[idx];
                let (pred, cache) = match model.forward(&s.sequence, s.coord, DropoutMode::Train(rng)) {
                    Ok(out) => out,
                    Err(Error::Train(_)) => {
                        model.params = best_params;
                        return Ok(TrainReport {
                            history,
                            best_epoch,
                            best_val_mse: best_val,
                            stop: StopReason::Diverged { at_epoch: epoch },
                        });
                    }
                    Err(e) => return Err(e),
                };
                let err = pred - s.target;
                batch_loss += err * err;
                model.backward_into(&cache, 2.0 * err * inv, &mut grads);
            }
            sq_err_sum += batch_loss;
            if !batch_loss.is_finite() {
                model.params = best_params;
                return Ok(TrainReport {
                    history,
                    best_epoch,
                    best_val_mse: best_val,
                    stop: StopReason::Diverged { at_epoch: epoch },
                });
            }
            let grad_tensors = grads.tensors();
            let step = rmsprop_step(
                &cfg.optimizer,
                &mut state,
                &mut model.params.tensors_mut(),
                &grad_tensors,
            );
            if step.is_err() {
                model.params = best_params;
                return Ok(TrainReport {
                    history,
                    best_epoch,
                    best_val_mse: best_val,
                    stop: StopReason::Diverged { at_epoch: epoch },
                });
            }
        }
        let train_mse = sq_err_sum / order.len() as f64;
        let val_mse = match validation_mse(model, store, &split.validation) {
            Ok(v) => v,
            Err(Error::Train(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        history.push(EpochStats { epoch, train_mse, val_mse });

        if !val_mse.is_finite() {
            model.params = best_params;
            return Ok(TrainReport {
                history,
                best_epoch,
                best_val_mse: best_val,
                stop: StopReason::Diverged { at_epoch: epoch },
            });
        }

        if val_mse < best_val {
            best_val = val_mse;
            best_epoch = epoch;
            best_params = model.params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                stop = StopReason::EarlyStopped { at_epoch: epoch };
                break 'epochs;
            }
        }
    }

    model.params = best_params;
    Ok(TrainReport {
        history,
        best_epoch,
        best_val_mse: best_val,
        stop,
    })
}

/// Write the per-epoch history as `epoch,train_mse,val_mse` CSV.
pub fn write_history_csv<W: std::io::Write>(report: &TrainReport, w: &mut W) -> Result<()> {
    writeln!(w, "epoch,train_mse,val_mse")?;
    for e in &report.history {
        writeln!(w, "{},{},{}", e.epoch, e.train_mse, e.val_mse)?;
    }
    Ok(())
}
