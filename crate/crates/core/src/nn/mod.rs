//! From-scratch neural network: LSTM layers, dense head, dropout, ReLU,
//! MSE objective, RMSProp, backpropagation and the training loop.

mod init;
mod lstm;
mod model;
mod rmsprop;
pub mod tensor;
mod train;

pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmLayerParams, LstmStep, LSTM_TENSOR_NAMES};
pub use model::{predict, DropoutMode, ForwardCache, TarpmlHyper, TarpmlModel, TarpmlParams};
pub use rmsprop::{rmsprop_step, RmspropConfig, RmspropState};
pub use tensor::Tensor;
pub use train::{train, train_new, write_history_csv, EpochStats, StopReason, TrainConfig, TrainReport};

use crate::checkpoint::{self, Checkpoint};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

fn sizes_to_string(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn sizes_from_string(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::format(format!("bad size list entry `{p}`")))
        })
        .collect()
}

/// Persist a model (and optionally its optimizer state) as a checkpoint.
pub fn save_model(model: &TarpmlModel, opt: Option<&RmspropState>, path: &Path) -> Result<()> {
    let mut meta = BTreeMap::new();
    meta.insert("seq_len".into(), model.hyper.seq_len.to_string());
    meta.insert("window_days".into(), model.hyper.window_days.to_string());
    meta.insert("dropout_rate".into(), format!("{}", model.hyper.dropout_rate));
    meta.insert("lstm_sizes".into(), sizes_to_string(&model.hyper.lstm_sizes));
    meta.insert("dense_sizes".into(), sizes_to_string(&model.hyper.dense_sizes));

    let mut tensors: Vec<(String, Tensor)> = model
        .params
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.clone()))
        .collect();
    if let Some(state) = opt {
        let names: Vec<String> = model.params.named_tensors().into_iter().map(|(n, _)| n).collect();
        if names.len() != state.v.len() {
            return Err(Error::data("optimizer state does not match model shape"));
        }
        for (name, v) in names.into_iter().zip(&state.v) {
            tensors.push((format!("opt.v.{name}"), v.clone()));
        }
    }

    checkpoint::save(
        &Checkpoint {
            kind: "tarpml".into(),
            meta,
            tensors,
        },
        path,
    )
}

/// Load a model checkpoint saved by [`save_model`]. Returns the optimizer
/// state too when the file carries one.
pub fn load_model(path: &Path) -> Result<(TarpmlModel, Option<RmspropState>)> {
    let ckpt = checkpoint::load(path)?;
    if ckpt.kind != "tarpml" {
        return Err(Error::format(format!(
            "checkpoint kind `{}` is not a tarpml model",
            ckpt.kind
        )));
    }
    model_from_checkpoint(&ckpt)
}

/// Reconstruct a model from an already-parsed checkpoint.
pub fn model_from_checkpoint(ckpt: &Checkpoint) -> Result<(TarpmlModel, Option<RmspropState>)> {
    let meta_usize = |key: &str| -> Result<usize> {
        ckpt.meta
            .get(key)
            .ok_or_else(|| Error::format(format!("checkpoint missing `{key}`")))?
            .parse()
            .map_err(|_| Error::format(format!("bad `{key}` in checkpoint")))
    };
    let hyper = TarpmlHyper {
        seq_len: meta_usize("seq_len")?,
        window_days: meta_usize("window_days")?,
        dropout_rate: ckpt
            .meta
            .get("dropout_rate")
            .ok_or_else(|| Error::format("checkpoint missing `dropout_rate`"))?
            .parse()
            .map_err(|_| Error::format("bad `dropout_rate` in checkpoint"))?,
        lstm_sizes: sizes_from_string(
            ckpt.meta
                .get("lstm_sizes")
                .ok_or_else(|| Error::format("checkpoint missing `lstm_sizes`"))?,
        )?,
        dense_sizes: sizes_from_string(
            ckpt.meta
                .get("dense_sizes")
                .ok_or_else(|| Error::format("checkpoint missing `dense_sizes`"))?,
        )?,
    };
    let mut model = TarpmlModel::zeros(hyper)?;

    let by_name: BTreeMap<&str, &Tensor> = ckpt.tensors.iter().map(|(n, t)| (n.as_str(), t)).collect();
    let mut opt_tensors: Vec<Tensor> = Vec::new();
    let mut has_opt = false;
    {
        let expected = model.params.named_tensors();
        for (name, current) in &expected {
            let Some(stored) = by_name.get(name.as_str()) else {
                return Err(Error::format(format!("checkpoint missing tensor `{name}`")));
            };
            if stored.shape() != current.shape() {
                return Err(Error::format(format!(
                    "tensor `{name}` shape {:?} does not match expected {:?}",
                    stored.shape(),
                    current.shape()
                )));
            }
        }
        for (name, current) in &expected {
            let opt_name = format!("opt.v.{name}");
            if let Some(v) = by_name.get(opt_name.as_str()) {
                if v.shape() != current.shape() {
                    return Err(Error::format(format!("optimizer tensor `{opt_name}` shape mismatch")));
                }
                has_opt = true;
                opt_tensors.push((*v).clone());
            }
        }
        if has_opt && opt_tensors.len() != expected.len() {
            return Err(Error::format("checkpoint has a partial optimizer state"));
        }
    }

    let expected_names: Vec<String> = model.params.named_tensors().into_iter().map(|(n, _)| n).collect();
    for (name, stored) in expected_names.iter().zip(model.params.tensors_mut()) {
        let src = by_name.get(name.as_str()).expect("validated above");
        stored.data_mut().copy_from_slice(src.data());
    }

    if !model.params.all_finite() {
        return Err(Error::format("checkpoint contains non-finite parameters"));
    }
    let opt = if has_opt { Some(RmspropState { v: opt_tensors }) } else { None };
    Ok((model, opt))
}
