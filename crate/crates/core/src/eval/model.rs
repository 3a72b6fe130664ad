//! One predictor type over every model kind, plus checkpoint I/O for the
//! baselines (the network has its own in [`crate::nn`]).

use crate::baselines::{
    tree_from_tensor, tree_to_tensor, ArmaCellModel, ArmaModel, HavgModel, LinearKind,
    LinearModel, RegressionTree, TreeConfig,
};
use crate::checkpoint::{self, Checkpoint};
use crate::nn::{self, TarpmlModel, Tensor};
use crate::risk::{RiskCube, RiskSample, SampleStore};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

/// Context some predictors need beyond the sample itself.
#[derive(Clone, Copy)]
pub struct EvalContext<'a> {
    /// Risk cube for slot-indexed predictors (ARMA, historical average).
    pub risk: Option<&'a RiskCube>,
}

impl<'a> EvalContext<'a> {
    pub fn none() -> Self {
        EvalContext { risk: None }
    }

    pub fn with_risk(risk: &'a RiskCube) -> Self {
        EvalContext { risk: Some(risk) }
    }
}

pub enum EvalModel {
    Tarpml(TarpmlModel),
    Lasso(LinearModel),
    Svr(LinearModel),
    Tree(RegressionTree),
    Arma(ArmaModel),
    Havg(HavgModel),
}

impl EvalModel {
    pub fn kind(&self) -> &'static str {
        match self {
            EvalModel::Tarpml(_) => "tarpml",
            EvalModel::Lasso(_) => "lasso",
            EvalModel::Svr(_) => "svr",
            EvalModel::Tree(_) => "dtr",
            EvalModel::Arma(_) => "arma",
            EvalModel::Havg(_) => "havg",
        }
    }

    /// Predict one sample; None means this predictor cannot cover it (e.g.
    /// not enough history) and the sample is skipped for this model.
    pub fn predict_sample(&self, sample: &RiskSample, ctx: &EvalContext) -> Result<Option<f64>> {
        match self {
            EvalModel::Tarpml(m) => m.predict_one(&sample.sequence, sample.coord).map(Some),
            EvalModel::Lasso(m) | EvalModel::Svr(m) => {
                let features = SampleStore::features(sample);
                if features.len() != m.weights.len() {
                    return Err(Error::data(format!(
                        "sample has {} features, linear model expects {}",
                        features.len(),
                        m.weights.len()
                    )));
                }
                Ok(Some(m.predict(&features)))
            }
            EvalModel::Tree(t) => {
                let features = SampleStore::features(sample);
                if features.len() != t.n_features {
                    return Err(Error::data(format!(
                        "sample has {} features, tree expects {}",
                        features.len(),
                        t.n_features
                    )));
                }
                Ok(Some(t.predict(&features)))
            }
            EvalModel::Arma(m) => Ok(m.predict_slot(sample.row, sample.col, sample.slot)),
            EvalModel::Havg(m) => {
                let risk = ctx
                    .risk
                    .ok_or_else(|| Error::data("historical average needs a risk cube context"))?;
                Ok(m.predict_slot(risk, sample.row, sample.col, sample.slot))
            }
        }
    }
}

fn meta_common(window_days: usize, seq_len: usize) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("window_days".into(), window_days.to_string());
    meta.insert("seq_len".into(), seq_len.to_string());
    meta
}

/// Save any model to its checkpoint file. `seq_len` records the sample
/// sequence length the model was fitted against (0 where not applicable).
pub fn save_eval_model(model: &EvalModel, window_days: usize, seq_len: usize, path: &Path) -> Result<()> {
    match model {
        EvalModel::Tarpml(m) => nn::save_model(m, None, path),
        EvalModel::Lasso(m) | EvalModel::Svr(m) => {
            let kind = if matches!(model, EvalModel::Lasso(_)) { "lasso" } else { "svr" };
            let ckpt = Checkpoint {
                kind: kind.into(),
                meta: meta_common(window_days, seq_len),
                tensors: vec![
                    ("weights".into(), Tensor::from_vec(&[m.weights.len()], m.weights.clone())),
                    ("bias".into(), Tensor::from_vec(&[1], vec![m.bias])),
                ],
            };
            checkpoint::save(&ckpt, path)
        }
        EvalModel::Tree(t) => {
            let mut meta = meta_common(window_days, seq_len);
            meta.insert("max_depth".into(), t.max_depth.to_string());
            meta.insert("min_samples_leaf".into(), t.min_samples_leaf.to_string());
            meta.insert("n_features".into(), t.n_features.to_string());
            let ckpt = Checkpoint {
                kind: "dtr".into(),
                meta,
                tensors: vec![("nodes".into(), tree_to_tensor(t))],
            };
            checkpoint::save(&ckpt, path)
        }
        EvalModel::Arma(m) => {
            let cells = m.cells.len();
            let mut phi = Vec::with_capacity(cells * m.p);
            let mut theta = Vec::with_capacity(cells * m.q);
            let mut mean = Vec::with_capacity(cells);
            let mut ridge = Vec::with_capacity(cells);
            for cell in &m.cells {
                phi.extend_from_slice(&cell.phi);
                theta.extend_from_slice(&cell.theta);
                mean.push(cell.mean);
                ridge.push(if cell.ridge_used { 1.0 } else { 0.0 });
            }
            let mut meta = meta_common(m.window_days, seq_len);
            meta.insert("p".into(), m.p.to_string());
            meta.insert("q".into(), m.q.to_string());
            meta.insert("n_rows".into(), m.n_rows.to_string());
            meta.insert("n_cols".into(), m.n_cols.to_string());
            let ckpt = Checkpoint {
                kind: "arma".into(),
                meta,
                tensors: vec![
                    ("phi".into(), Tensor::from_vec(&[cells, m.p], phi)),
                    ("theta".into(), Tensor::from_vec(&[cells, m.q], theta)),
                    ("mean".into(), Tensor::from_vec(&[cells], mean)),
                    ("ridge".into(), Tensor::from_vec(&[cells], ridge)),
                ],
            };
            checkpoint::save(&ckpt, path)
        }
        EvalModel::Havg(m) => {
            let ckpt = Checkpoint {
                kind: "havg".into(),
                meta: meta_common(m.window_days, seq_len),
                tensors: Vec::new(),
            };
            checkpoint::save(&ckpt, path)
        }
    }
}

/// A model loaded from a checkpoint plus its recorded data context.
pub struct LoadedModel {
    pub model: EvalModel,
    pub window_days: usize,
    pub seq_len: usize,
}

/// Load any checkpoint kind. ARMA models come back without their series
/// context; call [`ArmaModel::attach_context`] with the re-derived risk cube
/// before predicting.
pub fn load_eval_model(path: &Path) -> Result<LoadedModel> {
    let ckpt = checkpoint::load(path)?;
    let window_days: usize = ckpt.meta_parse("window_days")?;
    let seq_len: usize = ckpt.meta_parse("seq_len").unwrap_or(0);
    let model = match ckpt.kind.as_str() {
        "tarpml" => {
            let (m, _) = nn::model_from_checkpoint(&ckpt)?;
            EvalModel::Tarpml(m)
        }
        "lasso" | "svr" => {
            let weights = ckpt.tensor("weights")?.data().to_vec();
            let bias = ckpt.tensor("bias")?.data()[0];
            let kind = if ckpt.kind == "lasso" { LinearKind::Lasso } else { LinearKind::Svr };
            let model = LinearModel { weights, bias, kind };
            if ckpt.kind == "lasso" {
                EvalModel::Lasso(model)
            } else {
                EvalModel::Svr(model)
            }
        }
        "dtr" => {
            let cfg = TreeConfig {
                max_depth: ckpt.meta_parse("max_depth")?,
                min_samples_leaf: ckpt.meta_parse("min_samples_leaf")?,
            };
            let n_features: usize = ckpt.meta_parse("n_features")?;
            EvalModel::Tree(tree_from_tensor(ckpt.tensor("nodes")?, n_features, &cfg)?)
        }
        "arma" => {
            let p: usize = ckpt.meta_parse("p")?;
            let q: usize = ckpt.meta_parse("q")?;
            let n_rows: usize = ckpt.meta_parse("n_rows")?;
            let n_cols: usize = ckpt.meta_parse("n_cols")?;
            let phi = ckpt.tensor("phi")?;
            let theta = ckpt.tensor("theta")?;
            let mean = ckpt.tensor("mean")?;
            let ridge = ckpt.tensor("ridge")?;
            let cells_n = n_rows * n_cols;
            if phi.shape() != [cells_n, p] || theta.shape() != [cells_n, q] || mean.len() != cells_n {
                return Err(Error::format("arma checkpoint tensor shapes do not match the grid"));
            }
            let cells: Vec<ArmaCellModel> = (0..cells_n)
                .map(|i| ArmaCellModel {
                    phi: phi.data()[i * p..(i + 1) * p].to_vec(),
                    theta: theta.data()[i * q..(i + 1) * q].to_vec(),
                    mean: mean.data()[i],
                    ridge_used: ridge.data()[i] != 0.0,
                })
                .collect();
            EvalModel::Arma(ArmaModel {
                p,
                q,
                window_days,
                n_rows,
                n_cols,
                cells,
                series: Vec::new(),
                forecasts: Vec::new(),
                defined_from: 0,
            })
        }
        "havg" => EvalModel::Havg(HavgModel { window_days }),
        other => return Err(Error::format(format!("unknown checkpoint kind `{other}`"))),
    };
    Ok(LoadedModel {
        model,
        window_days,
        seq_len,
    })
}
