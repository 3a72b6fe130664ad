//! Classical comparison models: Lasso, linear epsilon-SVR, a CART
//! regression tree, per-cell ARMA, and the naive 24-hour historical
//! average. All but ARMA consume the same flattened sample features
//! (L sequence values plus the 2 normalized coordinates).

mod arma;
mod lasso;
mod linalg;
mod svr;
mod tree;

pub use arma::{ArmaCellModel, ArmaConfig, ArmaModel};
pub use lasso::{fit_lasso, kkt_max_violation, LassoConfig, LassoFit};
pub use svr::{fit_svr_linear, SvrConfig};
pub use tree::{fit_tree, tree_from_tensor, tree_to_tensor, Node, RegressionTree, TreeConfig};

use crate::risk::{RiskCube, SampleStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    Lasso,
    Svr,
}

/// A linear predictor over the flattened features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: LinearKind,
}

impl LinearModel {
    pub fn predict(&self, features: &[f64]) -> f64 {
        debug_assert_eq!(features.len(), self.weights.len());
        self.weights.iter().zip(features).map(|(&w, &x)| w * x).sum::<f64>() + self.bias
    }
}

/// Flattened design matrix and target vector for a set of store indices.
pub fn design_matrix(store: &SampleStore, indices: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs = indices
        .iter()
        .map(|&i| SampleStore::features(&store.samples[i]))
        .collect();
    let ys = indices.iter().map(|&i| store.samples[i].target).collect();
    (xs, ys)
}

/// The naive reference: predict the risk observed 24 hours earlier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HavgModel {
    pub window_days: usize,
}

/// Build the historical-average predictor for a risk cube.
pub fn historical_average(risk: &RiskCube) -> HavgModel {
    HavgModel {
        window_days: risk.window_days,
    }
}

impl HavgModel {
    /// Risk at (row, col, slot - 24), or None when that slot is undefined.
    pub fn predict_slot(&self, risk: &RiskCube, row: usize, col: usize, slot: usize) -> Option<f64> {
        if slot < 24 {
            return None;
        }
        risk.at(row, col, slot - 24)
    }
}
