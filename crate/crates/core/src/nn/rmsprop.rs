//! RMSProp: per-parameter moving average of squared gradients,
//! `v <- rho v + (1 - rho) g^2`, update `p <- p - lr * g / sqrt(v + eps)`.

use super::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmspropConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for RmspropConfig {
    fn default() -> Self {
        RmspropConfig {
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-8,
        }
    }
}

impl RmspropConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate must be > 0"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::config("rho must be in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be > 0"));
        }
        Ok(())
    }
}

/// Squared-gradient accumulators, one tensor per parameter tensor, in the
/// same canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct RmspropState {
    pub v: Vec<Tensor>,
}

impl RmspropState {
    pub fn zeros_like(params: &[&Tensor]) -> Self {
        RmspropState {
            v: params.iter().map(|t| Tensor::zeros(t.shape())).collect(),
        }
    }
}

/// One optimizer step over a parameter/gradient tensor list.
pub fn rmsprop_step(
    cfg: &RmspropConfig,
    state: &mut RmspropState,
    params: &mut [&mut Tensor],
    grads: &[&Tensor],
) -> Result<()> {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.v.len());
    for ((p, g), v) in params.iter_mut().zip(grads).zip(state.v.iter_mut()) {
        debug_assert_eq!(p.shape(), g.shape());
        let vd = v.data_mut();
        let pd = p.data_mut();
        let gd = g.data();
        for j in 0..pd.len() {
            let gj = gd[j];
            vd[j] = cfg.rho * vd[j] + (1.0 - cfg.rho) * gj * gj;
            pd[j] -= cfg.learning_rate * gj / (vd[j] + cfg.epsilon).sqrt();
            if !pd[j].is_finite() {
                return Err(Error::Train("non-finite parameter after optimizer step".into()));
            }
        }
    }
    Ok(())
}
