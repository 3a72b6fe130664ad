//! One LSTM layer: forward over a sequence with a full backprop cache, and
//! backpropagation through time.
//!
//! Gate equations per step (the standard forget-gate cell):
//!   i = sigma(W_i x + U_i h_prev + b_i)
//!   f = sigma(W_f x + U_f h_prev + b_f)
//!   g = tanh (W_g x + U_g h_prev + b_g)
//!   o = sigma(W_o x + U_o h_prev + b_o)
//!   c = f . c_prev + i . g
//!   h = o . tanh(c)

use super::init;
use super::tensor::Tensor;
use crate::rng::SeededRng;

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights for one layer: four input matrices (hidden x input), four
/// recurrent matrices (hidden x hidden), four bias vectors (hidden).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub w_i: Tensor,
    pub w_f: Tensor,
    pub w_g: Tensor,
    pub w_o: Tensor,
    pub u_i: Tensor,
    pub u_f: Tensor,
    pub u_g: Tensor,
    pub u_o: Tensor,
    pub b_i: Tensor,
    pub b_f: Tensor,
    pub b_g: Tensor,
    pub b_o: Tensor,
}

/// Gate tensor names in canonical order, paired by [`LstmLayerParams::tensors`].
pub const LSTM_TENSOR_NAMES: [&str; 12] = [
    "w_i", "w_f", "w_g", "w_o", "u_i", "u_f", "u_g", "u_o", "b_i", "b_f", "b_g", "b_o",
];

impl LstmLayerParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmLayerParams {
            w_i: Tensor::zeros(&[hidden, input]),
            w_f: Tensor::zeros(&[hidden, input]),
            w_g: Tensor::zeros(&[hidden, input]),
            w_o: Tensor::zeros(&[hidden, input]),
            u_i: Tensor::zeros(&[hidden, hidden]),
            u_f: Tensor::zeros(&[hidden, hidden]),
            u_g: Tensor::zeros(&[hidden, hidden]),
            u_o: Tensor::zeros(&[hidden, hidden]),
            b_i: Tensor::zeros(&[hidden]),
            b_f: Tensor::zeros(&[hidden]),
            b_g: Tensor::zeros(&[hidden]),
            b_o: Tensor::zeros(&[hidden]),
        }
    }

    /// Glorot input weights, orthogonal recurrent weights, zero biases except
    /// the forget-gate bias at 1.
    pub fn init(rng: &mut SeededRng, input: usize, hidden: usize) -> Self {
        let mut p = LstmLayerParams {
            w_i: init::glorot_uniform(rng, hidden, input),
            w_f: init::glorot_uniform(rng, hidden, input),
            w_g: init::glorot_uniform(rng, hidden, input),
            w_o: init::glorot_uniform(rng, hidden, input),
            u_i: init::orthogonal(rng, hidden),
            u_f: init::orthogonal(rng, hidden),
            u_g: init::orthogonal(rng, hidden),
            u_o: init::orthogonal(rng, hidden),
            b_i: Tensor::zeros(&[hidden]),
            b_f: Tensor::zeros(&[hidden]),
            b_g: Tensor::zeros(&[hidden]),
            b_o: Tensor::zeros(&[hidden]),
        };
        p.b_f.fill(1.0);
        p
    }

    pub fn input_size(&self) -> usize {
        self.w_i.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_i.rows()
    }

    pub fn tensors(&self) -> [&Tensor; 12] {
        [
            &self.w_i, &self.w_f, &self.w_g, &self.w_o, &self.u_i, &self.u_f, &self.u_g,
            &self.u_o, &self.b_i, &self.b_f, &self.b_g, &self.b_o,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 12] {
        [
            &mut self.w_i, &mut self.w_f, &mut self.w_g, &mut self.w_o, &mut self.u_i,
            &mut self.u_f, &mut self.u_g, &mut self.u_o, &mut self.b_i, &mut self.b_f,
            &mut self.b_g, &mut self.b_o,
        ]
    }
}

/// Activations retained for one timestep.
#[derive(Debug, Clone)]
pub struct LstmStep {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// Forward cache: the inputs, the hidden sequence and per-step gate values.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub inputs: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub steps: Vec<LstmStep>,
    h0: Vec<f64>,
    c0: Vec<f64>,
}

impl LstmCache {
    pub fn final_h(&self) -> &[f64] {
        self.h.last().map(|v| v.as_slice()).unwrap_or(&self.h0)
    }

    pub fn final_c(&self) -> &[f64] {
        self.steps.last().map(|s| s.c.as_slice()).unwrap_or(&self.c0)
    }
}

fn gate_preact(w: &Tensor, u: &Tensor, b: &Tensor, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
    let mut z = b.data().to_vec();
    w.matvec_acc(x, &mut z);
    u.matvec_acc(h_prev, &mut z);
    z
}

/// Run the layer over `inputs`, starting from `h0`/`c0` (zeros when None).
pub fn lstm_forward(
    params: &LstmLayerParams,
    inputs: Vec<Vec<f64>>,
    h0: Option<&[f64]>,
    c0: Option<&[f64]>,
) -> LstmCache {
    let hidden = params.hidden_size();
    let h0 = h0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; hidden]);
    let c0 = c0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; hidden]);
    assert_eq!(h0.len(), hidden, "h0 size mismatch");
    assert_eq!(c0.len(), hidden, "c0 size mismatch");

    let mut h = Vec::with_capacity(inputs.len());
    let mut steps = Vec::with_capacity(inputs.len());
    for x in &inputs {
        assert_eq!(x.len(), params.input_size(), "input size mismatch");
        let h_prev = h.last().map(|v: &Vec<f64>| v.as_slice()).unwrap_or(&h0);
        let c_prev = steps
            .last()
            .map(|s: &LstmStep| s.c.as_slice())
            .unwrap_or(&c0);

        let mut i = gate_preact(&params.w_i, &params.u_i, &params.b_i, x, h_prev);
        let mut f = gate_preact(&params.w_f, &params.u_f, &params.b_f, x, h_prev);
        let mut g = gate_preact(&params.w_g, &params.u_g, &params.b_g, x, h_prev);
        let mut o = gate_preact(&params.w_o, &params.u_o, &params.b_o, x, h_prev);
        i.iter_mut().for_each(|v| *v = sigmoid(*v));
        f.iter_mut().for_each(|v| *v = sigmoid(*v));
        g.iter_mut().for_each(|v| *v = v.tanh());
        o.iter_mut().for_each(|v| *v = sigmoid(*v));

        let c: Vec<f64> = (0..hidden).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h_t: Vec<f64> = (0..hidden).map(|j| o[j] * tanh_c[j]).collect();

        h.push(h_t);
        steps.push(LstmStep { i, f, g, o, c, tanh_c });
    }
    LstmCache { inputs, h, steps, h0, c0 }
}

/// Backpropagation through time. `d_h_seq[t]` is the loss gradient flowing
/// into h_t from outside the layer (from the layer above, or from the head
/// for the final step). Parameter gradients accumulate into `grads`; the
/// return value is the gradient with respect to each input vector.
pub fn lstm_backward(
    params: &LstmLayerParams,
    cache: &LstmCache,
    d_h_seq: &[Vec<f64>],
    grads: &mut LstmLayerParams,
) -> Vec<Vec<f64>> {
    let hidden = params.hidden_size();
    let steps = cache.steps.len();
    assert_eq!(d_h_seq.len(), steps, "gradient sequence length mismatch");

    let mut d_inputs = vec![vec![0.0; params.input_size()]; steps];
    let mut dh_next = vec![0.0; hidden];
    let mut dc_next = vec![0.0; hidden];

    for t in (0..steps).rev() {
        let step = &cache.steps[t];
        let h_prev: &[f64] = if t == 0 { &cache.h0 } else { &cache.h[t - 1] };
        let c_prev: &[f64] = if t == 0 {
            &cache.c0
        } else {
            &cache.steps[t - 1].c
        };

        let mut dzi = vec![0.0; hidden];
        let mut dzf = vec![0.0; hidden];
        let mut dzg = vec![0.0; hidden];
        let mut dzo = vec![0.0; hidden];
        for j in 0..hidden {
            let dh = d_h_seq[t][j] + dh_next[j];
            let o = step.o[j];
            let tc = step.tanh_c[j];
            let d_o = dh * tc;
            dzo[j] = d_o * o * (1.0 - o);
            let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
            let d_f = dc * c_prev[j];
            dzf[j] = d_f * step.f[j] * (1.0 - step.f[j]);
            let d_i = dc * step.g[j];
            dzi[j] = d_i * step.i[j] * (1.0 - step.i[j]);
            let d_g = dc * step.i[j];
            dzg[j] = d_g * (1.0 - step.g[j] * step.g[j]);
            dc_next[j] = dc * step.f[j];
        }

        let x = &cache.inputs[t];
        grads.w_i.add_outer(&dzi, x);
        grads.w_f.add_outer(&dzf, x);
        grads.w_g.add_outer(&dzg, x);
        grads.w_o.add_outer(&dzo, x);
        grads.u_i.add_outer(&dzi, h_prev);
        grads.u_f.add_outer(&dzf, h_prev);
        grads.u_g.add_outer(&dzg, h_prev);
        grads.u_o.add_outer(&dzo, h_prev);
        for j in 0..hidden {
            grads.b_i.data_mut()[j] += dzi[j];
            grads.b_f.data_mut()[j] += dzf[j];
            grads.b_g.data_mut()[j] += dzg[j];
            grads.b_o.data_mut()[j] += dzo[j];
        }

        let dx = &mut d_inputs[t];
        params.w_i.tmatvec_acc(&dzi, dx);
        params.w_f.tmatvec_acc(&dzf, dx);
        params.w_g.tmatvec_acc(&dzg, dx);
        params.w_o.tmatvec_acc(&dzo, dx);

        dh_next.iter_mut().for_each(|v| *v = 0.0);
        params.u_i.tmatvec_acc(&dzi, &mut dh_next);
        params.u_f.tmatvec_acc(&dzf, &mut dh_next);
        params.u_g.tmatvec_acc(&dzg, &mut dh_next);
        params.u_o.tmatvec_acc(&dzo, &mut dh_next);
    }
    d_inputs
}
