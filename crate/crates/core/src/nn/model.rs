//! The sequence-plus-coordinate risk regressor: stacked LSTM layers over the
//! risk sequence, the normalized cell coordinate joined at the first dense
//! layer, ReLU dense layers with inverted dropout between them, and a single
//! ReLU output so predictions stay non-negative.

use super::init;
use super::lstm::{lstm_backward, lstm_forward, LstmCache, LstmLayerParams, LSTM_TENSOR_NAMES};
use super::tensor::Tensor;
use crate::risk::RiskSample;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Architecture and training-relevant hyperparameters, carried with the
/// model through checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TarpmlHyper {
    pub seq_len: usize,
    pub lstm_sizes: Vec<usize>,
    pub dense_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub window_days: usize,
}

impl TarpmlHyper {
    /// The full-size architecture: LSTM 100/200/200/200, three 200-unit
    /// dense layers, dropout 0.5.
    pub fn standard(seq_len: usize, window_days: usize) -> Self {
        TarpmlHyper {
            seq_len,
            lstm_sizes: vec![100, 200, 200, 200],
            dense_sizes: vec![200, 200, 200],
            dropout_rate: 0.5,
            window_days,
        }
    }

    /// Desk-scale variant for sweeps and CI: LSTM 16/32/32/32, 32-unit dense
    /// layers.
    pub fn tiny(seq_len: usize, window_days: usize) -> Self {
        TarpmlHyper {
            seq_len,
            lstm_sizes: vec![16, 32, 32, 32],
            dense_sizes: vec![32, 32, 32],
            dropout_rate: 0.5,
            window_days,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 {
            return Err(Error::config("seq_len must be >= 1"));
        }
        if self.lstm_sizes.is_empty() || self.lstm_sizes.iter().any(|&s| s == 0) {
            return Err(Error::config("lstm_sizes must be non-empty and positive"));
        }
        if self.dense_sizes.is_empty() || self.dense_sizes.iter().any(|&s| s == 0) {
            return Err(Error::config("dense_sizes must be non-empty and positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout_rate must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Tensor,
    pub b: Tensor,
}

impl DenseLayer {
    fn zeros(input: usize, output: usize) -> Self {
        DenseLayer {
            w: Tensor::zeros(&[output, input]),
            b: Tensor::zeros(&[output]),
        }
    }

    fn init(rng: &mut SeededRng, input: usize, output: usize) -> Self {
        DenseLayer {
            w: init::glorot_uniform(rng, output, input),
            b: Tensor::zeros(&[output]),
        }
    }
}

/// All learnable tensors. Gradients and optimizer state reuse this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct TarpmlParams {
    pub lstm: Vec<LstmLayerParams>,
    pub dense: Vec<DenseLayer>,
    pub output: DenseLayer,
}

impl TarpmlParams {
    pub fn zeros(hyper: &TarpmlHyper) -> Self {
        let mut lstm = Vec::new();
        let mut input = 1;
        for &hidden in &hyper.lstm_sizes {
            lstm.push(LstmLayerParams::zeros(input, hidden));
            input = hidden;
        }
        let mut dense = Vec::new();
        let mut dim = hyper.lstm_sizes.last().unwrap() + 2;
        for &units in &hyper.dense_sizes {
            dense.push(DenseLayer::zeros(dim, units));
            dim = units;
        }
        TarpmlParams {
            lstm,
            dense,
            output: DenseLayer::zeros(dim, 1),
        }
    }

    fn init(hyper: &TarpmlHyper, rng: &mut SeededRng) -> Self {
        let mut lstm = Vec::new();
        let mut input = 1;
        for &hidden in &hyper.lstm_sizes {
            lstm.push(LstmLayerParams::init(rng, input, hidden));
            input = hidden;
        }
        let mut dense = Vec::new();
        let mut dim = hyper.lstm_sizes.last().unwrap() + 2;
        for &units in &hyper.dense_sizes {
            dense.push(DenseLayer::init(rng, dim, units));
            dim = units;
        }
        let mut output = DenseLayer::init(rng, dim, 1);
        // keep the output ReLU alive at initialization; with a zero bias the
        // unit can start dead for every input and never recover
        output.b.fill(0.1);
        TarpmlParams { lstm, dense, output }
    }

    /// Every tensor with its canonical name, in a fixed order shared by
    /// checkpoints, the optimizer and gradient containers.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (l, layer) in self.lstm.iter().enumerate() {
            for (name, t) in LSTM_TENSOR_NAMES.iter().zip(layer.tensors()) {
                out.push((format!("lstm{l}.{name}"), t));
            }
        }
        for (i, layer) in self.dense.iter().enumerate() {
            out.push((format!("dense{i}.w"), &layer.w));
            out.push((format!("dense{i}.b"), &layer.b));
        }
        out.push(("out.w".to_string(), &self.output.w));
        out.push(("out.b".to_string(), &self.output.b));
        out
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        self.named_tensors().into_iter().map(|(_, t)| t).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for layer in self.lstm.iter_mut() {
            out.extend(layer.tensors_mut());
        }
        for layer in self.dense.iter_mut() {
            out.push(&mut layer.w);
            out.push(&mut layer.b);
        }
        out.push(&mut self.output.w);
        out.push(&mut self.output.b);
        out
    }

    pub fn zero_all(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TarpmlModel {
    pub hyper: TarpmlHyper,
    pub params: TarpmlParams,
}

/// Dropout behavior of a forward pass.
pub enum DropoutMode<'a> {
    /// No dropout; inference is a pure function of (model, input).
    Infer,
    /// Sample inverted-dropout masks from the given stream.
    Train(&'a mut SeededRng),
}

struct DenseStage {
    z: Vec<f64>,
    /// Post-dropout activation fed to the next layer (equals relu(z) when
    /// no mask applies).
    out: Vec<f64>,
    /// Per-unit factor, 0 or 1/keep; None in infer mode or after the last
    /// dense layer.
    mask: Option<Vec<f64>>,
}

/// Everything backward needs from one forward pass.
pub struct ForwardCache {
    lstm: Vec<LstmCache>,
    u0: Vec<f64>,
    dense: Vec<DenseStage>,
    zout: f64,
    pub prediction: f64,
}

#[inline]
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl TarpmlModel {
    /// Freshly initialized model; all randomness comes from `rng`.
    pub fn new(hyper: TarpmlHyper, rng: &mut SeededRng) -> Result<Self> {
        hyper.validate()?;
        let params = TarpmlParams::init(&hyper, rng);
        Ok(TarpmlModel { hyper, params })
    }

    /// All-zero parameters (predicts exactly 0 for any input).
    pub fn zeros(hyper: TarpmlHyper) -> Result<Self> {
        hyper.validate()?;
        let params = TarpmlParams::zeros(&hyper);
        Ok(TarpmlModel { hyper, params })
    }

    /// Forward pass over one (sequence, coordinate) input.
    pub fn forward(&self, sequence: &[f64], coord: [f64; 2], mode: DropoutMode) -> Result<(f64, ForwardCache)> {
        if sequence.len() != self.hyper.seq_len {
            return Err(Error::data(format!(
                "sequence length {} does not match the model's {}",
                sequence.len(),
                self.hyper.seq_len
            )));
        }

        let mut inputs: Vec<Vec<f64>> = sequence.iter().map(|&v| vec![v]).collect();
        let mut lstm_caches = Vec::with_capacity(self.params.lstm.len());
        for layer in &self.params.lstm {
            let cache = lstm_forward(layer, inputs, None, None);
            inputs = cache.h.clone();
            lstm_caches.push(cache);
        }
        let h_last = lstm_caches.last().unwrap().final_h();

        let mut u0 = Vec::with_capacity(h_last.len() + 2);
        u0.extend_from_slice(h_last);
        u0.push(coord[0]);
        u0.push(coord[1]);

        let mut mode = mode;
        let keep = 1.0 - self.hyper.dropout_rate;
        let n_dense = self.params.dense.len();
        let mut dense_stages: Vec<DenseStage> = Vec::with_capacity(n_dense);
        let mut current: &[f64] = &u0;
        for (i, layer) in self.params.dense.iter().enumerate() {
            let mut z = layer.b.data().to_vec();
            layer.w.matvec_acc(current, &mut z);
            let a: Vec<f64> = z.iter().map(|&v| relu(v)).collect();
            // inverted dropout between consecutive dense layers only
            let wants_mask = i + 1 < n_dense && self.hyper.dropout_rate > 0.0;
            let (out, mask) = if wants_mask {
                match &mut mode {
                    DropoutMode::Train(rng) => {
                        let factors: Vec<f64> = (0..a.len())
                            .map(|_| if rng.unit_f64() < keep { 1.0 / keep } else { 0.0 })
                            .collect();
                        let dropped: Vec<f64> = a.iter().zip(&factors).map(|(&v, &m)| v * m).collect();
                        (dropped, Some(factors))
                    }
                    DropoutMode::Infer => (a.clone(), None),
                }
            } else {
                (a.clone(), None)
            };
            dense_stages.push(DenseStage { z, out, mask });
            current = &dense_stages.last().unwrap().out;
        }

        let mut zout = self.params.output.b.data()[0];
        zout += self
            .params
            .output
            .w
            .data()
            .iter()
            .zip(current)
            .map(|(a, b)| a * b)
            .sum::<f64>();
        if !zout.is_finite() {
            return Err(Error::Train("non-finite activation in forward pass".into()));
        }
        let prediction = relu(zout);
        Ok((
            prediction,
            ForwardCache {
                lstm: lstm_caches,
                u0,
                dense: dense_stages,
                zout,
                prediction,
            },
        ))
    }

    pub fn forward_sample(&self, sample: &RiskSample, mode: DropoutMode) -> Result<(f64, ForwardCache)> {
        self.forward(&sample.sequence, sample.coord, mode)
    }

    /// Inference prediction (no dropout, no cache retained).
    pub fn predict_one(&self, sequence: &[f64], coord: [f64; 2]) -> Result<f64> {
        Ok(self.forward(sequence, coord, DropoutMode::Infer)?.0)
    }

    /// Gradients of `d_prediction * prediction` with respect to every
    /// parameter, reusing the cached activations and dropout masks.
    pub fn backward(&self, cache: &ForwardCache, d_prediction: f64) -> TarpmlParams {
        let mut grads = TarpmlParams::zeros(&self.hyper);
        self.backward_into(cache, d_prediction, &mut grads);
        grads
    }

    /// As [`backward`](Self::backward) but accumulating into an existing
    /// gradient container (zero it between batches).
    pub fn backward_into(&self, cache: &ForwardCache, d_prediction: f64, grads: &mut TarpmlParams) {
        // output ReLU
        let dzout = if cache.zout > 0.0 { d_prediction } else { 0.0 };
        let last_out = &cache.dense.last().unwrap().out;
        grads.output.w.add_outer(&[dzout], last_out);
        grads.output.b.data_mut()[0] += dzout;

        // gradient w.r.t. the last dense layer's (post-dropout) output
        let mut grad: Vec<f64> = self
            .params
            .output
            .w
            .data()
            .iter()
            .map(|&w| w * dzout)
            .collect();

        for i in (0..self.params.dense.len()).rev() {
            let stage = &cache.dense[i];
            // through the dropout mask, if one was applied
            if let Some(mask) = &stage.mask {
                for (g, &m) in grad.iter_mut().zip(mask) {
                    *g *= m;
                }
            }
            // through ReLU
            let dz: Vec<f64> = grad
                .iter()
                .zip(&stage.z)
                .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                .collect();
            let input: &[f64] = if i == 0 { &cache.u0 } else { &cache.dense[i - 1].out };
            grads.dense[i].w.add_outer(&dz, input);
            for (b, &d) in grads.dense[i].b.data_mut().iter_mut().zip(&dz) {
                *b += d;
            }
            let mut prev = vec![0.0; input.len()];
            self.params.dense[i].w.tmatvec_acc(&dz, &mut prev);
            grad = prev;
        }

        // split off the coordinate part; the remainder drives the LSTM stack
        let h_size = *self.hyper.lstm_sizes.last().unwrap();
        let dh_last = &grad[..h_size];

        let seq_len = self.hyper.seq_len;
        let mut d_h_seq: Vec<Vec<f64>> = (0..seq_len).map(|_| vec![0.0; h_size]).collect();
        d_h_seq[seq_len - 1].copy_from_slice(dh_last);

        for l in (0..self.params.lstm.len()).rev() {
            let d_inputs = lstm_backward(&self.params.lstm[l], &cache.lstm[l], &d_h_seq, &mut grads.lstm[l]);
            d_h_seq = d_inputs;
        }
    }
}

/// Inference predictions for a batch of samples; always non-negative.
pub fn predict(model: &TarpmlModel, samples: &[RiskSample]) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| model.predict_one(&s.sequence, s.coord))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_hyper() -> TarpmlHyper {
        TarpmlHyper {
            seq_len: 6,
            lstm_sizes: vec![3, 4, 4, 4],
            dense_sizes: vec![5, 5, 5],
            dropout_rate: 0.5,
            window_days: 1,
        }
    }

    fn sample_input() -> (Vec<f64>, [f64; 2]) {
        let seq = vec![0.5, 1.2, 0.0, 2.0, 0.7, 1.5];
        (seq, [0.25, 0.75])
    }

    #[test]
    fn zero_model_predicts_zero() {
        let model = TarpmlModel::zeros(tiny_hyper()).unwrap();
        let (seq, coord) = sample_input();
        let p = model.predict_one(&seq, coord).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn infer_is_deterministic() {
        let mut rng = SeededRng::new(8);
        let model = TarpmlModel::new(tiny_hyper(), &mut rng).unwrap();
        let (seq, coord) = sample_input();
        let a = model.predict_one(&seq, coord).unwrap();
        let b = model.predict_one(&seq, coord).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn predictions_are_non_negative() {
        let mut rng = SeededRng::new(12);
        let model = TarpmlModel::new(tiny_hyper(), &mut rng).unwrap();
        for trial in 0..20 {
            let seq: Vec<f64> = (0..6).map(|i| ((trial * 7 + i) as f64 * 0.37).sin().abs() * 3.0).collect();
            let p = model.predict_one(&seq, [0.1, 0.9]).unwrap();
            assert!(p >= 0.0);
        }
    }

    #[test]
    fn wrong_sequence_length_is_error() {
        let model = TarpmlModel::zeros(tiny_hyper()).unwrap();
        assert!(model.predict_one(&[1.0, 2.0], [0.0, 0.0]).is_err());
    }

    #[test]
    fn train_mode_without_dropout_matches_infer() {
        let mut hyper = tiny_hyper();
        hyper.dropout_rate = 0.0;
        let mut rng = SeededRng::new(21);
        let model = TarpmlModel::new(hyper, &mut rng).unwrap();
        let (seq, coord) = sample_input();
        let infer = model.forward(&seq, coord, DropoutMode::Infer).unwrap().0;
        let mut drop_rng = SeededRng::new(99);
        let train = model
            .forward(&seq, coord, DropoutMode::Train(&mut drop_rng))
            .unwrap()
            .0;
        assert_eq!(infer, train);
    }

    #[test]
    fn inverted_dropout_expectation_matches_infer() {
        // mean over many masks of the dense-2 pre-activation equals the
        // infer-mode pre-activation within 2%
        let mut rng = SeededRng::new(33);
        let model = TarpmlModel::new(tiny_hyper(), &mut rng).unwrap();
        let (seq, coord) = sample_input();

        let (_, infer_cache) = model.forward(&seq, coord, DropoutMode::Infer).unwrap();
        let reference = &infer_cache.dense[1].z;

        let n_masks = 10_000;
        let mut mean = vec![0.0; reference.len()];
        let mut mask_rng = SeededRng::new(77);
        for _ in 0..n_masks {
            let (_, cache) = model
                .forward(&seq, coord, DropoutMode::Train(&mut mask_rng))
                .unwrap();
            for (m, &z) in mean.iter_mut().zip(&cache.dense[1].z) {
                *m += z;
            }
        }
        for m in mean.iter_mut() {
            *m /= n_masks as f64;
        }
        let scale = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(scale > 0.0, "degenerate fixture: all dense-2 pre-activations zero");
        for (j, (&avg, &want)) in mean.iter().zip(reference).enumerate() {
            assert!(
                (avg - want).abs() <= 0.02 * scale,
                "unit {j}: mean {avg} vs infer {want} (scale {scale})"
            );
        }
    }

    #[test]
    fn named_tensor_order_is_stable() {
        let model = TarpmlModel::zeros(tiny_hyper()).unwrap();
        let names: Vec<String> = model.params.named_tensors().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names[0], "lstm0.w_i");
        assert_eq!(names[11], "lstm0.b_o");
        assert_eq!(names[48], "dense0.w");
        assert_eq!(names.last().unwrap(), "out.b");
        assert_eq!(names.len(), 4 * 12 + 3 * 2 + 2);
        let mut_count = TarpmlModel::zeros(tiny_hyper()).unwrap().params.tensors_mut().len();
        assert_eq!(mut_count, names.len());
    }
}
