use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PredictorError;
use crate::rng::seeded;
use crate::sim::{argmax_lowest, ChannelModel};
use crate::telemetry::{DatasetRow, TelemetryWindow};

/// Width of both hidden layers.
pub const HIDDEN: usize = 10;
pub const DEFAULT_L1_LAMBDA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn slope(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// Dense network `input -> 10 -> 10 -> channels` with a softmax head.
///
/// Parameters live in one flat `f32` buffer in the order W1, b1, W2, b2,
/// W3, b3; each weight matrix is row-major `fan_in x fan_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct FcnnModel {
    input_dim: usize,
    channels: usize,
    params: Vec<f32>,
    pub activation: Activation,
    pub l1_lambda: f64,
    /// Which of the three weight matrices the L1 penalty applies to.
    pub l1_layers: [bool; 3],
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    dims: [(usize, usize); 3],
    offsets: [usize; 3],
}

impl Layout {
    fn new(input_dim: usize, channels: usize) -> Self {
        let dims = [(input_dim, HIDDEN), (HIDDEN, HIDDEN), (HIDDEN, channels)];
        let mut offsets = [0; 3];
        let mut at = 0;
        for (k, (i, o)) in dims.iter().enumerate() {
            offsets[k] = at;
            at += i * o + o;
        }
        Self { dims, offsets }
    }

    fn weights(&self, k: usize) -> std::ops::Range<usize> {
        let (i, o) = self.dims[k];
        self.offsets[k]..self.offsets[k] + i * o
    }

    fn bias(&self, k: usize) -> std::ops::Range<usize> {
        let (i, o) = self.dims[k];
        let start = self.offsets[k] + i * o;
        start..start + o
    }
}

pub fn param_count(input_dim: usize, channels: usize) -> usize {
    input_dim * HIDDEN + HIDDEN + HIDDEN * HIDDEN + HIDDEN + HIDDEN * channels + channels
}

impl FcnnModel {
    /// Seeded uniform initialization in `±sqrt(6 / (fan_in + fan_out))`,
    /// zero biases.
    pub fn init(input_dim: usize, channels: usize, seed: u64) -> Result<Self, PredictorError> {
        let mut m = Self::zeros(input_dim, channels)?;
        let layout = m.layout();
        let mut rng = seeded(seed);
        for k in 0..3 {
            let (i, o) = layout.dims[k];
            let limit = (6.0 / (i + o) as f64).sqrt();
            for w in &mut m.params[layout.weights(k)] {
                *w = rng.random_range(-limit..limit) as f32;
            }
        }
        Ok(m)
    }

    pub fn zeros(input_dim: usize, channels: usize) -> Result<Self, PredictorError> {
        if input_dim == 0 || channels < 2 {
            return Err(PredictorError::InvalidDims { input_dim, channels });
        }
        Ok(Self {
            input_dim,
            channels,
            params: vec![0.0; param_count(input_dim, channels)],
            activation: Activation::default(),
            l1_lambda: DEFAULT_L1_LAMBDA,
            l1_layers: [true; 3],
        })
    }

    pub fn from_params(input_dim: usize, channels: usize, params: Vec<f32>) -> Result<Self, PredictorError> {
        let mut m = Self::zeros(input_dim, channels)?;
        if params.len() != m.params.len() {
            return Err(PredictorError::Shape(format!(
                "{} parameters, expected {}",
                params.len(),
                m.params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(PredictorError::Shape("non-finite parameter".into()));
        }
        m.params = params;
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn params(&self) -> &[f32] {
        &self.params
    }

    pub(crate) fn set_params(&mut self, p: &[f64]) {
        for (dst, &src) in self.params.iter_mut().zip(p) {
            *dst = src as f32;
        }
    }

    pub fn params_f64(&self) -> Vec<f64> {
        self.params.iter().map(|&p| f64::from(p)).collect()
    }

    /// Adds `delta` to every output bias.
    pub fn shift_output_bias(&mut self, delta: f32) {
        let r = self.layout().bias(2);
        for b in &mut self.params[r] {
            *b += delta;
        }
    }

    fn layout(&self) -> Layout {
        Layout::new(self.input_dim, self.channels)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PredictorError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| PredictorError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        super::import_flat(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PredictorError> {
        let path = path.as_ref();
        std::fs::write(path, super::export_flat(self)?).map_err(|e| PredictorError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    fn check_input(&self, features: &[f64]) -> Result<(), PredictorError> {
        if features.len() != self.input_dim {
            return Err(PredictorError::Shape(format!(
                "{} features, model expects {}",
                features.len(),
                self.input_dim
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(PredictorError::NonFinite);
        }
        Ok(())
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>, PredictorError> {
        self.check_input(features)?;
        let p = self.params_f64();
        Ok(Pass::run(&self.net(&p), features).probs)
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize, PredictorError> {
        Ok(argmax_lowest(&self.forward(features)?))
    }

    /// Next carrier from a node's telemetry history; ties go to the
    /// lowest index.
    pub fn predict_channel(&self, window: &TelemetryWindow) -> Result<usize, PredictorError> {
        self.predict(&window.snapshot())
    }

    pub(crate) fn net<'a>(&self, p: &'a [f64]) -> Net<'a> {
        Net {
            p,
            layout: self.layout(),
            activation: self.activation,
            l1_lambda: self.l1_lambda,
            l1_layers: self.l1_layers,
        }
    }

    /// Mean cross-entropy plus the L1 penalty, evaluated at `params`
    /// (same layout as [`Self::params`]).
    pub fn objective(&self, params: &[f64], rows: &[DatasetRow]) -> f64 {
        let idx: Vec<usize> = (0..rows.len()).collect();
        self.net(params).loss_and_grad(rows, &idx, None).loss
    }

    /// Analytic gradient of [`Self::objective`].
    pub fn gradient(&self, params: &[f64], rows: &[DatasetRow]) -> Vec<f64> {
        let idx: Vec<usize> = (0..rows.len()).collect();
        let mut g = vec![0.0; params.len()];
        self.net(params).loss_and_grad(rows, &idx, Some(&mut g));
        g
    }
}

impl ChannelModel for FcnnModel {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn num_channels(&self) -> usize {
        self.channels
    }

    fn choose(&self, features: &[f64]) -> Result<usize, String> {
        self.predict(features).map_err(|e| e.to_string())
    }
}

/// Network math over a borrowed `f64` parameter vector.
pub(crate) struct Net<'a> {
    p: &'a [f64],
    layout: Layout,
    activation: Activation,
    l1_lambda: f64,
    l1_layers: [bool; 3],
}

pub(crate) struct Eval {
    pub loss: f64,
    pub correct: usize,
}

struct Pass {
    h1: Vec<f64>,
    h2: Vec<f64>,
    probs: Vec<f64>,
}

impl Pass {
    fn run(net: &Net, x: &[f64]) -> Self {
        let h1: Vec<f64> = net.dense(0, x).into_iter().map(|v| net.activation.apply(v)).collect();
        let h2: Vec<f64> = net.dense(1, &h1).into_iter().map(|v| net.activation.apply(v)).collect();
        let probs = softmax(&net.dense(2, &h2));
        Self { h1, h2, probs }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

impl Net<'_> {
    fn dense(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let (_, o) = self.layout.dims[k];
        let w = &self.p[self.layout.weights(k)];
        let mut out = self.p[self.layout.bias(k)].to_vec();
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                let row = &w[i * o..(i + 1) * o];
                for (acc, &wij) in out.iter_mut().zip(row) {
                    *acc += xi * wij;
                }
            }
        }
        out
    }

    fn penalty(&self) -> f64 {
        (0..3)
            .filter(|&k| self.l1_layers[k])
            .map(|k| self.p[self.layout.weights(k)].iter().map(|w| w.abs()).sum::<f64>())
            .sum::<f64>()
            * self.l1_lambda
    }

    /// Loss over `rows[idx]`; when `grad` is given it receives the full
    /// gradient (overwritten, not accumulated).
    pub fn loss_and_grad(&self, rows: &[DatasetRow], idx: &[usize], mut grad: Option<&mut [f64]>) -> Eval {
        let n = idx.len().max(1) as f64;
        let mut ce = 0.0;
        let mut correct = 0;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        for &r in idx {
            let row = &rows[r];
            let pass = Pass::run(self, &row.features);
            ce -= pass.probs[row.label].max(f64::MIN_POSITIVE).ln();
            correct += usize::from(argmax_lowest(&pass.probs) == row.label);
            if let Some(g) = grad.as_deref_mut() {
                self.backprop(&pass, &row.features, row.label, 1.0 / n, g);
            }
        }
        if let Some(g) = grad {
            for k in (0..3).filter(|&k| self.l1_layers[k]) {
                let r = self.layout.weights(k);
                for (gi, &w) in g[r.clone()].iter_mut().zip(&self.p[r]) {
                    *gi += self.l1_lambda * sign(w);
                }
            }
        }
        Eval { loss: ce / n + self.penalty(), correct }
    }

    fn backprop(&self, pass: &Pass, x: &[f64], label: usize, scale: f64, g: &mut [f64]) {
        let mut delta: Vec<f64> = pass.probs.iter().map(|&p| p * scale).collect();
        delta[label] -= scale;
        let inputs: [&[f64]; 3] = [x, &pass.h1, &pass.h2];
        for k in (0..3).rev() {
            let (fan_in, o) = self.layout.dims[k];
            let wr = self.layout.weights(k);
            for (gb, &d) in g[self.layout.bias(k)].iter_mut().zip(&delta) {
                *gb += d;
            }
            let input = inputs[k];
            for i in 0..fan_in {
                if input[i] != 0.0 {
                    let gw = &mut g[wr.start + i * o..wr.start + (i + 1) * o];
                    for (gij, &d) in gw.iter_mut().zip(&delta) {
                        *gij += input[i] * d;
                    }
                }
            }
            if k > 0 {
                let w = &self.p[wr];
                delta = (0..fan_in)
                    .map(|i| {
                        let back: f64 = w[i * o..(i + 1) * o].iter().zip(&delta).map(|(a, b)| a * b).sum();
                        back * self.activation.slope(input[i])
                    })
                    .collect();
            }
        }
    }
}

fn sign(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else if w < 0.0 {
        -1.0
    } else {
        0.0
    }
}
