use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{FcnnModel, PredictorError};
use crate::rng::seeded;
use crate::telemetry::DatasetRow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, batch_size: 32, adam: AdamConfig::default(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
    pub initial_train_loss: f64,
    pub epochs: Vec<EpochStats>,
    /// Accuracy of the final (single precision) model on the test split.
    pub test_accuracy: Option<f64>,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> f64 {
        self.epochs.last().map_or(self.initial_train_loss, |e| e.train_loss)
    }
}

/// Split sizes for `n` rows: validation and test get `floor(n / 5)` each,
/// training keeps the rest.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let val = n / 5;
    let test = n / 5;
    (n - val - test, val, test)
}

/// Shuffles rows with `seed`, carves out 20% validation and 20% test, and
/// runs mini-batch Adam on the rest.
pub fn train(model: &mut FcnnModel, rows: &[DatasetRow], cfg: &TrainConfig) -> Result<TrainReport, PredictorError> {
    if rows.is_empty() {
        return Err(PredictorError::EmptyDataset);
    }
    if cfg.batch_size == 0 {
        return Err(PredictorError::Config("batch_size must be at least 1".into()));
    }
    let a = cfg.adam;
    if !(a.lr > 0.0 && a.lr.is_finite()) || !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || a.eps.is_nan() || a.eps <= 0.0 {
        return Err(PredictorError::Config(format!("invalid Adam settings {a:?}")));
    }
    if !(model.l1_lambda >= 0.0 && model.l1_lambda.is_finite()) {
        return Err(PredictorError::Config(format!("invalid l1_lambda {}", model.l1_lambda)));
    }
    for (k, r) in rows.iter().enumerate() {
        if r.features.len() != model.input_dim() || r.label >= model.channels() {
            return Err(PredictorError::Shape(format!(
                "row {k}: {} features / label {} for a {}-input, {}-channel model",
                r.features.len(),
                r.label,
                model.input_dim(),
                model.channels()
            )));
        }
    }

    let mut rng = seeded(cfg.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let (n_train, n_val, n_test) = split_sizes(rows.len());
    let val = order[..n_val].to_vec();
    let test = order[n_val..n_val + n_test].to_vec();
    let mut train_idx = order[n_val + n_test..].to_vec();

    let mut p = model.params_f64();
    let mut grad = vec![0.0; p.len()];
    let mut m = vec![0.0; p.len()];
    let mut v = vec![0.0; p.len()];
    let mut step = 0i32;

    let initial_train_loss = model.net(&p).loss_and_grad(rows, &train_idx, None).loss;
    if !initial_train_loss.is_finite() {
        return Err(PredictorError::Diverged { epoch: 0 });
    }
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        train_idx.shuffle(&mut rng);
        for batch in train_idx.chunks(cfg.batch_size) {
            let loss = model.net(&p).loss_and_grad(rows, batch, Some(&mut grad)).loss;
            if !loss.is_finite() {
                return Err(PredictorError::Diverged { epoch });
            }
            step += 1;
            let c1 = 1.0 - a.beta1.powi(step);
            let c2 = 1.0 - a.beta2.powi(step);
            for k in 0..p.len() {
                m[k] = a.beta1 * m[k] + (1.0 - a.beta1) * grad[k];
                v[k] = a.beta2 * v[k] + (1.0 - a.beta2) * grad[k] * grad[k];
                p[k] -= a.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + a.eps);
            }
        }
        let net = model.net(&p);
        let tr = net.loss_and_grad(rows, &train_idx, None);
        if !tr.loss.is_finite() || p.iter().any(|w| !w.is_finite()) {
            return Err(PredictorError::Diverged { epoch });
        }
        let va = (!val.is_empty()).then(|| net.loss_and_grad(rows, &val, None));
        epochs.push(EpochStats {
            epoch,
            train_loss: tr.loss,
            val_loss: va.as_ref().map(|e| e.loss),
            train_accuracy: tr.correct as f64 / n_train as f64,
            val_accuracy: va.map(|e| e.correct as f64 / n_val as f64),
        });
    }
    if cfg.epochs > 0 {
        model.set_params(&p);
    }
    let test_accuracy = (!test.is_empty()).then(|| accuracy(model, rows, &test));
    Ok(TrainReport {
        train_size: n_train,
        val_size: n_val,
        test_size: n_test,
        initial_train_loss,
        epochs,
        test_accuracy,
    })
}

fn accuracy(model: &FcnnModel, rows: &[DatasetRow], idx: &[usize]) -> f64 {
    let p = model.params_f64();
    model.net(&p).loss_and_grad(rows, idx, None).correct as f64 / idx.len() as f64
}
