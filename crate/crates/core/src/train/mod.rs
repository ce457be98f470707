//! Loss, training loop with early stopping, evaluation and checkpoints.

pub mod checkpoint;
pub mod optim;

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::data::{mask_indices, DatasetBundle};
use crate::error::{Error, Result};
use crate::model::{GraphInputs, NodeModel};
use crate::params::{Forward, Mode, ParamStore, Rng};
use crate::tensor::{Matrix, Tape, Var};

pub use checkpoint::Checkpoint;
pub use optim::{optimizer_registry, Adam, Optimizer, OptimizerRegistry, Sgd};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Registry name: `adam` or `sgd`.
    pub optimizer: String,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Epochs without a validation improvement before stopping.
    pub early_stop_patience: usize,
    pub seed: u64,
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            optimizer: "adam".into(),
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            early_stop_patience: 100,
            seed: 0,
            eval_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be a positive number, got {v}")))
            }
        };
        positive("train.learning_rate", self.learning_rate)?;
        positive("train.adam_eps", self.adam_eps)?;
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::config(
                "train.weight_decay",
                format!("must be non-negative, got {}", self.weight_decay),
            ));
        }
        for (key, b) in [
            ("train.adam_beta1", self.adam_beta1),
            ("train.adam_beta2", self.adam_beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(key, format!("must lie in [0, 1), got {b}")));
            }
        }
        for (key, v) in [("train.epochs", self.epochs), ("train.eval_every", self.eval_every)] {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        optimizer_registry()
            .get(&self.optimizer)
            .map_err(|e| Error::config("train.optimizer", e.to_string()))?;
        Ok(())
    }
}

/// Mean cross entropy over the vertices selected by `mask`.
pub fn masked_cross_entropy(tape: &mut Tape, logits: Var, labels: &[usize], mask: &[bool]) -> Result<Var> {
    if mask.len() != labels.len() {
        return Err(Error::shape("masked_cross_entropy", "mask and labels differ in length"));
    }
    let rows = mask_indices(mask);
    if rows.is_empty() {
        return Err(Error::Contract("loss over an empty mask".into()));
    }
    let targets: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
    tape.cross_entropy(logits, &rows, &targets)
}

/// Fraction of masked rows whose arg-max (lowest index on ties) equals the
/// label.
pub fn accuracy(logits: &Matrix, labels: &[usize], mask: &[bool]) -> Result<f64> {
    let rows = mask_indices(mask);
    if rows.is_empty() {
        return Err(Error::Contract("accuracy over an empty mask".into()));
    }
    let hits = rows.iter().filter(|&&r| logits.argmax_row(r) == labels[r]).count();
    Ok(hits as f64 / rows.len() as f64)
}

/// Evaluation-mode logits: no dropout, running batch-norm statistics.
pub fn predict(model: &dyn NodeModel, store: &ParamStore, inputs: &GraphInputs) -> Result<Matrix> {
    let mut rng = Rng::seed_from_u64(0);
    let mut fwd = Forward::new(store, Mode::Eval, &mut rng);
    let logits = model.forward(&mut fwd, inputs)?;
    Ok(fwd.tape.value(logits).clone())
}

pub fn evaluate(
    model: &dyn NodeModel,
    store: &ParamStore,
    inputs: &GraphInputs,
    labels: &[usize],
    mask: &[bool],
) -> Result<f64> {
    accuracy(&predict(model, store, inputs)?, labels, mask)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub epochs: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    /// Test accuracy of the restored best-validation parameters.
    pub test_acc: f64,
}

impl Metrics {
    /// One row per evaluated epoch. Timings are left out so reruns produce
    /// identical files.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,train_acc,val_acc,test_acc\n");
        for m in &self.epochs {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.epoch, m.train_loss, m.train_acc, m.val_acc, m.test_acc
            );
        }
        out
    }

    pub fn total_seconds(&self) -> f64 {
        self.epochs.iter().map(|m| m.seconds).sum()
    }
}

/// Full-batch training on the train mask. Parameters are initialised by the
/// caller; on return `store` holds the best-validation parameters.
pub fn fit(
    model: &dyn NodeModel,
    store: &mut ParamStore,
    inputs: &GraphInputs,
    bundle: &DatasetBundle,
    cfg: &TrainConfig,
) -> Result<Metrics> {
    cfg.validate()?;
    let mut optimizer = (optimizer_registry().get(&cfg.optimizer)?)(cfg);
    let mut rng = Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut metrics = Metrics::default();
    let mut best: Option<ParamStore> = None;
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        let (loss, grads, updates) = {
            let mut fwd = Forward::new(store, Mode::Train, &mut rng);
            let logits = model.forward(&mut fwd, inputs)?;
            let loss = masked_cross_entropy(&mut fwd.tape, logits, &bundle.labels, &bundle.train_mask)?;
            let value = fwd.tape.value(loss).get(0, 0);
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    learning_rate: cfg.learning_rate,
                });
            }
            (value, fwd.backward(loss)?, fwd.take_buffer_updates())
        };
        store.apply_buffer_updates(updates);
        optimizer.step(store, &grads);

        if epoch % cfg.eval_every == 0 || epoch == cfg.epochs {
            let logits = predict(model, store, inputs)?;
            let val_acc = accuracy(&logits, &bundle.labels, &bundle.val_mask)?;
            metrics.epochs.push(EpochMetrics {
                epoch,
                train_loss: loss,
                train_acc: accuracy(&logits, &bundle.labels, &bundle.train_mask)?,
                val_acc,
                test_acc: accuracy(&logits, &bundle.labels, &bundle.test_mask)?,
                seconds: started.elapsed().as_secs_f64(),
            });
            if val_acc > best_val {
                best_val = val_acc;
                best_epoch = epoch;
                best = Some(store.clone());
            }
        }
        if best.is_some() && epoch - best_epoch >= cfg.early_stop_patience {
            log::info!("early stop at epoch {epoch}; best validation accuracy {best_val:.4} at epoch {best_epoch}");
            break;
        }
    }
    if let Some(best) = best {
        store.load_from(&best)?;
    }
    metrics.best_epoch = best_epoch;
    metrics.best_val_acc = best_val;
    metrics.test_acc = evaluate(model, store, inputs, &bundle.labels, &bundle.test_mask)?;
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_give_log_classes() {
        let mut tape = Tape::new();
        let logits = tape.variable(Matrix::zeros(3, 7));
        let loss = masked_cross_entropy(&mut tape, logits, &[0, 3, 6], &[true, false, true]).unwrap();
        assert!((tape.value(loss).get(0, 0) - 7f64.ln()).abs() < 1e-12);
        assert!(matches!(
            masked_cross_entropy(&mut tape, logits, &[0, 3, 6], &[false; 3]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn confident_correct_logit_has_no_loss() {
        let mut tape = Tape::new();
        let logits = tape.variable(Matrix::from_rows(&[[800.0, 0.0, 0.0]]).unwrap());
        let loss = masked_cross_entropy(&mut tape, logits, &[0], &[true]).unwrap();
        assert!(tape.value(loss).get(0, 0) < 1e-300);
    }

    #[test]
    fn accuracy_fixtures() {
        let labels = [0, 1, 1, 0];
        let perfect = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(accuracy(&perfect, &labels, &[true; 4]).unwrap(), 1.0);
        // Negated one-hot: the wrong class wins outright for every row.
        let negated = perfect.map(|v| -v);
        assert_eq!(accuracy(&negated, &labels, &[true; 4]).unwrap(), 0.0);
        // All ties: class 0 wins.
        assert_eq!(accuracy(&Matrix::zeros(4, 2), &labels, &[true; 4]).unwrap(), 0.5);
        assert!(accuracy(&perfect, &labels, &[false; 4]).is_err());
    }

    #[test]
    fn config_validation_names_field() {
        let cfg = TrainConfig {
            learning_rate: -0.1,
            ..TrainConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "train.learning_rate"));
        let cfg = TrainConfig {
            optimizer: "lbfgs".into(),
            ..TrainConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "train.optimizer"));
    }
}
