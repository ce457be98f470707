//! Optimizers, selected by name from [`optimizer_registry`].

use crate::params::{ParamGrads, ParamStore};
use crate::registry::Registry;
use crate::tensor::Matrix;

use super::TrainConfig;

pub trait Optimizer: Send {
    /// Updates every trainable entry that received a gradient.
    fn step(&mut self, store: &mut ParamStore, grads: &ParamGrads);
}

pub type OptimizerFactory = fn(&TrainConfig) -> Box<dyn Optimizer>;

pub type OptimizerRegistry = Registry<OptimizerFactory>;

/// Built-in optimizers: `adam`, `sgd`.
pub fn optimizer_registry() -> OptimizerRegistry {
    let mut r: OptimizerRegistry = Registry::new("optimizer");
    r.register(
        "adam",
        (|c: &TrainConfig| Box::new(Adam::new(c)) as Box<dyn Optimizer>) as OptimizerFactory,
    )
    .register("sgd", |c| Box::new(Sgd::new(c)));
    r
}

/// Decoupled weight decay: `param *= 1 - lr * wd`.
fn decay(value: &mut Matrix, lr: f64, wd: f64) {
    if wd != 0.0 {
        let keep = 1.0 - lr * wd;
        value.data_mut().iter_mut().for_each(|v| *v *= keep);
    }
}

pub struct Sgd {
    lr: f64,
    wd: f64,
}

impl Sgd {
    pub fn new(cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            wd: cfg.weight_decay,
        }
    }
}

impl Optimizer for Sgd {
    fn step(&mut self, store: &mut ParamStore, grads: &ParamGrads) {
        for id in store.ids().collect::<Vec<_>>() {
            let Some(g) = grads.get(id) else { continue };
            if !store.entry(id).trainable {
                continue;
            }
            let p = store.get_mut(id);
            decay(p, self.lr, self.wd);
            for (v, g) in p.data_mut().iter_mut().zip(g.data()) {
                *v -= self.lr * g;
            }
        }
    }
}

/// Adam with bias correction.
pub struct Adam {
    lr: f64,
    wd: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    moments: Vec<Option<(Vec<f64>, Vec<f64>)>>,
}

impl Adam {
    pub fn new(cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            wd: cfg.weight_decay,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_eps,
            t: 0,
            moments: Vec::new(),
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, store: &mut ParamStore, grads: &ParamGrads) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        if self.moments.len() < store.len() {
            self.moments.resize(store.len(), None);
        }
        for id in store.ids().collect::<Vec<_>>() {
            let Some(g) = grads.get(id) else { continue };
            if !store.entry(id).trainable {
                continue;
            }
            let (m, v) = self.moments[id.index()].get_or_insert_with(|| (vec![0.0; g.len()], vec![0.0; g.len()]));
            let p = store.get_mut(id);
            decay(p, self.lr, self.wd);
            for (((p, &g), m), v) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Forward, Mode, Rng};
    use rand::SeedableRng;

    fn grads_of(store: &ParamStore, scale: f64) -> ParamGrads {
        // loss = scale * sum(p) gives gradient `scale` everywhere.
        let mut rng = Rng::seed_from_u64(0);
        let mut fwd = Forward::new(store, Mode::Train, &mut rng);
        let id = store.ids().next().unwrap();
        let p = fwd.param(id);
        let s = fwd.tape.sum(p);
        let loss = fwd.tape.mul_const(s, Matrix::scalar(scale)).unwrap();
        fwd.backward(loss).unwrap()
    }

    fn store_with(values: &[f64]) -> ParamStore {
        let mut store = ParamStore::new();
        store.add_param("p", Matrix::row_vector(values.to_vec()));
        store
    }

    fn cfg(lr: f64, wd: f64) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            weight_decay: wd,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn sgd_step() {
        let mut store = store_with(&[1.0]);
        let grads = grads_of(&store, 2.0);
        Sgd::new(&cfg(0.1, 0.0)).step(&mut store, &grads);
        assert!((store.entries()[0].value.get(0, 0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut store = store_with(&[1.0, -3.0]);
        let grads = grads_of(&store, 0.37);
        Adam::new(&cfg(0.01, 0.0)).step(&mut store, &grads);
        let p = &store.entries()[0].value;
        assert!((p.get(0, 0) - 0.99).abs() < 1e-6);
        assert!((p.get(0, 1) + 3.01).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_without_decay_is_stationary() {
        let mut store = store_with(&[0.5, 2.0]);
        let grads = grads_of(&store, 0.0);
        let before = store.clone();
        Adam::new(&cfg(0.01, 0.0)).step(&mut store, &grads);
        assert_eq!(store, before);
        Sgd::new(&cfg(0.01, 0.0)).step(&mut store, &grads);
        assert_eq!(store, before);
    }

    #[test]
    fn decay_is_applied_before_update() {
        let mut store = store_with(&[2.0]);
        let grads = grads_of(&store, 0.0);
        Sgd::new(&cfg(0.1, 0.5)).step(&mut store, &grads);
        assert!((store.entries()[0].value.get(0, 0) - 1.9).abs() < 1e-15);
    }
}
