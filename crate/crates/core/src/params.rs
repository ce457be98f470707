//! Parameter storage and the per-pass forward context.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Gradients, Matrix, Tape, Var};

/// RNG used for initialisation, dropout and splits.
pub type Rng = ChaCha8Rng;

/// Whether stochastic regularisers are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub value: Matrix,
    /// Buffers (batch-norm running statistics) are stored but not optimised.
    pub trainable: bool,
}

/// Ordered collection of named tensors. Models hold [`ParamId`]s into it, so
/// rebuilding a model from the same config reproduces the same layout.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_param(&mut self, name: impl Into<String>, value: Matrix) -> ParamId {
        self.push(name.into(), value, true)
    }

    pub fn add_buffer(&mut self, name: impl Into<String>, value: Matrix) -> ParamId {
        self.push(name.into(), value, false)
    }

    fn push(&mut self, name: String, value: Matrix, trainable: bool) -> ParamId {
        self.entries.push(ParamEntry { name, value, trainable });
        ParamId(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Matrix {
        &self.entries[id.0].value
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix {
        &mut self.entries[id.0].value
    }

    pub fn entry(&self, id: ParamId) -> &ParamEntry {
        &self.entries[id.0]
    }

    /// Replaces a value, keeping its shape.
    pub fn set(&mut self, id: ParamId, value: Matrix) -> Result<()> {
        let slot = &mut self.entries[id.0];
        if slot.value.shape() != value.shape() {
            return Err(Error::shape(
                "ParamStore::set",
                format!("{}: {:?} -> {:?}", slot.name, slot.value.shape(), value.shape()),
            ));
        }
        slot.value = value;
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|e| e.name == name).map(ParamId)
    }

    pub fn num_scalars(&self) -> usize {
        self.entries.iter().filter(|e| e.trainable).map(|e| e.value.len()).sum()
    }

    /// Copies every value from `other`, which must have the same layout.
    pub fn load_from(&mut self, other: &ParamStore) -> Result<()> {
        if other.entries.len() != self.entries.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                self.entries.len(),
                other.entries.len()
            )));
        }
        for (mine, theirs) in self.entries.iter_mut().zip(&other.entries) {
            if mine.name != theirs.name || mine.value.shape() != theirs.value.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor `{}` {:?} does not match `{}` {:?}",
                    mine.name,
                    mine.value.shape(),
                    theirs.name,
                    theirs.value.shape()
                )));
            }
            mine.value = theirs.value.clone();
        }
        Ok(())
    }

    pub fn apply_buffer_updates(&mut self, updates: Vec<(ParamId, Matrix)>) {
        for (id, value) in updates {
            self.entries[id.0].value = value;
        }
    }
}

/// Gradients for every entry of a [`ParamStore`]; `None` where a parameter
/// did not take part in the pass.
#[derive(Clone, Debug)]
pub struct ParamGrads {
    grads: Vec<Option<Matrix>>,
}

impl ParamGrads {
    pub fn get(&self, id: ParamId) -> Option<&Matrix> {
        self.grads.get(id.0).and_then(Option::as_ref)
    }
}

/// State for one forward pass: the tape, lazily-created parameter leaves,
/// the mode and the RNG used by dropout.
pub struct Forward<'a> {
    pub tape: Tape,
    store: &'a ParamStore,
    leaves: Vec<Option<Var>>,
    mode: Mode,
    rng: &'a mut Rng,
    buffer_updates: Vec<(ParamId, Matrix)>,
}

impl<'a> Forward<'a> {
    pub fn new(store: &'a ParamStore, mode: Mode, rng: &'a mut Rng) -> Self {
        Self {
            tape: Tape::new(),
            store,
            leaves: vec![None; store.len()],
            mode,
            rng,
            buffer_updates: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_train(&self) -> bool {
        self.mode == Mode::Train
    }

    pub fn rng(&mut self) -> &mut Rng {
        self.rng
    }

    pub fn store(&self) -> &ParamStore {
        self.store
    }

    /// Tape leaf for a stored tensor; created once per pass.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.leaves[id.0] {
            return v;
        }
        let entry = self.store.entry(id);
        let v = if entry.trainable {
            self.tape.variable(entry.value.clone())
        } else {
            self.tape.constant(entry.value.clone())
        };
        self.leaves[id.0] = Some(v);
        v
    }

    /// Value a buffer should hold after this pass (applied by the caller).
    pub fn update_buffer(&mut self, id: ParamId, value: Matrix) {
        self.buffer_updates.push((id, value));
    }

    pub fn take_buffer_updates(&mut self) -> Vec<(ParamId, Matrix)> {
        std::mem::take(&mut self.buffer_updates)
    }

    /// Runs the reverse sweep and maps the result onto store entries.
    pub fn backward(&self, loss: Var) -> Result<ParamGrads> {
        let grads: Gradients = self.tape.backward(loss)?;
        let per_param = self
            .leaves
            .iter()
            .map(|leaf| leaf.and_then(|v| grads.get(v).cloned()))
            .collect();
        Ok(ParamGrads { grads: per_param })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn params_are_leaves_created_once() {
        let mut store = ParamStore::new();
        let w = store.add_param("w", Matrix::filled(1, 2, 3.0));
        let b = store.add_buffer("b", Matrix::zeros(1, 2));
        let mut rng = Rng::seed_from_u64(0);
        let mut fwd = Forward::new(&store, Mode::Eval, &mut rng);
        let v1 = fwd.param(w);
        assert_eq!(v1, fwd.param(w));
        let vb = fwd.param(b);
        assert!(fwd.tape.requires_grad(v1));
        assert!(!fwd.tape.requires_grad(vb));
        let y = fwd.tape.add(v1, vb).unwrap();
        let loss = fwd.tape.sum(y);
        let g = fwd.backward(loss).unwrap();
        assert_eq!(g.get(w).unwrap().data(), &[1.0, 1.0]);
        assert!(g.get(b).is_none());
    }

    #[test]
    fn load_from_rejects_layout_mismatch() {
        let mut a = ParamStore::new();
        a.add_param("w", Matrix::zeros(2, 2));
        let mut b = ParamStore::new();
        b.add_param("w", Matrix::zeros(2, 3));
        assert!(a.load_from(&b).is_err());
        assert!(a.set(ParamId(0), Matrix::zeros(1, 1)).is_err());
    }
}
