//! Versioned JSON checkpoints holding the configs and every stored tensor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::{build_model, ModelConfig, ModelDims, NodeModel};
use crate::params::ParamStore;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub dims: ModelDims,
    pub params: ParamStore,
}

impl Checkpoint {
    pub fn new(model: &ModelConfig, train: &TrainConfig, dims: ModelDims, params: &ParamStore) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            model: model.clone(),
            train: train.clone(),
            dims,
            params: params.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Self = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }

    /// Rebuilds the model from the stored config and loads the tensors.
    pub fn restore(&self) -> Result<(Box<dyn NodeModel>, ParamStore)> {
        let (model, mut store) = build_model(&self.model, self.dims, self.train.seed)?;
        store.load_from(&self.params)?;
        Ok((model, store))
    }
}
