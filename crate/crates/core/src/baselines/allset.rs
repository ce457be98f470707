//! Multiset attention block: per-head attention of a learnable seed over
//! element-wise key/value projections, followed by two residual layer norms.

use crate::error::{Error, Result};
use crate::hmpnn::LayerConfig;
use crate::nn::{LayerNorm, Mlp};
use crate::params::{Forward, ParamId, ParamStore, Rng};
use crate::tensor::{Activation, Matrix, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AllSetDims {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Concatenated width of all heads.
    pub out_dim: usize,
    pub heads: usize,
}

impl AllSetDims {
    pub fn head_dim(&self) -> usize {
        self.out_dim / self.heads
    }
}

#[derive(Clone, Debug)]
pub struct AttentionHead {
    pub key: Mlp,
    pub value: Mlp,
    /// `1 x head_dim` learnable query.
    pub seed: ParamId,
}

#[derive(Clone, Debug)]
pub struct AllSetBlock {
    pub heads: Vec<AttentionHead>,
    pub feed_forward: Mlp,
    pub first_norm: LayerNorm,
    pub second_norm: LayerNorm,
    dims: AllSetDims,
}

impl AllSetBlock {
    pub fn build(store: &mut ParamStore, rng: &mut Rng, prefix: &str, dims: AllSetDims) -> Result<Self> {
        if dims.heads == 0 || !dims.out_dim.is_multiple_of(dims.heads) {
            return Err(Error::config(
                "allset_heads",
                format!("output width {} is not divisible by {} heads", dims.out_dim, dims.heads),
            ));
        }
        let d = dims.head_dim();
        let heads = (0..dims.heads)
            .map(|i| {
                let p = format!("{prefix}.head{i}");
                let mlp = |name: &str, store: &mut ParamStore, rng: &mut Rng| {
                    Mlp::build(
                        store,
                        rng,
                        &format!("{p}.{name}"),
                        dims.input_dim,
                        None,
                        dims.hidden_dim,
                        d,
                        Activation::Relu,
                    )
                };
                let key = mlp("key", store, rng);
                let value = mlp("value", store, rng);
                let bound = (6.0 / (1 + d) as f64).sqrt();
                let seed = store.add_param(format!("{p}.seed"), Matrix::symmetric_uniform(1, d, bound, rng));
                AttentionHead { key, value, seed }
            })
            .collect();
        let feed_forward = Mlp::build(
            store,
            rng,
            &format!("{prefix}.feed_forward"),
            dims.out_dim,
            None,
            dims.hidden_dim,
            dims.out_dim,
            Activation::Relu,
        );
        Ok(Self {
            heads,
            feed_forward,
            first_norm: LayerNorm::build(store, &format!("{prefix}.norm0"), dims.out_dim),
            second_norm: LayerNorm::build(store, &format!("{prefix}.norm1"), dims.out_dim),
            dims,
        })
    }

    pub fn dims(&self) -> AllSetDims {
        self.dims
    }

    /// Concatenated head outputs (`1 x out_dim`) and the concatenated seeds.
    pub fn multihead(&self, fwd: &mut Forward, set: Var) -> Result<(Var, Var)> {
        let (rows, cols) = fwd.tape.shape(set);
        if rows == 0 {
            return Err(Error::Contract("attention over an empty set".into()));
        }
        if cols != self.dims.input_dim {
            return Err(Error::shape(
                "allset_block",
                format!("set width {cols}, expected {}", self.dims.input_dim),
            ));
        }
        let mut outputs = Vec::with_capacity(self.heads.len());
        let mut seeds = Vec::with_capacity(self.heads.len());
        for head in &self.heads {
            let keys = head.key.forward(fwd, set, None)?;
            let values = head.value.forward(fwd, set, None)?;
            let seed = fwd.param(head.seed);
            let keys_t = fwd.tape.transpose(keys);
            let scores = fwd.tape.matmul(seed, keys_t)?;
            let weights = fwd.tape.row_softmax(scores);
            outputs.push(fwd.tape.matmul(weights, values)?);
            seeds.push(seed);
        }
        Ok((fwd.tape.concat_cols(&outputs)?, fwd.tape.concat_cols(&seeds)?))
    }

    /// `1 x out_dim` summary of the rows of `set`.
    pub fn forward(&self, fwd: &mut Forward, set: Var) -> Result<Var> {
        let (mh, seed) = self.multihead(fwd, set)?;
        let y = fwd.tape.add(seed, mh)?;
        let y = self.first_norm.forward(fwd, y)?;
        let z = self.feed_forward.forward(fwd, y, None)?;
        let z = fwd.tape.add(y, z)?;
        self.second_norm.forward(fwd, z)
    }
}

/// Applies `block` to the multiset held in the rows of `set`.
pub fn allset_block(fwd: &mut Forward, block: &AllSetBlock, set: Var) -> Result<Var> {
    block.forward(fwd, set)
}

/// Identity messaging with attention-block updates on both sides. Dims,
/// dropout and other settings are taken from `base`.
pub fn allset_as_config(base: &LayerConfig) -> LayerConfig {
    LayerConfig {
        vertex_message: "identity".into(),
        edge_message: "identity".into(),
        edge_update: "allset".into(),
        vertex_update: "allset".into(),
        ..base.clone()
    }
}
