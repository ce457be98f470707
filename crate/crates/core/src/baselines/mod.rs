//! Reference architectures expressed alongside the message-passing layer.

pub mod allset;
pub mod hgnn;

pub use allset::{allset_as_config, allset_block, AllSetBlock, AllSetDims};
pub use hgnn::{hgnn_as_hmpnn, hgnn_conv, hgnn_conv_var, hgnn_layer_config, HgnnLayerParams, ZeroDegreePolicy};
