//! The hypergraph message-passing layer and its regularisers.

pub mod aggregate;
pub mod config;
pub mod functions;
pub mod layer;
pub mod regularize;

pub use aggregate::{aggregator_registry, Aggregator, AggregatorRegistry};
pub use config::{AdjacencyDropoutMode, DropoutScaling, LayerConfig};
pub use functions::{slot_registry, InputKind, Slot, SlotContext, SlotFn, SlotInput, SlotRegistry, SlotSpec};
pub use layer::{forward_layer, forward_layer_eval, HmpnnLayer, LayerContext};
pub use regularize::{
    adjacency_dropout, dropout_mask_from_keep, dropout_var, regular_dropout, sample_dropout_mask, BatchNorm,
};
