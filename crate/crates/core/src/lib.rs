//! Hypergraph message-passing neural networks.
//!
//! A layer is one point of a design space: messaging functions, updating
//! functions and aggregators are chosen by name from registries
//! ([`hmpnn::slot_registry`], [`hmpnn::aggregator_registry`]), so new
//! variants plug in without touching the layer itself. Models, optimizers
//! and expansions are selected the same way.

pub mod baselines;
pub mod config;
pub mod data;
pub mod error;
pub mod expansions;
pub mod experiment;
pub mod hmpnn;
pub mod hypergraph;
pub mod model;
pub mod nn;
pub mod params;
pub mod registry;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, SparseIncidence};
pub use params::{Forward, Mode, ParamId, ParamStore, Rng};
pub use tensor::{Activation, Matrix, Var};
