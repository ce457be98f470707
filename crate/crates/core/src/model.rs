//! Node-classification models built from a [`ModelConfig`] and looked up by
//! name in [`model_registry`].

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::baselines::{allset_as_config, hgnn_conv_var, hgnn_layer_config, ZeroDegreePolicy};
use crate::error::{Error, Result};
use crate::hmpnn::{dropout_var, HmpnnLayer, LayerConfig, LayerContext};
use crate::hypergraph::Hypergraph;
use crate::nn::Linear;
use crate::params::{Forward, ParamId, ParamStore, Rng};
use crate::registry::Registry;
use crate::tensor::{Activation, Matrix, Var};

/// Structure and inputs a model runs on.
#[derive(Clone, Debug)]
pub struct GraphInputs {
    pub context: LayerContext,
    pub features: Matrix,
    /// Initial hyperedge representations.
    pub edge_features: Matrix,
}

impl GraphInputs {
    pub fn new(h: &Hypergraph, features: Matrix, edge_features: Matrix) -> Result<Self> {
        if features.rows() != h.num_vertices() || edge_features.rows() != h.num_hyperedges() {
            return Err(Error::shape(
                "GraphInputs",
                format!(
                    "{} feature rows and {} hyperedge rows for a hypergraph with {} vertices and {} hyperedges",
                    features.rows(),
                    edge_features.rows(),
                    h.num_vertices(),
                    h.num_hyperedges()
                ),
            ));
        }
        Ok(Self {
            context: LayerContext::new(h),
            features,
            edge_features,
        })
    }

    pub fn dims(&self, num_classes: usize) -> ModelDims {
        ModelDims {
            in_dim: self.features.cols(),
            edge_dim: self.edge_features.cols(),
            num_classes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub in_dim: usize,
    pub edge_dim: usize,
    pub num_classes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Registry name: `hmpnn`, `hgnn`, `hmpnn-as-hgnn` or `allset-config`.
    pub kind: String,
    pub num_layers: usize,
    pub hidden_dim: usize,
    /// Activation of the last layer, whose output is used as logits.
    pub output_activation: Activation,
    pub zero_degree: ZeroDegreePolicy,
    /// Settings shared by every layer; dims are filled in per layer.
    pub layer: LayerConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: "hmpnn".into(),
            num_layers: 2,
            hidden_dim: 2,
            output_activation: Activation::Identity,
            zero_degree: ZeroDegreePolicy::Zero,
            layer: LayerConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 {
            return Err(Error::config("model.num_layers", "must be positive"));
        }
        if self.hidden_dim == 0 {
            return Err(Error::config("model.hidden_dim", "must be positive"));
        }
        let mut probe = self.layer.clone();
        probe.hidden_dim = self.hidden_dim;
        probe.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::config(format!("layer.{key}"), message),
            other => other,
        })?;
        model_registry()
            .get(&self.kind)
            .map_err(|e| Error::config("model.kind", e.to_string()))?;
        Ok(())
    }

    /// Per-layer `(in, out, activation)` for a stack over `dims`.
    fn layer_shapes(&self, dims: ModelDims) -> Vec<(usize, usize, Activation)> {
        (0..self.num_layers)
            .map(|i| {
                let last = i + 1 == self.num_layers;
                (
                    if i == 0 { dims.in_dim } else { self.hidden_dim },
                    if last { dims.num_classes } else { self.hidden_dim },
                    if last {
                        self.output_activation
                    } else {
                        self.layer.activation
                    },
                )
            })
            .collect()
    }
}

/// A model producing `|V| x num_classes` logits.
pub trait NodeModel: Send + Sync {
    fn kind(&self) -> &str;

    fn forward(&self, fwd: &mut Forward, inputs: &GraphInputs) -> Result<Var>;
}

pub type ModelFactory = fn(&ModelConfig, ModelDims, &mut ParamStore, &mut Rng) -> Result<Box<dyn NodeModel>>;

pub type ModelRegistry = Registry<ModelFactory>;

pub fn model_registry() -> ModelRegistry {
    let mut r: ModelRegistry = Registry::new("model");
    r.register("hmpnn", build_hmpnn as ModelFactory)
        .register("hgnn", build_hgnn)
        .register("hmpnn-as-hgnn", build_hmpnn_as_hgnn)
        .register("allset-config", build_allset);
    r
}

/// Builds the model named by `cfg.kind` with parameters initialised from
/// `seed`.
pub fn build_model(cfg: &ModelConfig, dims: ModelDims, seed: u64) -> Result<(Box<dyn NodeModel>, ParamStore)> {
    cfg.validate()?;
    let factory = *model_registry().get(&cfg.kind)?;
    let mut store = ParamStore::new();
    let mut rng = Rng::seed_from_u64(seed);
    let model = factory(cfg, dims, &mut store, &mut rng)?;
    Ok((model, store))
}

/// A stack of message-passing layers. The logits are the vertex output of
/// the last layer, or of a linear readout placed after it.
pub struct LayerStack {
    kind: &'static str,
    layers: Vec<HmpnnLayer>,
    readout: Option<(Linear, Activation)>,
}

impl LayerStack {
    /// `make(i, in, out, activation)` gives the config of layer `i`, whose
    /// hyperedge input width is then filled in from the previous layer.
    pub fn build(
        kind: &'static str,
        cfg: &ModelConfig,
        dims: ModelDims,
        store: &mut ParamStore,
        rng: &mut Rng,
        make: impl Fn(usize, usize, usize, Activation) -> LayerConfig,
    ) -> Result<Self> {
        let mut layers = Vec::with_capacity(cfg.num_layers);
        let mut edge_dim = dims.edge_dim;
        for (i, (in_dim, out_dim, act)) in cfg.layer_shapes(dims).into_iter().enumerate() {
            let mut lc = make(i, in_dim, out_dim, act);
            lc.edge_dim = edge_dim;
            let layer = HmpnnLayer::build(&lc, store, rng, &format!("layer{i}"))?;
            edge_dim = layer.edge_out_dim();
            layers.push(layer);
        }
        Ok(Self {
            kind,
            layers,
            readout: None,
        })
    }

    /// Adds a `width -> num_classes` linear map after the last layer.
    fn with_readout(
        mut self,
        store: &mut ParamStore,
        rng: &mut Rng,
        width: usize,
        dims: ModelDims,
        act: Activation,
    ) -> Self {
        let linear = Linear::build(store, rng, "readout", width, None, dims.num_classes, true);
        self.readout = Some((linear, act));
        self
    }

    pub fn layers(&self) -> &[HmpnnLayer] {
        &self.layers
    }
}

impl NodeModel for LayerStack {
    fn kind(&self) -> &str {
        self.kind
    }

    fn forward(&self, fwd: &mut Forward, inputs: &GraphInputs) -> Result<Var> {
        let mut x = fwd.tape.constant(inputs.features.clone());
        let mut w = fwd.tape.constant(inputs.edge_features.clone());
        for layer in &self.layers {
            (x, w) = layer.forward(fwd, &inputs.context, x, w)?;
        }
        match &self.readout {
            Some((linear, act)) => {
                let logits = linear.forward(fwd, x, None)?;
                Ok(fwd.tape.elementwise(*act, logits))
            }
            None => Ok(x),
        }
    }
}

fn build_hmpnn(
    cfg: &ModelConfig,
    dims: ModelDims,
    store: &mut ParamStore,
    rng: &mut Rng,
) -> Result<Box<dyn NodeModel>> {
    let stack = LayerStack::build("hmpnn", cfg, dims, store, rng, |_, in_dim, out_dim, activation| {
        LayerConfig {
            in_dim,
            out_dim,
            hidden_dim: cfg.hidden_dim,
            activation,
            ..cfg.layer.clone()
        }
    })?;
    Ok(Box::new(stack))
}

/// Attention layers keep the hidden width throughout: a layer-normalised
/// output only a few classes wide saturates and passes almost no gradient.
/// A linear readout produces the logits.
fn build_allset(
    cfg: &ModelConfig,
    dims: ModelDims,
    store: &mut ParamStore,
    rng: &mut Rng,
) -> Result<Box<dyn NodeModel>> {
    let hidden = ModelDims {
        num_classes: cfg.hidden_dim,
        ..dims
    };
    let stack = LayerStack::build(
        "allset-config",
        cfg,
        hidden,
        store,
        rng,
        |_, in_dim, out_dim, activation| {
            allset_as_config(&LayerConfig {
                in_dim,
                out_dim,
                hidden_dim: cfg.hidden_dim,
                activation,
                ..cfg.layer.clone()
            })
        },
    )?;
    Ok(Box::new(stack.with_readout(
        store,
        rng,
        cfg.hidden_dim,
        dims,
        cfg.output_activation,
    )))
}

fn build_hmpnn_as_hgnn(
    cfg: &ModelConfig,
    dims: ModelDims,
    store: &mut ParamStore,
    rng: &mut Rng,
) -> Result<Box<dyn NodeModel>> {
    let stack = LayerStack::build(
        "hmpnn-as-hgnn",
        cfg,
        dims,
        store,
        rng,
        |_, in_dim, out_dim, activation| {
            let base = hgnn_layer_config(in_dim, out_dim, activation);
            LayerConfig {
                vertex_dropout_rate: cfg.layer.vertex_dropout_rate,
                adjacency_dropout_rate: cfg.layer.adjacency_dropout_rate,
                adjacency_dropout_mode: cfg.layer.adjacency_dropout_mode,
                dropout_scaling: cfg.layer.dropout_scaling,
                ..base
            }
        },
    )?;
    Ok(Box::new(stack))
}

/// Stacked spectral convolutions with dropout on each convolution's input.
pub struct Hgnn {
    projections: Vec<(ParamId, Activation)>,
    dropout_rate: f64,
    scaling: crate::hmpnn::DropoutScaling,
    zero_degree: ZeroDegreePolicy,
}

impl NodeModel for Hgnn {
    fn kind(&self) -> &str {
        "hgnn"
    }

    fn forward(&self, fwd: &mut Forward, inputs: &GraphInputs) -> Result<Var> {
        if self.zero_degree == ZeroDegreePolicy::Error {
            if let Some(v) = inputs.context.vertex_inv_sqrt_degree().iter().position(|&d| d == 0.0) {
                return Err(Error::Structure(format!("vertex {v} belongs to no hyperedge")));
            }
        }
        let mut x = fwd.tape.constant(inputs.features.clone());
        for &(theta, act) in &self.projections {
            x = dropout_var(fwd, x, self.dropout_rate, self.scaling)?;
            let theta = fwd.param(theta);
            x = hgnn_conv_var(fwd, &inputs.context, x, theta, act)?;
        }
        Ok(x)
    }
}

fn build_hgnn(cfg: &ModelConfig, dims: ModelDims, store: &mut ParamStore, rng: &mut Rng) -> Result<Box<dyn NodeModel>> {
    let projections = cfg
        .layer_shapes(dims)
        .into_iter()
        .enumerate()
        .map(|(i, (in_dim, out_dim, act))| {
            let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let theta = store.add_param(
                format!("layer{i}.theta"),
                Matrix::symmetric_uniform(in_dim, out_dim, bound, rng),
            );
            (theta, act)
        })
        .collect();
    Ok(Box::new(Hgnn {
        projections,
        dropout_rate: cfg.layer.vertex_dropout_rate,
        scaling: cfg.layer.dropout_scaling,
        zero_degree: cfg.zero_degree,
    }))
}
