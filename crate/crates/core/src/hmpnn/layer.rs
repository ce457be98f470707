use std::sync::Arc;

use rand::SeedableRng;

use super::aggregate::{aggregator_registry, Aggregator, AggregatorRegistry};
use super::config::LayerConfig;
use super::functions::{slot_registry, InputKind, Slot, SlotContext, SlotFn, SlotInput, SlotRegistry, SlotSpec};
use super::regularize::{adjacency_dropout, dropout_var, BatchNorm};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, SparseIncidence};
use crate::params::{Forward, Mode, ParamStore, Rng};
use crate::tensor::{Csr, Matrix, Var};

/// Structure shared by every layer applied to one hypergraph: the incidence,
/// degree normalisers and hyperedge weights.
#[derive(Clone, Debug)]
pub struct LayerContext {
    incidence: SparseIncidence,
    vertex_inv_sqrt_degree: Vec<f64>,
    edge_inv_sqrt_degree: Vec<f64>,
    edge_weights: Vec<f64>,
}

fn inv_sqrt(degrees: Vec<usize>) -> Vec<f64> {
    degrees
        .into_iter()
        .map(|d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect()
}

impl LayerContext {
    pub fn new(h: &Hypergraph) -> Self {
        Self {
            incidence: h.incidence(),
            vertex_inv_sqrt_degree: inv_sqrt(h.vertex_degrees()),
            edge_inv_sqrt_degree: inv_sqrt(h.hyperedge_degrees()),
            edge_weights: h.weights().to_vec(),
        }
    }

    pub fn incidence(&self) -> &SparseIncidence {
        &self.incidence
    }

    pub fn num_vertices(&self) -> usize {
        self.incidence.rows()
    }

    pub fn num_hyperedges(&self) -> usize {
        self.incidence.cols()
    }

    /// `degree^-1/2` per vertex, 0 for isolated vertices.
    pub fn vertex_inv_sqrt_degree(&self) -> &[f64] {
        &self.vertex_inv_sqrt_degree
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    fn on_vertices(&self) -> SlotContext<'_> {
        SlotContext {
            inv_sqrt_degree: &self.vertex_inv_sqrt_degree,
            edge_weights: &self.edge_weights,
        }
    }

    fn on_edges(&self) -> SlotContext<'_> {
        SlotContext {
            inv_sqrt_degree: &self.edge_inv_sqrt_degree,
            edge_weights: &self.edge_weights,
        }
    }
}

/// A built hypergraph message-passing layer: vertex messages, hyperedge
/// update, hyperedge messages, vertex update.
pub struct HmpnnLayer {
    config: LayerConfig,
    vertex_message: Box<dyn SlotFn>,
    edge_update: Box<dyn SlotFn>,
    edge_message: Box<dyn SlotFn>,
    vertex_update: Box<dyn SlotFn>,
    edge_aggregation: Arc<dyn Aggregator>,
    edge_message_aggregation: Arc<dyn Aggregator>,
    vertex_aggregation: Arc<dyn Aggregator>,
    edge_norm: Option<BatchNorm>,
    vertex_norm: Option<BatchNorm>,
}

impl std::fmt::Debug for HmpnnLayer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HmpnnLayer")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl HmpnnLayer {
    /// Builds with the built-in function and aggregator registries.
    pub fn build(cfg: &LayerConfig, store: &mut ParamStore, rng: &mut Rng, prefix: &str) -> Result<Self> {
        Self::build_with(cfg, &slot_registry(), &aggregator_registry(), store, rng, prefix)
    }

    pub fn build_with(
        cfg: &LayerConfig,
        slots: &SlotRegistry,
        aggregators: &AggregatorRegistry,
        store: &mut ParamStore,
        rng: &mut Rng,
        prefix: &str,
    ) -> Result<Self> {
        cfg.validate()?;
        let spec = |slot: Slot, input_dim: usize, state_dim: Option<usize>, out_dim: usize| SlotSpec {
            slot,
            prefix: format!("{prefix}.{}", slot.name()),
            input_dim,
            state_dim,
            out_dim,
            hidden_dim: cfg.hidden_dim,
            activation: cfg.activation,
            concat_state: cfg.concat_state,
            bias: cfg.bias,
            heads: cfg.allset_heads,
        };
        let make = |name: &str, spec: SlotSpec, store: &mut ParamStore, rng: &mut Rng| {
            let factory = slots
                .get(name)
                .map_err(|e| Error::config(spec.slot.name(), e.to_string()))?;
            factory(&spec, store, rng)
        };

        let vertex_message = make(
            &cfg.vertex_message,
            spec(Slot::VertexMessage, cfg.in_dim, None, cfg.hidden_dim),
            store,
            rng,
        )?;
        let msg_dim = vertex_message.out_dim();
        let edge_update = make(
            &cfg.edge_update,
            spec(Slot::EdgeUpdate, msg_dim, Some(cfg.edge_dim), cfg.hidden_dim),
            store,
            rng,
        )?;
        let edge_message = make(
            &cfg.edge_message,
            spec(Slot::EdgeMessage, msg_dim, Some(cfg.edge_dim), cfg.hidden_dim),
            store,
            rng,
        )?;
        if edge_message.input_kind() != InputKind::Aggregate || vertex_message.input_kind() != InputKind::Aggregate {
            return Err(Error::config(
                "edge_message",
                "messaging functions must consume a single argument",
            ));
        }
        let edge_msg_dim = edge_message.out_dim();
        let vertex_update = make(
            &cfg.vertex_update,
            spec(Slot::VertexUpdate, edge_msg_dim, Some(cfg.in_dim), cfg.out_dim),
            store,
            rng,
        )?;

        let aggregator = |key: &str, name: &str| {
            aggregators
                .get(name)
                .cloned()
                .map_err(|e| Error::config(key, e.to_string()))
        };
        let norm = |f: &dyn SlotFn, dim: usize, name: &str, store: &mut ParamStore| {
            (cfg.batch_norm && f.input_kind() == InputKind::Aggregate)
                .then(|| BatchNorm::build(store, &format!("{prefix}.{name}"), dim))
        };
        let edge_norm = norm(edge_update.as_ref(), msg_dim, "edge_norm", store);
        let vertex_norm = norm(vertex_update.as_ref(), edge_msg_dim, "vertex_norm", store);

        Ok(Self {
            config: cfg.clone(),
            edge_aggregation: aggregator("edge_aggregation", &cfg.edge_aggregation)?,
            edge_message_aggregation: aggregator("edge_message_aggregation", &cfg.edge_message_aggregation)?,
            vertex_aggregation: aggregator("vertex_aggregation", &cfg.vertex_aggregation)?,
            vertex_message,
            edge_update,
            edge_message,
            vertex_update,
            edge_norm,
            vertex_norm,
        })
    }

    pub fn config(&self) -> &LayerConfig {
        &self.config
    }

    /// Width of the vertex representation this layer produces.
    pub fn vertex_out_dim(&self) -> usize {
        self.vertex_update.out_dim()
    }

    /// Width of the hyperedge representation this layer produces.
    pub fn edge_out_dim(&self) -> usize {
        self.edge_update.out_dim()
    }

    /// Incidence used by this layer in this pass: a fresh adjacency-dropout
    /// sample in training, the full structure otherwise.
    pub fn sample_incidence(&self, fwd: &mut Forward, ctx: &LayerContext) -> Result<SparseIncidence> {
        let rate = self.config.adjacency_dropout_rate;
        if fwd.is_train() && rate > 0.0 {
            adjacency_dropout(ctx.incidence(), rate, self.config.adjacency_dropout_mode, fwd.rng())
        } else {
            Ok(ctx.incidence().clone())
        }
    }

    /// Per-vertex outgoing message.
    pub fn vertex_messages(&self, fwd: &mut Forward, ctx: &LayerContext, x: Var) -> Result<Var> {
        let f = self.vertex_message.as_ref();
        let pre = f.apply(fwd, &ctx.on_vertices(), None, SlotInput::Aggregate(x))?;
        Ok(fwd.tape.elementwise(f.activation(), pre))
    }

    /// New hyperedge state from the previous state and the pooled messages of
    /// the members.
    pub fn update_hyperedges(
        &self,
        fwd: &mut Forward,
        ctx: &LayerContext,
        inc: &SparseIncidence,
        w: Var,
        vertex_messages: Var,
    ) -> Result<Var> {
        self.update(
            fwd,
            self.edge_update.as_ref(),
            self.edge_aggregation.as_ref(),
            self.edge_norm.as_ref(),
            inc.edge_major(),
            &ctx.on_edges(),
            &ctx.edge_inv_sqrt_degree,
            w,
            vertex_messages,
            self.config.edge_dropout_rate,
        )
    }

    /// Per-hyperedge outgoing message, computed from the state the layer
    /// received (not the one produced by [`Self::update_hyperedges`]).
    pub fn hyperedge_messages(
        &self,
        fwd: &mut Forward,
        ctx: &LayerContext,
        inc: &SparseIncidence,
        w: Var,
        vertex_messages: Var,
    ) -> Result<Var> {
        let f = self.edge_message.as_ref();
        let pooled = self.edge_message_aggregation.aggregate(
            fwd,
            inc.edge_major(),
            vertex_messages,
            &ctx.edge_inv_sqrt_degree,
        )?;
        let state = f.uses_state().then_some(w);
        let pre = f.apply(fwd, &ctx.on_edges(), state, SlotInput::Aggregate(pooled))?;
        Ok(fwd.tape.elementwise(f.activation(), pre))
    }

    /// New vertex state from the previous state and the pooled messages of
    /// incident hyperedges.
    pub fn update_vertices(
        &self,
        fwd: &mut Forward,
        ctx: &LayerContext,
        inc: &SparseIncidence,
        x: Var,
        edge_messages: Var,
    ) -> Result<Var> {
        self.update(
            fwd,
            self.vertex_update.as_ref(),
            self.vertex_aggregation.as_ref(),
            self.vertex_norm.as_ref(),
            inc.vertex_major(),
            &ctx.on_vertices(),
            &ctx.vertex_inv_sqrt_degree,
            x,
            edge_messages,
            self.config.vertex_dropout_rate,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn update(
        &self,
        fwd: &mut Forward,
        g: &dyn SlotFn,
        aggregator: &dyn Aggregator,
        norm: Option<&BatchNorm>,
        gather: &Arc<Csr>,
        sctx: &SlotContext,
        receiver_inv_sqrt_degree: &[f64],
        state: Var,
        messages: Var,
        dropout_rate: f64,
    ) -> Result<Var> {
        let scaling = self.config.dropout_scaling;
        let input = match g.input_kind() {
            InputKind::Ignored => return g.apply(fwd, sctx, Some(state), SlotInput::Aggregate(messages)),
            InputKind::Aggregate => {
                let mut pooled = aggregator.aggregate(fwd, gather, messages, receiver_inv_sqrt_degree)?;
                if let Some(bn) = norm {
                    pooled = bn.forward(fwd, pooled)?;
                }
                SlotInput::Aggregate(dropout_var(fwd, pooled, dropout_rate, scaling)?)
            }
            InputKind::Multiset => SlotInput::Multiset {
                messages: dropout_var(fwd, messages, dropout_rate, scaling)?,
                groups: gather,
            },
        };
        let state = if g.uses_state() {
            Some(dropout_var(fwd, state, dropout_rate, scaling)?)
        } else {
            None
        };
        let pre = g.apply(fwd, sctx, state, input)?;
        Ok(fwd.tape.elementwise(g.activation(), pre))
    }

    /// Vertex messages → hyperedge update → hyperedge messages → vertex
    /// update. Returns the new vertex and hyperedge representations.
    pub fn forward(&self, fwd: &mut Forward, ctx: &LayerContext, x: Var, w: Var) -> Result<(Var, Var)> {
        let (nv, ne) = (ctx.num_vertices(), ctx.num_hyperedges());
        if fwd.tape.shape(x) != (nv, self.config.in_dim) {
            return Err(Error::shape(
                "forward_layer",
                format!(
                    "vertex input {:?}, expected {:?}",
                    fwd.tape.shape(x),
                    (nv, self.config.in_dim)
                ),
            ));
        }
        if fwd.tape.shape(w) != (ne, self.config.edge_dim) {
            return Err(Error::shape(
                "forward_layer",
                format!(
                    "hyperedge input {:?}, expected {:?}",
                    fwd.tape.shape(w),
                    (ne, self.config.edge_dim)
                ),
            ));
        }
        let inc = self.sample_incidence(fwd, ctx)?;
        let m_v = self.vertex_messages(fwd, ctx, x)?;
        let w_next = self.update_hyperedges(fwd, ctx, &inc, w, m_v)?;
        let m_e = self.hyperedge_messages(fwd, ctx, &inc, w, m_v)?;
        let x_next = self.update_vertices(fwd, ctx, &inc, x, m_e)?;
        Ok((x_next, w_next))
    }
}

/// Runs one layer on plain matrices and returns `(X', W')`. Batch-norm
/// running statistics are written back to `store` in training mode.
#[allow(clippy::too_many_arguments)]
pub fn forward_layer(
    layer: &HmpnnLayer,
    store: &mut ParamStore,
    ctx: &LayerContext,
    x: &Matrix,
    w: &Matrix,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Matrix, Matrix)> {
    let (out, updates) = {
        let mut fwd = Forward::new(store, mode, rng);
        let xv = fwd.tape.constant(x.clone());
        let wv = fwd.tape.constant(w.clone());
        let (xn, wn) = layer.forward(&mut fwd, ctx, xv, wv)?;
        let out = (fwd.tape.value(xn).clone(), fwd.tape.value(wn).clone());
        (out, fwd.take_buffer_updates())
    };
    store.apply_buffer_updates(updates);
    Ok(out)
}

/// Evaluation-mode [`forward_layer`]; needs no RNG.
pub fn forward_layer_eval(
    layer: &HmpnnLayer,
    store: &ParamStore,
    ctx: &LayerContext,
    x: &Matrix,
    w: &Matrix,
) -> Result<(Matrix, Matrix)> {
    let mut rng = Rng::seed_from_u64(0);
    let mut fwd = Forward::new(store, Mode::Eval, &mut rng);
    let xv = fwd.tape.constant(x.clone());
    let wv = fwd.tape.constant(w.clone());
    let (xn, wn) = layer.forward(&mut fwd, ctx, xv, wv)?;
    Ok((fwd.tape.value(xn).clone(), fwd.tape.value(wn).clone()))
}
