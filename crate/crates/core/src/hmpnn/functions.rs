//! Messaging and updating functions that fill the layer's four function
//! slots. Each is looked up by name in [`slot_registry`].

use crate::baselines::allset::{AllSetBlock, AllSetDims};
use crate::error::{Error, Result};
use crate::nn::{Linear, Mlp};
use crate::params::{Forward, ParamStore, Rng};
use crate::registry::Registry;
use crate::tensor::{Activation, Csr, Matrix, Var};

/// Which of the four function positions a function is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    VertexMessage,
    EdgeUpdate,
    EdgeMessage,
    VertexUpdate,
}

impl Slot {
    pub fn name(self) -> &'static str {
        match self {
            Slot::VertexMessage => "vertex_message",
            Slot::EdgeUpdate => "edge_update",
            Slot::EdgeMessage => "edge_message",
            Slot::VertexUpdate => "vertex_update",
        }
    }

    fn is_update(self) -> bool {
        matches!(self, Slot::EdgeUpdate | Slot::VertexUpdate)
    }

    /// Rows of the slot's output are hyperedges.
    fn on_edges(self) -> bool {
        matches!(self, Slot::EdgeUpdate | Slot::EdgeMessage)
    }
}

/// Everything a factory needs to size and name a function's parameters.
#[derive(Clone, Debug)]
pub struct SlotSpec {
    pub slot: Slot,
    pub prefix: String,
    /// Width of the message argument.
    pub input_dim: usize,
    /// Width of the previous-state argument; `None` for vertex messages.
    pub state_dim: Option<usize>,
    pub out_dim: usize,
    pub hidden_dim: usize,
    pub activation: Activation,
    pub concat_state: bool,
    pub bias: bool,
    pub heads: usize,
}

/// How a function consumes incoming messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    /// One pooled row per receiver.
    Aggregate,
    /// The raw multiset of sender rows per receiver (aggregation bypassed).
    Multiset,
    /// Incoming messages are ignored.
    Ignored,
}

pub enum SlotInput<'a> {
    Aggregate(Var),
    Multiset { messages: Var, groups: &'a Csr },
}

/// Structural data a function may read. Slices are indexed by the slot's
/// output rows (vertices or hyperedges).
pub struct SlotContext<'a> {
    pub inv_sqrt_degree: &'a [f64],
    pub edge_weights: &'a [f64],
}

pub trait SlotFn: Send + Sync {
    fn out_dim(&self) -> usize;

    fn input_kind(&self) -> InputKind {
        InputKind::Aggregate
    }

    fn uses_state(&self) -> bool {
        false
    }

    /// Applied by the layer after batch norm and dropout.
    fn activation(&self) -> Activation {
        Activation::Identity
    }

    /// Pre-activation output.
    fn apply(&self, fwd: &mut Forward, ctx: &SlotContext, state: Option<Var>, input: SlotInput) -> Result<Var>;
}

pub type SlotFactory = fn(&SlotSpec, &mut ParamStore, &mut Rng) -> Result<Box<dyn SlotFn>>;

pub type SlotRegistry = Registry<SlotFactory>;

/// Built-in functions:
///
/// - `identity`: returns the message argument
/// - `keep`: returns the previous state (update slots only)
/// - `linear`, `linear_act`, `mlp`: learnable, optionally also reading the state
/// - `degree_scaled`: message times `degree^-1/2` of the owning row
/// - `weighted`: message times the hyperedge weight (hyperedge slots only)
/// - `allset`: attention block over the incoming multiset (update slots only)
pub fn slot_registry() -> SlotRegistry {
    let mut r: SlotRegistry = Registry::new("layer function");
    r.register("identity", build_identity as SlotFactory)
        .register("keep", build_keep)
        .register("linear", build_linear)
        .register("linear_act", build_linear_act)
        .register("mlp", build_mlp)
        .register("degree_scaled", build_degree_scaled)
        .register("weighted", build_weighted)
        .register("allset", build_allset);
    r
}

fn aggregate_input(input: SlotInput) -> Result<Var> {
    match input {
        SlotInput::Aggregate(v) => Ok(v),
        SlotInput::Multiset { .. } => Err(Error::Contract("function expects a pooled message".into())),
    }
}

fn reject(spec: &SlotSpec, name: &str, why: &str) -> Error {
    Error::config(spec.slot.name(), format!("`{name}` {why}"))
}

struct Identity {
    dim: usize,
}

impl SlotFn for Identity {
    fn out_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, _: &mut Forward, _: &SlotContext, _: Option<Var>, input: SlotInput) -> Result<Var> {
        aggregate_input(input)
    }
}

fn build_identity(spec: &SlotSpec, _: &mut ParamStore, _: &mut Rng) -> Result<Box<dyn SlotFn>> {
    Ok(Box::new(Identity { dim: spec.input_dim }))
}

struct Keep {
    dim: usize,
}

impl SlotFn for Keep {
    fn out_dim(&self) -> usize {
        self.dim
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Ignored
    }

    fn uses_state(&self) -> bool {
        true
    }

    fn apply(&self, _: &mut Forward, _: &SlotContext, state: Option<Var>, _: SlotInput) -> Result<Var> {
        state.ok_or_else(|| Error::Contract("`keep` needs a previous state".into()))
    }
}

fn build_keep(spec: &SlotSpec, _: &mut ParamStore, _: &mut Rng) -> Result<Box<dyn SlotFn>> {
    match (spec.slot.is_update(), spec.state_dim) {
        (true, Some(dim)) => Ok(Box::new(Keep { dim })),
        _ => Err(reject(spec, "keep", "is only valid for update functions")),
    }
}

struct LinearFn {
    linear: Linear,
    activation: Activation,
}

impl SlotFn for LinearFn {
    fn out_dim(&self) -> usize {
        self.linear.out_dim
    }

    fn uses_state(&self) -> bool {
        self.linear.state_weight.is_some()
    }

    fn activation(&self) -> Activation {
        self.activation
    }

    fn apply(&self, fwd: &mut Forward, _: &SlotContext, state: Option<Var>, input: SlotInput) -> Result<Var> {
        let x = aggregate_input(input)?;
        self.linear.forward(fwd, x, state)
    }
}

fn state_arg(spec: &SlotSpec) -> Option<usize> {
    spec.state_dim.filter(|_| spec.concat_state)
}

fn build_linear_with(
    spec: &SlotSpec,
    store: &mut ParamStore,
    rng: &mut Rng,
    activation: Activation,
) -> Box<dyn SlotFn> {
    let linear = Linear::build(
        store,
        rng,
        &spec.prefix,
        spec.input_dim,
        state_arg(spec),
        spec.out_dim,
        spec.bias,
    );
    Box::new(LinearFn { linear, activation })
}

fn build_linear(spec: &SlotSpec, store: &mut ParamStore, rng: &mut Rng) -> Result<Box<dyn SlotFn>> {
    Ok(build_linear_with(spec, store, rng, Activation::Identity))
}

fn build_linear_act(spec: &SlotSpec, store: &mut ParamStore, rng: &mut Rng) -> Result<Box<dyn SlotFn>> {
    Ok(build_linear_with(spec, store, rng, spec.activation))
}

struct MlpFn {
    mlp: Mlp,
    uses_state: bool,
}

impl SlotFn for MlpFn {
    fn out_dim(&self) -> usize {
        self.mlp.second.out_dim
    }

    fn uses_state(&self) -> bool {
        self.uses_state
    }

    fn activation(&self) -> Activation {
        self.mlp.activation
    }

    fn apply(&self, fwd: &mut Forward, _: &SlotContext, state: Option<Var>, input: SlotInput) -> Result<Var> {
        let x = aggregate_input(input)?;
        self.mlp.forward(fwd, x, state)
    }
}

fn build_mlp(spec: &SlotSpec, store: &mut ParamStore, rng: &mut Rng) -> Result<Box<dyn SlotFn>> {
    let mlp = Mlp::build(
        store,
        rng,
        &spec.prefix,
        spec.input_dim,
        state_arg(spec),
        spec.hidden_dim,
        spec.out_dim,
        spec.activation,
    );
    Ok(Box::new(MlpFn {
        mlp,
        uses_state: state_arg(spec).is_some(),
    }))
}

struct DegreeScaled {
    dim: usize,
}

impl SlotFn for DegreeScaled {
    fn out_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, fwd: &mut Forward, ctx: &SlotContext, _: Option<Var>, input: SlotInput) -> Result<Var> {
        let x = aggregate_input(input)?;
        fwd.tape.scale_rows(x, ctx.inv_sqrt_degree.to_vec())
    }
}

fn build_degree_scaled(spec: &SlotSpec, _: &mut ParamStore, _: &mut Rng) -> Result<Box<dyn SlotFn>> {
    Ok(Box::new(DegreeScaled { dim: spec.input_dim }))
}

struct Weighted {
    dim: usize,
}

impl SlotFn for Weighted {
    fn out_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, fwd: &mut Forward, ctx: &SlotContext, _: Option<Var>, input: SlotInput) -> Result<Var> {
        let x = aggregate_input(input)?;
        fwd.tape.scale_rows(x, ctx.edge_weights.to_vec())
    }
}

fn build_weighted(spec: &SlotSpec, _: &mut ParamStore, _: &mut Rng) -> Result<Box<dyn SlotFn>> {
    if !spec.slot.on_edges() {
        return Err(reject(spec, "weighted", "is only valid for hyperedge functions"));
    }
    Ok(Box::new(Weighted { dim: spec.input_dim }))
}

struct AllSetFn {
    block: AllSetBlock,
    out_dim: usize,
}

impl SlotFn for AllSetFn {
    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn input_kind(&self) -> InputKind {
        InputKind::Multiset
    }

    fn apply(&self, fwd: &mut Forward, _: &SlotContext, _: Option<Var>, input: SlotInput) -> Result<Var> {
        let SlotInput::Multiset { messages, groups } = input else {
            return Err(Error::Contract("`allset` expects the raw incoming multiset".into()));
        };
        let mut rows = Vec::with_capacity(groups.rows());
        for r in 0..groups.rows() {
            let members = groups.row(r);
            let row = if members.is_empty() {
                fwd.tape.constant(Matrix::zeros(1, self.out_dim))
            } else {
                let set = fwd.tape.gather_rows(messages, members)?;
                self.block.forward(fwd, set)?
            };
            rows.push(row);
        }
        if rows.is_empty() {
            return Ok(fwd.tape.constant(Matrix::zeros(0, self.out_dim)));
        }
        fwd.tape.stack_rows(&rows)
    }
}

fn build_allset(spec: &SlotSpec, store: &mut ParamStore, rng: &mut Rng) -> Result<Box<dyn SlotFn>> {
    if !spec.slot.is_update() {
        return Err(reject(spec, "allset", "is only valid for update functions"));
    }
    let dims = AllSetDims {
        input_dim: spec.input_dim,
        hidden_dim: spec.hidden_dim,
        out_dim: spec.out_dim,
        heads: spec.heads,
    };
    let block = AllSetBlock::build(store, rng, &spec.prefix, dims)?;
    Ok(Box::new(AllSetFn {
        block,
        out_dim: spec.out_dim,
    }))
}
