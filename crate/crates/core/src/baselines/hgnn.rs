//! Spectral hypergraph convolution
//! `X' = act(Dv^-1/2 H W De^-1 H^T Dv^-1/2 X Theta)` and its translation into
//! a message-passing layer.

use std::sync::Arc;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmpnn::{HmpnnLayer, LayerConfig, LayerContext};
use crate::hypergraph::Hypergraph;
use crate::params::{Forward, ParamStore, Rng};
use crate::tensor::{Activation, Matrix, Var};

/// How isolated vertices are treated by `Dv^-1/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroDegreePolicy {
    /// The entry is 0: an isolated vertex receives nothing.
    #[default]
    Zero,
    Error,
}

impl std::str::FromStr for ZeroDegreePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(Self::Zero),
            "error" => Ok(Self::Error),
            other => Err(format!("expected zero|error, got `{other}`")),
        }
    }
}

/// Learnable projection of one convolution. Hyperedge weights are read from
/// the hypergraph.
#[derive(Clone, Debug, PartialEq)]
pub struct HgnnLayerParams {
    pub theta: Matrix,
}

fn check_inputs(h: &Hypergraph, theta: &Matrix, policy: ZeroDegreePolicy) -> Result<()> {
    if !theta.all_finite() {
        return Err(Error::Contract("projection contains non-finite values".into()));
    }
    if let Some(e) = h.weights().iter().position(|&w| w <= 0.0) {
        return Err(Error::Contract(format!("hyperedge {e} has non-positive weight")));
    }
    if policy == ZeroDegreePolicy::Error {
        if let Some(v) = h.vertex_degrees().iter().position(|&d| d == 0) {
            return Err(Error::Structure(format!("vertex {v} belongs to no hyperedge")));
        }
    }
    Ok(())
}

/// `w_e / |e|` per hyperedge.
fn edge_scale(h: &Hypergraph) -> Vec<f64> {
    h.hyperedge_degrees()
        .iter()
        .zip(h.weights())
        .map(|(&d, &w)| w / d as f64)
        .collect()
}

fn inv_sqrt_vertex_degrees(h: &Hypergraph) -> Vec<f64> {
    h.vertex_degrees()
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect()
}

fn scale_rows(mut m: Matrix, scale: &[f64]) -> Matrix {
    for (r, &s) in scale.iter().enumerate() {
        m.row_mut(r).iter_mut().for_each(|v| *v *= s);
    }
    m
}

/// Evaluates the convolution with sparse incidence products.
pub fn hgnn_conv(
    x: &Matrix,
    h: &Hypergraph,
    params: &HgnnLayerParams,
    activation: Activation,
    policy: ZeroDegreePolicy,
) -> Result<Matrix> {
    check_inputs(h, &params.theta, policy)?;
    if x.rows() != h.num_vertices() || x.cols() != params.theta.rows() {
        return Err(Error::shape(
            "hgnn_conv",
            format!(
                "features {:?} for {} vertices and a {:?} projection",
                x.shape(),
                h.num_vertices(),
                params.theta.shape()
            ),
        ));
    }
    let dv = inv_sqrt_vertex_degrees(h);
    let inc = h.incidence();
    let y = scale_rows(x.clone(), &dv);
    let z = scale_rows(inc.spmm_transposed(&y)?, &edge_scale(h));
    let u = scale_rows(inc.spmm(&z)?, &dv);
    Ok(u.matmul(&params.theta)?.map(|v| activation.apply(v)))
}

/// The same convolution recorded on a tape, with `theta` as a tape value.
pub fn hgnn_conv_var(fwd: &mut Forward, ctx: &LayerContext, x: Var, theta: Var, activation: Activation) -> Result<Var> {
    let inc = ctx.incidence();
    let dv = ctx.vertex_inv_sqrt_degree().to_vec();
    let scale: Vec<f64> = (0..inc.cols())
        .map(|e| ctx.edge_weights()[e] / inc.members_of(e).len().max(1) as f64)
        .collect();
    let y = fwd.tape.scale_rows(x, dv.clone())?;
    let z = fwd.tape.spmm(Arc::clone(inc.edge_major()), y)?;
    let z = fwd.tape.scale_rows(z, scale)?;
    let u = fwd.tape.spmm(Arc::clone(inc.vertex_major()), z)?;
    let u = fwd.tape.scale_rows(u, dv)?;
    let out = fwd.tape.matmul(u, theta)?;
    Ok(fwd.tape.elementwise(activation, out))
}

/// Message-passing configuration computing the convolution: degree-scaled
/// vertex messages, mean pooling into hyperedges, weighted hyperedge
/// messages, degree-scaled sum into vertices, and a bias-free linear update
/// that ignores the previous vertex state. Hyperedge states pass through.
pub fn hgnn_layer_config(in_dim: usize, out_dim: usize, activation: Activation) -> LayerConfig {
    LayerConfig {
        vertex_message: "degree_scaled".into(),
        edge_message_aggregation: "mean".into(),
        edge_update: "keep".into(),
        edge_message: "weighted".into(),
        vertex_aggregation: "degree_scaled_sum".into(),
        vertex_update: "linear_act".into(),
        edge_aggregation: "sum".into(),
        activation,
        concat_state: false,
        bias: false,
        in_dim,
        edge_dim: 1,
        hidden_dim: in_dim,
        out_dim,
        ..LayerConfig::default()
    }
    .without_dropout()
}

/// Name of the projection inside the store returned by [`hgnn_as_hmpnn`].
pub const TRANSLATED_PROJECTION: &str = "hgnn.vertex_update.input_weight";

/// Builds a message-passing layer whose output equals [`hgnn_conv`] with the
/// same projection. The layer ignores hyperedge states; pass any `|E| x 1`
/// matrix.
pub fn hgnn_as_hmpnn(
    params: &HgnnLayerParams,
    activation: Activation,
) -> Result<(LayerConfig, HmpnnLayer, ParamStore)> {
    let cfg = hgnn_layer_config(params.theta.rows(), params.theta.cols(), activation);
    let mut store = ParamStore::new();
    let mut rng = Rng::seed_from_u64(0);
    let layer = HmpnnLayer::build(&cfg, &mut store, &mut rng, "hgnn")?;
    let id = store
        .find(TRANSLATED_PROJECTION)
        .ok_or_else(|| Error::Contract("translated layer has no projection".into()))?;
    store.set(id, params.theta.clone())?;
    Ok((cfg, layer, store))
}
