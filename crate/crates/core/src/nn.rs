//! Small learnable building blocks shared by the layer functions and the
//! baselines.

use crate::error::Result;
use crate::params::{Forward, ParamId, ParamStore, Rng};
use crate::tensor::{Activation, Matrix, Var};

/// `x · W (+ b)`, optionally with a second input: `[s, x] · W` is stored as
/// two blocks `s · W_s + x · W_x` so wide inputs are never concatenated.
#[derive(Clone, Debug)]
pub struct Linear {
    pub input_weight: ParamId,
    pub state_weight: Option<ParamId>,
    pub bias: Option<ParamId>,
    pub out_dim: usize,
}

impl Linear {
    pub fn build(
        store: &mut ParamStore,
        rng: &mut Rng,
        prefix: &str,
        input_dim: usize,
        state_dim: Option<usize>,
        out_dim: usize,
        bias: bool,
    ) -> Self {
        let fan_in = input_dim + state_dim.unwrap_or(0);
        let mut init = |rows: usize| {
            // Glorot bound over the full (concatenated) fan-in.
            let bound = (6.0 / (fan_in + out_dim).max(1) as f64).sqrt();
            Matrix::symmetric_uniform(rows, out_dim, bound, rng)
        };
        let state_weight = state_dim.map(&mut init);
        let input_weight = init(input_dim);
        Self {
            state_weight: state_weight.map(|w| store.add_param(format!("{prefix}.state_weight"), w)),
            input_weight: store.add_param(format!("{prefix}.input_weight"), input_weight),
            bias: bias.then(|| store.add_param(format!("{prefix}.bias"), Matrix::zeros(1, out_dim))),
            out_dim,
        }
    }

    pub fn forward(&self, fwd: &mut Forward, input: Var, state: Option<Var>) -> Result<Var> {
        let w = fwd.param(self.input_weight);
        let mut out = fwd.tape.matmul(input, w)?;
        if let (Some(ws), Some(s)) = (self.state_weight, state) {
            let ws = fwd.param(ws);
            let part = fwd.tape.matmul(s, ws)?;
            out = fwd.tape.add(out, part)?;
        }
        if let Some(b) = self.bias {
            let b = fwd.param(b);
            out = fwd.tape.add_row(out, b)?;
        }
        Ok(out)
    }
}

/// Two linear maps with an activation in between. The output is left
/// un-activated.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub first: Linear,
    pub second: Linear,
    pub activation: Activation,
}

impl Mlp {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        store: &mut ParamStore,
        rng: &mut Rng,
        prefix: &str,
        input_dim: usize,
        state_dim: Option<usize>,
        hidden_dim: usize,
        out_dim: usize,
        activation: Activation,
    ) -> Self {
        Self {
            first: Linear::build(
                store,
                rng,
                &format!("{prefix}.0"),
                input_dim,
                state_dim,
                hidden_dim,
                true,
            ),
            second: Linear::build(store, rng, &format!("{prefix}.1"), hidden_dim, None, out_dim, true),
            activation,
        }
    }

    pub fn forward(&self, fwd: &mut Forward, input: Var, state: Option<Var>) -> Result<Var> {
        let h = self.first.forward(fwd, input, state)?;
        let h = fwd.tape.elementwise(self.activation, h);
        self.second.forward(fwd, h, None)
    }
}

/// Per-row normalisation followed by a learnable scale and shift.
#[derive(Clone, Debug)]
pub struct LayerNorm {
    pub scale: ParamId,
    pub shift: ParamId,
}

impl LayerNorm {
    pub const EPS: f64 = 1e-5;

    pub fn build(store: &mut ParamStore, prefix: &str, dim: usize) -> Self {
        Self {
            scale: store.add_param(format!("{prefix}.scale"), Matrix::filled(1, dim, 1.0)),
            shift: store.add_param(format!("{prefix}.shift"), Matrix::zeros(1, dim)),
        }
    }

    pub fn forward(&self, fwd: &mut Forward, x: Var) -> Result<Var> {
        let normed = fwd.tape.row_norm(x, Self::EPS);
        let scale = fwd.param(self.scale);
        let shift = fwd.param(self.shift);
        let y = fwd.tape.mul_row(normed, scale)?;
        fwd.tape.add_row(y, shift)
    }
}
