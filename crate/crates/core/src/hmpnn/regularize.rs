//! Regular dropout, adjacency dropout and batch normalisation.

use rand::Rng as _;

use super::config::{AdjacencyDropoutMode, DropoutScaling};
use crate::error::{Error, Result};
use crate::hypergraph::SparseIncidence;
use crate::params::{Forward, ParamId, ParamStore, Rng};
use crate::tensor::{Matrix, Var};

/// Turns a 0/1 keep pattern into a multiplicative mask. Scaling is decided
/// per row: `n` is the row width and `k` the number of zeroed cells.
pub fn dropout_mask_from_keep(keep: &Matrix, scaling: DropoutScaling) -> Matrix {
    let (rows, cols) = keep.shape();
    let mut mask = Matrix::zeros(rows, cols);
    let n = cols as f64;
    for r in 0..rows {
        let kept = keep.row(r).iter().filter(|&&k| k != 0.0).count();
        let k = (cols - kept) as f64;
        let scale = match scaling {
            DropoutScaling::Paper => (n + k) / n,
            DropoutScaling::Inverted if kept == 0 => 0.0,
            DropoutScaling::Inverted => n / (n - k),
        };
        for (m, &flag) in mask.row_mut(r).iter_mut().zip(keep.row(r)) {
            *m = if flag != 0.0 { scale } else { 0.0 };
        }
    }
    mask
}

/// Samples a dropout mask: each cell is zeroed independently with
/// probability `rate`.
pub fn sample_dropout_mask(rows: usize, cols: usize, rate: f64, scaling: DropoutScaling, rng: &mut Rng) -> Matrix {
    let mut keep = Matrix::zeros(rows, cols);
    for v in keep.data_mut() {
        *v = if rng.gen::<f64>() >= rate { 1.0 } else { 0.0 };
    }
    dropout_mask_from_keep(&keep, scaling)
}

/// Regular dropout on a plain matrix. `rate == 0` returns the input.
pub fn regular_dropout(x: &Matrix, rate: f64, scaling: DropoutScaling, rng: &mut Rng) -> Result<Matrix> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Contract(format!("dropout rate {rate} outside [0, 1)")));
    }
    if rate == 0.0 {
        return Ok(x.clone());
    }
    let mask = sample_dropout_mask(x.rows(), x.cols(), rate, scaling, rng);
    Ok(x.zip_map(&mask, |a, m| a * m))
}

/// Regular dropout recorded on the tape; a no-op outside training.
pub fn dropout_var(fwd: &mut Forward, x: Var, rate: f64, scaling: DropoutScaling) -> Result<Var> {
    if !fwd.is_train() || rate == 0.0 {
        return Ok(x);
    }
    let (rows, cols) = fwd.tape.shape(x);
    let mask = sample_dropout_mask(rows, cols, rate, scaling, fwd.rng());
    fwd.tape.mul_const(x, mask)
}

/// Removes hyperedges (or single memberships) with probability `rate`.
/// Survivors are not rescaled.
pub fn adjacency_dropout(
    inc: &SparseIncidence,
    rate: f64,
    mode: AdjacencyDropoutMode,
    rng: &mut Rng,
) -> Result<SparseIncidence> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Contract(format!("adjacency dropout rate {rate} outside [0, 1]")));
    }
    if rate == 0.0 {
        return Ok(inc.clone());
    }
    Ok(match mode {
        AdjacencyDropoutMode::Hyperedge => {
            let keep: Vec<bool> = (0..inc.cols()).map(|_| rng.gen::<f64>() >= rate).collect();
            inc.retain(|_, e| keep[e])
        }
        AdjacencyDropoutMode::IncidenceEntry => inc.retain(|_, _| rng.gen::<f64>() >= rate),
    })
}

/// Per-feature batch normalisation over the rows, with learnable scale and
/// shift and running statistics for evaluation.
#[derive(Clone, Debug)]
pub struct BatchNorm {
    pub scale: ParamId,
    pub shift: ParamId,
    pub running_mean: ParamId,
    pub running_var: ParamId,
}

impl BatchNorm {
    /// Weight kept on the old running statistic at each update.
    pub const MOMENTUM: f64 = 0.9;
    pub const EPS: f64 = 1e-5;

    pub fn build(store: &mut ParamStore, prefix: &str, dim: usize) -> Self {
        Self {
            scale: store.add_param(format!("{prefix}.scale"), Matrix::filled(1, dim, 1.0)),
            shift: store.add_param(format!("{prefix}.shift"), Matrix::zeros(1, dim)),
            running_mean: store.add_buffer(format!("{prefix}.running_mean"), Matrix::zeros(1, dim)),
            running_var: store.add_buffer(format!("{prefix}.running_var"), Matrix::filled(1, dim, 1.0)),
        }
    }

    pub fn forward(&self, fwd: &mut Forward, x: Var) -> Result<Var> {
        let normed = if fwd.is_train() {
            let (normed, mean, var) = fwd.tape.column_norm(x, Self::EPS);
            let blend = |old: &Matrix, new: &[f64]| {
                Matrix::row_vector(
                    old.data()
                        .iter()
                        .zip(new)
                        .map(|(o, n)| Self::MOMENTUM * o + (1.0 - Self::MOMENTUM) * n)
                        .collect(),
                )
            };
            let rm = blend(fwd.store().get(self.running_mean), &mean);
            let rv = blend(fwd.store().get(self.running_var), &var);
            fwd.update_buffer(self.running_mean, rm);
            fwd.update_buffer(self.running_var, rv);
            normed
        } else {
            let mean = fwd.store().get(self.running_mean).scale(-1.0);
            let inv_std = fwd.store().get(self.running_var).map(|v| 1.0 / (v + Self::EPS).sqrt());
            let mean = fwd.tape.constant(mean);
            let inv_std = fwd.tape.constant(inv_std);
            let centred = fwd.tape.add_row(x, mean)?;
            fwd.tape.mul_row(centred, inv_std)?
        };
        let scale = fwd.param(self.scale);
        let shift = fwd.param(self.shift);
        let y = fwd.tape.mul_row(normed, scale)?;
        fwd.tape.add_row(y, shift)
    }
}
