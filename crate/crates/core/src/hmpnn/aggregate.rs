//! Permutation-invariant pooling of incoming messages.

use std::sync::Arc;

use crate::error::Result;
use crate::params::Forward;
use crate::registry::Registry;
use crate::tensor::{Csr, Var};

/// Pools sender rows into receiver rows along a (possibly dropout-masked)
/// incidence view. `gather` is `receivers x senders`.
pub trait Aggregator: Send + Sync {
    fn aggregate(
        &self,
        fwd: &mut Forward,
        gather: &Arc<Csr>,
        messages: Var,
        receiver_inv_sqrt_degree: &[f64],
    ) -> Result<Var>;
}

pub struct Sum;

impl Aggregator for Sum {
    fn aggregate(&self, fwd: &mut Forward, gather: &Arc<Csr>, messages: Var, _: &[f64]) -> Result<Var> {
        fwd.tape.spmm(Arc::clone(gather), messages)
    }
}

/// Sum divided by the number of senders that survived dropout; receivers
/// with no senders get a zero row.
pub struct Mean;

impl Aggregator for Mean {
    fn aggregate(&self, fwd: &mut Forward, gather: &Arc<Csr>, messages: Var, _: &[f64]) -> Result<Var> {
        let summed = fwd.tape.spmm(Arc::clone(gather), messages)?;
        let scale = (0..gather.rows())
            .map(|r| match gather.row_len(r) {
                0 => 0.0,
                n => 1.0 / n as f64,
            })
            .collect();
        fwd.tape.scale_rows(summed, scale)
    }
}

/// Sum scaled by the receiver's structural degree to the power -1/2
/// (zero for isolated receivers).
pub struct DegreeScaledSum;

impl Aggregator for DegreeScaledSum {
    fn aggregate(
        &self,
        fwd: &mut Forward,
        gather: &Arc<Csr>,
        messages: Var,
        receiver_inv_sqrt_degree: &[f64],
    ) -> Result<Var> {
        let summed = fwd.tape.spmm(Arc::clone(gather), messages)?;
        fwd.tape.scale_rows(summed, receiver_inv_sqrt_degree.to_vec())
    }
}

pub type AggregatorRegistry = Registry<Arc<dyn Aggregator>>;

/// Built-in aggregators: `sum`, `mean`, `degree_scaled_sum`.
pub fn aggregator_registry() -> AggregatorRegistry {
    let mut r: AggregatorRegistry = Registry::new("aggregator");
    r.register("sum", Arc::new(Sum))
        .register("mean", Arc::new(Mean))
        .register("degree_scaled_sum", Arc::new(DegreeScaledSum));
    r
}
