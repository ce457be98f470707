#![allow(dead_code)]

use hmpnn::params::ParamGrads;
use hmpnn::{Hypergraph, Matrix, ParamStore, Rng};
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// `num_edges` hyperedges, each a random subset of size `1..=max_size`.
pub fn random_hypergraph(rng: &mut Rng, num_vertices: usize, num_edges: usize, max_size: usize) -> Hypergraph {
    let ids: Vec<usize> = (0..num_vertices).collect();
    let edges: Vec<Vec<usize>> = (0..num_edges)
        .map(|_| {
            let size = rng.gen_range(1..=max_size.min(num_vertices));
            ids.choose_multiple(rng, size).copied().collect()
        })
        .collect();
    Hypergraph::build(num_vertices, edges).unwrap()
}

pub fn random_permutation(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Rows of `m` moved so that row `i` lands at `perm[i]`.
pub fn permute_rows(m: &Matrix, perm: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for (i, &p) in perm.iter().enumerate() {
        out.row_mut(p).copy_from_slice(m.row(i));
    }
    out
}

/// Central-difference step used by every gradient check.
pub const FD_STEP: f64 = 1e-5;

/// Largest relative error between analytic and central-difference
/// gradients over every trainable scalar, with the coordinate that
/// produced it.
///
/// The relative error is `|a - n| / max(|a|, |n|, floor)`; `floor` keeps
/// coordinates whose true gradient is (near) zero from dividing rounding
/// noise by zero.
pub fn max_relative_error(
    store: &ParamStore,
    grads: &ParamGrads,
    floor: f64,
    loss: impl Fn(&ParamStore) -> f64,
) -> (f64, String) {
    let mut worst = (0.0, String::new());
    let mut probe = store.clone();
    for id in store.ids() {
        let entry = store.entry(id);
        if !entry.trainable {
            continue;
        }
        for k in 0..entry.value.len() {
            let original = entry.value.data()[k];
            probe.get_mut(id).data_mut()[k] = original + FD_STEP;
            let up = loss(&probe);
            probe.get_mut(id).data_mut()[k] = original - FD_STEP;
            let down = loss(&probe);
            probe.get_mut(id).data_mut()[k] = original;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let analytic = grads.get(id).map_or(0.0, |g| g.data()[k]);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            if rel > worst.0 {
                worst = (
                    rel,
                    format!("{}[{k}]: analytic {analytic:e}, numeric {numeric:e}", entry.name),
                );
            }
        }
    }
    worst
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.max_abs_diff(b)
}
