//! Spectral convolution against a dense oracle and multiset attention
//! properties.

mod common;

use common::*;
use hmpnn::baselines::{allset_block, hgnn_conv, AllSetBlock, AllSetDims, HgnnLayerParams, ZeroDegreePolicy};
use hmpnn::data::synthetic::two_cluster;
use hmpnn::hmpnn::LayerConfig;
use hmpnn::model::{build_model, ModelConfig};
use hmpnn::train::{evaluate, fit, TrainConfig};
use hmpnn::{Activation, Error, Forward, Hypergraph, Matrix, Mode, ParamStore};
use rand::Rng as _;

fn diag(values: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m.set(i, i, v);
    }
    m
}

/// The convolution as a chain of dense products.
fn dense_conv(x: &Matrix, h: &Hypergraph, theta: &Matrix) -> Matrix {
    let inc = h.incidence().to_dense();
    let dv: Vec<f64> = h
        .vertex_degrees()
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { (d as f64).powf(-0.5) })
        .collect();
    let de: Vec<f64> = h.hyperedge_degrees().iter().map(|&d| 1.0 / d as f64).collect();
    [
        diag(&dv),
        inc.clone(),
        diag(h.weights()),
        diag(&de),
        inc.transpose(),
        diag(&dv),
        x.clone(),
        theta.clone(),
    ]
    .into_iter()
    .reduce(|a, b| a.matmul(&b).unwrap())
    .unwrap()
}

fn weighted_hypergraph(r: &mut hmpnn::Rng, nv: usize, ne: usize) -> Hypergraph {
    let h = random_hypergraph(r, nv, ne, 5);
    let weights = (0..ne).map(|_| r.gen_range(0.1..3.0)).collect();
    h.with_weights(weights).unwrap()
}

#[test]
fn conv_matches_dense_chain() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let h = weighted_hypergraph(&mut r, 12, 7);
        let x = random_matrix(&mut r, 12, 4);
        let theta = random_matrix(&mut r, 4, 3);
        let params = HgnnLayerParams { theta: theta.clone() };
        let sparse = hgnn_conv(&x, &h, &params, Activation::Identity, ZeroDegreePolicy::Zero).unwrap();
        let diff = max_abs_diff(&sparse, &dense_conv(&x, &h, &theta));
        assert!(diff < 1e-12, "seed {seed}: {diff:e}");
    }
}

#[test]
fn conv_is_linear_in_features() {
    for seed in 0..10 {
        let mut r = rng(100 + seed);
        let h = weighted_hypergraph(&mut r, 10, 6);
        let x = random_matrix(&mut r, 10, 4);
        let y = random_matrix(&mut r, 10, 4);
        let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let params = HgnnLayerParams {
            theta: random_matrix(&mut r, 4, 4),
        };
        let conv = |m: &Matrix| hgnn_conv(m, &h, &params, Activation::Identity, ZeroDegreePolicy::Zero).unwrap();
        let combined = x.scale(a).zip_map(&y.scale(b), |p, q| p + q);
        let lhs = conv(&combined);
        let rhs = conv(&x).scale(a).zip_map(&conv(&y).scale(b), |p, q| p + q);
        assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    }
}

#[test]
fn conv_rejects_bad_inputs() {
    let h = Hypergraph::build(2, [vec![0, 1]]).unwrap();
    let params = HgnnLayerParams {
        theta: Matrix::identity(2),
    };
    let err = hgnn_conv(
        &Matrix::zeros(3, 2),
        &h,
        &params,
        Activation::Identity,
        ZeroDegreePolicy::Zero,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Shape { .. }));
    let zero_weight = h.clone().with_weights(vec![0.0]);
    if let Ok(h0) = zero_weight {
        assert!(hgnn_conv(
            &Matrix::zeros(2, 2),
            &h0,
            &params,
            Activation::Identity,
            ZeroDegreePolicy::Zero
        )
        .is_err());
    }
    let bad = HgnnLayerParams {
        theta: Matrix::filled(2, 2, f64::NAN),
    };
    assert!(hgnn_conv(
        &Matrix::zeros(2, 2),
        &h,
        &bad,
        Activation::Identity,
        ZeroDegreePolicy::Zero
    )
    .is_err());
}

fn block(seed: u64, dims: AllSetDims) -> (AllSetBlock, ParamStore) {
    let mut store = ParamStore::new();
    let b = AllSetBlock::build(&mut store, &mut rng(seed), "b", dims).unwrap();
    (b, store)
}

#[test]
fn single_element_attention_passes_the_value_through() {
    let dims = AllSetDims {
        input_dim: 3,
        hidden_dim: 5,
        out_dim: 4,
        heads: 1,
    };
    let (b, store) = block(7, dims);
    let element = Matrix::from_rows(&[[0.2, -0.7, 1.3]]).unwrap();
    let mut r = rng(0);
    let mut fwd = Forward::new(&store, Mode::Eval, &mut r);
    let set = fwd.tape.constant(element);
    let (mh, _) = b.multihead(&mut fwd, set).unwrap();
    let value = b.heads[0].value.forward(&mut fwd, set, None).unwrap();
    assert_eq!(fwd.tape.value(mh), fwd.tape.value(value));
}

#[test]
fn attention_is_permutation_invariant() {
    for seed in 0..20 {
        let mut r = rng(200 + seed);
        let heads = 1 + (seed as usize % 2);
        let dims = AllSetDims {
            input_dim: 3,
            hidden_dim: 4,
            out_dim: 2 * heads,
            heads,
        };
        let (b, store) = block(seed, dims);
        let size = r.gen_range(1..8);
        let set = random_matrix(&mut r, size, 3);
        let shuffled = permute_rows(&set, &random_permutation(&mut r, size));
        let run = |m: &Matrix| {
            let mut g = rng(0);
            let mut fwd = Forward::new(&store, Mode::Eval, &mut g);
            let s = fwd.tape.constant(m.clone());
            let out = allset_block(&mut fwd, &b, s).unwrap();
            fwd.tape.value(out).clone()
        };
        assert!(max_abs_diff(&run(&set), &run(&shuffled)) < 1e-12);
    }
}

#[test]
fn attention_rejects_empty_sets_and_bad_head_counts() {
    let dims = AllSetDims {
        input_dim: 2,
        hidden_dim: 2,
        out_dim: 2,
        heads: 1,
    };
    let (b, store) = block(0, dims);
    let mut r = rng(0);
    let mut fwd = Forward::new(&store, Mode::Eval, &mut r);
    let empty = fwd.tape.constant(Matrix::zeros(0, 2));
    assert!(matches!(allset_block(&mut fwd, &b, empty), Err(Error::Contract(_))));

    let err = AllSetBlock::build(
        &mut ParamStore::new(),
        &mut rng(0),
        "b",
        AllSetDims { heads: 3, ..dims },
    )
    .unwrap_err();
    assert!(matches!(err, Error::Config { ref key, .. } if key == "allset_heads"));
}

#[test]
fn allset_model_fits_two_clusters() {
    let bundle = two_cluster();
    let inputs = bundle.graph_inputs().unwrap();
    let cfg = ModelConfig {
        kind: "allset-config".into(),
        hidden_dim: 8,
        layer: LayerConfig {
            activation: Activation::Relu,
            ..LayerConfig::default().without_dropout()
        },
        ..ModelConfig::default()
    };
    let (model, mut store) = build_model(&cfg, inputs.dims(bundle.num_classes), 0).unwrap();
    let tcfg = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    fit(model.as_ref(), &mut store, &inputs, &bundle, &tcfg).unwrap();
    let acc = evaluate(model.as_ref(), &store, &inputs, &bundle.labels, &bundle.train_mask).unwrap();
    assert!(acc > 0.9, "train accuracy {acc}");
}
