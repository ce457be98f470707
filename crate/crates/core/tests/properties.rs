//! Property tests over randomly generated hypergraphs, splits and configs.

mod common;

use std::collections::BTreeSet;

use common::{max_abs_diff, permute_rows, random_hypergraph, random_matrix, random_permutation};

use hmpnn::baselines::{
    allset_block, hgnn_as_hmpnn, hgnn_conv, AllSetBlock, AllSetDims, HgnnLayerParams, ZeroDegreePolicy,
};
use hmpnn::config::ExperimentConfig;
use hmpnn::data::{build_cocitation_hypergraph, split_per_class, Citation};
use hmpnn::expansions::{clique_expansion, line_conversion, star_expansion, VertexKind};
use hmpnn::hmpnn::{
    adjacency_dropout, forward_layer_eval, sample_dropout_mask, AdjacencyDropoutMode, DropoutScaling, HmpnnLayer,
    LayerConfig, LayerContext,
};
use hmpnn::tensor::Tape;
use hmpnn::{Activation, Forward, Hypergraph, Matrix, Mode, ParamStore, Rng};
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};

fn hypergraph() -> impl Strategy<Value = Hypergraph> {
    (1usize..15).prop_flat_map(|n| {
        let edge = proptest::collection::btree_set(0..n, 1..=n.min(5));
        proptest::collection::vec(edge, 0..10).prop_map(move |edges| Hypergraph::build(n, edges).unwrap())
    })
}

/// Hyperedges that share no member.
fn disjoint_hypergraph() -> impl Strategy<Value = Hypergraph> {
    (1usize..20, proptest::collection::vec(0usize..6, 1..20)).prop_map(|(extra, groups)| {
        let n = groups.len() + extra;
        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); 6];
        for (v, &g) in groups.iter().enumerate() {
            edges[g].push(v);
        }
        edges.retain(|e| !e.is_empty());
        Hypergraph::build(n, edges).unwrap()
    })
}

proptest! {
    #[test]
    fn degrees_sum_to_incidence_size(h in hypergraph()) {
        let nnz = h.incidence().nnz();
        prop_assert_eq!(h.vertex_degrees().iter().sum::<usize>(), nnz);
        prop_assert_eq!(h.hyperedge_degrees().iter().sum::<usize>(), nnz);
    }

    #[test]
    fn incidence_is_repeatable_and_matches_members(h in hypergraph()) {
        let a: Vec<_> = h.incidence().entries().collect();
        let b: Vec<_> = h.incidence().entries().collect();
        prop_assert_eq!(&a, &b);
        let inc = h.incidence();
        for e in 0..h.num_hyperedges() {
            let members: BTreeSet<usize> = inc.members_of(e).iter().copied().collect();
            let expected: BTreeSet<usize> = h.hyperedge(e).iter().copied().collect();
            prop_assert_eq!(members, expected);
        }
    }

    #[test]
    fn text_round_trip(h in hypergraph()) {
        let back = Hypergraph::parse(&h.to_text()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn relabel_permutes_degrees(h in hypergraph(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = Rng::seed_from_u64(seed);
        let mut vp: Vec<usize> = (0..h.num_vertices()).collect();
        vp.shuffle(&mut rng);
        let mut ep: Vec<usize> = (0..h.num_hyperedges()).collect();
        ep.shuffle(&mut rng);
        let r = h.relabel(&vp, &ep).unwrap();
        let (dv, rv) = (h.vertex_degrees(), r.vertex_degrees());
        for v in 0..h.num_vertices() {
            prop_assert_eq!(dv[v], rv[vp[v]]);
        }
        let (de, re) = (h.hyperedge_degrees(), r.hyperedge_degrees());
        for e in 0..h.num_hyperedges() {
            prop_assert_eq!(de[e], re[ep[e]]);
        }
    }

    #[test]
    fn star_expansion_is_bipartite(h in hypergraph()) {
        let n = h.num_vertices();
        let g = star_expansion(&h);
        prop_assert_eq!(g.num_vertices(), n + h.num_hyperedges());
        prop_assert_eq!(g.num_edges(), h.incidence().nnz());
        for (u, v) in g.edges() {
            prop_assert!(u < n && v >= n);
        }
        let labels = g.vertex_labels().unwrap();
        for (i, kind) in labels.iter().enumerate() {
            prop_assert_eq!(*kind == VertexKind::Original, i < n);
        }
    }

    #[test]
    fn disjoint_hyperedges_have_empty_line_graph(h in disjoint_hypergraph()) {
        let g = line_conversion(&h);
        prop_assert_eq!(g.num_vertices(), h.num_hyperedges());
        prop_assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn pair_hyperedges_are_their_own_clique_expansion(
        n in 2usize..12,
        raw in proptest::collection::btree_set((0usize..12, 0usize..12), 0..20),
    ) {
        let pairs: BTreeSet<(usize, usize)> = raw
            .into_iter()
            .map(|(a, b)| (a % n, b % n))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let h = Hypergraph::build(n, pairs.iter().map(|&(a, b)| vec![a, b])).unwrap();
        let edges: BTreeSet<(usize, usize)> = clique_expansion(&h).edges().collect();
        prop_assert_eq!(edges, pairs);
    }

    #[test]
    fn implied_hyperedges_do_not_change_clique_expansion(h in hypergraph(), pick in any::<prop::sample::Index>()) {
        prop_assume!(h.num_hyperedges() > 0);
        let source = h.hyperedge(pick.index(h.num_hyperedges()));
        prop_assume!(source.len() >= 2);
        let mut edges = h.hyperedges().to_vec();
        edges.push(source[..2].to_vec());
        let extended = Hypergraph::build(h.num_vertices(), edges).unwrap();
        prop_assert_eq!(clique_expansion(&extended), clique_expansion(&h));
    }

    #[test]
    fn adjacency_dropout_keeps_a_subset(h in hypergraph(), rate in 0.0f64..=1.0, seed in any::<u64>(), entry in any::<bool>()) {
        let mode = if entry { AdjacencyDropoutMode::IncidenceEntry } else { AdjacencyDropoutMode::Hyperedge };
        let inc = h.incidence();
        let kept = adjacency_dropout(&inc, rate, mode, &mut Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!((kept.rows(), kept.cols()), (inc.rows(), inc.cols()));
        let all: BTreeSet<_> = inc.entries().collect();
        for e in kept.entries() {
            prop_assert!(all.contains(&e));
        }
        if mode == AdjacencyDropoutMode::Hyperedge {
            for e in 0..kept.cols() {
                let len = kept.members_of(e).len();
                prop_assert!(len == 0 || len == inc.members_of(e).len());
            }
        }
    }

    #[test]
    fn dropout_mask_values(rows in 1usize..6, cols in 1usize..8, rate in 0.0f64..0.99, seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        for scaling in [DropoutScaling::Paper, DropoutScaling::Inverted] {
            let mask = sample_dropout_mask(rows, cols, rate, scaling, &mut rng);
            for r in 0..rows {
                let row = mask.row(r);
                let k = row.iter().filter(|&&m| m == 0.0).count() as f64;
                let n = cols as f64;
                let expected = match scaling {
                    DropoutScaling::Paper => (n + k) / n,
                    DropoutScaling::Inverted => n / (n - k),
                };
                for &m in row {
                    prop_assert!(m == 0.0 || m == expected);
                }
            }
        }
    }

    #[test]
    fn splits_are_disjoint_with_fixed_class_counts(
        counts in proptest::collection::vec(90usize..130, 2..8),
        seed in any::<u64>(),
    ) {
        let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect();
        let s = split_per_class(&labels, counts.len(), 20, 70, &mut Rng::seed_from_u64(seed)).unwrap();
        for i in 0..labels.len() {
            prop_assert_eq!(s.train[i] as u8 + s.val[i] as u8 + s.test[i] as u8, 1);
        }
        for (c, &k) in counts.iter().enumerate() {
            let count = |m: &[bool]| (0..labels.len()).filter(|&i| m[i] && labels[i] == c).count();
            prop_assert_eq!(count(&s.train), 20);
            prop_assert_eq!(count(&s.val), 70);
            prop_assert_eq!(count(&s.test), k - 90);
        }
    }

    #[test]
    fn cocitation_hypergraph_shape(
        n in 1usize..30,
        raw in proptest::collection::vec((0usize..30, 0usize..30), 0..60),
        seed in any::<u64>(),
    ) {
        let citations: Vec<Citation> = raw.iter().map(|&(a, b)| Citation { citing: a % n, cited: b % n }).collect();
        let mut rng = Rng::seed_from_u64(seed);
        let features = Matrix::glorot(n, 4, &mut rng);
        let (h, edge_features) = build_cocitation_hypergraph(&citations, n, &features).unwrap();
        prop_assert_eq!(h.num_hyperedges(), n);
        prop_assert_eq!(&edge_features, &features);
        for d in 0..n {
            prop_assert!(h.hyperedge(d).contains(&d));
            for c in citations.iter().filter(|c| c.citing == d) {
                prop_assert!(h.hyperedge(d).contains(&c.cited));
            }
        }
        prop_assert!(h.vertex_degrees().iter().all(|&k| k >= 1));
    }

    #[test]
    fn config_text_round_trip(
        lr in 1e-5f64..1.0,
        hidden in 1usize..128,
        seed in any::<u32>(),
        rate in 0.0f64..=1.0,
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.train.learning_rate = lr;
        cfg.model.hidden_dim = hidden;
        cfg.train.seed = seed as u64;
        cfg.model.layer.adjacency_dropout_rate = rate;
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn fan_out_doubles_gradient(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let mut tape = Tape::new();
        let x = tape.variable(Matrix::glorot(rows, cols, &mut rng));
        let y = tape.add(x, x).unwrap();
        let loss = tape.sum(y);
        let grads = tape.backward(loss).unwrap();
        prop_assert_eq!(grads.get(x).unwrap(), &Matrix::filled(rows, cols, 2.0));
    }

    #[test]
    fn translated_convolution_matches(seed in any::<u64>(), relu in any::<bool>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let nv = rng.gen_range(2..12);
        let ne = rng.gen_range(1..8);
        let weights = (0..ne).map(|_| rng.gen_range(0.1..3.0)).collect();
        let h = random_hypergraph(&mut rng, nv, ne, 5).with_weights(weights).unwrap();
        let x = random_matrix(&mut rng, nv, 3);
        let params = HgnnLayerParams { theta: random_matrix(&mut rng, 3, 2) };
        let act = if relu { Activation::Relu } else { Activation::Identity };
        let direct = hgnn_conv(&x, &h, &params, act, ZeroDegreePolicy::Zero).unwrap();
        let (_, layer, store) = hgnn_as_hmpnn(&params, act).unwrap();
        let (out, _) = forward_layer_eval(&layer, &store, &LayerContext::new(&h), &x, &Matrix::zeros(ne, 1)).unwrap();
        prop_assert!(max_abs_diff(&direct, &out) < 1e-6);
    }

    #[test]
    fn layer_commutes_with_relabeling(seed in any::<u64>(), mean in any::<bool>()) {
        let mut rng = Rng::seed_from_u64(seed);
        let nv = rng.gen_range(1..10);
        let ne = rng.gen_range(1..6);
        let h = random_hypergraph(&mut rng, nv, ne, 4);
        let x = random_matrix(&mut rng, nv, 3);
        let w = random_matrix(&mut rng, ne, 2);
        let cfg = LayerConfig {
            in_dim: 3,
            edge_dim: 2,
            hidden_dim: 4,
            out_dim: 3,
            edge_aggregation: if mean { "mean".into() } else { "sum".into() },
            ..LayerConfig::default()
        };
        let mut store = ParamStore::new();
        let layer = HmpnnLayer::build(&cfg, &mut store, &mut rng, "l").unwrap();
        let vp = random_permutation(&mut rng, nv);
        let ep = random_permutation(&mut rng, ne);
        let (xo, wo) = forward_layer_eval(&layer, &store, &LayerContext::new(&h), &x, &w).unwrap();
        let hp = h.relabel(&vp, &ep).unwrap();
        let (xp, wp) = forward_layer_eval(&layer, &store, &LayerContext::new(&hp), &permute_rows(&x, &vp), &permute_rows(&w, &ep)).unwrap();
        prop_assert!(max_abs_diff(&xp, &permute_rows(&xo, &vp)) < 1e-12);
        prop_assert!(max_abs_diff(&wp, &permute_rows(&wo, &ep)) < 1e-12);
    }

    #[test]
    fn attention_ignores_element_order(seed in any::<u64>(), size in 1usize..9) {
        let mut rng = Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let dims = AllSetDims { input_dim: 3, hidden_dim: 4, out_dim: 4, heads: 2 };
        let block = AllSetBlock::build(&mut store, &mut rng, "b", dims).unwrap();
        let set = random_matrix(&mut rng, size, 3);
        let shuffled = permute_rows(&set, &random_permutation(&mut rng, size));
        let run = |m: &Matrix| {
            let mut g = Rng::seed_from_u64(0);
            let mut fwd = Forward::new(&store, Mode::Eval, &mut g);
            let s = fwd.tape.constant(m.clone());
            let out = allset_block(&mut fwd, &block, s).unwrap();
            fwd.tape.value(out).clone()
        };
        prop_assert!(max_abs_diff(&run(&set), &run(&shuffled)) < 1e-12);
    }
}
