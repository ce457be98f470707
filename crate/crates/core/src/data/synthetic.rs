//! Generated node-classification tasks for tests and offline runs.

use std::collections::{BTreeSet, HashMap};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{split_per_class, DatasetBundle};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::params::Rng;
use crate::tensor::Matrix;

/// 20 vertices in two size-10 hyperedges; features are the one-hot cluster
/// indicator and labels the cluster. Vertices `4k, 4k+1` train, `4k+2`
/// validate, `4k+3` test.
pub fn two_cluster() -> DatasetBundle {
    let n = 20;
    let hypergraph = Hypergraph::build(n, [(0..10).collect::<Vec<_>>(), (10..20).collect()]).expect("valid clusters");
    let labels: Vec<usize> = (0..n).map(|v| v / 10).collect();
    let mut features = Matrix::zeros(n, 2);
    for (v, &l) in labels.iter().enumerate() {
        features.set(v, l, 1.0);
    }
    DatasetBundle {
        features,
        labels,
        num_classes: 2,
        hypergraph,
        edge_features: Matrix::identity(2),
        train_mask: (0..n).map(|v| v % 4 < 2).collect(),
        val_mask: (0..n).map(|v| v % 4 == 2).collect(),
        test_mask: (0..n).map(|v| v % 4 == 3).collect(),
        id_map: (0..n).map(|v| (v.to_string(), v)).collect(),
    }
}

/// A Cora-shaped generator: binary bag-of-words features drawn around a
/// per-class topic, and one hyperedge per vertex grouping it with
/// `hyperedge_size - 1` others, each from the same class with probability
/// `homophily`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartition {
    pub num_vertices: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Words per class topic.
    pub topic_words: usize,
    /// Probability a vertex uses each word of its class topic.
    pub topic_rate: f64,
    /// Probability a vertex uses any other word.
    pub noise_rate: f64,
    pub hyperedge_size: usize,
    pub homophily: f64,
    pub train_per_class: usize,
    pub val_per_class: usize,
}

impl Default for PlantedPartition {
    fn default() -> Self {
        Self {
            num_vertices: 700,
            num_classes: 7,
            feature_dim: 140,
            topic_words: 20,
            topic_rate: 0.2,
            noise_rate: 0.05,
            hyperedge_size: 4,
            homophily: 0.8,
            train_per_class: 20,
            val_per_class: 70,
        }
    }
}

impl PlantedPartition {
    pub fn generate(&self, rng: &mut Rng) -> Result<DatasetBundle> {
        let (n, c) = (self.num_vertices, self.num_classes);
        if c == 0 || n < c || self.hyperedge_size == 0 || self.feature_dim == 0 {
            return Err(Error::config(
                "data.synthetic",
                "needs classes, vertices, features and hyperedge size > 0",
            ));
        }
        let labels: Vec<usize> = (0..n).map(|v| v % c).collect();
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
        for (v, &l) in labels.iter().enumerate() {
            by_class[l].push(v);
        }
        let topics: Vec<BTreeSet<usize>> = (0..c)
            .map(|k| {
                (0..self.topic_words.min(self.feature_dim))
                    .map(|i| (k * self.topic_words + i) % self.feature_dim)
                    .collect()
            })
            .collect();
        let mut features = Matrix::zeros(n, self.feature_dim);
        for (v, &l) in labels.iter().enumerate() {
            for f in 0..self.feature_dim {
                let p = if topics[l].contains(&f) {
                    self.topic_rate
                } else {
                    self.noise_rate
                };
                if rng.gen::<f64>() < p {
                    features.set(v, f, 1.0);
                }
            }
        }
        let mut edges = Vec::with_capacity(n);
        for (v, &l) in labels.iter().enumerate() {
            let mut members = BTreeSet::from([v]);
            for _ in 1..self.hyperedge_size {
                let pool = if rng.gen::<f64>() < self.homophily {
                    &by_class[l]
                } else {
                    &by_class[rng.gen_range(0..c)]
                };
                members.insert(pool[rng.gen_range(0..pool.len())]);
            }
            edges.push(members);
        }
        let hypergraph = Hypergraph::build(n, edges)?;
        let splits = split_per_class(&labels, c, self.train_per_class, self.val_per_class, rng)?;
        let bundle = DatasetBundle {
            edge_features: features.clone(),
            features,
            labels,
            num_classes: c,
            hypergraph,
            train_mask: splits.train,
            val_mask: splits.val,
            test_mask: splits.test,
            id_map: (0..n).map(|v| (v.to_string(), v)).collect::<HashMap<_, _>>(),
        };
        bundle.validate()?;
        Ok(bundle)
    }
}
