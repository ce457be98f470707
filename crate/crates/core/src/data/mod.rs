//! Datasets: Cora ingestion, the co-citation hypergraph, the per-class split
//! protocol and small synthetic tasks.

pub mod cora;
pub mod synthetic;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::model::GraphInputs;
use crate::params::Rng;
use crate::tensor::Matrix;

pub use cora::{load_cora, parse_cora, Citation, CoraData, CITES_FILE, CONTENT_FILE};

pub const TRAIN_PER_CLASS: usize = 20;
pub const VAL_PER_CLASS: usize = 70;

/// One hyperedge per document: the document together with every document it
/// cites. Hyperedge features are the document's own features.
pub fn build_cocitation_hypergraph(
    citations: &[Citation],
    num_docs: usize,
    features: &Matrix,
) -> Result<(Hypergraph, Matrix)> {
    if features.rows() != num_docs {
        return Err(Error::shape(
            "build_cocitation_hypergraph",
            format!("{} feature rows for {num_docs} documents", features.rows()),
        ));
    }
    let mut members: Vec<BTreeSet<usize>> = (0..num_docs).map(|d| BTreeSet::from([d])).collect();
    for c in citations {
        if c.citing >= num_docs || c.cited >= num_docs {
            return Err(Error::Structure(format!(
                "citation {} -> {} outside {num_docs} documents",
                c.citing, c.cited
            )));
        }
        members[c.citing].insert(c.cited);
    }
    let h = Hypergraph::build(num_docs, members)?;
    Ok((h, features.clone()))
}

/// Disjoint boolean masks over the vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

pub fn mask_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
}

/// Per class, picks `train_per_class` then `val_per_class` members uniformly
/// at random; everything else is test.
pub fn split_per_class(
    labels: &[usize],
    num_classes: usize,
    train_per_class: usize,
    val_per_class: usize,
    rng: &mut Rng,
) -> Result<Splits> {
    let n = labels.len();
    let mut splits = Splits {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![true; n],
    };
    for class in 0..num_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if members.len() < train_per_class + val_per_class {
            return Err(Error::Contract(format!(
                "class {class} has {} members, {} needed",
                members.len(),
                train_per_class + val_per_class
            )));
        }
        members.shuffle(rng);
        for (k, &v) in members.iter().take(train_per_class + val_per_class).enumerate() {
            splits.test[v] = false;
            if k < train_per_class {
                splits.train[v] = true;
            } else {
                splits.val[v] = true;
            }
        }
    }
    Ok(splits)
}

/// 20 training and 70 validation vertices per class.
pub fn make_splits(labels: &[usize], num_classes: usize, rng: &mut Rng) -> Result<Splits> {
    split_per_class(labels, num_classes, TRAIN_PER_CLASS, VAL_PER_CLASS, rng)
}

/// Everything one node-classification experiment needs.
#[derive(Clone, Debug)]
pub struct DatasetBundle {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub hypergraph: Hypergraph,
    pub edge_features: Matrix,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
    pub id_map: HashMap<String, usize>,
}

impl DatasetBundle {
    /// Reads `cora.content` and `cora.cites` from `dir` and splits with
    /// `rng`.
    pub fn cora(dir: impl AsRef<Path>, rng: &mut Rng) -> Result<Self> {
        let dir = dir.as_ref();
        let data = load_cora(dir.join(CONTENT_FILE), dir.join(CITES_FILE))?;
        Self::from_cora(data, rng)
    }

    pub fn from_cora(data: CoraData, rng: &mut Rng) -> Result<Self> {
        let n = data.labels.len();
        let (hypergraph, edge_features) = build_cocitation_hypergraph(&data.citations, n, &data.features)?;
        let splits = make_splits(&data.labels, data.num_classes(), rng)?;
        let bundle = Self {
            num_classes: data.num_classes(),
            features: data.features,
            labels: data.labels,
            hypergraph,
            edge_features,
            train_mask: splits.train,
            val_mask: splits.val,
            test_mask: splits.test,
            id_map: data.id_map,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if self.features.rows() != n || self.hypergraph.num_vertices() != n {
            return Err(Error::shape(
                "DatasetBundle",
                "features, labels and hypergraph disagree on |V|",
            ));
        }
        if self.edge_features.rows() != self.hypergraph.num_hyperedges() {
            return Err(Error::shape("DatasetBundle", "hyperedge features do not match |E|"));
        }
        if [&self.train_mask, &self.val_mask, &self.test_mask]
            .iter()
            .any(|m| m.len() != n)
        {
            return Err(Error::shape("DatasetBundle", "mask length differs from |V|"));
        }
        if (0..n).any(|i| {
            [self.train_mask[i], self.val_mask[i], self.test_mask[i]]
                .iter()
                .filter(|&&b| b)
                .count()
                > 1
        }) {
            return Err(Error::Contract("masks overlap".into()));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.num_classes) {
            return Err(Error::Contract(format!(
                "label {l} outside {} classes",
                self.num_classes
            )));
        }
        Ok(())
    }

    pub fn graph_inputs(&self) -> Result<GraphInputs> {
        GraphInputs::new(&self.hypergraph, self.features.clone(), self.edge_features.clone())
    }
}
