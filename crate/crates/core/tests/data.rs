//! Dataset loading from files. The full-Cora checks need the dataset and
//! are ignored unless run with `CORA_DIR` set and `--ignored`.

use std::collections::BTreeSet;
use std::path::PathBuf;

use hmpnn::config::ExperimentConfig;
use hmpnn::data::{load_cora, DatasetBundle, CITES_FILE, CONTENT_FILE};
use hmpnn::experiment::load_dataset;
use hmpnn::{Error, Rng};
use rand::SeedableRng;

fn cora_dir() -> PathBuf {
    PathBuf::from(std::env::var("CORA_DIR").expect("CORA_DIR must point at the Cora directory"))
}

#[test]
fn loads_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(CONTENT_FILE), "10 1 0 0 B\n20 0 1 0 A\n30 0 0 1 B\n").unwrap();
    std::fs::write(dir.path().join(CITES_FILE), "20 10\n30 10\n99 10\n").unwrap();
    let data = load_cora(dir.path().join(CONTENT_FILE), dir.path().join(CITES_FILE)).unwrap();
    assert_eq!(data.labels, vec![1, 0, 1]);
    assert_eq!(data.class_names, vec!["A", "B"]);
    assert_eq!((data.raw_citation_count, data.dropped_citations), (3, 1));
    assert_eq!(data.citations.len(), 2);
    assert_eq!(data.id_map["30"], 2);
}

#[test]
fn missing_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let err = DatasetBundle::cora(dir.path(), &mut Rng::seed_from_u64(0)).unwrap_err();
    assert!(matches!(err, Error::Io(_)), "{err}");

    let mut cfg = ExperimentConfig::default();
    let err = load_dataset(&cfg).unwrap_err();
    assert!(matches!(err, Error::MissingData(_)), "{err}");
    cfg.data.dir = dir.path().display().to_string();
    let err = load_dataset(&cfg).unwrap_err();
    assert!(matches!(err, Error::MissingData(_)), "{err}");
}

#[test]
#[ignore = "needs the Cora dataset (set CORA_DIR)"]
fn cora_counts() {
    let dir = cora_dir();
    let data = load_cora(dir.join(CONTENT_FILE), dir.join(CITES_FILE)).unwrap();
    assert_eq!(data.features.rows(), 2708);
    assert_eq!(data.num_classes(), 7);
    assert_eq!(data.raw_citation_count, 5429);
    assert_eq!(data.dropped_citations, 0);

    let usable: BTreeSet<_> = data
        .citations
        .iter()
        .filter(|c| c.citing != c.cited)
        .map(|c| (c.citing, c.cited))
        .collect();
    let bundle = DatasetBundle::from_cora(data, &mut Rng::seed_from_u64(0)).unwrap();
    let h = &bundle.hypergraph;
    assert_eq!(h.num_hyperedges(), 2708);
    let mean_size = h.hyperedge_degrees().iter().sum::<usize>() as f64 / 2708.0;
    assert!((mean_size - (1.0 + usable.len() as f64 / 2708.0)).abs() < 1e-12);
    assert_eq!(bundle.edge_features, bundle.features);
    let count = |m: &[bool]| m.iter().filter(|&&x| x).count();
    assert_eq!(
        (
            count(&bundle.train_mask),
            count(&bundle.val_mask),
            count(&bundle.test_mask)
        ),
        (140, 490, 2078)
    );
}
