//! End-to-end runs: dataset loading, a single training run with its
//! artifacts, and the adjacency-dropout sweep.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::data::{DatasetBundle, CITES_FILE, CONTENT_FILE};
use crate::error::{Error, Result};
use crate::model::{build_model, ModelDims};
use crate::params::{ParamStore, Rng};
use crate::train::{fit, Checkpoint, Metrics};

/// Reference Cora test accuracy for the two-layer sigmoid model.
pub const CORA_REFERENCE_ACCURACY: f64 = 0.9216;

/// Loads the dataset named by `cfg.data`.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<DatasetBundle> {
    let mut rng = Rng::seed_from_u64(cfg.data.split_seed);
    match cfg.data.source.as_str() {
        "synthetic" => cfg.data.synthetic.generate(&mut rng),
        "cora" => {
            if cfg.data.dir.is_empty() {
                return Err(Error::MissingData(
                    "no Cora directory given (set --data-dir or data.dir)".into(),
                ));
            }
            let dir = PathBuf::from(&cfg.data.dir);
            for file in [CONTENT_FILE, CITES_FILE] {
                if !dir.join(file).is_file() {
                    return Err(Error::MissingData(format!(
                        "{} does not exist",
                        dir.join(file).display()
                    )));
                }
            }
            DatasetBundle::cora(&dir, &mut rng)
        }
        other => Err(Error::config(
            "data.source",
            format!("expected cora|synthetic, got `{other}`"),
        )),
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub metrics: Metrics,
    pub params: ParamStore,
    pub dims: ModelDims,
}

impl RunOutcome {
    pub fn test_acc(&self) -> f64 {
        self.metrics.test_acc
    }
}

/// Builds the configured model, trains it and returns the best-validation
/// parameters.
pub fn run_train(cfg: &ExperimentConfig, bundle: &DatasetBundle) -> Result<RunOutcome> {
    cfg.validate()?;
    let inputs = bundle.graph_inputs()?;
    let dims = inputs.dims(bundle.num_classes);
    let (model, mut params) = build_model(&cfg.model, dims, cfg.train.seed)?;
    let metrics = fit(model.as_ref(), &mut params, &inputs, bundle, &cfg.train)?;
    Ok(RunOutcome { metrics, params, dims })
}

/// `test_acc=<acc>`, followed by the gap to the reference accuracy when the
/// run used Cora.
pub fn summary_line(cfg: &ExperimentConfig, test_acc: f64) -> String {
    if cfg.data.source == "cora" {
        format!(
            "test_acc={test_acc:.4} reference={CORA_REFERENCE_ACCURACY:.4} gap={:+.4}",
            test_acc - CORA_REFERENCE_ACCURACY
        )
    } else {
        format!("test_acc={test_acc:.4}")
    }
}

/// Writes `config.txt` (effective config), `metrics.csv`, `checkpoint.json`
/// and `summary.txt` into `out_dir`.
pub fn write_run_artifacts(out_dir: &Path, cfg: &ExperimentConfig, outcome: &RunOutcome) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("config.txt"), cfg.to_text())?;
    std::fs::write(out_dir.join("metrics.csv"), outcome.metrics.to_csv())?;
    Checkpoint::new(&cfg.model, &cfg.train, outcome.dims, &outcome.params).save(out_dir.join("checkpoint.json"))?;
    let summary = format!(
        "{}\nbest_epoch={} best_val_acc={:.4} epochs_run={} seconds={:.2}\n",
        summary_line(cfg, outcome.test_acc()),
        outcome.metrics.best_epoch,
        outcome.metrics.best_val_acc,
        outcome.metrics.epochs.last().map_or(0, |m| m.epoch),
        outcome.metrics.total_seconds()
    );
    std::fs::write(out_dir.join("summary.txt"), summary)?;
    Ok(())
}

/// One training run of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationRun {
    pub adjacency_dropout_rate: f64,
    pub activation_dropout: f64,
    pub repeat: usize,
    pub seed: u64,
    pub test_acc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationTable {
    pub rates: Vec<f64>,
    pub activation_dropout: Vec<f64>,
    pub runs: Vec<AblationRun>,
}

impl AblationTable {
    /// Mean test accuracy over repeats for one cell.
    pub fn mean(&self, rate: f64, activation_dropout: f64) -> f64 {
        let accs: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.adjacency_dropout_rate == rate && r.activation_dropout == activation_dropout)
            .map(|r| r.test_acc)
            .collect();
        accs.iter().sum::<f64>() / accs.len() as f64
    }

    /// One row per adjacency-dropout rate, one accuracy column per
    /// activation-dropout setting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("adjacency_dropout_rate");
        for i in 0..self.activation_dropout.len() {
            let _ = write!(out, ",accuracy_test_{}", i + 1);
        }
        out.push('\n');
        for &rate in &self.rates {
            let _ = write!(out, "{rate}");
            for &a in &self.activation_dropout {
                let _ = write!(out, ",{:.4}", self.mean(rate, a));
            }
            out.push('\n');
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from("adjacency_dropout_rate,activation_dropout,repeat,seed,test_acc\n");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.adjacency_dropout_rate, r.activation_dropout, r.repeat, r.seed, r.test_acc
            );
        }
        out
    }
}

/// Trains once per (rate, activation dropout, repeat). Run `i` uses seed
/// `train.seed + i`; up to `jobs` runs execute concurrently.
pub fn ablate_adjacency(cfg: &ExperimentConfig, bundle: &DatasetBundle, jobs: usize) -> Result<AblationTable> {
    cfg.validate()?;
    let ab = &cfg.ablation;
    let mut plan = Vec::new();
    for &rate in &ab.rates {
        for &act in &ab.activation_dropout {
            for repeat in 0..ab.repeats {
                plan.push((rate, act, repeat));
            }
        }
    }
    let run = |(i, &(rate, act, repeat)): (usize, &(f64, f64, usize))| -> Result<AblationRun> {
        let mut run_cfg = cfg.clone();
        run_cfg.model.layer.adjacency_dropout_rate = rate;
        run_cfg.model.layer.vertex_dropout_rate = act;
        run_cfg.model.layer.edge_dropout_rate = act;
        run_cfg.train.seed = cfg.train.seed + i as u64;
        let outcome = run_train(&run_cfg, bundle)?;
        log::info!(
            "adjacency {rate} activation {act} repeat {repeat}: test_acc={:.4}",
            outcome.test_acc()
        );
        Ok(AblationRun {
            adjacency_dropout_rate: rate,
            activation_dropout: act,
            repeat,
            seed: run_cfg.train.seed,
            test_acc: outcome.test_acc(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
    let runs = pool.install(|| plan.par_iter().enumerate().map(run).collect::<Result<Vec<_>>>())?;
    Ok(AblationTable {
        rates: ab.rates.clone(),
        activation_dropout: ab.activation_dropout.clone(),
        runs,
    })
}
