//! Experiment configuration and its flat `section.key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! model.kind = hmpnn
//! layer.adjacency_dropout_rate = 0.7
//! train.epochs = 300
//! ablation.rates = 0.9, 0.7, 0.5, 0.3, 0.0
//! ```
//!
//! Unspecified keys keep their defaults; unknown keys are errors. Every key
//! can also be overridden from the environment as `HMPNN_<SECTION>__<KEY>`
//! (for example `HMPNN_TRAIN__EPOCHS=50`).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::data::synthetic::PlantedPartition;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::train::TrainConfig;

pub const ENV_PREFIX: &str = "HMPNN_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    /// `cora` or `synthetic`.
    pub source: String,
    /// Directory holding `cora.content` and `cora.cites`; empty when unset.
    pub dir: String,
    pub split_seed: u64,
    /// Generator settings, used when `source = synthetic`.
    #[serde(flatten)]
    pub synthetic: PlantedPartition,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: "cora".into(),
            dir: String::new(),
            split_seed: 0,
            synthetic: PlantedPartition::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub rates: Vec<f64>,
    /// Vertex/hyperedge dropout rate of each accuracy column.
    pub activation_dropout: Vec<f64>,
    /// Runs per cell; each run gets its own seed.
    pub repeats: usize,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            rates: vec![0.9, 0.7, 0.5, 0.3, 0.0],
            activation_dropout: vec![0.5, 0.0],
            repeats: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub data: DataConfig,
    pub ablation: AblationConfig,
}

/// Layer fields filled in by the model builder, hidden from the text form.
const DERIVED_LAYER_KEYS: [&str; 4] = ["in_dim", "edge_dim", "hidden_dim", "out_dim"];

fn to_value<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("config types serialise") {
        Value::Object(m) => m,
        _ => unreachable!("config sections are structs"),
    }
}

impl ExperimentConfig {
    fn sections(&self) -> Map<String, Value> {
        let mut model = to_value(&self.model);
        let mut layer = match model.remove("layer") {
            Some(Value::Object(m)) => m,
            _ => unreachable!(),
        };
        for k in DERIVED_LAYER_KEYS {
            layer.remove(k);
        }
        let mut out = Map::new();
        out.insert("model".into(), Value::Object(model));
        out.insert("layer".into(), Value::Object(layer));
        out.insert("train".into(), Value::Object(to_value(&self.train)));
        out.insert("data".into(), Value::Object(to_value(&self.data)));
        out.insert("ablation".into(), Value::Object(to_value(&self.ablation)));
        out
    }

    fn from_sections(mut s: Map<String, Value>) -> std::result::Result<Self, serde_json::Error> {
        let defaults = to_value(&crate::hmpnn::LayerConfig::default());
        let mut layer = match s.remove("layer") {
            Some(Value::Object(m)) => m,
            _ => Map::new(),
        };
        for k in DERIVED_LAYER_KEYS {
            layer.insert(k.into(), defaults[k].clone());
        }
        let mut model = match s.remove("model") {
            Some(Value::Object(m)) => m,
            _ => Map::new(),
        };
        model.insert("layer".into(), Value::Object(layer));
        let take = |s: &mut Map<String, Value>, k: &str| s.remove(k).unwrap_or(Value::Null);
        Ok(Self {
            model: serde_json::from_value(Value::Object(model))?,
            train: serde_json::from_value(take(&mut s, "train"))?,
            data: serde_json::from_value(take(&mut s, "data"))?,
            ablation: serde_json::from_value(take(&mut s, "ablation"))?,
        })
    }

    /// All keys in `section.key` form.
    pub fn keys(&self) -> Vec<String> {
        self.sections()
            .iter()
            .flat_map(|(section, fields)| {
                let fields = fields.as_object().expect("sections are objects");
                fields.keys().map(move |k| format!("{section}.{k}")).collect::<Vec<_>>()
            })
            .collect()
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let unknown = || Error::config(key, "unknown key");
        let (section, field) = key.split_once('.').ok_or_else(unknown)?;
        let mut sections = self.sections();
        let slot = sections
            .get_mut(section)
            .and_then(Value::as_object_mut)
            .and_then(|m| m.get_mut(field))
            .ok_or_else(unknown)?;
        *slot = parse_like(slot, raw.trim()).map_err(|m| Error::config(key, m))?;
        *self = Self::from_sections(sections).map_err(|e| Error::config(key, e.to_string()))?;
        Ok(())
    }

    /// Applies a config text on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies `HMPNN_SECTION__KEY=value` overrides.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        for (name, value) in vars {
            if let Some(rest) = name.strip_prefix(ENV_PREFIX) {
                self.set(&rest.to_lowercase().replace("__", "."), &value)?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (section, fields) in self.sections() {
            for (k, v) in fields.as_object().expect("sections are objects") {
                let _ = writeln!(out, "{section}.{k} = {}", render(v));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        if !matches!(self.data.source.as_str(), "cora" | "synthetic") {
            return Err(Error::config(
                "data.source",
                format!("expected cora|synthetic, got `{}`", self.data.source),
            ));
        }
        if self.ablation.rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::config("ablation.rates", "rates must lie in [0, 1]"));
        }
        if self.ablation.activation_dropout.is_empty()
            || self.ablation.activation_dropout.iter().any(|r| !(0.0..1.0).contains(r))
        {
            return Err(Error::config(
                "ablation.activation_dropout",
                "needs at least one rate in [0, 1)",
            ));
        }
        if self.ablation.repeats == 0 {
            return Err(Error::config("ablation.repeats", "must be positive"));
        }
        Ok(())
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(render).collect::<Vec<_>>().join(", "),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn parse_number(raw: &str, integer: bool) -> std::result::Result<Value, String> {
    if integer {
        raw.parse::<u64>()
            .map(Value::from)
            .map_err(|_| format!("expected a non-negative integer, got `{raw}`"))
    } else {
        raw.parse::<f64>()
            .ok()
            .and_then(Number::from_f64)
            .map(Value::Number)
            .ok_or_else(|| format!("expected a number, got `{raw}`"))
    }
}

/// Parses `raw` into a value of the same kind as `current`.
fn parse_like(current: &Value, raw: &str) -> std::result::Result<Value, String> {
    match current {
        Value::Bool(_) => raw
            .parse::<bool>()
            .map(Value::Bool)
            .map_err(|_| format!("expected true|false, got `{raw}`")),
        Value::Number(n) => parse_number(raw, n.is_u64()),
        Value::Array(items) => {
            let integer = items.first().and_then(Value::as_number).is_some_and(Number::is_u64);
            raw.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_number(s, integer))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        _ => Ok(Value::String(raw.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Activation;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_text();
        assert!(text.contains("layer.adjacency_dropout_rate = 0.7"));
        assert!(!text.contains("in_dim"));
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn edited_config_round_trips() {
        let cfg = ExperimentConfig::parse(
            "model.hidden_dim = 16\nlayer.activation = relu # trailing\n\ntrain.weight_decay = 0\nablation.rates = 0.5, 0\ndata.dir = /tmp/cora\n",
        )
        .unwrap();
        assert_eq!(cfg.model.hidden_dim, 16);
        assert_eq!(cfg.model.layer.activation, Activation::Relu);
        assert_eq!(cfg.ablation.rates, vec![0.5, 0.0]);
        assert_eq!(cfg.data.dir, "/tmp/cora");
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn field_level_errors() {
        let err = ExperimentConfig::parse("train.epochs = -3").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref key, .. } if key == "train.epochs"),
            "{err}"
        );
        let err = ExperimentConfig::parse("layer.activation = tanh").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref key, .. } if key == "layer.activation"),
            "{err}"
        );
        let err = ExperimentConfig::parse("layer.colour = red").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "layer.colour"));
        assert!(matches!(
            ExperimentConfig::parse("just words"),
            Err(Error::Parse { line: 1, .. })
        ));
        let cfg = ExperimentConfig::parse("train.learning_rate = -0.1").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "train.learning_rate"));
    }

    #[test]
    fn environment_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_env([
            ("HMPNN_TRAIN__EPOCHS".to_string(), "7".to_string()),
            (
                "HMPNN_LAYER__ADJACENCY_DROPOUT_MODE".to_string(),
                "incidence_entry".to_string(),
            ),
            ("PATH".to_string(), "/bin".to_string()),
        ])
        .unwrap();
        assert_eq!(cfg.train.epochs, 7);
        assert_eq!(
            cfg.model.layer.adjacency_dropout_mode,
            crate::hmpnn::AdjacencyDropoutMode::IncidenceEntry
        );
    }
}
