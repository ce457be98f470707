use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Activation;

/// What adjacency dropout removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyDropoutMode {
    /// Whole hyperedges (incidence columns).
    #[default]
    Hyperedge,
    /// Individual vertex/hyperedge memberships.
    IncidenceEntry,
}

impl FromStr for AdjacencyDropoutMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hyperedge" => Ok(Self::Hyperedge),
            "incidence_entry" | "incidence-entry" => Ok(Self::IncidenceEntry),
            other => Err(format!("expected hyperedge|incidence_entry, got `{other}`")),
        }
    }
}

impl fmt::Display for AdjacencyDropoutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hyperedge => "hyperedge",
            Self::IncidenceEntry => "incidence_entry",
        })
    }
}

/// Rescaling applied to cells that survive regular dropout. With `n` cells
/// in a row and `k` of them zeroed, `Paper` multiplies survivors by
/// `(n + k) / n` and `Inverted` by `n / (n - k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DropoutScaling {
    #[default]
    Paper,
    Inverted,
}

impl FromStr for DropoutScaling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "paper" => Ok(Self::Paper),
            "inverted" => Ok(Self::Inverted),
            other => Err(format!("expected paper|inverted, got `{other}`")),
        }
    }
}

impl fmt::Display for DropoutScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Inverted => "inverted",
        })
    }
}

/// One point of the layer design space.
///
/// The four function slots and three aggregation slots hold registry names
/// (see [`super::functions::slot_registry`] and
/// [`super::aggregate::aggregator_registry`]):
///
/// | slot                       | role                                                   |
/// |----------------------------|--------------------------------------------------------|
/// | `vertex_message`           | message each vertex sends                              |
/// | `edge_aggregation`         | pools member messages into each hyperedge              |
/// | `edge_update`              | new hyperedge state from old state + pooled messages   |
/// | `edge_message_aggregation` | pools member messages for the outgoing hyperedge message |
/// | `edge_message`             | message each hyperedge sends (reads the old state)     |
/// | `vertex_aggregation`       | pools incident hyperedge messages into each vertex     |
/// | `vertex_update`            | new vertex state from old state + pooled messages      |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub vertex_message: String,
    pub edge_message: String,
    pub edge_update: String,
    pub vertex_update: String,
    pub edge_aggregation: String,
    pub edge_message_aggregation: String,
    pub vertex_aggregation: String,
    pub activation: Activation,
    /// Learnable two-argument functions also read the previous state.
    pub concat_state: bool,
    pub bias: bool,
    pub vertex_dropout_rate: f64,
    pub edge_dropout_rate: f64,
    pub adjacency_dropout_rate: f64,
    pub adjacency_dropout_mode: AdjacencyDropoutMode,
    pub dropout_scaling: DropoutScaling,
    pub batch_norm: bool,
    pub in_dim: usize,
    pub edge_dim: usize,
    pub hidden_dim: usize,
    pub out_dim: usize,
    pub allset_heads: usize,
}

impl Default for LayerConfig {
    fn default() -> Self {
        Self {
            vertex_message: "linear".into(),
            edge_message: "identity".into(),
            edge_update: "linear_act".into(),
            vertex_update: "linear_act".into(),
            edge_aggregation: "sum".into(),
            edge_message_aggregation: "sum".into(),
            vertex_aggregation: "sum".into(),
            activation: Activation::Sigmoid,
            concat_state: true,
            bias: true,
            vertex_dropout_rate: 0.5,
            edge_dropout_rate: 0.5,
            adjacency_dropout_rate: 0.7,
            adjacency_dropout_mode: AdjacencyDropoutMode::Hyperedge,
            dropout_scaling: DropoutScaling::Paper,
            batch_norm: false,
            in_dim: 1,
            edge_dim: 1,
            hidden_dim: 2,
            out_dim: 1,
            allset_heads: 1,
        }
    }
}

impl LayerConfig {
    /// A layer whose every function passes its message argument through and
    /// whose aggregations all sum. Regularisers are off.
    pub fn pass_through(dim: usize) -> Self {
        Self {
            vertex_message: "identity".into(),
            edge_message: "identity".into(),
            edge_update: "identity".into(),
            vertex_update: "identity".into(),
            edge_aggregation: "sum".into(),
            edge_message_aggregation: "sum".into(),
            vertex_aggregation: "sum".into(),
            activation: Activation::Identity,
            vertex_dropout_rate: 0.0,
            edge_dropout_rate: 0.0,
            adjacency_dropout_rate: 0.0,
            in_dim: dim,
            edge_dim: dim,
            hidden_dim: dim,
            out_dim: dim,
            ..Self::default()
        }
    }

    pub fn without_dropout(mut self) -> Self {
        self.vertex_dropout_rate = 0.0;
        self.edge_dropout_rate = 0.0;
        self.adjacency_dropout_rate = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (key, rate) in [
            ("vertex_dropout_rate", self.vertex_dropout_rate),
            ("edge_dropout_rate", self.edge_dropout_rate),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::config(key, format!("must lie in [0, 1), got {rate}")));
            }
        }
        if !(0.0..=1.0).contains(&self.adjacency_dropout_rate) {
            return Err(Error::config(
                "adjacency_dropout_rate",
                format!("must lie in [0, 1], got {}", self.adjacency_dropout_rate),
            ));
        }
        for (key, dim) in [
            ("in_dim", self.in_dim),
            ("edge_dim", self.edge_dim),
            ("hidden_dim", self.hidden_dim),
            ("out_dim", self.out_dim),
            ("allset_heads", self.allset_heads),
        ] {
            if dim == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_are_range_checked() {
        let mut cfg = LayerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.vertex_dropout_rate = 1.0;
        assert!(cfg.validate().is_err());
        cfg.vertex_dropout_rate = 0.0;
        cfg.adjacency_dropout_rate = 1.0;
        assert!(cfg.validate().is_ok());
        cfg.adjacency_dropout_rate = 1.5;
        assert!(cfg.validate().is_err());
        cfg.adjacency_dropout_rate = 0.0;
        cfg.hidden_dim = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "hidden_dim"));
    }

    #[test]
    fn enum_parsing() {
        assert_eq!("incidence-entry".parse(), Ok(AdjacencyDropoutMode::IncidenceEntry));
        assert_eq!("inverted".parse(), Ok(DropoutScaling::Inverted));
        assert!("sideways".parse::<DropoutScaling>().is_err());
    }
}
