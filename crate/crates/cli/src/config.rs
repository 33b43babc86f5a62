//! Scenario configuration, read from TOML.

use serde::{Deserialize, Serialize};

use qbcast_core::linalg::{c, C64};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Enumerate,
    Sample,
}

/// A complex number written as `0.5` or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexInput {
    pub fn value(self) -> C64 {
        match self {
            ComplexInput::Real(x) => c(x, 0.0),
            ComplexInput::Pair([re, im]) => c(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInput {
    /// Vertices are numbered `1..=vertices`.
    pub vertices: usize,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockInput {
    /// `cnot` or `rotation`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<[f64; 3]>,
}

/// Everything a scenario may read. Unset fields take per-scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Sampled repetitions; rounds for the key-generation scenarios.
    #[serde(default, alias = "rounds", skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ComplexInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ComplexInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub senders: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receivers: Option<usize>,
    /// Sender to remove, counted from 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub which: Option<usize>,
    /// Rotation gate: `identity`, `hadamard` or `euler` (with `euler` angles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler: Option<[f64; 3]>,

    /// Encoding dimension `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Encoded phase index for the restricted angle `2 pi k / K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uses: Option<usize>,
    /// `destructive`, `projector` or `approximate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    /// `projective` or `povm`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphInput>,
    /// `cz` (graph edges) or `ccz` (all receivers).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangler: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizers: Option<Vec<String>>,
    /// `(vertex, angle)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep: Option<Vec<usize>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockInput>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<[f64; 3]>,
    /// Four amplitudes of the logical two-qubit input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<ComplexInput>>,
    /// Incoming byproducts `(x_top, z_top, x_bottom, z_bottom)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_flags: Option<[bool; 4]>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}
