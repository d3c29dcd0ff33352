//! Run configuration, read from TOML.
//!
//! ```toml
//! schema_version = 1
//! method = "direct_pild"
//!
//! [model]
//! kind = "dimer"
//! drive_amplitude = 11.96575
//!
//! [[baths]]
//! xi = 0.16
//! omega_c = 7.5
//! beta = 1.0
//! coupling = "monomer1"
//!
//! [grid]
//! dt = 0.05
//! n_steps = 400
//! k_max = 3
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DirectPild,
    TtmPild,
    LindbladOnly,
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::DirectPild => "direct_pild",
            Method::TtmPild => "ttm_pild",
            Method::LindbladOnly => "lindblad_only",
            Method::BruteForce => "brute_force",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    pub method: Method,
    pub model: ModelConfig,
    #[serde(default)]
    pub baths: Vec<BathConfig>,
    #[serde(default)]
    pub jumps: Vec<JumpConfig>,
    pub grid: GridConfig,
    pub initial_state: InitialState,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_memory_budget")]
    pub memory_budget: u64,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ttm: Option<TtmConfig>,
}

fn default_memory_budget() -> u64 {
    pild::path_integral::DEFAULT_MEMORY_BUDGET
}

/// A real matrix, optionally with an imaginary part of the same shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Dimer {
        #[serde(default = "five")]
        eps1: f64,
        #[serde(default = "five")]
        eps2: f64,
        #[serde(default = "one")]
        delta: f64,
        #[serde(default)]
        drive_amplitude: f64,
        #[serde(default = "ten")]
        drive_frequency: f64,
    },
    SpinBoson {
        eps: f64,
        delta: f64,
    },
    Explicit {
        hamiltonian: MatrixConfig,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        fields: Vec<FieldConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

fn one() -> f64 {
    1.0
}
fn five() -> f64 {
    5.0
}
fn ten() -> f64 {
    10.0
}

/// `offset + amplitude cos(frequency t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modulation {
    #[serde(default)]
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub operator: MatrixConfig,
    pub envelope: Modulation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingConfig {
    Named(String),
    Diagonal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub xi: f64,
    pub omega_c: f64,
    /// Inverse temperature; `inf` for zero temperature.
    pub beta: f64,
    pub coupling: CouplingConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JumpOperatorConfig {
    Preset(String),
    Matrix(MatrixConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub operator: JumpOperatorConfig,
    #[serde(default = "one")]
    pub rate: f64,
    /// Replaces the constant rate by `rate + amplitude cos(frequency t + phase)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<RateModulation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateModulation {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    #[default]
    Symmetric,
    Trailing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub splitting: Splitting,
}

fn default_k_max() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Label(String),
    Matrix(MatrixConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub observables: Vec<String>,
    /// Output directory, relative to the working directory.
    #[serde(default = "default_directory")]
    pub directory: String,
    /// File stem for `<stem>.csv` and `<stem>.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

fn default_directory() -> String {
    ".".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            observables: Vec::new(),
            directory: default_directory(),
            stem: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Local error target of the time-dependent propagator integrator.
    #[serde(default = "default_ode")]
    pub ode: f64,
}

fn default_ode() -> f64 {
    pild::propagator::DEFAULT_TOLERANCE
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: default_ode() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Repeat the run with `k_max - 1` and report the largest population change.
    #[serde(default)]
    pub k_max_sensitivity: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TtmConfig {
    /// Number of dynamical maps generated for tensor extraction
    /// (default `4 (k_max + 1)`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_steps: Option<usize>,
    /// Drop trailing tensors whose Frobenius norm is below this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_threshold: Option<f64>,
    /// Load tensors from an archive instead of generating them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archive: Option<String>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn time_dependent_field(&self) -> bool {
        match &self.model {
            ModelConfig::Dimer { drive_amplitude, .. } => *drive_amplitude != 0.0,
            ModelConfig::SpinBoson { .. } => false,
            ModelConfig::Explicit { fields, .. } => fields.iter().any(|f| f.envelope.amplitude != 0.0),
        }
    }
}
