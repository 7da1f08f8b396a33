//! Experiment configuration.

use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ObcFidelity,
    PbcStates,
    BerryExact,
    BerryNoisy,
    NoiseSweep,
    DdSweep,
    CompileReport,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ObcFidelity => "obc_fidelity",
            ExperimentKind::PbcStates => "pbc_states",
            ExperimentKind::BerryExact => "berry_exact",
            ExperimentKind::BerryNoisy => "berry_noisy",
            ExperimentKind::NoiseSweep => "noise_sweep",
            ExperimentKind::DdSweep => "dd_sweep",
            ExperimentKind::CompileReport => "compile_report",
        }
    }
}

fn default_n_list() -> Vec<usize> {
    vec![2]
}
fn default_partitions() -> Vec<usize> {
    vec![4]
}
fn default_theta_points() -> usize {
    8
}
fn default_epsilon() -> f64 {
    1e-3
}

/// Model parameters: chain sizes, partition counts, angle grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_partitions")]
    pub partitions: Vec<usize>,
    /// Number of θ samples on [0, 2π) where a θ grid is needed.
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
    /// Quartic-coefficient shift used to split degenerate points.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            n_list: default_n_list(),
            partitions: default_partitions(),
            theta_points: default_theta_points(),
            epsilon: default_epsilon(),
        }
    }
}

fn default_rates() -> Vec<f64> {
    vec![1.0]
}
fn default_dd() -> Vec<f64> {
    vec![0.0]
}
fn default_t1() -> f64 {
    100.0
}
fn default_t2() -> f64 {
    75.0
}
fn default_1q() -> f64 {
    40.0
}
fn default_2q() -> f64 {
    500.0
}

/// Noise parameters and their sweep grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSection {
    #[serde(default = "default_rates")]
    pub rates: Vec<f64>,
    #[serde(default = "default_dd")]
    pub dd_list: Vec<f64>,
    #[serde(default = "default_t1")]
    pub t1_us: f64,
    #[serde(default = "default_t2")]
    pub t2_us: f64,
    #[serde(default = "default_1q")]
    pub gate_time_1q_ns: f64,
    #[serde(default = "default_2q")]
    pub gate_time_2q_ns: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            rates: default_rates(),
            dd_list: default_dd(),
            t1_us: default_t1(),
            t2_us: default_t2(),
            gate_time_1q_ns: default_1q(),
            gate_time_2q_ns: default_2q(),
        }
    }
}

impl NoiseSection {
    pub fn params(&self, rate: f64, dd: f64) -> NoiseParams {
        NoiseParams {
            t1_01_us: self.t1_us,
            t1_12_us: self.t1_us,
            t2_01_us: self.t2_us,
            t2_12_us: self.t2_us,
            gate_time_1q_ns: self.gate_time_1q_ns,
            gate_time_2q_ns: self.gate_time_2q_ns,
            noise_rate: rate,
            dd_strength: dd,
        }
    }
}

fn default_encoding() -> String {
    "qutrit".into()
}
fn default_max_bond() -> usize {
    crate::noise::DEFAULT_MAX_BOND
}
fn default_trunc_tol() -> f64 {
    crate::noise::DEFAULT_TRUNC_TOL
}
fn default_cnot_budget() -> usize {
    4
}
fn default_tol() -> f64 {
    1e-8
}

/// Engine knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSection {
    /// "qutrit", "qubit", or "both".
    #[serde(default = "default_encoding")]
    pub encoding: String,
    #[serde(default = "default_max_bond")]
    pub max_bond: usize,
    #[serde(default = "default_trunc_tol")]
    pub trunc_tol: f64,
    /// 0 = exact probabilities; otherwise shot count per estimated value.
    #[serde(default)]
    pub shots: u64,
    #[serde(default = "default_cnot_budget")]
    pub cnot_budget: usize,
    #[serde(default = "default_tol")]
    pub compile_tol: f64,
    /// Assignment-error rate for the readout reconstruction experiments.
    #[serde(default)]
    pub assignment_error: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            encoding: default_encoding(),
            max_bond: default_max_bond(),
            trunc_tol: default_trunc_tol(),
            shots: 0,
            cnot_budget: default_cnot_budget(),
            compile_tol: default_tol(),
            assignment_error: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn encodings(&self) -> Result<Vec<crate::berry::Encoding>> {
        match self.run.encoding.as_str() {
            "qutrit" => Ok(vec![crate::berry::Encoding::Qutrit]),
            "qubit" => Ok(vec![crate::berry::Encoding::Qubit]),
            "both" => Ok(vec![crate::berry::Encoding::Qutrit, crate::berry::Encoding::Qubit]),
            other => Err(Error::Config(format!("unknown encoding {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.n_list.is_empty() || self.model.n_list.iter().any(|&n| n < 2) {
            return Err(Error::Config("model.n_list must contain sizes ≥ 2".into()));
        }
        if self.model.partitions.iter().any(|&p| p < 3) {
            return Err(Error::Config("model.partitions entries must be ≥ 3".into()));
        }
        if self.model.theta_points == 0 {
            return Err(Error::Config("model.theta_points must be positive".into()));
        }
        if self.noise.rates.is_empty() || self.noise.dd_list.is_empty() {
            return Err(Error::Config("noise grids must be non-empty".into()));
        }
        self.encodings()?;
        self.noise.params(1.0, 0.0).validate()?;
        Ok(())
    }
}
