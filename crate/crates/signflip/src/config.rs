//! Experiment configuration files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use signflip_core::conic::SolverConfig;
use signflip_core::descent::DescentConfig;
use signflip_core::problems::{ControlSpec, HelmholtzConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Helmholtz,
    #[default]
    Diffusion,
    Control,
    Custom,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Helmholtz => "helmholtz",
            ProblemKind::Diffusion => "diffusion",
            ProblemKind::Control => "control",
            ProblemKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Built-in interior point solver.
    #[default]
    Reference,
    /// Clarabel.
    Bound,
    /// Built-in operator splitting solver.
    Admm,
}

/// Thermal grid options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionConfig {
    pub m_side: usize,
    pub g_min: f64,
    pub g_max: f64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self { m_side: 11, g_min: 1.0, g_max: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub backend: BackendKind,
    pub seed: u64,
    pub helmholtz: HelmholtzConfig,
    pub diffusion: DiffusionConfig,
    pub control: ControlSpec,
    /// Problem document for `custom`.
    pub input: Option<PathBuf>,
    pub descent: DescentConfig,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c = ExperimentConfig::from_json(r#"{"problem": "control", "control": {"horizon": 50}, "descent": {"epsilon": 0.01}}"#)
            .unwrap();
        assert_eq!(c.problem, ProblemKind::Control);
        assert_eq!(c.control.horizon, 50);
        assert_eq!(c.control.comfort_max, 75.0);
        assert_eq!(c.descent.epsilon, 0.01);
        assert_eq!(c.descent.max_iters, DescentConfig::default().max_iters);
        assert_eq!(c.diffusion.m_side, 11);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_problem_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"problem": "acoustic"}"#).is_err());
    }
}
