use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::apps::SearchMode;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Decide,
    Convert,
    VerifySearch,
    AdviceSeparation,
    Invariants,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Decide => "decide",
            ExperimentKind::Convert => "convert",
            ExperimentKind::VerifySearch => "verify-search",
            ExperimentKind::AdviceSeparation => "advice-separation",
            ExperimentKind::Invariants => "invariants",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Validation(format!("unknown experiment kind {s:?}")))
    }
}

/// Everything an experiment needs; a JSON file with the same keys as the
/// command-line flags deserializes into it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Problem size: bits of OR, search length.
    pub n: Option<usize>,
    /// Sizes for `advice-separation`.
    pub grid: Vec<usize>,
    pub k: f64,
    pub p_plus: f64,
    pub mode: SearchMode,
    pub span: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub tree: Option<PathBuf>,
    /// Fixed input; otherwise sampled per trial.
    pub input: Option<String>,
    pub delta: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Record wall-clock time per trial; off keeps output byte-stable.
    pub timing: bool,
    /// Largest compressed conversion space the quantum runs may build.
    pub max_dim: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Decide,
            n: None,
            grid: Vec::new(),
            k: -1.75,
            p_plus: 0.5,
            mode: SearchMode::FindBoth,
            span: None,
            graph: None,
            tree: None,
            input: None,
            delta: 0.1,
            epsilon: 0.5,
            trials: 100,
            seed: 0,
            workers: None,
            timing: false,
            max_dim: 1500,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Validation(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Validation(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.workers == Some(0) {
            return Err(Error::Validation("workers must be at least 1".into()));
        }
        let sources = [&self.span, &self.graph, &self.tree].iter().filter(|s| s.is_some()).count();
        if sources > 1 {
            return Err(Error::Validation("give at most one of span, graph and tree".into()));
        }
        Ok(())
    }
}
