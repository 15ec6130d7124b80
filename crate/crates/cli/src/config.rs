use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cme_core::{builtin, parse_model, SamplerMethod, Scenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    FrozenSum,
    LieProduct,
    Strang,
    ColumnSplit,
    ReactionProduct,
    Ssa,
    TauLeap,
    Accelerated,
    AcceleratedSplit,
    Symmetric,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Exact,
        Method::FrozenSum,
        Method::LieProduct,
        Method::Strang,
        Method::ColumnSplit,
        Method::ReactionProduct,
        Method::Ssa,
        Method::TauLeap,
        Method::Accelerated,
        Method::AcceleratedSplit,
        Method::Symmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::FrozenSum => "frozen-sum",
            Method::LieProduct => "lie-product",
            Method::Strang => "strang",
            Method::ColumnSplit => "column-split",
            Method::ReactionProduct => "reaction-product",
            Method::Ssa => "ssa",
            Method::TauLeap => "tau-leap",
            Method::Accelerated => "accelerated",
            Method::AcceleratedSplit => "accelerated-split",
            Method::Symmetric => "symmetric",
        }
    }

    pub fn sampler(self) -> Option<SamplerMethod> {
        match self {
            Method::Ssa => Some(SamplerMethod::Ssa),
            Method::TauLeap => Some(SamplerMethod::TauLeap),
            Method::Accelerated => Some(SamplerMethod::Accelerated),
            Method::AcceleratedSplit => Some(SamplerMethod::AcceleratedSplit),
            Method::Symmetric => Some(SamplerMethod::Symmetric),
            _ => None,
        }
    }

    pub fn needs_tau(self) -> bool {
        !matches!(self, Method::Exact | Method::FrozenSum | Method::Ssa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
            CliError::usage(format!("unknown method '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Everything needed to reproduce one `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Built-in model name or path to a model file.
    pub model: String,
    pub method: Method,
    pub tau: Option<f64>,
    /// Final time; the model's own horizon when unset.
    pub horizon: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub refreeze: bool,
    pub paper_strang: bool,
    /// Worker threads for ensembles; rayon's default when unset.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(model: impl Into<String>, method: Method, out: impl Into<PathBuf>) -> Self {
        Self {
            model: model.into(),
            method,
            tau: None,
            horizon: None,
            samples: 10_000,
            seed: 1,
            out: out.into(),
            refreeze: false,
            paper_strang: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.method;
        match self.tau {
            None if m.needs_tau() => return Err(CliError::usage(format!("--tau is required for {m}"))),
            Some(t) if !(t.is_finite() && t > 0.0) => {
                return Err(CliError::usage(format!("--tau must be positive, got {t}")))
            }
            Some(_) if !m.needs_tau() => {
                return Err(CliError::usage(format!("{m} takes no --tau")))
            }
            _ => {}
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h >= 0.0) {
                return Err(CliError::usage(format!("--T must be nonnegative, got {h}")));
            }
        }
        if m.sampler().is_some() && self.samples == 0 {
            return Err(CliError::usage("--samples must be at least 1"));
        }
        if self.refreeze && m != Method::LieProduct {
            return Err(CliError::usage("--refreeze applies only to lie-product"));
        }
        if self.paper_strang && m != Method::Strang {
            return Err(CliError::usage("--paper-strang applies only to strang"));
        }
        if self.threads == Some(0) {
            return Err(CliError::usage("thread count must be at least 1"));
        }
        Ok(())
    }
}

/// A scenario and the short name used for it in outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub label: String,
    pub scenario: Scenario,
}

/// Resolves `spec` as a built-in model name, else as a model file path.
pub fn load_model(spec: &str) -> Result<LoadedModel> {
    if let Some(scenario) = builtin(spec) {
        return Ok(LoadedModel {
            label: spec.to_string(),
            scenario,
        });
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::usage(format!(
            "'{spec}' is neither a built-in model (isomer, schlogl) nor a readable file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let scenario = parse_model(&text)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    Ok(LoadedModel { label, scenario })
}
