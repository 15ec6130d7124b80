//! Report types and the distribution comparisons behind them.

use std::collections::BTreeMap;
use std::path::Path;

use cme_core::analysis::{histogram_to_joint, marginal, moments, moving_average, prominent_modes, tv_distance};
use cme_core::propagator::parse_density;
use cme_core::samplers::parse_ensemble;
use cme_core::{EnsembleResult, ProbabilityVector, StateSpace};
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{CliError, Result};

pub const DENSITY_FILE: &str = "density.txt";
pub const ENSEMBLE_FILE: &str = "ensemble.txt";
pub const REPORT_FILE: &str = "report.json";

/// Modes are maxima whose prominence exceeds this fraction of the peak.
pub const MODE_PROMINENCE: f64 = 0.1;
/// Half width of the moving average applied to sampled marginals before
/// locating modes.
pub const MODE_SMOOTHING: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Density,
    Ensemble,
}

/// A run's result as probabilities over the joint state space. Densities
/// keep their mass as computed (frozen schemes leak); ensembles are
/// normalized frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub label: String,
    pub kind: OutputKind,
    pub caps: Vec<u32>,
    pub probabilities: Vec<f64>,
    pub samples: Option<usize>,
}

impl Distribution {
    pub fn from_density(label: impl Into<String>, space: &StateSpace, p: &ProbabilityVector) -> Self {
        Self {
            label: label.into(),
            kind: OutputKind::Density,
            caps: space.caps().to_vec(),
            probabilities: p.values().to_vec(),
            samples: None,
        }
    }

    pub fn from_ensemble(label: impl Into<String>, ens: &EnsembleResult) -> Result<Self> {
        Self::from_histogram(label.into(), ens.caps.clone(), &ens.histogram, ens.n_samples)
    }

    fn from_histogram(label: String, caps: Vec<u32>, hist: &BTreeMap<usize, u64>, n: usize) -> Result<Self> {
        let space = StateSpace::new(&caps)?;
        let probabilities = histogram_to_joint(&space, hist)?
            .into_iter()
            .map(|c| c / n as f64)
            .collect();
        Ok(Self {
            label,
            kind: OutputKind::Ensemble,
            caps,
            probabilities,
            samples: Some(n),
        })
    }

    pub fn space(&self) -> Result<StateSpace> {
        Ok(StateSpace::new(&self.caps)?)
    }

    /// Normalized marginal of each species.
    pub fn marginals(&self) -> Result<Vec<Vec<f64>>> {
        let space = self.space()?;
        (0..space.dim())
            .map(|i| Ok(marginal(&space, &self.probabilities, i)?))
            .collect()
    }

    /// Reads the density or ensemble dump in a run directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let density = dir.join(DENSITY_FILE);
        let ensemble = dir.join(ENSEMBLE_FILE);
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::io(p, e));
        if density.exists() {
            let text = read(&density)?;
            let headers = header_map(&text);
            let (states, probabilities) = parse_density(&text)?;
            let caps: Vec<u32> = match states.last() {
                Some(last) => last.iter().map(|&c| c as u32).collect(),
                None => return Err(CliError::usage(format!("{} is empty", density.display()))),
            };
            let space = StateSpace::new(&caps)?;
            if space.size() != states.len()
                || states.iter().enumerate().any(|(i, x)| space.index0(x) != i)
            {
                return Err(CliError::usage(format!(
                    "{} does not list every state in index order",
                    density.display()
                )));
            }
            Ok(Self {
                label: headers.get("method").cloned().unwrap_or_else(|| dir.display().to_string()),
                kind: OutputKind::Density,
                caps,
                probabilities,
                samples: None,
            })
        } else if ensemble.exists() {
            let file = parse_ensemble(&read(&ensemble)?)?;
            Self::from_histogram(file.method, file.caps, &file.histogram, file.n_samples)
        } else {
            Err(CliError::usage(format!(
                "{} holds neither {DENSITY_FILE} nor {ENSEMBLE_FILE}",
                dir.display()
            )))
        }
    }
}

fn header_map(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map_while(|l| l.strip_prefix('#'))
        .filter_map(|l| l.trim().split_once(' '))
        .map(|(k, v)| (k.to_string(), v.trim().to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesMoments {
    pub species: usize,
    pub mean: f64,
    pub variance: f64,
    /// Molecule counts at prominent maxima of the marginal.
    pub modes: Vec<usize>,
}

/// What can be recomputed from a dump alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: OutputKind,
    pub states: usize,
    /// Total probability in the box; 1 for ensembles.
    pub mass: f64,
    pub samples: Option<usize>,
    pub species: Vec<SpeciesMoments>,
}

pub fn summarize(d: &Distribution) -> Result<Summary> {
    let species = d
        .marginals()?
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (mean, variance) = moments(m);
            let modes = match d.kind {
                OutputKind::Density => prominent_modes(m, MODE_PROMINENCE),
                OutputKind::Ensemble => prominent_modes(&moving_average(m, MODE_SMOOTHING), MODE_PROMINENCE),
            };
            SpeciesMoments {
                species: i,
                mean,
                variance,
                modes,
            }
        })
        .collect();
    Ok(Summary {
        kind: d.kind,
        states: d.probabilities.len(),
        mass: d.probabilities.iter().sum(),
        samples: d.samples,
        species,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesDelta {
    pub species: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub variance_a: f64,
    pub variance_b: f64,
    /// `mean_a - mean_b`.
    pub mean_delta: f64,
    pub variance_delta: f64,
    pub marginal_tv: f64,
}

/// Distances between two results on the same state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: String,
    pub b: String,
    /// Total variation of the normalized joint distributions.
    pub tv: f64,
    /// `sum |p_a - p_b|` of the unnormalized probabilities.
    pub l1: f64,
    pub species: Vec<SpeciesDelta>,
}

pub fn compare(a: &Distribution, b: &Distribution) -> Result<ComparisonReport> {
    if a.caps != b.caps {
        return Err(CliError::usage(format!(
            "state spaces differ: caps {:?} vs {:?}",
            a.caps, b.caps
        )));
    }
    let l1 = a
        .probabilities
        .iter()
        .zip(&b.probabilities)
        .map(|(x, y)| (x - y).abs())
        .sum();
    let species = a
        .marginals()?
        .iter()
        .zip(b.marginals()?.iter())
        .enumerate()
        .map(|(i, (ma, mb))| {
            let (mean_a, variance_a) = moments(ma);
            let (mean_b, variance_b) = moments(mb);
            SpeciesDelta {
                species: i,
                mean_a,
                mean_b,
                variance_a,
                variance_b,
                mean_delta: mean_a - mean_b,
                variance_delta: variance_a - variance_b,
                marginal_tv: tv_distance(ma, mb),
            }
        })
        .collect();
    Ok(ComparisonReport {
        a: a.label.clone(),
        b: b.label.clone(),
        tv: tv_distance(&a.probabilities, &b.probabilities),
        l1,
        species,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub model: String,
    pub method: Method,
    pub tau: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub refreeze: bool,
    pub paper_strang: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub species: Vec<String>,
    pub caps: Vec<u32>,
    pub initial: Vec<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Mass removed by clamping round-off negatives (densities).
    pub clamped_mass: Option<f64>,
    pub boundary_clamps: Option<u64>,
    pub clamped_trajectories: Option<u64>,
    pub total_steps: Option<u64>,
}

/// `report.json` of a run. Timing is kept out so the file depends only on
/// the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub model: ModelInfo,
    pub summary: Summary,
    pub diagnostics: Diagnostics,
    /// Distances to the exact density, when the box was small enough to
    /// solve it.
    pub reference: Option<ComparisonReport>,
}
