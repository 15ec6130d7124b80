//! Experiment runner behind the `cme` binary: runs one density or sampler
//! method on a model, dumps the result, and compares dumps.
//!
//! A run directory holds
//!
//! * `density.txt` (`# key value` headers, then `index x_1 ... x_N p`) or
//!   `ensemble.txt` (headers, then `index count`), indices 1-based;
//! * `marginal_<species>.csv` per species, header `value,probability`;
//! * `report.json`, a [`RunReport`].

pub mod config;
pub mod error;
pub mod report;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cme_core::propagator::write_density;
use cme_core::samplers::{with_threads, write_ensemble};
use cme_core::{
    assemble_generator, column_split_solution, exact_solution, frozen_sum_solution, lie_product_solution,
    reaction_product_solution, run_ensemble, strang_solution, ProbabilityVector, StateSpace, StepPlan,
    StrangCenter,
};

pub use config::{load_model, ExperimentConfig, LoadedModel, Method};
pub use error::{CliError, Result};
pub use report::{
    compare, summarize, ComparisonReport, ConfigEcho, Diagnostics, Distribution, ModelInfo, OutputKind,
    RunReport, Summary,
};

/// Largest box for which a run also solves the exact CME as a reference.
pub const REFERENCE_LIMIT: usize = 250_000;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn density_header(method: Method, label: &str, horizon: f64, space: &StateSpace) -> String {
    let caps: Vec<String> = space.caps().iter().map(u32::to_string).collect();
    format!(
        "# method {method}\n# model {label}\n# T {horizon}\n# caps {}\n",
        caps.join(" ")
    )
}

fn density(cfg: &ExperimentConfig, lm: &LoadedModel, space: &StateSpace, horizon: f64) -> Result<ProbabilityVector> {
    let model = &lm.scenario.model;
    let x0 = &lm.scenario.initial.state;
    let plan = || -> Result<StepPlan> {
        let tau = cfg.tau.expect("validated");
        Ok(StepPlan::with_tau(horizon, tau)?)
    };
    let p = match cfg.method {
        Method::Exact => exact_solution(model, space, x0, horizon)?,
        Method::FrozenSum => frozen_sum_solution(model, space, x0, horizon)?,
        Method::LieProduct => lie_product_solution(model, space, x0, plan()?, cfg.refreeze)?,
        Method::Strang => {
            let center = if cfg.paper_strang { StrangCenter::Half } else { StrangCenter::Full };
            strang_solution(model, space, x0, plan()?, center)?
        }
        Method::ColumnSplit => column_split_solution(model, space, x0, plan()?)?,
        Method::ReactionProduct => reaction_product_solution(model, space, x0, plan()?)?,
        m => unreachable!("{m} is a sampler"),
    };
    Ok(p)
}

/// Runs `cfg`, writes its outputs under `cfg.out` and returns the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let lm = load_model(&cfg.model)?;
    lm.scenario.validate()?;
    let model = &lm.scenario.model;
    let x0 = &lm.scenario.initial.state;
    let horizon = cfg.horizon.unwrap_or(lm.scenario.horizon);
    let space = StateSpace::for_model(model)?;
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;

    let mut diagnostics = Diagnostics::default();
    let dist = match cfg.method.sampler() {
        None => {
            let p = density(cfg, &lm, &space, horizon)?;
            diagnostics.clamped_mass = Some(p.clamped_mass);
            let text = density_header(cfg.method, &lm.label, horizon, &space) + &write_density(&space, &p);
            write_file(&cfg.out.join(report::DENSITY_FILE), &text)?;
            Distribution::from_density(cfg.method.name(), &space, &p)
        }
        Some(sampler) => {
            let go = || run_ensemble(sampler, model, x0, horizon, cfg.tau, cfg.samples, cfg.seed);
            let ens = match cfg.threads {
                Some(n) => with_threads(n, go)??,
                None => go()?,
            };
            diagnostics.boundary_clamps = Some(ens.diagnostics.boundary_clamps);
            diagnostics.clamped_trajectories = Some(ens.diagnostics.clamped_trajectories);
            diagnostics.total_steps = Some(ens.diagnostics.total_steps);
            write_file(&cfg.out.join(report::ENSEMBLE_FILE), &write_ensemble(&ens, &lm.label))?;
            Distribution::from_ensemble(cfg.method.name(), &ens)?
        }
    };

    for (i, m) in dist.marginals()?.iter().enumerate() {
        let name = &model.species_names[i];
        write_file(&cfg.out.join(format!("marginal_{name}.csv")), &marginal_csv(m))?;
    }

    let reference = if cfg.method != Method::Exact && space.size() <= REFERENCE_LIMIT {
        let exact = exact_solution(model, &space, x0, horizon)?;
        Some(compare(&dist, &Distribution::from_density(Method::Exact.name(), &space, &exact))?)
    } else {
        None
    };

    let sampled = cfg.method.sampler().is_some();
    let report = RunReport {
        config: ConfigEcho {
            model: lm.label.clone(),
            method: cfg.method,
            tau: cfg.tau,
            horizon,
            samples: sampled.then_some(cfg.samples),
            seed: sampled.then_some(cfg.seed),
            refreeze: cfg.refreeze,
            paper_strang: cfg.paper_strang,
        },
        model: ModelInfo {
            species: model.species_names.clone(),
            caps: model.caps.clone(),
            initial: x0.clone(),
        },
        summary: summarize(&dist)?,
        diagnostics,
        reference,
    };
    let path = cfg.out.join(report::REPORT_FILE);
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Json { path: path.clone(), source: e })?;
    write_file(&path, &(json + "\n"))?;
    Ok(report)
}

/// `value,probability` rows for a marginal.
pub fn marginal_csv(m: &[f64]) -> String {
    let mut out = String::from("value,probability\n");
    for (k, p) in m.iter().enumerate() {
        let _ = writeln!(out, "{k},{p:e}");
    }
    out
}

/// Summary recomputed from the dump in a run directory.
pub fn summarize_dir(dir: &Path) -> Result<Summary> {
    summarize(&Distribution::load(dir)?)
}

/// Compares the dumps of two run directories.
pub fn compare_dirs(a: &Path, b: &Path) -> Result<ComparisonReport> {
    compare(&Distribution::load(a)?, &Distribution::load(b)?)
}

/// Dense text of the generator, preceded by `#` lines with the state count
/// and per-reaction index offsets. Refuses boxes above `max_size` states.
pub fn dump_generator(model: &str, caps: Option<Vec<u32>>, max_size: usize) -> Result<String> {
    let lm = load_model(model)?;
    let m = match caps {
        Some(c) => lm.scenario.model.with_caps(c)?,
        None => lm.scenario.model,
    };
    let space = StateSpace::for_model(&m)?;
    if space.size() > max_size {
        return Err(CliError::usage(format!(
            "{} states exceed --max-size {max_size}; pass smaller --caps",
            space.size()
        )));
    }
    let a = assemble_generator(&m, &space)?;
    let d = space.reaction_offsets(&m)?.d;
    let caps: Vec<String> = space.caps().iter().map(u32::to_string).collect();
    let d: Vec<String> = d.iter().map(i64::to_string).collect();
    Ok(format!(
        "# caps {}\n# states {}\n# offsets {}\n{}",
        caps.join(" "),
        space.size(),
        d.join(" "),
        a.dense_text()
    ))
}
