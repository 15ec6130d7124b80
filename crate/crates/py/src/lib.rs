//! Python bindings for `cme-core`.
//!
//! State indices are 1-based as in the core crate; generator rows and
//! columns and probability vectors are 0-based Python lists.

use std::collections::BTreeMap;

use cme_core::analysis;
use cme_core::samplers::{run_trajectory_with, with_threads};
use cme_core::{self as core, Error, PropensitySpec, SamplerMethod, StepPlan, StrangCenter};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Structural(_) | Error::NegativeProbability { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for core::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Mass-action reaction network on a truncated box.
///
/// `orders[r]` lists `(species, multiplicity)` pairs of channel `r`; the
/// propensity is `rates[r] * prod C(x_i, m_i)`.
#[pyclass(name = "ReactionModel", module = "cme", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: core::ReactionModel,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(
        species: Vec<String>,
        caps: Vec<u32>,
        stoich: Vec<Vec<i64>>,
        rates: Vec<f64>,
        orders: Vec<Vec<(usize, u32)>>,
    ) -> PyResult<Self> {
        if rates.len() != orders.len() {
            return Err(PyValueError::new_err("rates and orders differ in length"));
        }
        let props = rates.into_iter().zip(orders).map(|(k, o)| PropensitySpec::new(k, o)).collect();
        Ok(Self {
            inner: core::ReactionModel::new(species, caps, stoich, props).or_raise()?,
        })
    }

    #[getter]
    fn species(&self) -> Vec<String> {
        self.inner.species_names.clone()
    }

    #[getter]
    fn caps(&self) -> Vec<u32> {
        self.inner.caps.clone()
    }

    #[getter]
    fn stoich(&self) -> Vec<Vec<i64>> {
        self.inner.stoich.clone()
    }

    #[getter]
    fn rates(&self) -> Vec<f64> {
        self.inner.propensities.iter().map(|p| p.rate).collect()
    }

    #[getter]
    fn orders(&self) -> Vec<Vec<(usize, u32)>> {
        self.inner.propensities.iter().map(|p| p.orders.clone()).collect()
    }

    #[getter]
    fn n_species(&self) -> usize {
        self.inner.n_species()
    }

    #[getter]
    fn n_reactions(&self) -> usize {
        self.inner.n_reactions()
    }

    fn propensity(&self, r: usize, x: Vec<i64>) -> PyResult<f64> {
        self.inner.propensity(r, &x).or_raise()
    }

    fn total_propensity(&self, x: Vec<i64>) -> PyResult<f64> {
        self.inner.total_propensity(&x).or_raise()
    }

    fn with_caps(&self, caps: Vec<u32>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_caps(caps).or_raise()?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "ReactionModel(species={:?}, caps={:?}, reactions={})",
            self.inner.species_names,
            self.inner.caps,
            self.inner.n_reactions()
        )
    }
}

/// A model with its initial state and final time.
#[pyclass(name = "Scenario", module = "cme", frozen)]
struct PyScenario {
    inner: core::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (model, initial, horizon))]
    fn new(model: &PyModel, initial: Vec<i64>, horizon: f64) -> PyResult<Self> {
        let inner = core::Scenario {
            model: model.inner.clone(),
            initial: core::InitialCondition::new(initial),
            horizon,
        };
        inner.validate().or_raise()?;
        Ok(Self { inner })
    }

    /// `isomer` or `schlogl`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        core::builtin(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("no built-in model '{name}'")))
    }

    /// Parses the text model format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::parse_model(text).or_raise()?,
        })
    }

    fn to_text(&self) -> String {
        core::serialize_model(&self.inner)
    }

    #[getter]
    fn model(&self) -> PyModel {
        PyModel {
            inner: self.inner.model.clone(),
        }
    }

    #[getter]
    fn initial(&self) -> Vec<i64> {
        self.inner.initial.state.clone()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon
    }
}

/// Mixed-radix enumeration of the box, species 0 varying fastest.
#[pyclass(name = "StateSpace", module = "cme", frozen)]
struct PyStateSpace {
    inner: core::StateSpace,
}

#[pymethods]
impl PyStateSpace {
    #[new]
    fn new(caps: Vec<u32>) -> PyResult<Self> {
        Ok(Self {
            inner: core::StateSpace::new(&caps).or_raise()?,
        })
    }

    #[staticmethod]
    fn for_model(model: &PyModel) -> PyResult<Self> {
        Ok(Self {
            inner: core::StateSpace::for_model(&model.inner).or_raise()?,
        })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn caps(&self) -> Vec<u32> {
        self.inner.caps().to_vec()
    }

    #[getter]
    fn strides(&self) -> Vec<usize> {
        self.inner.strides().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    /// 1-based index of `x`.
    fn index_of(&self, x: Vec<i64>) -> PyResult<usize> {
        self.inner.index_of(&x).or_raise()
    }

    /// State at 1-based `index`.
    fn state_of(&self, index: usize) -> PyResult<Vec<i64>> {
        self.inner.state_of(index).or_raise()
    }

    fn contains(&self, x: Vec<i64>) -> bool {
        self.inner.in_bounds(&x)
    }

    /// Index shift `d_r` of every channel.
    fn offsets(&self, model: &PyModel) -> PyResult<Vec<i64>> {
        Ok(self.inner.reaction_offsets(&model.inner).or_raise()?.d)
    }

    fn states(&self) -> Vec<Vec<i64>> {
        self.inner.states().collect()
    }
}

/// Sparse generator (or frozen factor) stored by columns.
#[pyclass(name = "Generator", module = "cme", frozen)]
struct PyGenerator {
    inner: core::Generator,
}

#[pymethods]
impl PyGenerator {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.dim();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("({i}, {j}) outside a {n}x{n} matrix")));
        }
        Ok(self.inner.get(i, j))
    }

    fn column_sums(&self) -> Vec<f64> {
        self.inner.column_sums().to_vec()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.inner.to_dense()
    }

    /// `A x`.
    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err("vector length does not match the generator"));
        }
        let mut y = vec![0.0; x.len()];
        self.inner.apply(&x, &mut y);
        Ok(y)
    }

    /// `exp(t A) p` by uniformization.
    fn expmv(&self, py: Python<'_>, p: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        let p = core::ProbabilityVector::from_values(p).or_raise()?;
        py.detach(|| core::expmv(&self.inner, &p, t)).or_raise().map(|v| v.into_values())
    }

    fn __add__(&self, other: &PyGenerator) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.add(&other.inner).or_raise()?,
        })
    }
}

/// Clipped generator `A` of the CME on the model's box.
#[pyfunction]
fn assemble_generator(model: &PyModel) -> PyResult<PyGenerator> {
    let space = core::StateSpace::for_model(&model.inner).or_raise()?;
    Ok(PyGenerator {
        inner: core::assemble_generator(&model.inner, &space).or_raise()?,
    })
}

/// Per-channel pieces `A_1..A_M`, summing to `A`.
#[pyfunction]
fn assemble_channels(model: &PyModel) -> PyResult<Vec<PyGenerator>> {
    let space = core::StateSpace::for_model(&model.inner).or_raise()?;
    Ok(core::assemble_channels(&model.inner, &space)
        .or_raise()?
        .into_iter()
        .map(|inner| PyGenerator { inner })
        .collect())
}

/// `[Abar_0, ..., Abar_M]` with propensities frozen at `xbar`.
#[pyfunction]
fn assemble_frozen(model: &PyModel, xbar: Vec<i64>) -> PyResult<Vec<PyGenerator>> {
    let space = core::StateSpace::for_model(&model.inner).or_raise()?;
    Ok(core::assemble_frozen(&model.inner, &space, &xbar)
        .or_raise()?
        .into_iter()
        .map(|inner| PyGenerator { inner })
        .collect())
}

const DENSITY_METHODS: [&str; 6] = ["exact", "frozen-sum", "lie-product", "strang", "column-split", "reaction-product"];

/// Density at `horizon` started from the point mass at `x0`.
///
/// `method` is one of exact, frozen-sum, lie-product, strang,
/// column-split, reaction-product; all but the first two need `tau`.
/// Frozen schemes return the surviving (leaked) mass unnormalized.
#[pyfunction]
#[pyo3(signature = (model, x0, horizon, method = "exact", tau = None, refreeze = false, paper_strang = false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    model: &PyModel,
    x0: Vec<i64>,
    horizon: f64,
    method: &str,
    tau: Option<f64>,
    refreeze: bool,
    paper_strang: bool,
) -> PyResult<Vec<f64>> {
    if !DENSITY_METHODS.contains(&method) {
        return Err(PyValueError::new_err(format!(
            "unknown density method '{method}' (expected one of {})",
            DENSITY_METHODS.join(", ")
        )));
    }
    let m = &model.inner;
    let space = core::StateSpace::for_model(m).or_raise()?;
    let plan = || -> PyResult<StepPlan> {
        let tau = tau.ok_or_else(|| PyValueError::new_err(format!("{method} needs tau")))?;
        StepPlan::with_tau(horizon, tau).or_raise()
    };
    let p = match method {
        "exact" => py.detach(|| core::exact_solution(m, &space, &x0, horizon)),
        "frozen-sum" => py.detach(|| core::frozen_sum_solution(m, &space, &x0, horizon)),
        "lie-product" => {
            let plan = plan()?;
            py.detach(|| core::lie_product_solution(m, &space, &x0, plan, refreeze))
        }
        "strang" => {
            let plan = plan()?;
            let center = if paper_strang { StrangCenter::Half } else { StrangCenter::Full };
            py.detach(|| core::strang_solution(m, &space, &x0, plan, center))
        }
        "column-split" => {
            let plan = plan()?;
            py.detach(|| core::column_split_solution(m, &space, &x0, plan))
        }
        _ => {
            let plan = plan()?;
            py.detach(|| core::reaction_product_solution(m, &space, &x0, plan))
        }
    };
    Ok(p.or_raise()?.into_values())
}

fn sampler(method: &str) -> PyResult<SamplerMethod> {
    method.parse().or_raise()
}

/// Final states of an ensemble and their histogram.
#[pyclass(name = "Ensemble", module = "cme", frozen)]
struct PyEnsemble {
    inner: core::EnsembleResult,
}

#[pymethods]
impl PyEnsemble {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples
    }

    #[getter]
    fn caps(&self) -> Vec<u32> {
        self.inner.caps.clone()
    }

    /// 1-based state index -> count.
    #[getter]
    fn histogram(&self) -> BTreeMap<usize, u64> {
        self.inner.histogram.clone()
    }

    #[getter]
    fn final_states(&self) -> Vec<Vec<i64>> {
        self.inner.final_states.clone()
    }

    #[getter]
    fn boundary_clamps(&self) -> u64 {
        self.inner.diagnostics.boundary_clamps
    }

    #[getter]
    fn clamped_trajectories(&self) -> u64 {
        self.inner.diagnostics.clamped_trajectories
    }

    #[getter]
    fn total_steps(&self) -> u64 {
        self.inner.diagnostics.total_steps
    }

    /// Empirical joint distribution over the box.
    fn joint(&self) -> PyResult<Vec<f64>> {
        let counts = analysis::histogram_to_joint(&self.inner.space(), &self.inner.histogram).or_raise()?;
        let n = self.inner.n_samples as f64;
        Ok(counts.into_iter().map(|c| c / n).collect())
    }

    /// Empirical marginal of `species`.
    fn marginal(&self, species: usize) -> PyResult<Vec<f64>> {
        analysis::histogram_marginal(&self.inner.space(), &self.inner.histogram, species).or_raise()
    }
}

/// `n_samples` trajectories of `method` (ssa, tau-leap, accelerated,
/// accelerated-split, symmetric). Results depend only on the seed, never on
/// `threads`.
#[pyfunction]
#[pyo3(signature = (model, method, x0, horizon, n_samples, seed = 1, tau = None, threads = None))]
#[allow(clippy::too_many_arguments)]
fn run_ensemble(
    py: Python<'_>,
    model: &PyModel,
    method: &str,
    x0: Vec<i64>,
    horizon: f64,
    n_samples: usize,
    seed: u64,
    tau: Option<f64>,
    threads: Option<usize>,
) -> PyResult<PyEnsemble> {
    let method = sampler(method)?;
    let m = &model.inner;
    let go = || core::run_ensemble(method, m, &x0, horizon, tau, n_samples, seed);
    let inner = py.detach(|| match threads {
        Some(n) => with_threads(n, go).and_then(|r| r),
        None => go(),
    });
    Ok(PyEnsemble { inner: inner.or_raise()? })
}

/// States visited by one trajectory on stream `stream` of `seed`, start
/// state first.
#[pyfunction]
#[pyo3(signature = (model, method, x0, horizon, seed = 1, stream = 0, tau = None))]
#[allow(clippy::too_many_arguments)]
fn trajectory(
    model: &PyModel,
    method: &str,
    x0: Vec<i64>,
    horizon: f64,
    seed: u64,
    stream: u64,
    tau: Option<f64>,
) -> PyResult<Vec<Vec<i64>>> {
    let method = sampler(method)?;
    let tau = match (method.needs_tau(), tau) {
        (true, None) => return Err(PyValueError::new_err(format!("{method} needs tau"))),
        (_, t) => t.unwrap_or(0.0),
    };
    let mut rng = core::RngStream::new(seed, stream);
    let mut path = Vec::new();
    run_trajectory_with(method, &model.inner, &x0, horizon, tau, &mut rng, |x| path.push(x.to_vec())).or_raise()?;
    Ok(path)
}

/// `n` Poisson draws with the given mean from stream `stream` of `seed`.
#[pyfunction]
#[pyo3(signature = (mean, n, seed = 1, stream = 0))]
fn poisson(mean: f64, n: usize, seed: u64, stream: u64) -> PyResult<Vec<u64>> {
    let mut rng = core::RngStream::new(seed, stream);
    (0..n).map(|_| core::sample_poisson(&mut rng, mean).or_raise()).collect()
}

/// Normalized marginal of `species` from a joint vector over the box.
#[pyfunction]
fn marginal(caps: Vec<u32>, p: Vec<f64>, species: usize) -> PyResult<Vec<f64>> {
    let space = core::StateSpace::new(&caps).or_raise()?;
    analysis::marginal(&space, &p, species).or_raise()
}

/// Total variation of the normalized vectors.
#[pyfunction]
fn tv_distance(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    if p.len() != q.len() {
        return Err(PyValueError::new_err("vectors differ in length"));
    }
    Ok(analysis::tv_distance(&p, &q))
}

/// `(mean, variance)` of a distribution over 0, 1, 2, ...
#[pyfunction]
fn moments(p: Vec<f64>) -> (f64, f64) {
    analysis::moments(&p)
}

/// Local maxima with prominence above `min_prominence` times the peak,
/// optionally after a centered moving average of half width `smoothing`.
#[pyfunction]
#[pyo3(signature = (p, min_prominence = 0.1, smoothing = 0))]
fn prominent_modes(p: Vec<f64>, min_prominence: f64, smoothing: usize) -> Vec<usize> {
    if smoothing > 0 {
        analysis::prominent_modes(&analysis::moving_average(&p, smoothing), min_prominence)
    } else {
        analysis::prominent_modes(&p, min_prominence)
    }
}

#[pymodule]
fn cme(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyStateSpace>()?;
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_function(wrap_pyfunction!(assemble_generator, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_channels, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_frozen, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(poisson, m)?)?;
    m.add_function(wrap_pyfunction!(marginal, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(prominent_modes, m)?)?;
    m.add("SAMPLERS", SamplerMethod::ALL.map(|s| s.name()).to_vec())?;
    m.add("DENSITY_METHODS", DENSITY_METHODS.to_vec())?;
    Ok(())
}
