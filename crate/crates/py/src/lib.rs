// pyo3 0.22 exception macros probe a feature this crate does not declare
#![allow(unexpected_cfgs)]

use std::collections::HashMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use subquad::counting::{fpras, CountingModel, CountingOptions, CountingTask, Mode};
use subquad::graph::{load_graph, GraphFormat, Hypergraph, Loaded, Pinning, Spin};
use subquad::models::{brute_force_marginals, brute_force_partition, uniqueness_gap, HyperIs, PolymerModel, TwoSpinModel, TwoSpinParams};
use subquad::rng::RngStream;
use subquad::samplers::{AjOptions, AjSampler};
use subquad::sampling::sample_spin_counts;
use subquad::saw::{boundary, estimate_marginal_saw, CompleteTree};
use subquad::verify::{run_suite, SawScope, VerifyConfig};

create_exception!(subquad, RegimeError, PyValueError, "Parameters outside the sampler's proven regime.");
create_exception!(subquad, BudgetError, PyRuntimeError, "A recursion, level or size budget was exhausted.");

fn err(e: subquad::Error) -> PyErr {
    use subquad::Error as E;
    match e {
        E::Regime(_) => RegimeError::new_err(e.to_string()),
        E::RecursionBudget { .. } | E::LevelCap { .. } | E::Capacity { .. } | E::TreeTooLarge { .. } => BudgetError::new_err(e.to_string()),
        E::Io(_) => pyo3::exceptions::PyOSError::new_err(e.to_string()),
        E::NoConvergence { .. } | E::ZeroEstimate(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, x: &T) -> PyResult<PyObject> {
    let s = serde_json::to_string(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (s,))?.unbind())
}

fn pinning(pins: Option<HashMap<usize, Spin>>) -> Pinning {
    let mut p = Pinning::new();
    for (v, c) in pins.unwrap_or_default() {
        p.set(v, c);
    }
    p
}

fn mode(s: &str) -> PyResult<Mode> {
    match s {
        "saw" => Ok(Mode::Saw),
        "aggregate" => Ok(Mode::Aggregate),
        _ => Err(PyValueError::new_err(format!("mode must be 'saw' or 'aggregate', got {s:?}"))),
    }
}

/// Simple undirected graph on vertices 0..n.
#[pyclass(module = "subquad")]
#[derive(Clone)]
struct Graph {
    inner: subquad::graph::Graph,
}

#[pymethods]
impl Graph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Graph { inner: subquad::graph::Graph::from_edges(n, &edges).map_err(err)? })
    }

    /// Edge-list file: vertex count on the first line, then one "u v" per line.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        match load_graph(path, GraphFormat::EdgeList).map_err(err)? {
            Loaded::Graph(g) => Ok(Graph { inner: g }),
            Loaded::Hyper(_) => Err(PyValueError::new_err("expected a graph")),
        }
    }

    #[staticmethod]
    fn random_regular(n: usize, degree: usize, seed: u64) -> PyResult<Self> {
        Ok(Graph { inner: subquad::graph::Graph::random_regular(n, degree, &mut RngStream::new(seed)).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err("vertex out of range"));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.edges().len())
    }
}

/// A model the counting driver accepts: two-spin, polymer or hypergraph
/// independent sets.
#[pyclass(module = "subquad")]
#[derive(Clone)]
struct Model {
    inner: CountingModel,
}

impl Model {
    fn two_spin_from(g: &Graph, p: TwoSpinParams) -> PyResult<Self> {
        Ok(Model { inner: CountingModel::TwoSpin(TwoSpinModel::new(g.inner.clone(), p).map_err(err)?) })
    }
}

#[pymethods]
impl Model {
    #[staticmethod]
    #[pyo3(name = "hardcore")]
    fn hardcore_py(g: &Graph, lam: f64) -> PyResult<Self> {
        Self::two_spin_from(g, TwoSpinParams::hardcore(lam))
    }

    #[staticmethod]
    #[pyo3(signature = (g, beta, lam=1.0))]
    fn ising(g: &Graph, beta: f64, lam: f64) -> PyResult<Self> {
        Self::two_spin_from(g, TwoSpinParams::ising(beta, lam))
    }

    #[staticmethod]
    fn two_spin(g: &Graph, beta: f64, gamma: f64, lam: f64) -> PyResult<Self> {
        Self::two_spin_from(g, TwoSpinParams { beta, gamma, lambda: lam })
    }

    /// Polymers are connected vertex sets with a non-ground spin assignment;
    /// weights decay as exp(-theta |gamma|).
    #[staticmethod]
    #[pyo3(signature = (g, q=2, theta=10.0))]
    fn polymer(g: &Graph, q: usize, theta: f64) -> PyResult<Self> {
        Ok(Model { inner: CountingModel::Polymer(PolymerModel::geometric(g.inner.clone(), q, theta).map_err(err)?) })
    }

    #[staticmethod]
    fn hyper_is(n: usize, k: usize, edges: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Model { inner: CountingModel::HyperIs(HyperIs::new(Hypergraph::new(n, k, edges).map_err(err)?)) })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    /// Exact Z by enumeration (small instances only).
    #[pyo3(signature = (pins=None))]
    fn partition_function(&self, pins: Option<HashMap<usize, Spin>>) -> PyResult<f64> {
        brute_force_partition(&self.inner, &pinning(pins)).map_err(err)
    }

    /// Exact marginal law of vertex v by enumeration.
    #[pyo3(signature = (v, pins=None))]
    fn marginals(&self, v: usize, pins: Option<HashMap<usize, Spin>>) -> PyResult<Vec<f64>> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err("vertex out of range"));
        }
        brute_force_marginals(&self.inner, v, &pinning(pins)).map_err(err)
    }

    /// Uniqueness gap of the two-spin parameters at the graph's max degree.
    fn uniqueness_gap(&self) -> PyResult<Option<f64>> {
        match &self.inner {
            CountingModel::TwoSpin(m) => Ok(uniqueness_gap(&m.params, m.graph.max_degree().max(2)).map_err(err)?.delta),
            _ => Err(PyValueError::new_err("uniqueness gap is defined for two-spin models")),
        }
    }

    /// Estimate Z; returns the report as a dict.
    #[pyo3(signature = (eps=0.1, mode="aggregate", seed=0, override_regime=false, budget=None, delta=None, amplify=None))]
    #[allow(clippy::too_many_arguments)]
    fn count(
        &self,
        py: Python<'_>,
        eps: f64,
        mode: &str,
        seed: u64,
        override_regime: bool,
        budget: Option<u64>,
        delta: Option<f64>,
        amplify: Option<f64>,
    ) -> PyResult<PyObject> {
        let task = CountingTask::new(self.inner.clone(), eps, seed).map_err(err)?;
        let mut opts = CountingOptions::new(self::mode(mode)?);
        opts.override_regime = override_regime;
        opts.budget = budget;
        opts.delta = delta;
        opts.amplify = amplify;
        let report = py.allow_threads(|| fpras(&task, &opts)).map_err(err)?;
        to_py(py, &report)
    }

    /// Counts of each spin at v over `trials` perfect draws.
    #[pyo3(signature = (v, trials=1000, pins=None, batch=false, seed=0, override_regime=false))]
    fn sample(
        &self,
        py: Python<'_>,
        v: usize,
        trials: u64,
        pins: Option<HashMap<usize, Spin>>,
        batch: bool,
        seed: u64,
        override_regime: bool,
    ) -> PyResult<Vec<u64>> {
        let pins = pinning(pins);
        let mut rng = RngStream::new(seed);
        let r = py
            .allow_threads(|| sample_spin_counts(&self.inner, v, &pins, trials, batch, override_regime, &mut rng))
            .map_err(err)?;
        Ok(r.counts)
    }

    /// One SAW-tree estimate of P[σ_v = 1] for a hardcore model.
    #[pyo3(signature = (v, budget, delta, seed=0, pins=None))]
    fn saw_estimate(
        &self,
        py: Python<'_>,
        v: usize,
        budget: f64,
        delta: f64,
        seed: u64,
        pins: Option<HashMap<usize, Spin>>,
    ) -> PyResult<PyObject> {
        let m = match &self.inner {
            CountingModel::TwoSpin(m) if m.params.is_hardcore() => m,
            _ => return Err(PyValueError::new_err("saw_estimate uses the hardcore sampler as its black box")),
        };
        let sampler = AjSampler { lambda: m.params.lambda, opts: AjOptions { override_regime: true, coin_skew: 0.0 } };
        let mut rng = RngStream::new(seed);
        let est = estimate_marginal_saw(&m.graph, v, &pinning(pins), &m.params, delta, budget, &sampler, &mut rng).map_err(err)?;
        to_py(py, &est)
    }

    fn __repr__(&self) -> String {
        format!("Model({}, n={})", self.inner.name(), self.inner.n())
    }
}

/// (size, depth) of the boundary cut from an infinite complete tree.
#[pyfunction]
fn complete_tree_boundary(arity: usize, delta: f64, budget: f64) -> PyResult<(usize, usize)> {
    if arity < 1 || !(delta > 0.0 && delta < 1.0) || !budget.is_finite() {
        return Err(PyValueError::new_err("need arity >= 1, delta in (0,1) and a finite budget"));
    }
    let s = boundary(&mut CompleteTree::new(arity, None), delta, budget);
    Ok((s.len(), s.depth))
}

/// Run one verification suite; returns a list of check dicts.
#[pyfunction]
#[pyo3(signature = (suite, samples=10_000, seed=1, trials=40, full=false))]
fn verify(py: Python<'_>, suite: &str, samples: u64, seed: u64, trials: usize, full: bool) -> PyResult<PyObject> {
    let cfg = VerifyConfig {
        samples,
        seed,
        trials,
        saw_scope: if full { SawScope::Full } else { SawScope::Quick },
        ..VerifyConfig::default()
    };
    let checks = py.allow_threads(|| run_suite(suite, &cfg)).map_err(err)?;
    to_py(py, &checks)
}

#[pymodule]
#[pyo3(name = "subquad")]
fn subquad_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(complete_tree_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("RegimeError", m.py().get_type_bound::<RegimeError>())?;
    m.add("BudgetError", m.py().get_type_bound::<BudgetError>())?;
    Ok(())
}
