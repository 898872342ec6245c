//! Python bindings for ramsey-forge.

use num_traits::ToPrimitive;
use pyo3::exceptions::{PyFileNotFoundError, PyLookupError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

use ramsey_forge::analysis::{self, OracleSolver, RamseySolver, SaSolver};
use ramsey_forge::cost::{self, RamseyInstance};
use ramsey_forge::embed::{self, HardwareGraph};
use ramsey_forge::graph::{edge_count, GraphBits, MAX_VERTICES};
use ramsey_forge::qa::{self, AnnealSchedule};
use ramsey_forge::qubo::{self, coef_from_f64, Domain, PenaltyConfig, QuadraticModel};
use ramsey_forge::sa::{self, CoolingSchedule, SampleSet};
use ramsey_forge::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Parse(_) | Error::Json(_) => PyValueError::new_err(e.to_string()),
        Error::NotFound(_) => PyLookupError::new_err(e.to_string()),
        Error::Io(_) => PyFileNotFoundError::new_err(e.to_string()),
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Converts through the `json` module so nested results arrive as plain
/// dicts and lists.
fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn samples_to_py(py: Python<'_>, set: &SampleSet) -> PyResult<Py<PyAny>> {
    let rows: Vec<Value> = set
        .samples
        .iter()
        .map(|s| serde_json::json!({ "spins": s.spins, "energy": s.energy, "multiplicity": s.multiplicity }))
        .collect();
    to_py(py, &Value::from(rows))
}

/// Ramsey instance `h^N_{m,n}`: `N` vertices, clique order `m`, independent-set order `n`.
#[pyclass(name = "RamseyInstance", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance(RamseyInstance);

#[pymethods]
impl PyInstance {
    #[new]
    fn new(n_vertices: usize, m: usize, n: usize) -> PyResult<Self> {
        RamseyInstance::new(n_vertices, m, n).map(Self).map_err(py_err)
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.0.n_vertices
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.clique_order
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.independent_order
    }

    fn num_edges(&self) -> usize {
        self.0.num_edges()
    }

    fn __repr__(&self) -> String {
        format!(
            "RamseyInstance(N={}, m={}, n={})",
            self.0.n_vertices, self.0.clique_order, self.0.independent_order
        )
    }
}

/// Simple graph stored as its column-wise lower-triangular edge bits.
#[pyclass(name = "Graph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph(GraphBits);

#[pymethods]
impl PyGraph {
    /// Builds a graph from a `0`/`1` string; the vertex count follows from its length.
    #[staticmethod]
    fn from_bits(bits: &str) -> PyResult<Self> {
        let values: Vec<u8> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(PyValueError::new_err(format!("bad bit {other:?}"))),
            })
            .collect::<PyResult<_>>()?;
        let n = (2..=MAX_VERTICES)
            .find(|&n| edge_count(n) == values.len())
            .ok_or_else(|| PyValueError::new_err(format!("{} bits is not a triangular edge count", values.len())))?;
        GraphBits::from_bits(n, &values).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        GraphBits::complete(n).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn empty(n: usize) -> PyResult<Self> {
        GraphBits::empty(n).map(Self).map_err(py_err)
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.0.n_vertices()
    }

    fn has_edge(&self, u: usize, w: usize) -> PyResult<bool> {
        self.0.has_edge(u, w).map_err(py_err)
    }

    fn num_edges_present(&self) -> usize {
        self.0.popcount()
    }

    fn complement(&self) -> Self {
        Self(self.0.complement())
    }

    fn bit_string(&self) -> String {
        self.0.bit_string()
    }

    fn __repr__(&self) -> String {
        format!("Graph('{}')", self.0.bit_string())
    }
}

/// Quadratic model over binary or spin variables with exact rational coefficients.
#[pyclass(name = "QuadraticModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(QuadraticModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        QuadraticModel::from_json(&v).map(Self).map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.0.num_vars()
    }

    #[getter]
    fn domain(&self) -> &'static str {
        match self.0.domain() {
            Domain::Binary => "binary",
            Domain::Spin => "spin",
        }
    }

    #[getter]
    fn num_couplings(&self) -> usize {
        self.0.quadratic().len()
    }

    fn energy(&self, values: Vec<i8>) -> PyResult<f64> {
        let e = self.0.energy(&values).map_err(py_err)?;
        Ok(e.to_f64().unwrap_or(f64::NAN))
    }

    fn to_spin(&self) -> PyResult<Self> {
        qubo::to_spin(&self.0).map(Self).map_err(py_err)
    }

    /// The graph encoded by an assignment of this model's variables.
    fn graph_of(&self, values: Vec<i8>) -> PyResult<PyGraph> {
        self.0.graph_of(&values).map(PyGraph).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "QuadraticModel({} vars, {}, {} couplings)",
            self.0.num_vars(),
            self.domain(),
            self.0.quadratic().len()
        )
    }
}

#[pyfunction]
fn ramsey_energy(graph: &PyGraph, instance: &PyInstance) -> PyResult<u64> {
    cost::ramsey_energy(&graph.0, &instance.0).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (instance, mu = 2.0, fix_first = false))]
fn build_ramsey_model(instance: &PyInstance, mu: f64, fix_first: bool) -> PyResult<PyModel> {
    let cfg = PenaltyConfig::new(coef_from_f64(mu).map_err(py_err)?).map_err(py_err)?;
    qubo::build_ramsey_model(&instance.0, &cfg, fix_first)
        .map(PyModel)
        .map_err(py_err)
}

/// `{"e_gs", "degeneracy", "minimizers"}` by exhaustive enumeration.
#[pyfunction]
fn exhaustive_ground(py: Python<'_>, instance: &PyInstance) -> PyResult<Py<PyAny>> {
    let g = py.detach(|| analysis::exhaustive_ground(&instance.0)).map_err(py_err)?;
    let minimizers: Vec<String> = g.minimizers.iter().map(GraphBits::bit_string).collect();
    to_py(
        py,
        &serde_json::json!({ "e_gs": g.e_gs, "degeneracy": g.degeneracy, "minimizers": minimizers }),
    )
}

/// Distinct samples as dicts with `spins`, `energy` and `multiplicity`.
#[pyfunction]
#[pyo3(signature = (model, reads = 1000, seed = 0, t_initial = 10.0, t_final = 0.05, sweeps = 1000))]
fn simulated_anneal(
    py: Python<'_>,
    model: &PyModel,
    reads: usize,
    seed: u64,
    t_initial: f64,
    t_final: f64,
    sweeps: usize,
) -> PyResult<Py<PyAny>> {
    let sched = CoolingSchedule::new(t_initial, t_final, sweeps).map_err(py_err)?;
    let set = py
        .detach(|| sa::simulated_anneal(&model.0, &sched, reads, seed))
        .map_err(py_err)?;
    samples_to_py(py, &set)
}

#[pyfunction]
#[pyo3(signature = (model, starts = 1000, seed = 0))]
fn steepest_descent(py: Python<'_>, model: &PyModel, starts: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let set = py
        .detach(|| sa::steepest_descent(&model.0, starts, seed))
        .map_err(py_err)?;
    samples_to_py(py, &set)
}

/// Chains `{var: [qubit, ...]}` on the default 106-qubit chip.
#[pyfunction]
#[pyo3(signature = (model, seed = 0))]
fn find_embedding(py: Python<'_>, model: &PyModel, seed: u64) -> PyResult<Py<PyAny>> {
    let hw = HardwareGraph::default_chip();
    let emb = py
        .detach(|| embed::find_embedding(&model.0, &hw, seed))
        .map_err(py_err)?;
    to_py(py, &emb.to_json()["chains"])
}

/// Final energy distribution `[(energy, probability), ...]` of a linear
/// anneal of duration `tf`.
#[pyfunction]
#[pyo3(signature = (model, tf, steps = None))]
fn qa_energy_distribution(py: Python<'_>, model: &PyModel, tf: f64, steps: Option<usize>) -> PyResult<Vec<(f64, f64)>> {
    let sched = AnnealSchedule::linear(tf).map_err(py_err)?;
    let dist = py
        .detach(|| {
            let steps = match steps {
                Some(s) => s,
                None => qa::recommended_steps(&model.0, &sched)?,
            };
            let state = qa::evolve(&model.0, &sched, steps)?;
            qa::measure_energies(&state, &model.0)
        })
        .map_err(py_err)?;
    Ok(dist
        .levels
        .iter()
        .map(|(e, p)| (e.to_f64().unwrap_or(f64::NAN), *p))
        .collect())
}

/// Runs the incremental-N protocol with the `oracle` or `sa` solver.
#[pyfunction]
#[pyo3(signature = (m, n, solver = "oracle", n_start = 4, reads = 10000, seed = 0))]
fn ramsey_protocol(
    py: Python<'_>,
    m: usize,
    n: usize,
    solver: &str,
    n_start: usize,
    reads: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let mut s: Box<dyn RamseySolver + Send> = match solver {
        "oracle" => Box::new(OracleSolver),
        "sa" => Box::new(SaSolver {
            schedule: CoolingSchedule::default(),
            reads,
            repetitions: 1,
            seed,
        }),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown solver {other:?}; use 'oracle' or 'sa'"
            )))
        }
    };
    let report = py
        .detach(|| analysis::ramsey_protocol(m, n, s.as_mut(), n_start))
        .map_err(py_err)?;
    to_py(
        py,
        &serde_json::to_value(&report).map_err(|e| PyValueError::new_err(e.to_string()))?,
    )
}

#[pyfunction]
fn repetition_count(epsilon: f64, delta: f64) -> PyResult<u64> {
    analysis::repetition_count(epsilon, delta).map_err(py_err)
}

/// Maximum-likelihood temperature for `[(energy, count), ...]` per configuration.
#[pyfunction]
fn boltzmann_fit(py: Python<'_>, configs: Vec<(f64, u64)>) -> PyResult<Py<PyAny>> {
    let fit = analysis::boltzmann_fit(&configs).map_err(py_err)?;
    let temperature = if fit.infinite_temperature {
        Value::Null
    } else {
        Value::from(fit.temperature)
    };
    to_py(
        py,
        &serde_json::json!({
            "temperature": temperature,
            "log_likelihood": fit.log_likelihood,
            "infinite_temperature": fit.infinite_temperature,
        }),
    )
}

#[pymodule]
pub fn ramsey_forge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(ramsey_energy, m)?)?;
    m.add_function(wrap_pyfunction!(build_ramsey_model, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_ground, m)?)?;
    m.add_function(wrap_pyfunction!(simulated_anneal, m)?)?;
    m.add_function(wrap_pyfunction!(steepest_descent, m)?)?;
    m.add_function(wrap_pyfunction!(find_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(qa_energy_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(ramsey_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(repetition_count, m)?)?;
    m.add_function(wrap_pyfunction!(boltzmann_fit, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
