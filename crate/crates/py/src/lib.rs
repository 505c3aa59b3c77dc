//! Python bindings: states, gates, teleportation, stage traces and scenarios.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qwsn::scenario::{run_scenario, ScenarioConfig};
use qwsn::teleport::{self as proto, ClassicalMessage, ProtocolVariant, TeleportResult};
use qwsn::{gates, Gate, PureState};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn variant(name: &str) -> PyResult<ProtocolVariant> {
    name.parse().map_err(value_error)
}

/// Dense pure state; qubit 1 is the most significant index bit.
#[pyclass(name = "State", module = "qwsn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState(PureState);

#[pymethods]
impl PyState {
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        let n = amplitudes.len().trailing_zeros() as usize;
        PureState::from_amplitudes(n, amplitudes)
            .map(PyState)
            .map_err(value_error)
    }

    /// `alpha|0> + beta|1>`.
    #[staticmethod]
    fn qubit(alpha: Complex64, beta: Complex64) -> PyResult<Self> {
        qwsn::qstate::new_qubit(alpha, beta)
            .map(PyState)
            .map_err(value_error)
    }

    #[staticmethod]
    fn basis(n_qubits: usize, index: usize) -> PyResult<Self> {
        PureState::basis(n_qubits, index)
            .map(PyState)
            .map_err(value_error)
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn probability(&self, index: usize) -> f64 {
        self.0.probability(index)
    }

    fn tensor(&self, other: &PyState) -> PyState {
        PyState(self.0.tensor(&other.0))
    }

    /// Applies `gate` with its local wire k on register wire `wires[k]` (1-based).
    fn apply(&self, gate: &PyGate, wires: Vec<usize>) -> PyResult<PyState> {
        self.0
            .apply(&gate.0, &wires)
            .map(PyState)
            .map_err(value_error)
    }

    fn outcome_probabilities(&self, qubits: Vec<usize>) -> PyResult<Vec<f64>> {
        self.0.outcome_probabilities(&qubits).map_err(value_error)
    }

    fn fidelity(&self, other: &PyState) -> PyResult<f64> {
        self.0.fidelity(&other.0).map_err(value_error)
    }

    /// Reduced density matrix of `keep`, as a list of rows.
    fn reduced_density(&self, keep: Vec<usize>) -> PyResult<Vec<Vec<Complex64>>> {
        let rho = self.0.reduced_density(&keep).map_err(value_error)?;
        Ok((0..rho.dim())
            .map(|r| (0..rho.dim()).map(|c| rho.get(r, c)).collect())
            .collect())
    }

    fn __str__(&self) -> String {
        self.0.to_trace_string()
    }

    fn __repr__(&self) -> String {
        format!("State(n_qubits={})", self.0.n_qubits())
    }
}

/// Reversible gate from the built-in library.
#[pyclass(name = "Gate", module = "qwsn_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGate(Gate);

#[pymethods]
impl PyGate {
    /// `I, X, Y, Z, H, FG, TG, FRG`; `TG(c=1,2;t=3)` picks the Toffoli wiring.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Gate::parse(name).map(PyGate).map_err(value_error)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let d = self.0.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.0.entry(r, c)).collect())
            .collect()
    }

    fn is_unitary(&self) -> bool {
        self.0.is_unitary()
    }

    /// Output index for each input index; fails for non-permutation gates.
    fn truth_table(&self) -> PyResult<Vec<usize>> {
        gates::truth_table(&self.0)
            .map(|t| t.mapping)
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Gate({:?})", self.0.name())
    }
}

#[pyclass(name = "TeleportResult", module = "qwsn_py", frozen, get_all)]
struct PyTeleportResult {
    /// `(m1, m2)` sent over the classical channel.
    message: (u8, u8),
    correction: Vec<&'static str>,
    receiver: PyState,
    fidelity: f64,
    probability: f64,
}

impl From<TeleportResult> for PyTeleportResult {
    fn from(r: TeleportResult) -> Self {
        Self {
            message: (r.message.m1, r.message.m2),
            correction: r.correction,
            receiver: PyState(r.receiver_state),
            fidelity: r.input_fidelity,
            probability: r.probability,
        }
    }
}

#[pymethods]
impl PyTeleportResult {
    fn __repr__(&self) -> String {
        format!(
            "TeleportResult(message={}{}, correction={:?}, fidelity={})",
            self.message.0, self.message.1, self.correction, self.fidelity
        )
    }
}

/// Teleports `alpha|0> + beta|1>` `runs` times with a seeded generator.
#[pyfunction]
#[pyo3(signature = (alpha, beta, variant_name = "feynman", seed = 0, runs = 1))]
fn teleport(
    alpha: Complex64,
    beta: Complex64,
    variant_name: &str,
    seed: u64,
    runs: usize,
) -> PyResult<Vec<PyTeleportResult>> {
    let v = variant(variant_name)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..runs)
        .map(|_| {
            proto::teleport(alpha, beta, v, &mut rng)
                .map(PyTeleportResult::from)
                .map_err(value_error)
        })
        .collect()
}

/// Teleports with the sender's outcome fixed to `(m1, m2)`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, m1, m2, variant_name = "feynman"))]
fn teleport_forced(
    alpha: Complex64,
    beta: Complex64,
    m1: u8,
    m2: u8,
    variant_name: &str,
) -> PyResult<PyTeleportResult> {
    let message = ClassicalMessage::new(m1, m2).map_err(value_error)?;
    proto::teleport_forced(alpha, beta, variant(variant_name)?, message)
        .map(PyTeleportResult::from)
        .map_err(value_error)
}

/// Intermediate states `(label, state)`, ancilla included for the Toffoli variant.
#[pyfunction]
#[pyo3(signature = (alpha, beta, variant_name = "feynman"))]
fn stages(
    alpha: Complex64,
    beta: Complex64,
    variant_name: &str,
) -> PyResult<Vec<(String, PyState)>> {
    let trace = proto::run_stages(alpha, beta, variant(variant_name)?).map_err(value_error)?;
    Ok(trace
        .stages
        .into_iter()
        .map(|s| (s.label, PyState(s.state)))
        .collect())
}

/// Outcome masses indexed by `2*m1 + m2`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, variant_name = "feynman"))]
fn outcome_masses(alpha: Complex64, beta: Complex64, variant_name: &str) -> PyResult<[f64; 4]> {
    proto::outcome_masses(alpha, beta, variant(variant_name)?).map_err(value_error)
}

/// Stage trace report: `(text, mismatched stage labels)`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, variant_name = "feynman"))]
fn trace(alpha: Complex64, beta: Complex64, variant_name: &str) -> PyResult<(String, Vec<String>)> {
    let report = proto::trace_report(alpha, beta, variant(variant_name)?).map_err(value_error)?;
    let mismatched = report
        .mismatched_stages()
        .into_iter()
        .map(str::to_string)
        .collect();
    Ok((report.render(), mismatched))
}

/// Runs a TOML scenario document: `(report text, success)`.
#[pyfunction]
fn scenario(toml_text: &str) -> PyResult<(String, bool)> {
    let cfg = ScenarioConfig::from_toml(toml_text).map_err(value_error)?;
    let report = run_scenario(&cfg).map_err(value_error)?;
    Ok((report.render(), report.success()))
}

#[pymodule]
fn qwsn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyGate>()?;
    m.add_class::<PyTeleportResult>()?;
    m.add_function(wrap_pyfunction!(teleport, m)?)?;
    m.add_function(wrap_pyfunction!(teleport_forced, m)?)?;
    m.add_function(wrap_pyfunction!(stages, m)?)?;
    m.add_function(wrap_pyfunction!(outcome_masses, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(scenario, m)?)?;
    Ok(())
}
