//! Python bindings: load or build automata, evaluate words, compare machines
//! and run the bundled demos.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qfa_core::classical::AcceptanceMode;
use qfa_core::format::{parse_automaton_str, serialize_automaton, Machine};
use qfa_core::harness::{
    cmd_classify, cmd_demo, cmd_equiv, cmd_run, evaluate, to_gfa, DemoParams, RunOptions, DEMOS,
};
use qfa_core::numeric::Real;
use qfa_core::oneway::{build_modp_2state, build_modp_logstate, build_neq_nqfa, default_neq_angle};
use qfa_core::report::{ExperimentReport, OutputFormat};
use qfa_core::twoway::families::{
    build_eq_15kwqfa, build_eq_tqcfa, build_pal_tqcfa, loop_semantics, tqcfa_exact_accept,
    LoopProfile,
};
use qfa_core::{Error, Rational};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn options(tol: f64, seed: u64, trials: u64, max_steps: Option<u64>) -> RunOptions {
    RunOptions {
        tol,
        seed,
        trials,
        max_steps,
    }
}

fn render(report: ExperimentReport, format: &str) -> PyResult<String> {
    Ok(report.render(format.parse::<OutputFormat>().map_err(py_err)?))
}

/// A parsed automaton of any supported model.
#[pyclass(module = "qfa")]
struct Automaton {
    float: Machine<f64>,
    exact: Option<Machine<Rational>>,
}

impl Automaton {
    fn from_text(text: &str, tol: f64) -> PyResult<Self> {
        let float = parse_automaton_str::<f64>(text, tol).map_err(py_err)?;
        let exact = parse_automaton_str::<Rational>(text, tol).ok();
        Ok(Automaton { float, exact })
    }

    fn from_machine(m: Machine<f64>) -> PyResult<Self> {
        Automaton::from_text(&serialize_automaton(&m), 1e-9)
    }

    fn exact_machine(&self) -> PyResult<&Machine<Rational>> {
        self.exact
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("no exact form for this machine"))
    }
}

#[pymethods]
impl Automaton {
    #[staticmethod]
    #[pyo3(signature = (text, tol = 1e-9))]
    fn parse(text: &str, tol: f64) -> PyResult<Self> {
        Automaton::from_text(text, tol)
    }

    #[staticmethod]
    #[pyo3(signature = (path, tol = 1e-9))]
    fn load(path: &str, tol: f64) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        Automaton::from_text(&text, tol)
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.float.model()
    }

    #[getter]
    fn alphabet(&self) -> String {
        self.float.alphabet().letters().iter().collect()
    }

    /// Acceptance value; 2QCFAs are sampled.
    #[pyo3(signature = (word, seed = 0, trials = 10_000, max_steps = None))]
    fn accept_prob(
        &self,
        word: &str,
        seed: u64,
        trials: u64,
        max_steps: Option<u64>,
    ) -> PyResult<f64> {
        Ok(
            evaluate(&self.float, word, &options(1e-9, seed, trials, max_steps))
                .map_err(py_err)?
                .value,
        )
    }

    /// Exact acceptance value as a `p/q` string (one-way models only).
    fn exact_value(&self, word: &str) -> PyResult<String> {
        let g = to_gfa(self.exact_machine()?).map_err(py_err)?;
        Ok(g.value(word).map_err(py_err)?.render())
    }

    #[pyo3(signature = (words, mode = "cutpoint:0.5", format = "json", seed = 0, trials = 10_000, tol = 1e-9))]
    fn run(
        &self,
        words: Vec<String>,
        mode: &str,
        format: &str,
        seed: u64,
        trials: u64,
        tol: f64,
    ) -> PyResult<String> {
        let mode: AcceptanceMode = mode.parse().map_err(py_err)?;
        render(
            cmd_run(&self.float, &words, mode, &options(tol, seed, trials, None))
                .map_err(py_err)?,
            format,
        )
    }

    #[pyo3(signature = (max_len, mode = "cutpoint:0.5", format = "json", tol = 1e-9))]
    fn classify(&self, max_len: usize, mode: &str, format: &str, tol: f64) -> PyResult<String> {
        let mode: AcceptanceMode = mode.parse().map_err(py_err)?;
        render(
            cmd_classify(&self.float, max_len, mode, &options(tol, 0, 10_000, None))
                .map_err(py_err)?,
            format,
        )
    }

    fn to_json(&self) -> String {
        serialize_automaton(&self.float)
    }

    fn __repr__(&self) -> String {
        format!(
            "Automaton(model='{}', alphabet='{}')",
            self.model(),
            self.alphabet()
        )
    }
}

/// Compares two one-way machines. Returns a dict with `equal`, `exact`,
/// `dimension` and, when they differ, `witness`, `left`, `right`.
#[pyfunction]
#[pyo3(signature = (left, right, exact = false, tol = 1e-9))]
fn equiv<'py>(
    py: Python<'py>,
    left: &Automaton,
    right: &Automaton,
    exact: bool,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    macro_rules! fill {
        ($out:expr) => {{
            let out = $out.map_err(py_err)?;
            d.set_item("equal", out.verdict.equal)?;
            d.set_item("exact", out.verdict.exact)?;
            d.set_item("dimension", out.verdict.dimension)?;
            if let Some(w) = out.verdict.witness {
                d.set_item("witness", w.word)?;
                d.set_item("left", w.left.render())?;
                d.set_item("right", w.right.render())?;
            }
        }};
    }
    if exact {
        fill!(cmd_equiv(
            left.exact_machine()?,
            right.exact_machine()?,
            tol
        ));
    } else {
        fill!(cmd_equiv(&left.float, &right.float, tol));
    }
    Ok(d)
}

/// Runs a named demo and returns the rendered report.
#[pyfunction]
#[pyo3(signature = (name, p = None, k = None, eps = None, theta = None, words = vec![], max_len = None,
                    format = "json", seed = 0, trials = 10_000))]
#[allow(clippy::too_many_arguments)]
fn demo(
    name: &str,
    p: Option<u64>,
    k: Option<u64>,
    eps: Option<f64>,
    theta: Option<f64>,
    words: Vec<String>,
    max_len: Option<usize>,
    format: &str,
    seed: u64,
    trials: u64,
) -> PyResult<String> {
    let params = DemoParams {
        p,
        k,
        eps,
        theta,
        words,
        max_len,
    };
    render(
        cmd_demo(name, &params, &options(1e-9, seed, trials, None))
            .map_err(py_err)?
            .report,
        format,
    )
}

#[pyfunction]
fn demos() -> Vec<&'static str> {
    DEMOS.to_vec()
}

#[pyfunction]
fn modp_2state(p: u64, k: u64) -> PyResult<Automaton> {
    Automaton::from_machine(Machine::Mcqfa(build_modp_2state(p, k).map_err(py_err)?))
}

/// Logarithmic-size MOD_p machine with its drawn multipliers.
#[pyfunction]
#[pyo3(signature = (p, eps, seed = 0))]
fn modp_logstate(p: u64, eps: f64, seed: u64) -> PyResult<(Automaton, Vec<u64>)> {
    let built = build_modp_logstate(p, eps, seed).map_err(py_err)?;
    Ok((
        Automaton::from_machine(Machine::Mcqfa(built.machine))?,
        built.multipliers,
    ))
}

#[pyfunction]
#[pyo3(signature = (theta = None))]
fn neq(theta: Option<f64>) -> PyResult<Automaton> {
    Automaton::from_machine(Machine::Mcqfa(
        build_neq_nqfa(theta.unwrap_or_else(default_neq_angle)).map_err(py_err)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (k = 2))]
fn eq_2qcfa(k: u32) -> PyResult<Automaton> {
    Automaton::from_machine(Machine::Tqcfa(build_eq_tqcfa(k).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (k = 2))]
fn pal_2qcfa(k: u32) -> PyResult<Automaton> {
    Automaton::from_machine(Machine::Tqcfa(build_pal_tqcfa(k).map_err(py_err)?))
}

#[pyfunction]
fn eq_15kwqfa() -> PyResult<Automaton> {
    Automaton::from_machine(Machine::TwoWayKwqfa(build_eq_15kwqfa()))
}

fn profile<'py>(py: Python<'py>, p: LoopProfile) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("reject_per_iteration", p.reject_per_iteration)?;
    d.set_item("accept_per_iteration", p.accept_per_iteration)?;
    d.set_item("accept", p.accept)?;
    d.set_item("reject", p.reject)?;
    d.set_item("expected_iterations", p.expected_iterations)?;
    Ok(d)
}

/// Closed-form acceptance of the `eq` or `pal` 2QCFA on `word`.
#[pyfunction]
#[pyo3(signature = (family, word, k = 2))]
fn exact_2qcfa<'py>(
    py: Python<'py>,
    family: &str,
    word: &str,
    k: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let fam = family.parse().map_err(py_err)?;
    profile(py, tqcfa_exact_accept(fam, word, k).map_err(py_err)?)
}

#[pyfunction(name = "loop_semantics")]
fn py_loop_semantics<'py>(py: Python<'py>, r: f64, a: f64) -> PyResult<Bound<'py, PyDict>> {
    profile(py, loop_semantics(r, a).map_err(py_err)?)
}

#[pymodule]
fn qfa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Automaton>()?;
    m.add_function(wrap_pyfunction!(equiv, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    m.add_function(wrap_pyfunction!(demos, m)?)?;
    m.add_function(wrap_pyfunction!(modp_2state, m)?)?;
    m.add_function(wrap_pyfunction!(modp_logstate, m)?)?;
    m.add_function(wrap_pyfunction!(neq, m)?)?;
    m.add_function(wrap_pyfunction!(eq_2qcfa, m)?)?;
    m.add_function(wrap_pyfunction!(pal_2qcfa, m)?)?;
    m.add_function(wrap_pyfunction!(eq_15kwqfa, m)?)?;
    m.add_function(wrap_pyfunction!(exact_2qcfa, m)?)?;
    m.add_function(wrap_pyfunction!(py_loop_semantics, m)?)?;
    Ok(())
}
