//! Python bindings. Reports are returned as dictionaries decoded from the
//! same JSON the command line emits.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use isocert::checker::{check_condition, ConditionSpec};
use isocert::cli::config::{parse_cost, parse_cost_function, parse_entropy, parse_family, parse_measure};
use isocert::cli::{paper_examples_report, to_json};
use isocert::convex::CostFunction;
use isocert::entropy::EntropyFunction;
use isocert::expr::Expr;
use isocert::measure1d::{self, Measure1D, Truncation, DEFAULT_POINTS};
use isocert::tester;
use isocert::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Argument(_) | Error::Parse { .. } | Error::Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: isocert::Result<String>) -> PyResult<Py<PyAny>> {
    let text = text.map_err(py_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A one-dimensional measure `Z e^{-V(x)} dx` on a truncated grid.
#[pyclass(name = "Measure", module = "isocert", frozen)]
struct PyMeasure {
    inner: Measure1D,
}

#[pymethods]
impl PyMeasure {
    /// `spec`: gauss | exp | exp_power:ALPHA | loglog | an expression in x.
    #[new]
    #[pyo3(signature = (spec, points=None, support=None))]
    fn new(spec: &str, points: Option<usize>, support: Option<(f64, f64)>) -> PyResult<Self> {
        let pot = parse_measure(spec).map_err(py_err)?;
        let points = points.unwrap_or(DEFAULT_POINTS);
        let tr = match support {
            Some((lo, hi)) => Truncation::Explicit { lo, hi, points },
            None => Truncation::Auto { points },
        };
        Ok(PyMeasure {
            inner: Measure1D::build(pot, tr).map_err(py_err)?,
        })
    }

    #[getter]
    fn log_z(&self) -> f64 {
        self.inner.log_z()
    }

    #[getter]
    fn median(&self) -> f64 {
        self.inner.median()
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn density(&self, x: f64) -> f64 {
        self.inner.density(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.inner.quantile(p).map_err(py_err)
    }

    /// Half-line profile `Ĩ(t)` on `t ⊂ (0, 1/2]`.
    fn tilde_profile(&self, t: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(measure1d::tilde_profile(&self.inner, &t).map_err(py_err)?.tilde_i)
    }

    /// `I_F(r)` for the entropy spec `entropy`.
    #[pyo3(signature = (r, entropy="log"))]
    fn i_f_profile(&self, r: Vec<f64>, entropy: &str) -> PyResult<Vec<f64>> {
        let f = parse_entropy(entropy).map_err(py_err)?;
        Ok(measure1d::i_f_profile(&self.inner, &f, &r).map_err(py_err)?.value)
    }

    fn cheeger_constant(&self) -> f64 {
        measure1d::cheeger_constant(&self.inner).lambda
    }

    /// Verdict on the integrability condition as a report dictionary.
    #[pyo3(signature = (entropy="log", cost="quadratic", delta=None, k=2.0, t_min=1e-12))]
    fn check(
        &self,
        py: Python<'_>,
        entropy: &str,
        cost: &str,
        delta: Option<f64>,
        k: f64,
        t_min: f64,
    ) -> PyResult<Py<PyAny>> {
        let f = parse_entropy(entropy).map_err(py_err)?;
        let (model, d) = parse_cost(cost).map_err(py_err)?;
        let delta = delta.or(d).unwrap_or(0.5);
        let spec = ConditionSpec::new(&self.inner, &f, model, delta, k).with_t_min(t_min);
        let rep = py.detach(|| check_condition(&spec)).map_err(py_err)?;
        json_to_py(py, to_json(&rep))
    }

    /// Best constants of the defective inequality over a test family.
    #[pyo3(signature = (family="exponential:0.25,0.5,1", entropy="log", cost="quadratic", k=2.0, seed=0))]
    fn verify_theorem_2_1(
        &self,
        py: Python<'_>,
        family: &str,
        entropy: &str,
        cost: &str,
        k: f64,
        seed: u64,
    ) -> PyResult<Py<PyAny>> {
        let fam = parse_family(family, seed, None).map_err(py_err)?;
        let f = parse_entropy(entropy).map_err(py_err)?;
        let c = parse_cost_function(cost).map_err(py_err)?;
        let rep = py
            .detach(|| tester::verify_theorem_2_1(&self.inner, &f, &c, k, &fam))
            .map_err(py_err)?;
        json_to_py(py, to_json(&rep))
    }
}

/// `c_{A,α}(x)`.
#[pyfunction]
fn cost_value(a: f64, alpha: f64, x: f64) -> PyResult<f64> {
    CostFunction::closed_form(a, alpha)
        .and_then(|c| c.value(x))
        .map_err(py_err)
}

/// Numerical Legendre conjugate of the cost spec on `grid`.
#[pyfunction]
fn conjugate(cost: &str, grid: Vec<f64>) -> PyResult<Vec<f64>> {
    let c = parse_cost_function(cost).map_err(py_err)?;
    Ok(c.conjugate(&grid).map_err(py_err)?.values)
}

/// `F(x)` for an entropy spec.
#[pyfunction]
fn entropy_value(entropy: &str, x: f64) -> PyResult<f64> {
    parse_entropy(entropy)
        .and_then(|f| f.eval(x))
        .map_err(py_err)
}

/// `Φ(x) = sup_y (xy - yF(y) + y)`.
#[pyfunction]
#[pyo3(signature = (x, entropy="log"))]
fn phi(x: f64, entropy: &str) -> PyResult<f64> {
    let f: EntropyFunction = parse_entropy(entropy).map_err(py_err)?;
    Ok(f.phi(x))
}

#[pyfunction]
fn eval_expr(text: &str, x: f64) -> PyResult<f64> {
    Expr::parse(text)
        .and_then(|e| e.eval(x))
        .map_err(py_err)
}

/// The fixed example suite as a dictionary.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn paper_examples(py: Python<'_>, seed: u64) -> PyResult<Py<PyAny>> {
    let rep = py.detach(|| paper_examples_report(seed)).map_err(py_err)?;
    json_to_py(py, to_json(&rep))
}

#[pymodule]
#[pyo3(name = "isocert")]
fn isocert_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(cost_value, m)?)?;
    m.add_function(wrap_pyfunction!(conjugate, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_value, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(eval_expr, m)?)?;
    m.add_function(wrap_pyfunction!(paper_examples, m)?)?;
    Ok(())
}
