//! Python bindings for `qmcube`.
//!
//! Built-in problems run natively with the interpreter lock released. A
//! Python callable passed to [`integrate`] is evaluated point by point on the
//! calling thread.

use std::sync::Mutex;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qmcube::control_variates::cv_integrate_with;
use qmcube::experiments::asian::reference_price;
use qmcube::experiments::{sobol, Config, Sources};
use qmcube::integrands::asian::{AsianOption, Payoff};
use qmcube::integrands::mvn::MvnProblem;
use qmcube::verify::Suite;
use qmcube::{ConeParams, ControlVariateSpec, Family, Generator, Identity, Integrand};

fn err(e: qmcube::Error) -> PyErr {
    match e {
        qmcube::Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<Family> {
    name.parse().map_err(err)
}

/// Hybrid tolerance `max(abs, rel·|v|)`.
#[pyclass(frozen, module = "qmcube_py")]
struct Tolerance(qmcube::Tolerance);

#[pymethods]
impl Tolerance {
    #[new]
    #[pyo3(signature = (abs_tol, rel_tol=0.0))]
    fn new(abs_tol: f64, rel_tol: f64) -> PyResult<Self> {
        qmcube::Tolerance::new(abs_tol, rel_tol).map(Tolerance).map_err(err)
    }

    #[getter]
    fn abs_tol(&self) -> f64 {
        self.0.abs()
    }

    #[getter]
    fn rel_tol(&self) -> f64 {
        self.0.rel()
    }

    /// `tol(v, v_hat)`; at most 1 means the estimate is within tolerance.
    fn value(&self, v: f64, v_hat: f64) -> f64 {
        qmcube::tolerance_value(v, v_hat, &self.0)
    }

    /// The estimate minimizing the worst tolerance over `[lo, hi]`.
    fn optimal_estimate(&self, lo: f64, hi: f64) -> f64 {
        qmcube::optimal_estimate(lo, hi, &self.0)
    }

    fn sup_tolerance(&self, lo: f64, hi: f64) -> f64 {
        qmcube::sup_tolerance(lo, hi, &self.0)
    }

    fn __repr__(&self) -> String {
        format!("Tolerance(abs_tol={}, rel_tol={})", self.0.abs(), self.0.rel())
    }
}

#[pyclass(frozen, module = "qmcube_py")]
struct CubatureResult(qmcube::CubatureResult);

#[pymethods]
impl CubatureResult {
    #[getter]
    fn v_hat(&self) -> f64 {
        self.0.v_hat
    }

    #[getter]
    fn v_lo(&self) -> f64 {
        self.0.v_lo
    }

    #[getter]
    fn v_hi(&self) -> f64 {
        self.0.v_hi
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n
    }

    #[getter]
    fn sup_tol(&self) -> f64 {
        self.0.sup_tol
    }

    #[getter]
    fn status(&self) -> &'static str {
        self.0.status().as_str()
    }

    #[getter]
    fn tolerance_met(&self) -> bool {
        self.0.tolerance_met()
    }

    /// Per-integral sample means.
    #[getter]
    fn mu_hat(&self) -> Vec<f64> {
        self.0.estimates.iter().map(|e| e.mu_hat).collect()
    }

    /// Per-integral error bounds.
    #[getter]
    fn err(&self) -> Vec<f64> {
        self.0.estimates.iter().map(|e| e.err).collect()
    }

    /// `(coordinate, l, m, m_prime)` of every failed necessary condition.
    #[getter]
    fn violations(&self) -> Vec<(usize, u32, u32, u32)> {
        self.0.violations.iter().map(|v| (v.coordinate, v.l, v.m, v.m_prime)).collect()
    }

    fn __repr__(&self) -> String {
        format!("CubatureResult(v_hat={}, n={}, status='{}')", self.0.v_hat, self.0.n, self.0.status())
    }
}

/// Wraps a Python callable `f(x: list[float]) -> float`. The first exception
/// raised is kept and the point gets NaN, which stops the engine.
struct PyIntegrand {
    f: Py<PyAny>,
    dimension: usize,
    error: Mutex<Option<PyErr>>,
}

impl Integrand for PyIntegrand {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        out[0] = Python::attach(|py| match self.f.call1(py, (x.to_vec(),)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                self.error.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        });
    }

    fn parallel(&self) -> bool {
        false
    }
}

fn cone(l_star: u32, r: u32) -> PyResult<ConeParams> {
    let c = ConeParams { l_star, r, ..ConeParams::default() };
    c.validate().map_err(err)?;
    Ok(c)
}

/// Integrates `f` over the unit cube of the given dimension.
#[pyfunction]
#[pyo3(signature = (f, dimension, tol, family="digital", seed=0, l_star=6, r=4))]
fn integrate(
    f: Py<PyAny>,
    dimension: usize,
    tol: &Tolerance,
    family: &str,
    seed: u64,
    l_star: u32,
    r: u32,
) -> PyResult<CubatureResult> {
    let family = self::family(family)?;
    let cone = cone(l_star, r)?;
    let g = PyIntegrand { f, dimension, error: Mutex::new(None) };
    let result = qmcube::integrate_scalar(&g, &tol.0, &cone, family, seed);
    if let Some(e) = g.error.lock().unwrap().take() {
        return Err(e);
    }
    result.map(CubatureResult).map_err(err)
}

/// `P(lower <= X <= upper)` for `X ~ N(0, covariance)`; omitted lower limits are `-inf`.
#[pyfunction]
#[pyo3(signature = (covariance, upper, tol, lower=None, family="digital", seed=0))]
fn mvn_probability(
    py: Python<'_>,
    covariance: Vec<Vec<f64>>,
    upper: Vec<f64>,
    tol: &Tolerance,
    lower: Option<Vec<f64>>,
    family: &str,
    seed: u64,
) -> PyResult<CubatureResult> {
    let family = self::family(family)?;
    let d = covariance.len();
    if covariance.iter().any(|row| row.len() != d) {
        return Err(PyValueError::new_err("covariance matrix must be square"));
    }
    let lower = lower.unwrap_or_else(|| vec![f64::NEG_INFINITY; d]);
    let tol = tol.0;
    py.detach(|| {
        let problem = MvnProblem::new(lower, upper, covariance.concat())?;
        let f = problem.genz();
        qmcube::integrate_scalar(&f, &tol, &ConeParams::default(), family, seed)
    })
    .map(CubatureResult)
    .map_err(err)
}

/// Arithmetic Asian call with the default contract. With `control_variate`
/// the geometric payoff is used as a control.
#[pyfunction]
#[pyo3(signature = (tol, control_variate=true, family="digital", seed=0))]
fn asian_price(py: Python<'_>, tol: &Tolerance, control_variate: bool, family: &str, seed: u64) -> PyResult<CubatureResult> {
    let family = self::family(family)?;
    let tol = tol.0;
    py.detach(|| {
        let option = AsianOption::default();
        let cone = ConeParams::default();
        let generator = Generator::randomized(family, option.steps, seed)?;
        if control_variate {
            let spec = ControlVariateSpec::new(vec![option.geometric_price()])?;
            Ok(cv_integrate_with(&option.payoffs()?, &spec, &tol, &cone, &generator)?.result)
        } else {
            qmcube::engine::integrate_with(&option.payoffs()?.only(Payoff::Arithmetic), &Identity, &tol, &cone, &generator)
        }
    })
    .map(CubatureResult)
    .map_err(err)
}

/// Sample-mean price of the default Asian call over `2^level` points.
#[pyfunction]
#[pyo3(signature = (level=16, family="digital", seed=0))]
fn asian_reference(py: Python<'_>, level: u32, family: &str, seed: u64) -> PyResult<f64> {
    let family = self::family(family)?;
    py.detach(|| reference_price(&AsianOption::default(), &Sources::default(), family, level, seed)).map_err(err)
}

type SobolRow = (usize, f64, f64, f64, u64);

/// First-order Sobol' indices of the six-dimensional Bratley function as
/// `(j, reference, v_hat, tol(reference, v_hat), n)` rows.
#[pyfunction]
#[pyo3(signature = (tol, family="digital", seed=0))]
fn sobol_indices(py: Python<'_>, tol: &Tolerance, family: &str, seed: u64) -> PyResult<Vec<SobolRow>> {
    let family = self::family(family)?;
    let cfg = Config::new(seed, 1, tol.0, family, ConeParams::default()).map_err(err)?;
    let records = py.detach(|| sobol::run(&cfg)).map_err(err)?;
    Ok(records.iter().map(|r| (r.j, r.reference, r.result.v_hat, r.tol_optimal, r.result.n)).collect())
}

/// Points `start .. start+count` of a randomized sequence, one list per point.
#[pyfunction]
#[pyo3(signature = (family, dimension, count, seed=0, start=0))]
fn points(family: &str, dimension: usize, count: usize, seed: u64, start: u64) -> PyResult<Vec<Vec<f64>>> {
    let g = Generator::randomized(self::family(family)?, dimension, seed).map_err(err)?;
    let batch = g.points(start, count, dimension).map_err(err)?;
    Ok(batch.rows().map(<[f64]>::to_vec).collect())
}

/// Normalized fast Walsh-Hadamard transform.
#[pyfunction]
fn fwht(values: Vec<f64>) -> PyResult<Vec<f64>> {
    qmcube::fwht(&values).map_err(err)
}

/// Runs the self-verification suites: `(name, passed, report)` rows.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn selftest(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    py.detach(|| {
        Suite::ALL
            .iter()
            .map(|s| s.run(seed).map(|r| (s.as_str().to_string(), r.passed(), r.to_string())))
            .collect::<qmcube::Result<Vec<_>>>()
    })
    .map_err(err)
}

#[pymodule]
fn qmcube_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tolerance>()?;
    m.add_class::<CubatureResult>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(mvn_probability, m)?)?;
    m.add_function(wrap_pyfunction!(asian_price, m)?)?;
    m.add_function(wrap_pyfunction!(asian_reference, m)?)?;
    m.add_function(wrap_pyfunction!(sobol_indices, m)?)?;
    m.add_function(wrap_pyfunction!(points, m)?)?;
    m.add_function(wrap_pyfunction!(fwht, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
