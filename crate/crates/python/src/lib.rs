//! Python bindings. Reports are returned as dicts with the same field names
//! as their JSON form; heavy computations release the interpreter lock.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qpspec::lyapunov::DEFAULT_SCHEDULE;
use qpspec::{Complex64, Error};
use serde::Serialize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. }
        | Error::MalformedDecimal(_)
        | Error::PrecisionExhausted { .. }
        | Error::RationalFrequency { .. }
        | Error::PoleProximity { .. }
        | Error::RotationDomain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// An irrational frequency held as a continued fraction.
#[pyclass(name = "Frequency", module = "qpspec", frozen)]
struct PyFrequency(qpspec::Frequency);

#[pymethods]
impl PyFrequency {
    #[staticmethod]
    #[pyo3(signature = (depth = 40))]
    fn golden_mean(depth: usize) -> Self {
        PyFrequency(qpspec::Frequency::golden_mean(depth))
    }

    /// Parses a decimal literal and keeps every certified partial quotient.
    #[staticmethod]
    fn from_decimal(literal: &str) -> PyResult<Self> {
        qpspec::Frequency::from_decimal_auto(literal).map(PyFrequency).map_err(to_py_err)
    }

    #[staticmethod]
    fn from_quotients(quotients: Vec<u64>) -> PyResult<Self> {
        qpspec::Frequency::from_quotients(&quotients).map(PyFrequency).map_err(to_py_err)
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.value()
    }

    #[getter]
    fn quotients(&self) -> Vec<u64> {
        self.0.quotients().to_vec()
    }

    /// `(p_n, q_n)` pairs.
    fn convergents(&self) -> Vec<(u128, u128)> {
        self.0.convergents().iter().map(|c| (c.p, c.q)).collect()
    }

    fn dist_to_int(&self, k: i64) -> f64 {
        self.0.dist_to_int(k)
    }

    #[pyo3(signature = (kappa, tau, k_max = 100_000))]
    fn sdc_check(&self, py: Python<'_>, kappa: f64, tau: f64, k_max: u64) -> PyResult<Py<PyAny>> {
        let report = py.detach(|| qpspec::sdc_check(&self.0, kappa, tau, k_max)).map_err(to_py_err)?;
        to_dict(py, &report)
    }

    fn beta(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &qpspec::beta_exponent(&self.0).map_err(to_py_err)?)
    }

    #[pyo3(signature = (theta, gamma = 0.01, tau = 2.0, k_max = 1000))]
    fn theta_membership(&self, py: Python<'_>, theta: f64, gamma: f64, tau: f64, k_max: u64) -> PyResult<Py<PyAny>> {
        to_dict(py, &qpspec::theta_membership(theta, &self.0, gamma, tau, k_max).map_err(to_py_err)?)
    }

    fn __repr__(&self) -> String {
        format!("Frequency({}, {} quotients)", self.0.value(), self.0.quotients().len())
    }
}

/// `V(x) = 2λ cos 2πx + ε Σ (c_k cos 2πkx + s_k sin 2πkx)`.
#[pyclass(name = "Potential", module = "qpspec", frozen)]
struct PyPotential(qpspec::PotentialSpec);

#[pymethods]
impl PyPotential {
    /// `harmonics` holds `(k, cos, sin)` triples.
    #[new]
    #[pyo3(signature = (coupling, epsilon = 0.0, harmonics = Vec::new()))]
    fn new(coupling: f64, epsilon: f64, harmonics: Vec<(u32, f64, f64)>) -> PyResult<Self> {
        let v = harmonics.into_iter().map(|(k, cos, sin)| qpspec::Harmonic { k, cos, sin }).collect();
        let spec = qpspec::PotentialSpec { lambda: coupling, epsilon, v };
        spec.validate().map_err(to_py_err)?;
        Ok(PyPotential(spec))
    }

    #[staticmethod]
    fn amo(coupling: f64) -> Self {
        PyPotential(qpspec::PotentialSpec::amo(coupling))
    }

    #[staticmethod]
    fn free() -> Self {
        PyPotential(qpspec::PotentialSpec::free())
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.0.lambda
    }

    /// Interval guaranteed to contain the spectrum.
    fn containment(&self) -> (f64, f64) {
        self.0.containment()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    fn __repr__(&self) -> String {
        format!("Potential(coupling={}, epsilon={}, harmonics={})", self.0.lambda, self.0.epsilon, self.0.v.len())
    }
}

/// Integrated density of states sampled on an energy grid.
#[pyclass(name = "IdsTable", module = "qpspec", frozen)]
struct PyIdsTable(qpspec::IdsTable);

#[pymethods]
impl PyIdsTable {
    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.0.e_grid.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.n_values.clone()
    }

    fn __call__(&self, e: f64) -> f64 {
        self.0.value_at(e)
    }

    /// `∫ ln|E - z| dN(E)`.
    fn thouless(&self, z: Complex64) -> PyResult<f64> {
        qpspec::thouless(&self.0, z).map_err(to_py_err)
    }

    /// Borel transform `∫ dN(E) / (E - z)`.
    fn green(&self, z: Complex64) -> PyResult<Complex64> {
        qpspec::green_from_ids(&self.0, z).map(|g| g.value).map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.0.e_grid.len()
    }
}

/// Finite union of closed intervals approximating the spectrum.
#[pyclass(name = "SpectrumApprox", module = "qpspec", frozen)]
struct PySpectrum(qpspec::SpectrumApprox);

#[pymethods]
impl PySpectrum {
    #[new]
    #[pyo3(signature = (intervals, margin = 0.0))]
    fn new(intervals: Vec<(f64, f64)>, margin: f64) -> PyResult<Self> {
        qpspec::SpectrumApprox::from_intervals(intervals, margin, qpspec::SpectrumSource::EigenvalueUnion)
            .map(PySpectrum)
            .map_err(to_py_err)
    }

    #[getter]
    fn intervals(&self) -> Vec<(f64, f64)> {
        self.0.intervals.clone()
    }

    #[getter]
    fn margin(&self) -> f64 {
        self.0.margin
    }

    fn measure(&self) -> f64 {
        self.0.measure()
    }

    fn __contains__(&self, e: f64) -> bool {
        self.0.contains(e)
    }

    /// Minimum over `E ∈ S` of `|(E-σ, E+σ) ∩ S| / σ` for each σ.
    #[pyo3(signature = (sigmas, samples = 0))]
    fn homogeneity(&self, py: Python<'_>, sigmas: Vec<f64>, samples: usize) -> PyResult<Py<PyAny>> {
        to_dict(py, &qpspec::homogeneity_profile(&self.0, &sigmas, samples).map_err(to_py_err)?)
    }
}

#[pyfunction]
#[pyo3(signature = (pot, alpha, e, eps_imag = 0.0, n = 10_000, m = 1024))]
fn lyapunov(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    e: Complex64,
    eps_imag: f64,
    n: usize,
    m: usize,
) -> PyResult<f64> {
    py.detach(|| qpspec::lyapunov(&pot.0, &alpha.0, e, eps_imag, n, m)).map_err(to_py_err)
}

/// Complexified Lyapunov profile, quantized acceleration and health flags.
#[pyfunction]
#[pyo3(signature = (pot, alpha, e, schedule = None, n = 10_000, m = 1024))]
fn acceleration(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    e: f64,
    schedule: Option<Vec<f64>>,
    n: usize,
    m: usize,
) -> PyResult<Py<PyAny>> {
    let schedule = schedule.unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
    let profile = py.detach(|| qpspec::acceleration(&pot.0, &alpha.0, e, &schedule, n, m)).map_err(to_py_err)?;
    to_dict(py, &profile)
}

/// Sub/critical/supercritical label from `L(E)` and an integer acceleration.
#[pyfunction]
#[pyo3(signature = (l0, omega, tol = 0.01))]
fn classify_regime(l0: f64, omega: Option<i64>, tol: f64) -> PyResult<&'static str> {
    qpspec::classify_regime(l0, omega, tol).map(|r| r.as_str()).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (pot, alpha, e, n = 4000, m = 64))]
fn rotation_number(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    e: f64,
    n: usize,
    m: usize,
) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| qpspec::rotation_number(&pot.0, &alpha.0, e, n, m)).map_err(to_py_err)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (pot, alpha, x, n))]
fn truncated_eigenvalues(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    x: f64,
    n: usize,
) -> PyResult<Vec<f64>> {
    py.detach(|| qpspec::truncated_eigenvalues(&pot.0, &alpha.0, x, n)).map_err(to_py_err)
}

/// IDS by eigenvalue counting (`method="counting"`) or from the rotation
/// number (`method="rotation"`).
#[pyfunction]
#[pyo3(signature = (pot, alpha, energies, n = 2000, m = 64, method = "counting"))]
fn ids(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    energies: Vec<f64>,
    n: usize,
    m: usize,
    method: &str,
) -> PyResult<PyIdsTable> {
    let rotation = match method {
        "counting" => false,
        "rotation" => true,
        other => {
            return Err(PyValueError::new_err(format!("method: unknown {other:?}, expected counting or rotation")))
        }
    };
    let table = py.detach(|| {
        if rotation {
            qpspec::ids_rotation(&pot.0, &alpha.0, &energies, n, m)
        } else {
            qpspec::ids_counting(&pot.0, &alpha.0, &energies, n, m)
        }
    });
    table.map(PyIdsTable).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (pot, alpha, n = 2000, m = 16, margin = 0.01))]
fn spectrum_approx(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    n: usize,
    m: usize,
    margin: f64,
) -> PyResult<PySpectrum> {
    py.detach(|| qpspec::spectrum_approx(&pot.0, &alpha.0, n, m, margin)).map(PySpectrum).map_err(to_py_err)
}

/// Phase-averaged `G(0,0,z)` by resolvent continued fractions.
#[pyfunction]
#[pyo3(signature = (pot, alpha, z, window = None, m = 256))]
fn green(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    z: Complex64,
    window: Option<usize>,
    m: usize,
) -> PyResult<Complex64> {
    py.detach(|| qpspec::green_avg(&pot.0, &alpha.0, z, window, m)).map(|g| g.value).map_err(to_py_err)
}

/// `Re G(E + i0)` extrapolated along the normal.
#[pyfunction]
#[pyo3(signature = (pot, alpha, e, schedule = None, m = 64))]
fn boundary_re_green(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    e: f64,
    schedule: Option<Vec<f64>>,
    m: usize,
) -> PyResult<Py<PyAny>> {
    let b =
        py.detach(|| qpspec::normal_boundary_re_g(&pot.0, &alpha.0, e, schedule.as_deref(), m)).map_err(to_py_err)?;
    to_dict(py, &b)
}

/// `|∂L(E+iε)/∂E + Re G(E+iε)|`.
#[pyfunction]
#[pyo3(signature = (pot, alpha, e, eps = 0.1, de = None, n = 3000, m = 256))]
#[allow(clippy::too_many_arguments)]
fn derivative_identity_residual(
    py: Python<'_>,
    pot: &PyPotential,
    alpha: &PyFrequency,
    e: f64,
    eps: f64,
    de: Option<f64>,
    n: usize,
    m: usize,
) -> PyResult<f64> {
    let de = de.unwrap_or(eps / 10.0);
    py.detach(|| qpspec::derivative_identity_residual(&pot.0, &alpha.0, e, eps, de, n, m)).map_err(to_py_err)
}

#[pymodule]
#[pyo3(name = "qpspec")]
pub fn python_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFrequency>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyIdsTable>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(acceleration, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_number, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(ids, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum_approx, m)?)?;
    m.add_function(wrap_pyfunction!(green, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_re_green, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_identity_residual, m)?)?;
    Ok(())
}
