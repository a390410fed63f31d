//! Python bindings for the rmdl core library.
//!
//! Build with `cargo build -p rmdl-py --release`, then rename the produced
//! `librmdl_py.so` to `rmdl_py.so` somewhere on `sys.path`
//! (`python/smoke_test.py` automates this).

use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rmdl_core::convolution::{self, Method};
use rmdl_core::dirichlet;
use rmdl_core::ensemble::{self, PathMode, SeedSpec};
use rmdl_core::goldbach;
use rmdl_core::mangoldt;

fn to_py_err(e: rmdl_core::Error) -> PyErr {
    match e {
        rmdl_core::Error::OutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        rmdl_core::Error::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_method(method: &str) -> PyResult<Method> {
    match method {
        "direct" => Ok(Method::Direct),
        "fft" => Ok(Method::Fft),
        other => Err(PyValueError::new_err(format!(
            "method must be 'direct' or 'fft', got '{other}'"
        ))),
    }
}

fn parse_mode(mode: &str) -> PyResult<PathMode> {
    match mode {
        "exact" | "exact_enumeration" => Ok(PathMode::ExactEnumeration),
        "surrogate" | "gaussian_surrogate" => Ok(PathMode::GaussianSurrogate),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'exact' or 'surrogate', got '{other}'"
        ))),
    }
}

/// Sieve-backed table of Λ(n) values and primality flags up to `n_max`.
#[pyclass(frozen)]
struct MangoldtTable {
    inner: mangoldt::MangoldtTable,
}

#[pymethods]
impl MangoldtTable {
    #[new]
    fn new(n_max: u64) -> PyResult<Self> {
        Ok(Self {
            inner: mangoldt::MangoldtTable::build(n_max).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn n_max(&self) -> u64 {
        self.inner.n_max()
    }

    /// Λ(n): log p if n = p^k, else 0.
    fn mangoldt(&self, n: u64) -> PyResult<f64> {
        self.inner.mangoldt(n).map_err(to_py_err)
    }

    fn is_prime(&self, n: u64) -> PyResult<bool> {
        self.inner.is_prime(n).map_err(to_py_err)
    }

    /// Chebyshev ψ(x) = Σ_{n ≤ x} Λ(n).
    fn chebyshev_psi(&self, x: u64) -> PyResult<f64> {
        self.inner.chebyshev_psi(x).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("MangoldtTable(n_max={})", self.inner.n_max())
    }
}

/// Number of r-part compositions of n, L(n) = C(n-1, r-1).
/// Returns (count, saturated).
#[pyfunction]
fn composition_count(n: u64, r: u32) -> (u64, bool) {
    let c = convolution::composition_count(n, r);
    (c.count, c.saturated)
}

/// Deterministic coefficient arrays G_r(n) and W_r(n) for n ≤ n_max.
/// Returns a dict with keys g, w, method, max_abs_error_bound.
#[pyfunction]
#[pyo3(signature = (table, r, n_max, method = "fft"))]
fn goldbach_coefficients<'py>(
    py: Python<'py>,
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let c = convolution::goldbach_coefficients(&table.inner, r, n_max, parse_method(method)?)
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("r", c.r)?;
    d.set_item("n_max", c.n_max)?;
    d.set_item("g", c.g)?;
    d.set_item("w", c.w)?;
    d.set_item("method", c.method.as_str())?;
    d.set_item("max_abs_error_bound", c.max_abs_error_bound)?;
    Ok(d)
}

/// One draw of the randomized coefficient Y_r(n, ω).
#[pyfunction]
#[pyo3(signature = (table, r, n, master_seed, replicate = 0))]
fn sample_coefficient(
    table: &MangoldtTable,
    r: u32,
    n: u64,
    master_seed: u64,
    replicate: u64,
) -> PyResult<f64> {
    ensemble::sample_coefficient(&table.inner, r, n, SeedSpec::new(master_seed, replicate))
        .map_err(to_py_err)
}

/// Signed path {Y_r(n, ω)}_{n ≤ n_max} as a list indexed by n (index 0 unused).
#[pyfunction]
#[pyo3(signature = (table, r, n_max, master_seed, replicate = 0, mode = "exact"))]
fn sample_path(
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    master_seed: u64,
    replicate: u64,
    mode: &str,
) -> PyResult<Vec<f64>> {
    let seed = SeedSpec::new(master_seed, replicate);
    let path = match parse_mode(mode)? {
        PathMode::ExactEnumeration => {
            ensemble::sample_path_exact(&table.inner, r, n_max, seed).map_err(to_py_err)?
        }
        PathMode::GaussianSurrogate => {
            let c = convolution::goldbach_coefficients(&table.inner, r, n_max, Method::Fft)
                .map_err(to_py_err)?;
            ensemble::sample_path_surrogate(&c, seed)
        }
    };
    Ok(path.y)
}

/// Exact pmf of Y_r(n, ·) over all sign assignments.
/// Returns a dict with keys support, counts, denominator_log2.
#[pyfunction]
fn exact_distribution<'py>(
    py: Python<'py>,
    table: &MangoldtTable,
    r: u32,
    n: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let dist = ensemble::exact_distribution(&table.inner, r, n).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("n", dist.n)?;
    d.set_item("r", dist.r)?;
    d.set_item("support", dist.support)?;
    d.set_item("counts", dist.counts)?;
    d.set_item("denominator_log2", dist.denominator_log2)?;
    Ok(d)
}

/// True iff the exact distribution of Y_r(n, ·) is symmetric about 0.
#[pyfunction]
fn distribution_is_symmetric(table: &MangoldtTable, r: u32, n: u64) -> PyResult<bool> {
    let dist = ensemble::exact_distribution(&table.inner, r, n).map_err(to_py_err)?;
    Ok(ensemble::symmetry_check(&dist))
}

/// Partial sums Σ_{n ≤ N} W_r(n) / n^{2σ} at the given checkpoints
/// (geometric defaults when omitted). Returns (checkpoints, sums).
#[pyfunction]
#[pyo3(signature = (table, r, n_max, sigma, checkpoints = None))]
fn variance_series(
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    sigma: f64,
    checkpoints: Option<Vec<u64>>,
) -> PyResult<(Vec<u64>, Vec<f64>)> {
    let c = convolution::goldbach_coefficients(&table.inner, r, n_max, Method::Fft)
        .map_err(to_py_err)?;
    let cps = checkpoints.unwrap_or_else(|| dirichlet::default_checkpoints(n_max));
    let sums = dirichlet::variance_series(&c, sigma, &cps).map_err(to_py_err)?;
    Ok((cps, sums))
}

/// Ensemble-median growth exponent of |Σ_{n≤N} Y_r(n, ω)| (abscissa proxy).
/// Returns a dict with keys sigma_hat, stderr, ensemble, n_max, mode.
#[pyfunction]
#[pyo3(signature = (table, r, n_max, ensemble = 100, master_seed = 0, mode = "exact"))]
fn estimate_abscissa<'py>(
    py: Python<'py>,
    table: &MangoldtTable,
    r: u32,
    n_max: u64,
    ensemble: u64,
    master_seed: u64,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let est = dirichlet::estimate_abscissa(
        &table.inner,
        r,
        n_max,
        ensemble,
        SeedSpec::new(master_seed, 0),
        parse_mode(mode)?,
    )
    .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("r", est.r)?;
    d.set_item("sigma_hat", est.sigma_hat)?;
    d.set_item("stderr", est.stderr)?;
    d.set_item("ensemble", est.ensemble_size)?;
    d.set_item("n_max", est.n_max)?;
    d.set_item("mode", est.path_mode.as_str())?;
    Ok(d)
}

/// Hardy–Littlewood singular series 𝔖(n) for even n (0 for odd n).
#[pyfunction]
#[pyo3(signature = (n, prime_cutoff = 1_000_000))]
fn singular_series(n: u64, prime_cutoff: u64) -> PyResult<f64> {
    goldbach::singular_series(n, prime_cutoff).map_err(to_py_err)
}

/// Number of ordered prime pairs (p, q) with p + q = n.
#[pyfunction]
fn prime_pair_count(table: &MangoldtTable, n: u64) -> PyResult<u64> {
    goldbach::prime_pair_count(&table.inner, n).map_err(to_py_err)
}

#[pymodule]
fn rmdl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MangoldtTable>()?;
    m.add_function(wrap_pyfunction!(composition_count, m)?)?;
    m.add_function(wrap_pyfunction!(goldbach_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(sample_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(sample_path, m)?)?;
    m.add_function(wrap_pyfunction!(exact_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(distribution_is_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(variance_series, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_abscissa, m)?)?;
    m.add_function(wrap_pyfunction!(singular_series, m)?)?;
    m.add_function(wrap_pyfunction!(prime_pair_count, m)?)?;
    Ok(())
}
