//! Python bindings: `import pyspikeslab`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spikeslab::distributions::{oracle_threshold as oracle_threshold_rs, NoiseModel, SlabSpec};
use spikeslab::eb::{mmle_fit, MarginalLikelihood};
use spikeslab::experiment::{self, ExperimentConfig, ExperimentKind};
use spikeslab::sas::{self, SasPrior as CoreSasPrior, SubsetSelectionPrior};
use spikeslab::testing::{self, Procedure, PriorSource, SignalConfig};
use spikeslab::vb;
use spikeslab::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn slab_of(text: &str) -> PyResult<SlabSpec> {
    SlabSpec::parse(text).map_err(to_py)
}

fn noise_of(text: &str) -> PyResult<NoiseModel> {
    experiment::config::parse_noise(text).map_err(PyValueError::new_err)
}

/// Product spike-and-slab prior `(1-α)δ₀ + α·slab`.
#[pyclass(name = "SasPrior", frozen)]
struct PySasPrior {
    inner: CoreSasPrior,
}

#[pymethods]
impl PySasPrior {
    #[new]
    #[pyo3(signature = (alpha, slab = "laplace:1"))]
    fn new(alpha: f64, slab: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreSasPrior::new(alpha, slab_of(slab)?).map_err(to_py)? })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn slab(&self) -> String {
        self.inner.slab.to_string()
    }

    /// Posterior probability that the coordinate is nonzero.
    fn weight(&self, x: f64) -> PyResult<f64> {
        sas::posterior_weight(x, &self.inner).map_err(to_py)
    }

    fn l_value(&self, x: f64) -> PyResult<f64> {
        sas::l_value(x, &self.inner).map_err(to_py)
    }

    /// `(E[θ], E[(θ - about)²])` under the posterior.
    #[pyo3(signature = (x, about = 0.0))]
    fn moments(&self, x: f64, about: f64) -> PyResult<(f64, f64)> {
        sas::coordinate_moments(x, &self.inner, about).map_err(to_py)
    }

    fn median(&self, x: f64) -> PyResult<f64> {
        sas::posterior_median(x, &self.inner).map_err(to_py)
    }

    fn median_threshold(&self) -> PyResult<f64> {
        sas::median_threshold(&self.inner).map_err(to_py)
    }

    fn q_value(&self, x: f64) -> PyResult<f64> {
        testing::q_value(x, &self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("SasPrior(alpha={}, slab='{}')", self.inner.alpha, self.inner.slab)
    }
}

/// Result of a mean-field variational fit.
#[pyclass(name = "VbFit", frozen, get_all)]
struct PyVbFit {
    gamma: Vec<f64>,
    mu: Vec<f64>,
    sd: Vec<f64>,
    mean: Vec<f64>,
    elbo_trace: Vec<f64>,
}

#[pyfunction]
#[pyo3(signature = (n, s, noise = "gaussian"))]
fn oracle_threshold(n: usize, s: usize, noise: &str) -> PyResult<f64> {
    oracle_threshold_rs(n, s, &noise_of(noise)?).map_err(to_py)
}

/// `s⁻¹ Σ F̄(b_j)`.
#[pyfunction]
#[pyo3(signature = (b, noise = "gaussian"))]
fn lambda_boundary(b: Vec<f64>, noise: &str) -> PyResult<f64> {
    testing::lambda_boundary(&b, &noise_of(noise)?).map_err(to_py)
}

/// ℓ-values under a product prior with weight fixed (`alpha` given) or
/// estimated by marginal maximum likelihood (`alpha=None`).
#[pyfunction]
#[pyo3(signature = (x, alpha = None, slab = "laplace:1"))]
fn l_values(x: Vec<f64>, alpha: Option<f64>, slab: &str) -> PyResult<Vec<f64>> {
    let source = match alpha {
        Some(alpha) => PriorSource::Fixed { alpha },
        None => PriorSource::Mmle { interval: None },
    };
    testing::l_values(&x, &source, slab_of(slab)?).map_err(to_py)
}

/// Exact ℓ-values under a subset-selection prior with the given
/// (unnormalized) log dimension weights `w_0..w_n`.
#[pyfunction]
#[pyo3(signature = (x, dim_log_weights, slab = "laplace:1", k_max = None))]
fn subset_l_values(x: Vec<f64>, dim_log_weights: Vec<f64>, slab: &str, k_max: Option<usize>) -> PyResult<Vec<f64>> {
    let prior = SubsetSelectionPrior::new(dim_log_weights, slab_of(slab)?).map_err(to_py)?;
    let k = k_max.unwrap_or_else(|| prior.default_k_max());
    sas::subset_selection_l_values(&x, &prior, k).map_err(to_py)
}

/// Marginal maximum likelihood of the weight; returns a dict.
#[pyfunction]
#[pyo3(signature = (x, slab = "laplace:1", interval = None))]
fn mmle<'py>(py: Python<'py>, x: Vec<f64>, slab: &str, interval: Option<(f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let ml = MarginalLikelihood::new(&x, slab_of(slab)?).map_err(to_py)?;
    let fit = mmle_fit(&ml, interval).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("alpha", fit.alpha)?;
    d.set_item("log_likelihood", fit.log_likelihood)?;
    d.set_item("boundary", fit.boundary.map(|b| format!("{b:?}").to_lowercase()))?;
    d.set_item("iterations", fit.iterations)?;
    Ok(d)
}

/// Benjamini–Hochberg rejections (indices).
#[pyfunction]
#[pyo3(signature = (x, level, noise = "gaussian"))]
fn bh(x: Vec<f64>, level: f64, noise: &str) -> PyResult<Vec<usize>> {
    Ok(testing::bh_procedure(&x, level, &noise_of(noise)?).map_err(to_py)?.rejected())
}

/// Monte Carlo FDR/FNR of the oracle threshold (`procedure="oracle"`) or
/// the EB ℓ-value procedure (`procedure="mmle"`) at constant offset `b`.
#[pyfunction]
#[pyo3(signature = (n, s, b, procedure = "oracle", replicates = 100, seed = 0, t = 0.3))]
#[allow(clippy::too_many_arguments)]
fn risk<'py>(
    py: Python<'py>,
    n: usize,
    s: usize,
    b: f64,
    procedure: &str,
    replicates: usize,
    seed: u64,
    t: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SignalConfig::constant(n, s, b, NoiseModel::Gaussian).map_err(to_py)?;
    let proc = match procedure {
        "oracle" => Procedure::Oracle,
        "mmle" => Procedure::LValue {
            source: PriorSource::Mmle { interval: None },
            slab: SlabSpec::Laplace { lambda: 1.0 },
            t,
        },
        other => return Err(PyValueError::new_err(format!("unknown procedure '{other}'"))),
    };
    let r = py.detach(|| testing::risk_mc(&cfg, &proc, replicates, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("fdr", r.fdr.mean)?;
    d.set_item("fnr", r.fnr.mean)?;
    d.set_item("total", r.total.mean)?;
    d.set_item("total_se", r.total.mc_std_error)?;
    Ok(d)
}

/// CAVI fit of `y = Xθ + ε` with a `Beta(1, p^u)`-binomial dimension prior
/// and Laplace(`lam`) slab. `x` is a list of rows.
#[pyfunction]
#[pyo3(signature = (x, y, u = 2.0, lam = 1.0, max_sweeps = 500, tol = 1e-8))]
fn vb_fit(py: Python<'_>, x: Vec<Vec<f64>>, y: Vec<f64>, u: f64, lam: f64, max_sweeps: usize, tol: f64) -> PyResult<PyVbFit> {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err("rows of x must have equal length"));
    }
    let columns: Vec<Vec<f64>> = (0..p).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let design = vb::Design::from_columns(n, columns).map_err(to_py)?;
    let instance = vb::RegressionInstance::new(design, y).map_err(to_py)?;
    let prior = vb::RegressionPrior::beta_binomial(p, u, SlabSpec::laplace(lam).map_err(to_py)?).map_err(to_py)?;
    let state = py
        .detach(|| vb::cavi_fit(&instance, &prior, &vb::InitPolicy::Screening, max_sweeps, tol))
        .map_err(to_py)?;
    let mean = state.mean();
    Ok(PyVbFit { gamma: state.gamma, mu: state.mu, sd: state.sd, mean, elbo_trace: state.elbo_trace })
}

/// Run an experiment from `key -> value` settings; returns `(csv, json)`.
#[pyfunction]
#[pyo3(signature = (kind, settings = None))]
fn run_experiment(py: Python<'_>, kind: &str, settings: Option<&Bound<'_, PyDict>>) -> PyResult<(String, String)> {
    let kind: ExperimentKind = kind.parse().map_err(to_py)?;
    let mut cfg = ExperimentConfig::new(kind);
    if let Some(d) = settings {
        for (k, v) in d.iter() {
            cfg.set(&k.str()?.to_cow()?, v.str()?.to_cow()?.into_owned());
        }
    }
    let out = py.detach(|| experiment::run(&cfg)).map_err(to_py)?;
    Ok((out.table.to_csv().map_err(to_py)?, experiment::summary_json(&cfg, &out)))
}

#[pymodule]
fn pyspikeslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySasPrior>()?;
    m.add_class::<PyVbFit>()?;
    m.add_function(wrap_pyfunction!(oracle_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(l_values, m)?)?;
    m.add_function(wrap_pyfunction!(subset_l_values, m)?)?;
    m.add_function(wrap_pyfunction!(mmle, m)?)?;
    m.add_function(wrap_pyfunction!(bh, m)?)?;
    m.add_function(wrap_pyfunction!(risk, m)?)?;
    m.add_function(wrap_pyfunction!(vb_fit, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
