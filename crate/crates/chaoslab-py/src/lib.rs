//! Python bindings for chaoslab.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use chaoslab::base::density::Density;
use chaoslab::base::rng::seeded;
use chaoslab::base::types::{Configuration, DiscreteMeasure};
use chaoslab::chaos::{self, Coupling, ProductSampler, SigmaSampler};
use chaoslab::cli::config::{DensityChoice, ExperimentConfig, PartialConfig};
use chaoslab::cli::experiments;
use chaoslab::kacsphere::{self, PartitionTable};
use chaoslab::mixtures::{self, Mixture};
use chaoslab::sobolev::{self, HsKernel};
use chaoslab::{clt, information, transport, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::UnknownExperiment(_) => PyKeyError::new_err(e.to_string()),
        Error::Io(_) | Error::Solver(_) | Error::Cache(_) | Error::QuadratureNonConvergence { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A one-dimensional probability density.
#[pyclass(name = "Density", module = "pychaoslab", frozen, from_py_object)]
#[derive(Clone)]
struct PyDensity(Density);

#[pymethods]
impl PyDensity {
    #[staticmethod]
    #[pyo3(signature = (mean = 0.0, sd = 1.0))]
    fn gaussian(mean: f64, sd: f64) -> PyResult<Self> {
        Density::gaussian(mean, sd).map(Self).map_err(py_err)
    }

    /// Uniform density with mean 0 and variance 1.
    #[staticmethod]
    fn uniform() -> Self {
        Self(Density::uniform_standard())
    }

    #[staticmethod]
    fn bimodal() -> Self {
        Self(Density::bimodal())
    }

    /// `name` is gaussian, uniform or bimodal.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        name.parse::<DensityChoice>().and_then(|c| c.analytic()).map(Self).map_err(py_err)
    }

    fn shifted(&self, m: f64) -> Self {
        Self(self.0.shifted(m))
    }

    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x)
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn variance(&self) -> f64 {
        self.0.variance()
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.0.sample_n(n, &mut seeded(seed))
    }

    fn entropy(&self) -> PyResult<f64> {
        information::entropy(&self.0).map(|v| v.value).map_err(py_err)
    }

    fn fisher(&self) -> PyResult<f64> {
        information::fisher(&self.0).map(|v| v.value).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Density({})", self.0.id())
    }
}

/// Tabulated partition functions of a density for the conditioned product on the Kac sphere.
#[pyclass(name = "PartitionTable", module = "pychaoslab", frozen)]
struct PyPartitionTable(PartitionTable);

#[pymethods]
impl PyPartitionTable {
    #[new]
    fn new(density: &PyDensity, max_n: usize) -> PyResult<Self> {
        PartitionTable::build(&density.0, max_n).map(Self).map_err(py_err)
    }

    /// Loads the table from the cache directory, building and storing it on a miss.
    #[staticmethod]
    fn cached(density: &PyDensity, max_n: usize) -> PyResult<Self> {
        kacsphere::cache::load_or_build(
            &density.0,
            max_n,
            kacsphere::table::DEFAULT_DU,
            &kacsphere::cache::cache_dir(),
        )
        .map(Self)
        .map_err(py_err)
    }

    #[getter]
    fn max_n(&self) -> usize {
        self.0.max_n()
    }

    fn theta(&self, n: usize, v: Vec<f64>) -> PyResult<f64> {
        kacsphere::theta(n, &v, &self.0).map_err(py_err)
    }

    fn marginal_pdf(&self, n: usize, v: f64) -> PyResult<f64> {
        kacsphere::conditioned_marginal_pdf(n, v, &self.0).map_err(py_err)
    }

    fn marginal_l1(&self, n: usize) -> PyResult<f64> {
        kacsphere::conditioned_marginal_l1(n, &self.0).map_err(py_err)
    }

    fn entropy_gap(&self, n: usize) -> PyResult<f64> {
        kacsphere::entropy_chaos_gap(n, &self.0).map(|g| g.gap).map_err(py_err)
    }
}

/// A finite mixture of product laws.
#[pyclass(name = "Mixture", module = "pychaoslab", frozen)]
struct PyMixture(Mixture);

#[pymethods]
impl PyMixture {
    #[new]
    fn new(atoms: Vec<(f64, PyDensity)>) -> PyResult<Self> {
        Mixture::new(atoms.into_iter().map(|(w, d)| (w, d.0)).collect()).map(Self).map_err(py_err)
    }

    fn level3_entropy(&self) -> PyResult<f64> {
        mixtures::level3_entropy(&self.0).map_err(py_err)
    }

    fn level3_fisher(&self) -> PyResult<f64> {
        mixtures::level3_fisher(&self.0).map_err(py_err)
    }

    fn combine(&self, theta: f64, other: &PyMixture) -> PyResult<Self> {
        self.0.combine(theta, &other.0).map(Self).map_err(py_err)
    }
}

fn line_measure(points: Vec<f64>, weights: Option<Vec<f64>>) -> PyResult<DiscreteMeasure> {
    match weights {
        Some(w) => DiscreteMeasure::normalized(1, 1, points, w),
        None => DiscreteMeasure::uniform_line(&points),
    }
    .map_err(py_err)
}

/// Truncated W₁ between two weighted point clouds on ℝ.
#[pyfunction]
#[pyo3(signature = (x, y, wx = None, wy = None, truncation = 1.0))]
fn w1_line(x: Vec<f64>, y: Vec<f64>, wx: Option<Vec<f64>>, wy: Option<Vec<f64>>, truncation: f64) -> PyResult<f64> {
    transport::w1_line(&line_measure(x, wx)?, &line_measure(y, wy)?, truncation).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, y, wx = None, wy = None))]
fn w2_line(x: Vec<f64>, y: Vec<f64>, wx: Option<Vec<f64>>, wy: Option<Vec<f64>>) -> PyResult<f64> {
    transport::w2_line(&line_measure(x, wx)?, &line_measure(y, wy)?).map_err(py_err)
}

/// Optimal-matching distance between two configurations on ℝ; returns (cost, permutation).
#[pyfunction]
fn w1_config(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, Vec<usize>)> {
    let cx = Configuration::from_line(x).map_err(py_err)?;
    let cy = Configuration::from_line(y).map_err(py_err)?;
    transport::w1_config(&cx, &cy).map_err(py_err)
}

/// Squared H^{-s} distance between two empirical measures on ℝ.
#[pyfunction]
#[pyo3(signature = (x, y, s = 1.0))]
fn hs_dist_sq(x: Vec<f64>, y: Vec<f64>, s: f64) -> PyResult<f64> {
    let k = HsKernel::new(s, 1).map_err(py_err)?;
    sobolev::hs_dist_sq(&line_measure(x, None)?, &line_measure(y, None)?, &k).map_err(py_err)
}

#[pyfunction]
fn sigma_marginal_l1(n: usize) -> PyResult<f64> {
    kacsphere::sigma_marginal_l1_to_gaussian(n).map_err(py_err)
}

/// Sup-norm CLT errors of the standardized density at each N.
#[pyfunction]
fn clt_sup_errors(density: &PyDensity, ns: Vec<usize>) -> PyResult<Vec<f64>> {
    let base = clt::standard_base(&density.0).map_err(py_err)?;
    clt::clt_run(&base, &ns).map(|r| r.sup_errors).map_err(py_err)
}

/// Ω_∞ of f^{⊗N} (or σ^N when `sphere` is true) against f; returns (value, stderr).
#[pyfunction]
#[pyo3(signature = (density, n, mc_reps = 200, reference_size = 4096, seed = 424242, sphere = false))]
fn omega_inf(density: &PyDensity, n: usize, mc_reps: usize, reference_size: usize, seed: u64, sphere: bool) -> PyResult<(f64, f64)> {
    let mut rng = seeded(seed);
    let e = if sphere {
        chaos::omega_inf(&SigmaSampler { n }, &density.0, mc_reps, reference_size, &mut rng)
    } else {
        chaos::omega_inf(&ProductSampler { f: density.0.clone(), n }, &density.0, mc_reps, reference_size, &mut rng)
    }
    .map_err(py_err)?;
    Ok((e.value, e.stderr))
}

/// Synchronous-coupling upper bound on W₁(σ^N, γ^{⊗N}); returns (value, stderr).
#[pyfunction]
#[pyo3(signature = (n, mc_reps = 200, seed = 424242))]
fn omega_n_sphere(n: usize, mc_reps: usize, seed: u64) -> PyResult<(f64, f64)> {
    let e = chaos::omega_n(&SigmaSampler { n }, &Density::standard_gaussian(), mc_reps, Coupling::Synchronous, &mut seeded(seed))
        .map_err(py_err)?;
    Ok((e.value, e.stderr))
}

/// `(name, anchor, criterion)` for every experiment.
#[pyfunction]
fn list_experiments() -> Vec<(&'static str, &'static str, usize)> {
    experiments::EXPERIMENTS.iter().map(|e| (e.name, e.anchor, e.criterion)).collect()
}

/// Runs an experiment with optional TOML overrides and returns the JSON summary.
#[pyfunction]
#[pyo3(signature = (name, overrides = None))]
fn run_experiment(py: Python<'_>, name: &str, overrides: Option<&str>) -> PyResult<String> {
    let exp = experiments::find(name).map_err(py_err)?;
    let partial: PartialConfig = match overrides {
        Some(t) => PartialConfig::from_toml_str(t).map_err(py_err)?,
        None => PartialConfig::default(),
    };
    let cfg = ExperimentConfig::resolve(partial, &(exp.defaults)()).map_err(py_err)?;
    let (summary, _) = py.detach(|| chaoslab::cli::run_experiment(exp, &cfg)).map_err(py_err)?;
    Ok(summary.to_json())
}

#[pymodule]
fn pychaoslab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_class::<PyPartitionTable>()?;
    m.add_class::<PyMixture>()?;
    m.add_function(wrap_pyfunction!(w1_line, m)?)?;
    m.add_function(wrap_pyfunction!(w2_line, m)?)?;
    m.add_function(wrap_pyfunction!(w1_config, m)?)?;
    m.add_function(wrap_pyfunction!(hs_dist_sq, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_marginal_l1, m)?)?;
    m.add_function(wrap_pyfunction!(clt_sup_errors, m)?)?;
    m.add_function(wrap_pyfunction!(omega_inf, m)?)?;
    m.add_function(wrap_pyfunction!(omega_n_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
