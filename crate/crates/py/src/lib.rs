//! Python bindings: the model types, ensemble constructors, likelihood
//! ratios, chi-square formulas, thresholds, and the risk simulator.
//!
//! Report-like results cross the boundary as plain dicts (via their JSON
//! form) so Python callers get pythonic objects without extra classes.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use mrfcd_core::ensemble as core_ensemble;
use mrfcd_core::ising as core_ising;
use mrfcd_core::lecam as core_lecam;
use mrfcd_core::likelihood as core_lr;
use mrfcd_core::risk as core_risk;
use mrfcd_core::verify as core_verify;

fn err(e: mrfcd_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => (*b).into_pyobject(py)?.to_owned().into_any().unbind(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        serde_json::Value::String(s) => s.as_str().into_pyobject(py)?.into_any().unbind(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn to_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Zero-field Ising model on 1-based nodes.
#[pyclass(name = "IsingModel")]
#[derive(Clone)]
struct PyIsingModel {
    inner: core_ising::IsingModel,
}

#[pymethods]
impl PyIsingModel {
    #[new]
    #[pyo3(signature = (p, edges = None))]
    fn new(p: usize, edges: Option<Vec<(usize, usize, f64)>>) -> PyResult<Self> {
        let inner = match edges {
            Some(e) => core_ising::IsingModel::with_edges(p, &e).map_err(err)?,
            None => core_ising::IsingModel::new(p).map_err(err)?,
        };
        Ok(PyIsingModel { inner })
    }

    #[staticmethod]
    fn complete(p: usize, weight: f64) -> PyResult<Self> {
        Ok(PyIsingModel {
            inner: core_ising::IsingModel::complete(p, weight).map_err(err)?,
        })
    }

    #[staticmethod]
    fn single_edge(p: usize, i: usize, j: usize, weight: f64) -> PyResult<Self> {
        Ok(PyIsingModel {
            inner: core_ising::IsingModel::single_edge(p, i, j, weight).map_err(err)?,
        })
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.inner.weight(i, j)
    }

    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn log_partition(&self) -> PyResult<f64> {
        self.inner.log_partition().map_err(err)
    }

    fn log_prob(&self, x: Vec<i8>) -> PyResult<f64> {
        let config = mrfcd_core::SpinConfig::new(x).map_err(err)?;
        self.inner.log_prob(&config).map_err(err)
    }

    fn class_membership(&self, p: usize, d: usize, alpha: f64, beta: f64) -> PyResult<bool> {
        self.inner.class_membership(p, d, alpha, beta).map_err(err)
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<PySampleSet> {
        Ok(PySampleSet {
            inner: self.inner.sample(n, seed).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        self.inner.model_id()
    }
}

/// Zero-mean Gaussian MRF given by its precision matrix.
#[pyclass(name = "GaussianModel")]
#[derive(Clone)]
struct PyGaussianModel {
    inner: mrfcd_core::GaussianModel,
}

#[pymethods]
impl PyGaussianModel {
    #[new]
    fn new(precision: Vec<Vec<f64>>) -> PyResult<Self> {
        let p = precision.len();
        let flat: Vec<f64> = precision.into_iter().flatten().collect();
        Ok(PyGaussianModel {
            inner: mrfcd_core::GaussianModel::from_row_major(p, &flat).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(p: usize) -> PyResult<Self> {
        Ok(PyGaussianModel {
            inner: mrfcd_core::GaussianModel::identity(p).map_err(err)?,
        })
    }

    #[staticmethod]
    fn single_edge(p: usize, i: usize, j: usize, lam: f64) -> PyResult<Self> {
        Ok(PyGaussianModel {
            inner: mrfcd_core::GaussianModel::single_edge(p, i, j, lam).map_err(err)?,
        })
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    fn log_density(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.log_density(&x).map_err(err)
    }

    fn gamma_of(&self) -> Option<f64> {
        self.inner.gamma_of()
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<PySampleSet> {
        Ok(PySampleSet {
            inner: self.inner.sample(n, seed).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        self.inner.model_id()
    }
}

/// An n x p observation matrix, spin- or real-valued.
#[pyclass(name = "SampleSet")]
#[derive(Clone)]
struct PySampleSet {
    inner: mrfcd_core::SampleSet,
}

#[pymethods]
impl PySampleSet {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn is_spin(&self) -> bool {
        self.inner.is_spin()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.provenance().seed
    }

    #[getter]
    fn model_id(&self) -> String {
        self.inner.provenance().model_id.clone()
    }

    fn rows(&self, py: Python<'_>) -> PyResult<PyObject> {
        let list = PyList::empty(py);
        if self.inner.is_spin() {
            for row in self.inner.spin_rows().map_err(err)? {
                list.append(row.to_vec())?;
            }
        } else {
            for row in self.inner.real_rows().map_err(err)? {
                list.append(row.to_vec())?;
            }
        }
        Ok(list.unbind().into())
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

/// A null model plus its family of structural alternatives.
#[pyclass(name = "ChangeEnsemble")]
#[derive(Clone)]
struct PyChangeEnsemble {
    inner: core_ensemble::ChangeEnsemble,
}

#[pymethods]
impl PyChangeEnsemble {
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.params.lambda
    }

    #[getter]
    fn d(&self) -> Option<usize> {
        self.inner.params.d
    }

    #[getter]
    fn num_alternatives(&self) -> usize {
        self.inner.alternatives().len()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        self.inner.describe()
    }
}

#[pyfunction]
fn ising_single_edge_ensemble(p: usize, lam: f64) -> PyResult<PyChangeEnsemble> {
    Ok(PyChangeEnsemble {
        inner: core_ensemble::ising_single_edge_ensemble(p, lam).map_err(err)?,
    })
}

#[pyfunction]
fn ising_clique_ensemble(p: usize, d: usize, lam: f64) -> PyResult<PyChangeEnsemble> {
    Ok(PyChangeEnsemble {
        inner: core_ensemble::ising_clique_ensemble(p, d, lam).map_err(err)?,
    })
}

#[pyfunction]
fn gaussian_single_edge_ensemble(p: usize, lam: f64) -> PyResult<PyChangeEnsemble> {
    Ok(PyChangeEnsemble {
        inner: core_ensemble::gaussian_single_edge_ensemble(p, lam).map_err(err)?,
    })
}

#[pyfunction]
fn verify_structural_difference(e: &PyChangeEnsemble) -> bool {
    core_ensemble::verify_structural_difference(&e.inner)
}

#[pyfunction]
fn clique_log_partition(d: usize, lam: f64) -> PyResult<f64> {
    core_ising::clique_log_partition(d, lam).map_err(err)
}

#[pyfunction]
fn clipped_clique_log_partition(d: usize, lam: f64) -> PyResult<f64> {
    core_ising::clipped_clique_log_partition(d, lam).map_err(err)
}

#[pyfunction]
fn lemma2_exact_v(d: usize, lam: f64) -> PyResult<f64> {
    core_ising::lemma2_exact_v(d, lam).map_err(err)
}

#[pyfunction]
fn lemma2_bound(d: usize, lam: f64) -> PyResult<f64> {
    core_ising::lemma2_bound(d, lam).map_err(err)
}

#[pyfunction]
fn log_lr_generic(e: &PyChangeEnsemble, xs: &PySampleSet) -> PyResult<f64> {
    Ok(core_lr::log_lr_generic(&e.inner, &xs.inner).map_err(err)?.value)
}

#[pyfunction]
fn log_lr(e: &PyChangeEnsemble, xs: &PySampleSet) -> PyResult<f64> {
    Ok(core_lr::log_lr(&e.inner, &xs.inner).map_err(err)?.value)
}

#[pyfunction]
fn np_test(log_lr: f64, log_tau: f64) -> u8 {
    core_lr::np_test(mrfcd_core::LogLr::new(log_lr), log_tau)
}

#[pyfunction]
fn chi2_ising_single_edge(n: usize, p: usize, lam: f64) -> PyResult<f64> {
    core_lecam::chi2_ising_single_edge(n, p, lam).map_err(err)
}

#[pyfunction]
fn chi2_gaussian_single_edge_bound(n: usize, p: usize, lam: f64) -> PyResult<f64> {
    core_lecam::chi2_gaussian_single_edge_bound(n, p, lam).map_err(err)
}

#[pyfunction]
fn chi2_gaussian_single_edge_exact(n: usize, p: usize, lam: f64) -> PyResult<f64> {
    core_lecam::chi2_gaussian_single_edge_exact(n, p, lam).map_err(err)
}

#[pyfunction]
fn chi2_lift(h: f64, p: usize, d: usize) -> PyResult<f64> {
    core_lecam::chi2_lift(h, p, d).map_err(err)
}

#[pyfunction]
fn chi2_ising_clique_bound(n: usize, d: usize, lam: f64) -> PyResult<f64> {
    core_lecam::chi2_ising_clique_bound(n, d, lam).map_err(err)
}

#[pyfunction]
fn chi2_ising_clique_exact(n: usize, d: usize, lam: f64) -> PyResult<f64> {
    core_lecam::chi2_ising_clique_exact(n, d, lam).map_err(err)
}

#[pyfunction]
fn chi2_exact(e: &PyChangeEnsemble, n: usize) -> PyResult<f64> {
    core_lecam::chi2_exact(&e.inner, n).map_err(err)
}

#[pyfunction]
fn tv_exact(e: &PyChangeEnsemble, n: usize) -> PyResult<f64> {
    core_lecam::tv_exact(&e.inner, n).map_err(err)
}

#[pyfunction]
fn chi2_monte_carlo(e: &PyChangeEnsemble, n: usize, trials: usize, seed: u64) -> PyResult<(f64, f64)> {
    core_lecam::chi2_monte_carlo(&e.inner, n, trials, seed).map_err(err)
}

#[pyfunction]
fn risk_lower_bound(chi2: f64) -> PyResult<f64> {
    core_lecam::risk_lower_bound(chi2).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (kind, p, delta, alpha = None, beta = None, gamma = None, d = None, mode = "change-detection"))]
#[allow(clippy::too_many_arguments)]
fn sample_threshold(
    kind: &str,
    p: usize,
    delta: f64,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    d: Option<usize>,
    mode: &str,
) -> PyResult<f64> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| PyValueError::new_err(format!("{kind} needs {name}")))
    };
    let threshold_kind = match kind {
        "ising-easy" => core_lecam::ThresholdKind::IsingEasy {
            p,
            alpha: need(alpha, "alpha")?,
        },
        "ising-clique" => core_lecam::ThresholdKind::IsingClique {
            p,
            d: d.ok_or_else(|| PyValueError::new_err("ising-clique needs d"))?,
            beta: need(beta, "beta")?,
        },
        "gaussian" => core_lecam::ThresholdKind::Gaussian {
            p,
            gamma: need(gamma, "gamma")?,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown threshold kind {other:?}"
            )))
        }
    };
    let mode = match mode {
        "change-detection" => core_lecam::DetectionMode::ChangeDetection,
        "structure-learning" => core_lecam::DetectionMode::StructureLearning,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    core_lecam::sample_threshold(&threshold_kind, delta, mode).map_err(err)
}

#[pyfunction]
fn simulate_risk(
    py: Python<'_>,
    e: &PyChangeEnsemble,
    n: usize,
    trials: usize,
    seed: u64,
) -> PyResult<PyObject> {
    let report = core_risk::simulate_risk(&e.inner, n, trials, seed).map_err(err)?;
    to_dict(py, &report)
}

#[pyfunction]
fn ml_structure_detector(
    xs1: &PySampleSet,
    xs2: &PySampleSet,
    p: usize,
    d: usize,
    weight_grid: Vec<f64>,
) -> PyResult<u8> {
    let class = core_risk::StructureClassParams { p, d, weight_grid };
    core_risk::ml_structure_detector(&xs1.inner, &xs2.inner, &class).map_err(err)
}

#[pyfunction]
fn run_verify_suite(py: Python<'_>, name: &str) -> PyResult<PyObject> {
    let outcome = core_verify::run_suite(name).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("suite", &outcome.suite)?;
    dict.set_item("passed", outcome.passed())?;
    let checks = PyList::empty(py);
    for c in &outcome.checks {
        let item = PyDict::new(py);
        item.set_item("name", &c.name)?;
        item.set_item("passed", c.passed)?;
        item.set_item("detail", &c.detail)?;
        checks.append(item)?;
    }
    dict.set_item("checks", checks)?;
    Ok(dict.unbind().into())
}

#[pymodule]
fn mrfcd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIsingModel>()?;
    m.add_class::<PyGaussianModel>()?;
    m.add_class::<PySampleSet>()?;
    m.add_class::<PyChangeEnsemble>()?;
    m.add_function(wrap_pyfunction!(ising_single_edge_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(ising_clique_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_single_edge_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(verify_structural_difference, m)?)?;
    m.add_function(wrap_pyfunction!(clique_log_partition, m)?)?;
    m.add_function(wrap_pyfunction!(clipped_clique_log_partition, m)?)?;
    m.add_function(wrap_pyfunction!(lemma2_exact_v, m)?)?;
    m.add_function(wrap_pyfunction!(lemma2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(log_lr_generic, m)?)?;
    m.add_function(wrap_pyfunction!(log_lr, m)?)?;
    m.add_function(wrap_pyfunction!(np_test, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_ising_single_edge, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_gaussian_single_edge_bound, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_gaussian_single_edge_exact, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_lift, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_ising_clique_bound, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_ising_clique_exact, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_exact, m)?)?;
    m.add_function(wrap_pyfunction!(tv_exact, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(risk_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sample_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_risk, m)?)?;
    m.add_function(wrap_pyfunction!(ml_structure_detector, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify_suite, m)?)?;
    Ok(())
}
