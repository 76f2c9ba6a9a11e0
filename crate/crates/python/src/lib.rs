//! Python bindings. Structured inputs and outputs cross the boundary as
//! plain Python objects in the same JSON shapes the CLI reads and writes.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

use wmnc::commands::counterexample_check;
use wmnc::error::Error;
use wmnc::families::MeasureFamily;
use wmnc::integrability::{default_centers, mu_ui, verify_theorem46, Theorem46Options};
use wmnc::io;
use wmnc::measure::DiscreteMeasure;
use wmnc::noncompactness::{mnc_bracket, replay, CoverMode, MncOptions};
use wmnc::report::to_value;
use wmnc::space;
use wmnc::wasserstein::{self, Method};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj
        .py()
        .import("json")?
        .call_method1("dumps", (obj,))?
        .extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn from_json<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

#[pyclass(name = "MetricSpace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMetricSpace {
    inner: Arc<space::MetricSpace>,
}

#[pymethods]
impl PyMetricSpace {
    /// Builds a space from its JSON description, e.g. `{"kind": "real_line"}`.
    #[new]
    fn new(desc: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = io::parse_space(&to_json(desc)?, "").map_err(err)?;
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    #[staticmethod]
    fn real_line() -> Self {
        Self {
            inner: Arc::new(space::MetricSpace::RealLine),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (dim, p = 2.0))]
    fn euclidean(dim: usize, p: f64) -> PyResult<Self> {
        let inner = space::MetricSpace::euclidean(dim, p).map_err(err)?;
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    #[staticmethod]
    fn finite(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = space::MetricSpace::finite_checked(rows).map_err(err)?;
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    #[staticmethod]
    fn c01() -> Self {
        Self {
            inner: Arc::new(space::MetricSpace::C01Sup),
        }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn distance(&self, x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<f64> {
        let x = io::parse_point(&self.inner, &to_json(x)?, "/x").map_err(err)?;
        let y = io::parse_point(&self.inner, &to_json(y)?, "/y").map_err(err)?;
        self.inner.distance(&x, &y).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        from_json(py, &io::space_to_json(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("MetricSpace({})", io::space_to_json(&self.inner))
    }
}

#[pyclass(name = "DiscreteMeasure", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasure {
    inner: DiscreteMeasure,
}

#[pymethods]
impl PyMeasure {
    /// Uniform weights when `weights` is omitted.
    #[new]
    #[pyo3(signature = (space, support, weights = None, renormalize = false))]
    fn new(
        space: &PyMetricSpace,
        support: &Bound<'_, PyAny>,
        weights: Option<Vec<f64>>,
        renormalize: bool,
    ) -> PyResult<Self> {
        let points = io::parse_points(&space.inner, &to_json(support)?, "/support").map_err(err)?;
        let (weights, renormalize) = match weights {
            Some(w) => (w, renormalize),
            None => (vec![1.0; points.len()], true),
        };
        let inner =
            DiscreteMeasure::new(space.inner.clone(), points, weights, renormalize).map_err(err)?;
        Ok(Self { inner })
    }

    /// Parses the measure file format; `space` may be omitted when given here.
    #[staticmethod]
    #[pyo3(signature = (desc, space = None))]
    fn from_dict(desc: &Bound<'_, PyAny>, space: Option<&PyMetricSpace>) -> PyResult<Self> {
        let inner = io::parse_measure(&to_json(desc)?, "", space.map(|s| &s.inner)).map_err(err)?;
        Ok(Self { inner })
    }

    /// Reads a `.json` or `.csv` measure file.
    #[staticmethod]
    #[pyo3(signature = (path, space = None))]
    fn read(path: PathBuf, space: Option<&PyMetricSpace>) -> PyResult<Self> {
        let inner = io::read_measure(&path, space.map(|s| &s.inner)).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn space(&self) -> PyMetricSpace {
        PyMetricSpace {
            inner: self.inner.space().clone(),
        }
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn support<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        from_json(py, &io::measure_to_json(&self.inner)["support"])
    }

    fn first_moment(&self, a: &Bound<'_, PyAny>) -> PyResult<f64> {
        let a = io::parse_point(self.inner.space(), &to_json(a)?, "").map_err(err)?;
        self.inner.first_moment(&a).map_err(err)
    }

    fn tail_integral(&self, a: &Bound<'_, PyAny>, r: f64) -> PyResult<f64> {
        let a = io::parse_point(self.inner.space(), &to_json(a)?, "").map_err(err)?;
        self.inner.tail_integral(&a, r).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        from_json(py, &io::measure_to_json(&self.inner))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("DiscreteMeasure({} atoms)", self.inner.len())
    }
}

/// W1 distance; `method` is one of auto, primal, dual, 1d.
#[pyfunction]
#[pyo3(signature = (p, q, method = "auto"))]
fn w1(p: &PyMeasure, q: &PyMeasure, method: &str) -> PyResult<f64> {
    let method: Method = method.parse().map_err(err)?;
    wasserstein::w1(&p.inner, &q.inner, method).map_err(err)
}

/// Primal transport solution as a dict with value, gap, coupling and the
/// dual potential on the union support.
#[pyfunction]
fn transport<'py>(py: Python<'py>, p: &PyMeasure, q: &PyMeasure) -> PyResult<Bound<'py, PyAny>> {
    let r = wasserstein::w1_primal(&p.inner, &q.inner).map_err(err)?;
    let potential: Vec<Value> = r
        .dual_potential
        .domain()
        .iter()
        .zip(r.dual_potential.values())
        .map(|(x, v)| serde_json::json!({ "point": to_value(x), "value": to_value(v) }))
        .collect();
    let v = serde_json::json!({
        "value": to_value(&r.value),
        "primal_value": to_value(&r.primal_value),
        "dual_value": to_value(&r.dual_value),
        "gap": to_value(&r.gap),
        "iterations": r.iterations,
        "coupling": to_value(&r.coupling.matrix()),
        "potential": potential,
    });
    from_json(py, &v)
}

#[pyclass(name = "Family", frozen)]
struct PyFamily {
    inner: MeasureFamily,
}

#[pymethods]
impl PyFamily {
    /// Accepts any family descriptor the CLI reads. Relative member paths
    /// resolve against `base`.
    #[new]
    #[pyo3(signature = (desc, base = None))]
    fn new(desc: &Bound<'_, PyAny>, base: Option<PathBuf>) -> PyResult<Self> {
        let base = base.unwrap_or_else(|| PathBuf::from("."));
        let inner = io::parse_family(&to_json(desc)?, &base).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let inner = io::read_family(&path).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    #[getter]
    fn space(&self) -> PyMetricSpace {
        PyMetricSpace {
            inner: self.inner.space().clone(),
        }
    }

    fn with_horizon(&self, horizon: usize) -> PyResult<Self> {
        let inner = self.inner.with_horizon(horizon).map_err(err)?;
        Ok(Self { inner })
    }

    /// Member `n`, counting from 1.
    fn member(&self, n: usize) -> PyResult<PyMeasure> {
        let inner = self.inner.member(n).map_err(err)?;
        Ok(PyMeasure { inner })
    }

    fn members(&self) -> PyResult<Vec<PyMeasure>> {
        let ms = self.inner.members().map_err(err)?;
        Ok(ms.into_iter().map(|inner| PyMeasure { inner }).collect())
    }

    fn certificates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        from_json(py, &to_value(self.inner.certificates()))
    }

    fn audit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let a = self.inner.audit().map_err(err)?;
        from_json(py, &to_value(&a))
    }

    /// Non-compactness bracket with its replay.
    #[pyo3(signature = (k = 2, mode = "exact", centers = None, eps = None))]
    fn mnc<'py>(
        &self,
        py: Python<'py>,
        k: usize,
        mode: &str,
        centers: Option<Vec<PyRef<'py, PyMeasure>>>,
        eps: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mode: CoverMode = mode.parse().map_err(err)?;
        let options = MncOptions {
            k,
            mode,
            centers: centers
                .unwrap_or_default()
                .iter()
                .map(|c| c.inner.clone())
                .collect(),
            eps,
            use_ui_lower: true,
        };
        let result = mnc_bracket(&self.inner, &options).map_err(err)?;
        let rep = replay(&self.inner, &result).map_err(err)?;
        let v = serde_json::json!({
            "mnc": to_value(&result),
            "replay": to_value(&rep),
            "replay_ok": rep.ok(),
        });
        from_json(py, &v)
    }

    /// Non-uniform integrability bracket.
    #[pyo3(signature = (centers = None, radii = None, horizon = None))]
    fn ui<'py>(
        &self,
        py: Python<'py>,
        centers: Option<&Bound<'py, PyAny>>,
        radii: Option<Vec<f64>>,
        horizon: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let centers = match centers {
            Some(c) => io::parse_points(self.inner.space(), &to_json(c)?, "").map_err(err)?,
            None => {
                let prefix = self
                    .inner
                    .with_horizon(horizon.unwrap_or(self.inner.horizon()))
                    .and_then(|f| f.members())
                    .map_err(err)?;
                default_centers(&prefix)
            }
        };
        let est = mu_ui(&self.inner, &centers, radii, horizon).map_err(err)?;
        from_json(py, &to_value(&est))
    }

    /// Both brackets, tightness and their comparison.
    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = verify_theorem46(&self.inner, &Theorem46Options::default()).map_err(err)?;
        from_json(py, &to_value(&report))
    }

    fn __repr__(&self) -> String {
        format!(
            "Family({:?}, horizon={})",
            self.inner.name(),
            self.inner.horizon()
        )
    }
}

/// Checks the bounded, uniformly integrable, non-tight family at scale `m`.
#[pyfunction]
#[pyo3(signature = (m = 1.0, n = 100))]
fn counterexample<'py>(py: Python<'py>, m: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let c = counterexample_check(m, n).map_err(err)?;
    let mut v = c.results;
    v["passed"] = Value::Bool(c.passed);
    from_json(py, &v)
}

#[pymodule]
fn pywmnc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetricSpace>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(w1, m)?)?;
    m.add_function(wrap_pyfunction!(transport, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
