//! Python bindings: bodies, sparse functions, the maximal operators and the verifiers.
//! Structured results come back as plain dicts and lists.

use maxlab::maximal::{centered_maximal_at, maximal_grid_with, noncentered_maximal_at, GridOptions, NonCenteredOptions};
use maxlab::regularity::{gradient_norm as lib_gradient_norm, GradientOptions};
use maxlab::verify::{
    boundedness_certificate as lib_certificate, c_tilde_bound, remark2_construct, remark2_verify,
    summability_sum as lib_summability_sum, BoundednessOptions, SummabilityConstants, SummabilityInput,
};
use maxlab::{LatticeWindow, OmegaDescriptor, OmegaSpec, Variant};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

fn err(e: maxlab::Error) -> PyErr {
    match e {
        maxlab::Error::Numerical(_) | maxlab::Error::Construction(_) | maxlab::Error::Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_variant(variant: &str) -> PyResult<Variant> {
    variant.parse().map_err(PyValueError::new_err)
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(value_to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let dict = PyDict::new(py);
            for (k, x) in m {
                dict.set_item(k, value_to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// A normalized convex body Ω.
#[pyclass(name = "Omega", module = "maxlab_py", frozen)]
struct PyOmega {
    inner: OmegaSpec,
}

#[pymethods]
impl PyOmega {
    /// `name`: `cube`, `l1`, `l2`, `lp:<p>`.
    #[new]
    #[pyo3(signature = (name = "cube", dim = 1))]
    fn new(name: &str, dim: usize) -> PyResult<Self> {
        let descriptor = OmegaDescriptor::from_name(name, dim).map_err(err)?;
        Ok(Self { inner: OmegaSpec::from_descriptor(&descriptor).map_err(err)? })
    }

    /// From a JSON descriptor such as `{"kind": "polytope", "normals": ..., "offsets": ..., "d": 2}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: OmegaSpec::from_json(text).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.inner.c1()
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2()
    }

    fn gauge(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.dim())));
        }
        Ok(self.inner.gauge(&x))
    }

    /// Number of lattice points in the closed ball of radius `r` around `x0`.
    fn count(&self, x0: Vec<f64>, r: f64) -> PyResult<u64> {
        if x0.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.dim())));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(PyValueError::new_err("radius must be finite and nonnegative"));
        }
        Ok(maxlab::geometry::count_lattice(&self.inner, &x0, r))
    }

    fn __repr__(&self) -> String {
        format!("Omega({})", self.inner.descriptor())
    }
}

/// A finitely supported function on Z^d.
#[pyclass(name = "SparseFunction", module = "maxlab_py", frozen)]
struct PySparseFunction {
    inner: maxlab::SparseFunction,
}

#[pymethods]
impl PySparseFunction {
    /// `entries`: a list of `(point, value)` pairs; repeated points accumulate.
    #[new]
    #[pyo3(signature = (dim, entries = Vec::new()))]
    fn new(dim: usize, entries: Vec<(Vec<i64>, f64)>) -> PyResult<Self> {
        if dim == 0 {
            return Err(PyValueError::new_err("dimension must be positive"));
        }
        Ok(Self { inner: maxlab::SparseFunction::from_entries(dim, entries).map_err(err)? })
    }

    #[staticmethod]
    fn delta(point: Vec<i64>) -> PyResult<Self> {
        if point.is_empty() {
            return Err(PyValueError::new_err("point must have at least one coordinate"));
        }
        Ok(Self { inner: maxlab::SparseFunction::delta(point) })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: maxlab::SparseFunction::parse(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn entries(&self) -> Vec<(Vec<i64>, f64)> {
        self.inner.iter().map(|(p, v)| (p.clone(), v)).collect()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn l1_norm(&self) -> f64 {
        self.inner.l1_norm()
    }

    fn __len__(&self) -> usize {
        self.inner.support_size()
    }

    fn __repr__(&self) -> String {
        format!("SparseFunction(dim={}, support={})", self.inner.dim(), self.inner.support_size())
    }
}

fn check_dims(f: &PySparseFunction, omega: &PyOmega) -> PyResult<()> {
    if f.inner.dim() != omega.inner.dim() {
        return Err(PyValueError::new_err(format!(
            "function is {}-dimensional, body is {}-dimensional",
            f.inner.dim(),
            omega.inner.dim()
        )));
    }
    Ok(())
}

/// `Mf(n)` (centered) or `M̃f(n)` (noncentered).
#[pyfunction]
#[pyo3(signature = (f, omega, n, variant = "centered"))]
fn maximal_at(f: &PySparseFunction, omega: &PyOmega, n: Vec<i64>, variant: &str) -> PyResult<f64> {
    check_dims(f, omega)?;
    match parse_variant(variant)? {
        Variant::Centered => Ok(centered_maximal_at(&f.inner, &omega.inner, &n).map_err(err)?.value),
        Variant::Noncentered => {
            Ok(noncentered_maximal_at(&f.inner, &omega.inner, &n, NonCenteredOptions::default()).map_err(err)?.value)
        }
    }
}

/// Values on the window `lo..=hi`, row-major with the last axis fastest.
#[pyfunction]
#[pyo3(signature = (f, omega, lo, hi, variant = "centered"))]
fn maximal_grid(f: &PySparseFunction, omega: &PyOmega, lo: Vec<i64>, hi: Vec<i64>, variant: &str) -> PyResult<Vec<f64>> {
    check_dims(f, omega)?;
    let window = LatticeWindow::new(lo, hi).map_err(err)?;
    let opts = GridOptions { variant: parse_variant(variant)?, ..GridOptions::default() };
    Ok(maximal_grid_with(&f.inner, &omega.inner, &window, &opts).map_err(err)?.values)
}

/// `‖∇Mf‖₁` with its per-axis parts, window and convergence flags.
#[pyfunction]
#[pyo3(signature = (f, omega, variant = "centered", budget = 1 << 20))]
fn gradient_norm<'py>(
    py: Python<'py>,
    f: &PySparseFunction,
    omega: &PyOmega,
    variant: &str,
    budget: u128,
) -> PyResult<Bound<'py, PyAny>> {
    check_dims(f, omega)?;
    let opts = GradientOptions { variant: parse_variant(variant)?, budget, ..GradientOptions::default() };
    let g = py.detach(|| lib_gradient_norm(&f.inner, &omega.inner, &opts)).map_err(err)?;
    to_py(py, &g)
}

/// Certified `‖∇Mf‖₁ / ‖f‖₁` bracket against `2 Σ_i C̃_i`.
#[pyfunction]
#[pyo3(signature = (f, omega, variant = "centered"))]
fn boundedness_certificate<'py>(
    py: Python<'py>,
    f: &PySparseFunction,
    omega: &PyOmega,
    variant: &str,
) -> PyResult<Bound<'py, PyAny>> {
    check_dims(f, omega)?;
    let opts = BoundednessOptions { variant: parse_variant(variant)?, ..BoundednessOptions::default() };
    let c = py.detach(|| lib_certificate(&f.inner, &omega.inner, opts)).map_err(err)?;
    to_py(py, &c)
}

/// `C̃` for the body as given (not renormalized per axis), truncated at `truncation`.
#[pyfunction]
#[pyo3(signature = (omega, truncation = 1000, variant = "centered"))]
fn c_tilde<'py>(py: Python<'py>, omega: &PyOmega, truncation: i64, variant: &str) -> PyResult<Bound<'py, PyAny>> {
    let constants = SummabilityConstants::for_variant(&omega.inner, parse_variant(variant)?);
    let c = py.detach(|| c_tilde_bound(&constants, truncation)).map_err(err)?;
    to_py(py, &c)
}

/// The summability functional of a strictly increasing sequence.
#[pyfunction]
#[pyo3(signature = (seq, omega, truncation = 1000))]
fn summability_sum<'py>(py: Python<'py>, seq: Vec<i64>, omega: &PyOmega, truncation: i64) -> PyResult<Bound<'py, PyAny>> {
    let input = SummabilityInput::new(seq, SummabilityConstants::of(&omega.inner), truncation).map_err(err)?;
    let v = py.detach(|| lib_summability_sum(&input)).map_err(err)?;
    to_py(py, &v)
}

/// Greedy sharpness construction with `terms` terms and its verification report.
#[pyfunction]
#[pyo3(signature = (terms = 10))]
fn remark2<'py>(py: Python<'py>, terms: usize) -> PyResult<Bound<'py, PyAny>> {
    let out = remark2_construct(terms).map_err(err)?;
    let report = remark2_verify(&out, &OmegaSpec::cube(1)).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("a_seq", out.a_seq.clone())?;
    dict.set_item("construction", to_py(py, &out)?)?;
    dict.set_item("report", to_py(py, &report)?)?;
    Ok(dict.into_any())
}

#[pymodule]
fn maxlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOmega>()?;
    m.add_class::<PySparseFunction>()?;
    m.add_function(wrap_pyfunction!(maximal_at, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_grid, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_norm, m)?)?;
    m.add_function(wrap_pyfunction!(boundedness_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(c_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(summability_sum, m)?)?;
    m.add_function(wrap_pyfunction!(remark2, m)?)?;
    Ok(())
}
