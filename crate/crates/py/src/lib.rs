//! Python bindings: manifolds, cusp shapes, horoball diagrams and surface reports.
#![allow(clippy::useless_conversion)]

use cuspkit_core as core;
use core::cusps::{self, CuspShape as CoreShape, LCurve};
use core::hmodel::{Tolerance, C64};
use core::horoballs::{self, EnumOptions};
use core::surfaces::{self, ReportOptions, SurfaceCandidate as CoreCandidate, SyntheticFixture};
use core::triangulate::parse_triangulation;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(cuspkit, CuspkitError, PyException, "A numerical or verification failure.");

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Invalid(_) | core::Error::Parse { .. } | core::Error::ZeroSlope | core::Error::FilledCusp(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => CuspkitError::new_err(e.to_string()),
    }
}

fn tolerance(tol: Option<f64>) -> PyResult<Tolerance> {
    match tol {
        Some(t) => Tolerance::default().with_geometric(t).map_err(err),
        None => Ok(Tolerance::default()),
    }
}

/// Serializes through JSON into plain Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

/// Cusp torus lattice at a scale.
#[pyclass(name = "CuspShape", module = "cuspkit")]
#[derive(Clone)]
pub struct PyCuspShape {
    inner: CoreShape,
}

#[pymethods]
impl PyCuspShape {
    #[new]
    #[pyo3(signature = (mu, lam, scale = 1.0))]
    fn new(mu: C64, lam: C64, scale: f64) -> PyResult<Self> {
        Ok(PyCuspShape { inner: CoreShape::new(0, mu, lam, scale).map_err(err)? })
    }

    #[getter]
    fn mu(&self) -> C64 {
        self.inner.t_mu * self.inner.scale
    }

    #[getter]
    fn lam(&self) -> C64 {
        self.inner.t_lambda * self.inner.scale
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale
    }

    #[getter]
    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn slope_length(&self, p: i64, q: i64) -> PyResult<f64> {
        cusps::slope_length(&self.inner, p, q).map_err(err)
    }

    /// Width with respect to the l-curve lambda + k mu.
    #[pyo3(signature = (k = 0))]
    fn width(&self, k: i64) -> f64 {
        cusps::width(&self.inner, LCurve { k })
    }

    /// k of the shortest l-curve lambda + k mu.
    fn minimal_l_curve(&self) -> i64 {
        cusps::minimal_l_curve(&self.inner).k
    }

    fn __repr__(&self) -> String {
        format!("CuspShape(mu={}, lam={}, scale={})", self.mu(), self.lam(), self.inner.scale)
    }
}

#[pyclass(name = "HoroballDiagram", module = "cuspkit")]
pub struct PyDiagram {
    inner: horoballs::HoroballDiagram,
    tol: Tolerance,
}

#[pymethods]
impl PyDiagram {
    #[getter]
    fn verified(&self) -> bool {
        self.inner.verified
    }

    #[getter]
    fn cusp(&self) -> usize {
        self.inner.cusp
    }

    /// (center, diameter, cusp) for every ball, largest first.
    #[getter]
    fn balls(&self) -> Vec<(C64, f64, usize)> {
        self.inner.balls.iter().map(|b| (b.center, b.diameter, b.cusp)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.balls.len()
    }

    fn full_sized(&self) -> usize {
        self.inner.full_sized(self.tol.tangency)
    }

    /// Whether the diagram has a translational symmetry of this order along p mu + q lambda.
    fn has_symmetry(&self, direction: (i64, i64), order: u32) -> PyResult<bool> {
        Ok(horoballs::detect_symmetry(&self.inner, direction, order, &self.tol).map_err(err)?.verified)
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn to_svg(&self) -> String {
        self.inner.to_svg()
    }
}

#[pyclass(name = "SurfaceCandidate", module = "cuspkit")]
#[derive(Clone)]
pub struct PyCandidate {
    inner: CoreCandidate,
}

#[pymethods]
impl PyCandidate {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyCandidate { inner: CoreCandidate::load(path.as_ref()).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyCandidate { inner: CoreCandidate::from_json(text).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name.clone()
    }

    #[getter]
    fn claimed_slope(&self) -> Option<(i64, i64)> {
        self.inner.claimed_slope
    }
}

/// A solved manifold with one chart per complete cusp.
#[pyclass(name = "Manifold", module = "cuspkit")]
pub struct PyManifold {
    inner: core::Manifold,
}

impl PyManifold {
    fn balanced(&self, curves: Option<Vec<(i64, i64)>>) -> PyResult<cusps::WidthReport> {
        cusps::balance_cusps(&self.inner, curves.as_deref(), &EnumOptions::default()).map_err(err)
    }
}

#[pymethods]
impl PyManifold {
    /// Reads a `.tri` triangulation (solving it) or a `.hol` holonomy file.
    #[staticmethod]
    #[pyo3(signature = (path, tol = None))]
    fn load(path: &str, tol: Option<f64>) -> PyResult<Self> {
        Ok(PyManifold { inner: core::Manifold::load(path.as_ref(), tolerance(tol)?).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn num_cusps(&self) -> usize {
        self.inner.num_cusps()
    }

    #[getter]
    fn volume(&self) -> Option<f64> {
        self.inner.volume()
    }

    /// Shape parameters of the tetrahedra, if the manifold came from a triangulation.
    #[getter]
    fn shapes(&self) -> Option<Vec<C64>> {
        self.inner.shapes.as_ref().map(|s| s.z.clone())
    }

    /// Cusp shape of cusp k at its maximal (single cusp expanded alone) scale.
    #[pyo3(signature = (cusp = 0))]
    fn maximal_cusp(&self, cusp: usize) -> PyResult<PyCuspShape> {
        let max = horoballs::max_diameters(&self.inner, &EnumOptions::default()).map_err(err)?;
        let t = horoballs::maximal_scale(&max, cusp).ok_or_else(|| CuspkitError::new_err("no tangency found"))?;
        Ok(PyCuspShape { inner: self.inner.cusp_shape(cusp).map_err(err)?.at_scale(t) })
    }

    /// Length of p mu + q lambda on the maximal cusp.
    #[pyo3(signature = (p, q, cusp = 0))]
    fn slope_length(&self, p: i64, q: i64, cusp: usize) -> PyResult<f64> {
        self.maximal_cusp(cusp)?.slope_length(p, q)
    }

    /// Balanced widths of the given l-curves (longitudes by default), as a dict.
    #[pyo3(signature = (curves = None))]
    fn balanced_widths(&self, py: Python<'_>, curves: Option<Vec<(i64, i64)>>) -> PyResult<PyObject> {
        to_py(py, &self.balanced(curves)?)
    }

    /// Horoball diagram of a cusp at the balanced longitude scales.
    #[pyo3(signature = (cusp = 0, cutoff = 0.2))]
    fn horoballs(&self, cusp: usize, cutoff: f64) -> PyResult<PyDiagram> {
        let r = self.balanced(None)?;
        let mut scales = vec![0.0; self.inner.num_cusps()];
        for (i, &k) in r.cusps.iter().enumerate() {
            scales[k] = r.scales[i];
        }
        let d = horoballs::enumerate(&self.inner, cusp, &scales, cutoff, &EnumOptions::default()).map_err(err)?;
        Ok(PyDiagram { inner: d, tol: self.inner.tol })
    }

    /// Orbit classification of a candidate: "embedded", "immersed" or "not_invariant".
    fn classify(&self, candidate: &PyCandidate) -> PyResult<String> {
        let v = surfaces::verify_invariant(&self.inner, &candidate.inner, &Default::default()).map_err(err)?;
        Ok(v.classification.name().to_string())
    }

    /// Full verification and width-theorem report, as a dict.
    fn surface_report(&self, py: Python<'_>, candidate: &PyCandidate) -> PyResult<PyObject> {
        let r = surfaces::width_theorem_report(&self.inner, &candidate.inner, &ReportOptions::default()).map_err(err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Manifold({:?}, cusps={})", self.inner.name, self.inner.num_cusps())
    }
}

/// Widths of the (1, p) fillings of the drilled cusp of a triangulation, as a dict.
#[pyfunction]
#[pyo3(signature = (path, ps, tol = None))]
fn twist_series(py: Python<'_>, path: &str, ps: Vec<i64>, tol: Option<f64>) -> PyResult<PyObject> {
    let text = std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
    let tri = parse_triangulation(&text).map_err(err)?;
    let s = surfaces::twist_series(&tri, &ps, &tolerance(tol)?, &EnumOptions::default()).map_err(err)?;
    to_py(py, &s)
}

/// n-gon witnesses of a synthetic plane/horoball fixture file, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (path, max_n = 4))]
fn fixture_ngons(py: Python<'_>, path: &str, max_n: usize) -> PyResult<PyObject> {
    let text = std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
    let f = SyntheticFixture::from_json(&text).map_err(err)?;
    to_py(py, &f.ngons(max_n, &Tolerance::default()))
}

/// Algebraic intersection number of two slopes.
#[pyfunction]
fn intersection_number(a: (i64, i64), b: (i64, i64)) -> i64 {
    cusps::intersection_number(a, b)
}

#[pymodule]
pub fn cuspkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyManifold>()?;
    m.add_class::<PyCuspShape>()?;
    m.add_class::<PyDiagram>()?;
    m.add_class::<PyCandidate>()?;
    m.add_function(wrap_pyfunction!(twist_series, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_ngons, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_number, m)?)?;
    m.add("CuspkitError", m.py().get_type_bound::<CuspkitError>())?;
    Ok(())
}
