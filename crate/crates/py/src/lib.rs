//! Python bindings: the field and map types plus the main operations,
//! exposed as the `ballflow_py` extension module.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ballflow::herglotz::{SampleGrid, SliceFunction, MEMBERSHIP_TOL};
use ballflow::series::{Component, MultiIndex};
use ballflow::{bounds, io, loewner};

fn to_py_err(err: ballflow::Error) -> PyErr {
    if err.is_numerical() {
        PyRuntimeError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn component(j: u8) -> PyResult<Component> {
    Component::from_index(j).map_err(to_py_err)
}

/// A truncated normalized map of the ball, e.g. a parametric-representation
/// limit.
#[pyclass(name = "Map2", module = "ballflow_py", skip_from_py_object)]
#[derive(Clone)]
struct PyMap2 {
    inner: ballflow::PolyMap2,
}

#[pymethods]
impl PyMap2 {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::map_from_json(text).map_err(to_py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        io::map_to_json(&self.inner).map_err(to_py_err)
    }

    fn truncation_degree(&self) -> u32 {
        self.inner.truncation_degree()
    }

    /// Coefficient b^j_(a1,a2), j in {1, 2}.
    fn coeff(&self, j: u8, a1: u32, a2: u32) -> PyResult<Complex64> {
        self.inner
            .coeff(component(j)?, MultiIndex::new(a1, a2))
            .map_err(to_py_err)
    }

    fn eval(&self, z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
        let w = self.inner.eval([z1, z2]);
        (w[0], w[1])
    }

    fn rotate(&self, t1: f64, t2: f64) -> Self {
        Self { inner: self.inner.rotate(t1, t2) }
    }

    fn __repr__(&self) -> String {
        format!("Map2(truncation_degree={})", self.inner.truncation_degree())
    }
}

/// A normalized vector field of the contraction class, piecewise constant
/// in time.
#[pyclass(name = "Field", module = "ballflow_py", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: ballflow::HerglotzField,
}

#[pymethods]
impl PyField {
    #[staticmethod]
    #[pyo3(signature = (degree = 8))]
    fn linear(degree: u32) -> Self {
        Self { inner: bounds::linear_field(degree) }
    }

    #[staticmethod]
    #[pyo3(signature = (degree = 8))]
    fn koebe(degree: u32) -> Self {
        Self { inner: bounds::koebe_field(degree) }
    }

    #[staticmethod]
    #[pyo3(signature = (m, degree = 8))]
    fn pure_z2m(m: u32, degree: u32) -> PyResult<Self> {
        Ok(Self { inner: bounds::pure_power_field(m, degree).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::field_from_json(text).map_err(to_py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        io::field_to_json(&self.inner).map_err(to_py_err)
    }

    fn truncation_degree(&self) -> u32 {
        self.inner.truncation_degree()
    }

    /// Coefficient q^j_(a1,a2) of the piece active at time t.
    #[pyo3(signature = (j, a1, a2, t = 0.0))]
    fn coeff(&self, j: u8, a1: u32, a2: u32, t: f64) -> PyResult<Complex64> {
        self.inner
            .map_at(t)
            .coeff(component(j)?, MultiIndex::new(a1, a2))
            .map_err(to_py_err)
    }

    #[pyo3(signature = (z1, z2, t = 0.0))]
    fn eval(&self, z1: Complex64, z2: Complex64, t: f64) -> (Complex64, Complex64) {
        let w = self.inner.eval([z1, z2], t);
        (w[0], w[1])
    }

    fn rotate(&self, t1: f64, t2: f64) -> Self {
        Self { inner: self.inner.rotate(t1, t2) }
    }

    fn decouple(&self, k1: i64, k2: i64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.decouple(k1, k2).map_err(to_py_err)? })
    }

    /// Sampled class-membership test; returns (passed, worst_value, witness).
    #[pyo3(signature = (radial = 20, polar = 16, phases = 24, tol = MEMBERSHIP_TOL))]
    fn membership(
        &self,
        radial: usize,
        polar: usize,
        phases: usize,
        tol: f64,
    ) -> (bool, f64, Option<(Complex64, Complex64)>) {
        let verdict = self
            .inner
            .membership_test(&SampleGrid::new(radial, polar, phases), tol);
        (
            verdict.passed,
            verdict.worst_value,
            verdict.witness.map(|z| (z[0], z[1])),
        )
    }

    /// Coefficients c_1..c_order of the slice function along the unit
    /// direction (v1, v2).
    fn slice(&self, v1: Complex64, v2: Complex64, order: usize) -> PyResult<Vec<Complex64>> {
        Ok(self
            .inner
            .slice([v1, v2], order)
            .map_err(to_py_err)?
            .coefficients()
            .to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(pieces={}, truncation_degree={})",
            self.inner.pieces().len(),
            self.inner.truncation_degree()
        )
    }
}

/// The sharp bound u_m on |q^1_(0,m)|.
#[pyfunction]
fn sharp_q0m_bound(m: u32) -> PyResult<f64> {
    bounds::sharp_q0m_bound(m).map_err(to_py_err)
}

/// Grid-plus-refinement verification of u_m; returns a dict with the
/// closed form, the numeric optimum and the optimizer point.
#[pyfunction]
#[pyo3(signature = (m, resolution = 10_000))]
fn verify_q0m_numeric(py: Python<'_>, m: u32, resolution: usize) -> PyResult<Py<PyDict>> {
    let r = bounds::verify_q0m_numeric(m, resolution).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("m", r.m)?;
    dict.set_item("closed_form", r.closed_form)?;
    dict.set_item("numeric", r.numeric)?;
    dict.set_item("x_opt", r.optimizer.0)?;
    dict.set_item("y_opt", r.optimizer.1)?;
    dict.set_item("abs_err", r.abs_err())?;
    Ok(dict.into())
}

/// The m-independent bound on |q^1_(m,0)| with its witness field name.
#[pyfunction]
fn qm0_bound() -> (f64, &'static str) {
    (bounds::QM0_BOUND, bounds::QM0_WITNESS)
}

/// Largest r with (z1 + a r z2^2, z2) in the parametric class.
#[pyfunction]
fn shear_radius(a: Complex64) -> PyResult<f64> {
    bounds::shear_radius(a).map_err(to_py_err)
}

/// Rescaled coefficient e^T a^1_(0,2)(0, T) of the extremal quadratic field.
#[pyfunction]
#[pyo3(signature = (step = 1e-3, horizon = 20.0))]
fn check_b02_extremal(step: f64, horizon: f64) -> PyResult<f64> {
    bounds::check_b02_extremal(step, horizon).map_err(to_py_err)
}

/// RK4 solution of dw/dt = G(w, t) from (z1, z2) at time s to time t.
#[pyfunction]
#[pyo3(signature = (field, z1, z2, s = 0.0, t = 1.0, step = 1e-3))]
fn integrate_point(
    field: &PyField,
    z1: Complex64,
    z2: Complex64,
    s: f64,
    t: f64,
    step: f64,
) -> PyResult<(Complex64, Complex64)> {
    let w = loewner::integrate_point(&field.inner, [z1, z2], s, t, step).map_err(to_py_err)?;
    Ok((w[0], w[1]))
}

/// The parametric-representation limit of a field as a Map2.
#[pyfunction]
#[pyo3(signature = (field, degree = 8, horizon = 20.0, step = 1e-3, conv_tol = 1e-3))]
fn parametric_map(
    field: &PyField,
    degree: u32,
    horizon: f64,
    step: f64,
    conv_tol: f64,
) -> PyResult<PyMap2> {
    Ok(PyMap2 {
        inner: loewner::parametric_map(&field.inner, degree, horizon, step, conv_tol)
            .map_err(to_py_err)?,
    })
}

/// Sampled supremum of Re <G(z), z> / |z|^2.
#[pyfunction]
#[pyo3(signature = (field, radial = 20, polar = 16, phases = 24))]
fn squeezing_margin(field: &PyField, radial: usize, polar: usize, phases: usize) -> f64 {
    loewner::squeezing_margin(&field.inner, &SampleGrid::new(radial, polar, phases))
}

/// Necessary Caratheodory bound |c_m| <= 2; returns (ok, violations).
#[pyfunction]
fn caratheodory_coeff_bound(coeffs: Vec<Complex64>) -> (bool, Vec<usize>) {
    let report = SliceFunction::from_coefficients(coeffs).coeff_bound_check();
    (report.ok, report.violations)
}

/// Toeplitz positivity test at order m; returns (psd, min_eigenvalue).
#[pyfunction]
#[pyo3(signature = (coeffs, m, tol = 1e-9))]
fn caratheodory_toeplitz(coeffs: Vec<Complex64>, m: usize, tol: f64) -> PyResult<(bool, f64)> {
    let verdict = SliceFunction::from_coefficients(coeffs)
        .toeplitz_check(m, tol)
        .map_err(to_py_err)?;
    Ok((verdict.psd, verdict.min_eigenvalue))
}

#[pymodule]
fn ballflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyMap2>()?;
    m.add_function(wrap_pyfunction!(sharp_q0m_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_q0m_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(qm0_bound, m)?)?;
    m.add_function(wrap_pyfunction!(shear_radius, m)?)?;
    m.add_function(wrap_pyfunction!(check_b02_extremal, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_point, m)?)?;
    m.add_function(wrap_pyfunction!(parametric_map, m)?)?;
    m.add_function(wrap_pyfunction!(squeezing_margin, m)?)?;
    m.add_function(wrap_pyfunction!(caratheodory_coeff_bound, m)?)?;
    m.add_function(wrap_pyfunction!(caratheodory_toeplitz, m)?)?;
    m.add("MEMBERSHIP_TOL", MEMBERSHIP_TOL)?;
    Ok(())
}
