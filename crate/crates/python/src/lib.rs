//! Python bindings for the evaluators, solvers and residual checks.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fracsol_core::fox_h::{self, HFunctionSpec};
use fracsol_core::solver_ode::{self, OdeProblem, OdeSolution};
use fracsol_core::solver_pde::{self, Branch, D2Variant, DiffusionProblem, PdeSolution};
use fracsol_core::verify::{self, ResidualReport};
use fracsol_core::wright::{self, WrightParam, WrightSpec};
use fracsol_core::{gamma, Error};

create_exception!(fracsol, FracsolError, PyValueError);

fn py_err(e: Error) -> PyErr {
    FracsolError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    FracsolError::new_err(format!("malformed JSON: {e}"))
}

fn params(list: Vec<(f64, f64)>) -> Vec<WrightParam> {
    list.into_iter().map(|(a, s)| WrightParam::real(a, s)).collect()
}

#[pyfunction]
fn ln_gamma(z: Complex64) -> PyResult<Complex64> {
    gamma::ln_gamma(z).map_err(py_err)
}

#[pyfunction]
#[pyo3(name = "gamma")]
fn gamma_fn(z: Complex64) -> PyResult<Complex64> {
    gamma::gamma(z).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (alpha, beta, z))]
fn mittag_leffler(alpha: f64, beta: f64, z: Complex64) -> PyResult<Complex64> {
    wright::mittag_leffler(alpha, beta, z).map_err(py_err)
}

/// Generalized Wright function pPsiq with real `(shift, scale)` pairs.
#[pyclass(name = "WrightSpec", frozen)]
struct PyWrightSpec(WrightSpec);

#[pymethods]
impl PyWrightSpec {
    #[new]
    fn new(upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> PyResult<Self> {
        WrightSpec::new(params(upper), params(lower)).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("spec serializes")
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    fn is_entire(&self) -> bool {
        self.0.convergence().is_entire()
    }

    fn eval(&self, z: Complex64) -> PyResult<Complex64> {
        self.0.eval(z).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("WrightSpec({})", self.to_json())
    }
}

/// Fox H-function `H^{m,l}_{p,q}` with real parameters.
#[pyclass(name = "HFunctionSpec", frozen)]
struct PyHFunctionSpec(HFunctionSpec);

#[pymethods]
impl PyHFunctionSpec {
    #[new]
    fn new(m: usize, l: usize, upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> PyResult<Self> {
        HFunctionSpec::new(m, l, upper, lower).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("spec serializes")
    }

    fn eval(&self, py: Python<'_>, z: f64) -> PyResult<f64> {
        py.detach(|| self.0.eval(z)).map_err(py_err)
    }

    fn eval_many(&self, py: Python<'_>, zs: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| fox_h::eval_many(&self.0, &zs))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)
    }

    fn asymptotic_estimate(&self, z: f64) -> PyResult<f64> {
        fox_h::asymptotic_estimate(&self.0, z).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("HFunctionSpec({})", self.to_json())
    }
}

#[pyclass(name = "ResidualReport", frozen)]
struct PyResidualReport(ResidualReport);

#[pymethods]
impl PyResidualReport {
    #[getter]
    fn max_rel_err(&self) -> f64 {
        self.0.max_rel_err
    }

    #[getter]
    fn method(&self) -> String {
        serde_json::to_value(self.0.method)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    /// `(x, t, lhs, rhs, rel_err)` per point; `t` is `None` for one-variable checks.
    #[getter]
    fn points(&self) -> Vec<(f64, Option<f64>, Complex64, Complex64, f64)> {
        self.0
            .points
            .iter()
            .map(|p| (p.x, p.t, p.lhs, p.rhs, p.rel_err))
            .collect()
    }

    fn passes(&self, tol: f64) -> bool {
        self.0.passes(tol)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("report serializes")
    }

    fn __len__(&self) -> usize {
        self.0.points.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ResidualReport(method={}, max_rel_err={:e}, points={})",
            self.method(),
            self.0.max_rel_err,
            self.0.points.len()
        )
    }
}

#[pyclass(name = "OdeProblem", frozen)]
struct PyOdeProblem(OdeProblem);

#[pymethods]
impl PyOdeProblem {
    #[new]
    fn new(alpha: f64, m: u32, a_coeffs: Vec<f64>) -> PyResult<Self> {
        OdeProblem::new(alpha, m, a_coeffs).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("problem serializes")
    }

    fn characteristic_roots(&self) -> PyResult<Vec<Complex64>> {
        solver_ode::characteristic_poly(&self.0)
            .map(|c| c.roots)
            .map_err(py_err)
    }

    fn solve(&self) -> PyResult<PyOdeSolution> {
        solver_ode::solve(&self.0).map(PyOdeSolution).map_err(py_err)
    }
}

#[pyclass(name = "OdeSolution", frozen)]
struct PyOdeSolution(OdeSolution);

#[pymethods]
impl PyOdeSolution {
    fn evaluate(&self, py: Python<'_>, z: f64) -> PyResult<Complex64> {
        py.detach(|| self.0.evaluate(z)).map_err(py_err)
    }

    fn with_constants(&self, constants: Vec<Complex64>) -> Self {
        Self(self.0.clone().with_constants(&constants))
    }

    #[getter]
    fn roots(&self) -> Vec<Complex64> {
        self.0.roots.clone()
    }

    fn member_count(&self) -> usize {
        self.0.member_count()
    }

    #[pyo3(signature = (zs, h = 1e-4))]
    fn residual(&self, py: Python<'_>, zs: Vec<f64>, h: f64) -> PyResult<PyResidualReport> {
        py.detach(|| verify::residual_ode(&self.0, &zs, h))
            .map(PyResidualReport)
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("solution serializes")
    }
}

#[pyclass(name = "DiffusionProblem", frozen)]
struct PyDiffusionProblem(DiffusionProblem);

#[pymethods]
impl PyDiffusionProblem {
    #[new]
    #[pyo3(signature = (alpha, m, d, A, B, C, a, constants = None))]
    #[allow(non_snake_case)]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: f64,
        m: u32,
        d: f64,
        A: f64,
        B: f64,
        C: f64,
        a: f64,
        constants: Option<Vec<Complex64>>,
    ) -> PyResult<Self> {
        let p = DiffusionProblem::new(alpha, m, d, A, B, C, a).map_err(py_err)?;
        Ok(Self(match constants {
            Some(c) => p.with_constants(c),
            None => p,
        }))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let p: DiffusionProblem = serde_json::from_str(text).map_err(json_err)?;
        p.validate().map_err(py_err)?;
        Ok(Self(p))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("problem serializes")
    }

    #[getter(K)]
    fn k(&self) -> f64 {
        self.0.k_constant()
    }

    #[getter]
    fn discriminant(&self) -> f64 {
        self.0.discriminant()
    }

    fn s_roots(&self) -> PyResult<(Complex64, Complex64)> {
        solver_pde::s_roots(&self.0).map_err(py_err)
    }

    fn similarity_reduce(&self) -> PyResult<PyOdeProblem> {
        solver_pde::similarity_reduce(&self.0).map(PyOdeProblem).map_err(py_err)
    }

    /// Theorem solution; `d2_variant` selects `"derivation"` or `"statement"` when `d = 2`.
    #[pyo3(signature = (d2_variant = "derivation"))]
    fn solve(&self, d2_variant: &str) -> PyResult<PyPdeSolution> {
        let sol = if self.0.is_d2() {
            let variant = match d2_variant {
                "derivation" => D2Variant::Derivation,
                "statement" => D2Variant::Statement,
                other => return Err(FracsolError::new_err(format!("unknown d2 variant {other:?}"))),
            };
            solver_pde::solve_d2(&self.0, variant)
        } else {
            solver_pde::solve(&self.0)
        };
        sol.map(PyPdeSolution).map_err(py_err)
    }

    /// Closed-form exponential solution for `alpha = 1`; `branch` is `"plus"` or `"minus"`.
    #[pyo3(signature = (branch = "plus"))]
    fn corollary(&self, branch: &str) -> PyResult<PyPdeSolution> {
        let branch = match branch {
            "plus" => Branch::Plus,
            "minus" => Branch::Minus,
            other => return Err(FracsolError::new_err(format!("unknown branch {other:?}"))),
        };
        solver_pde::corollary_alpha1(&self.0, branch)
            .map(PyPdeSolution)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("DiffusionProblem({})", self.to_json())
    }
}

#[pyclass(name = "PdeSolution", frozen)]
struct PyPdeSolution(PdeSolution);

#[pymethods]
impl PyPdeSolution {
    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind()
    }

    #[getter(K)]
    fn k(&self) -> f64 {
        self.0.k
    }

    #[getter]
    fn s_roots(&self) -> Option<(Complex64, Complex64)> {
        self.0.s_roots.map(|s| (s[0], s[1]))
    }

    fn evaluate(&self, py: Python<'_>, x: f64, t: f64) -> PyResult<Complex64> {
        py.detach(|| self.0.evaluate(x, t)).map_err(py_err)
    }

    /// Residual of the diffusion equation on `(x, t)` points.
    #[pyo3(signature = (grid, h = 1e-4))]
    fn residual(&self, py: Python<'_>, grid: Vec<(f64, f64)>, h: f64) -> PyResult<PyResidualReport> {
        py.detach(|| verify::residual_pde(&self.0, &grid, h))
            .map(PyResidualReport)
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("solution serializes")
    }

    fn __repr__(&self) -> String {
        format!("PdeSolution(kind={}, K={})", self.0.kind(), self.0.k)
    }
}

#[pyfunction]
#[pyo3(signature = (n = 1000, seed = 7))]
fn lemma1_suite(py: Python<'_>, n: usize, seed: u64) -> PyResult<PyResidualReport> {
    py.detach(|| verify::lemma1_suite(n, seed))
        .map(PyResidualReport)
        .map_err(py_err)
}

#[pyfunction]
fn h_transform_suite(py: Python<'_>) -> PyResult<PyResidualReport> {
    py.detach(verify::h_transform_suite)
        .map(PyResidualReport)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (n = 200, seed = 7))]
fn reduction_suite(py: Python<'_>, n: usize, seed: u64) -> PyResult<PyResidualReport> {
    py.detach(|| verify::reduction_suite(n, seed))
        .map(PyResidualReport)
        .map_err(py_err)
}

#[pyfunction]
fn wright_reduction_suite(py: Python<'_>) -> PyResult<PyResidualReport> {
    py.detach(verify::wright_reduction_suite)
        .map(PyResidualReport)
        .map_err(py_err)
}

#[pymodule]
fn fracsol(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FracsolError", m.py().get_type::<FracsolError>())?;
    m.add_function(wrap_pyfunction!(ln_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_fn, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_suite, m)?)?;
    m.add_function(wrap_pyfunction!(h_transform_suite, m)?)?;
    m.add_function(wrap_pyfunction!(reduction_suite, m)?)?;
    m.add_function(wrap_pyfunction!(wright_reduction_suite, m)?)?;
    m.add_class::<PyWrightSpec>()?;
    m.add_class::<PyHFunctionSpec>()?;
    m.add_class::<PyResidualReport>()?;
    m.add_class::<PyOdeProblem>()?;
    m.add_class::<PyOdeSolution>()?;
    m.add_class::<PyDiffusionProblem>()?;
    m.add_class::<PyPdeSolution>()?;
    Ok(())
}
