//! Python bindings. Fields cross the boundary as lists of floats on the grid
//! `x_j = −L + j·2L/n`; reports come back as plain dicts.

use benjamin_waves as bw;
use benjamin_waves::{Field, Grid, WaveParams, WaveProfile};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn to_py(e: bw::Error) -> PyErr {
    match e {
        bw::Error::InvalidParams(_)
        | bw::Error::InvalidGrid(_)
        | bw::Error::InvalidField(_)
        | bw::Error::NoWaveRegime(_)
        | bw::Error::IllPosed(_)
        | bw::Error::Range(_)
        | bw::Error::Cfl { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = bw::io::to_json_string(value).map_err(to_py)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn field(grid: Grid, values: Vec<f64>) -> PyResult<Field> {
    Field::new(grid, values).map_err(to_py)
}

fn solver_config(tol: Option<f64>, max_iter: Option<usize>) -> bw::SolverConfig {
    let mut cfg = bw::SolverConfig::default();
    if let Some(t) = tol {
        cfg.tol = t;
    }
    if let Some(m) = max_iter {
        cfg.max_iter = m;
    }
    cfg
}

/// Periodic grid of `n` points on `[−L, L)`.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize, half_length: f64) -> PyResult<Self> {
        Grid::new(n, half_length).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn half_length(&self) -> f64 {
        self.0.half_length()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, half_length={})", self.0.n(), self.0.half_length())
    }
}

/// A travelling-wave profile together with its parameters.
#[pyclass(name = "Wave", frozen)]
struct PyWave(WaveProfile);

#[pymethods]
impl PyWave {
    /// Wraps a user-supplied profile; the residual is measured, not enforced.
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>, omega: f64, p: f64) -> PyResult<Self> {
        let params = WaveParams::new(omega, p).map_err(to_py)?;
        Ok(PyWave(WaveProfile::from_field(field(grid.0, values)?, params)))
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.phi.values().to_vec()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.params.omega()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.params.p()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn route<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        dict(py, &self.0.route)
    }

    fn pohozaev<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        dict(py, &bw::pohozaev_residuals(&self.0.phi, &self.0.params))
    }

    fn invariants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        dict(py, &bw::invariants(&self.0.phi, &self.0.params))
    }

    fn kernel_residual(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| bw::kernel_residual(&self.0)).map_err(to_py)
    }

    #[pyo3(signature = (kernel_tol=None))]
    fn dprime(&self, py: Python<'_>, kernel_tol: Option<f64>) -> PyResult<f64> {
        py.detach(|| bw::dprime(&self.0, kernel_tol)).map_err(to_py)
    }

    fn decay<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| bw::decay_constant(&self.0)).map_err(to_py)?;
        dict(py, &r)
    }

    /// Eigenvalues of the KdV-type operator as complex numbers plus the
    /// summary report.
    #[pyo3(signature = (threshold=None))]
    fn spectrum<'py>(
        &self,
        py: Python<'py>,
        threshold: Option<f64>,
    ) -> PyResult<(Vec<num_complex::Complex64>, Bound<'py, PyAny>)> {
        let r = py.detach(|| bw::kdv_spectrum(&self.0, threshold)).map_err(to_py)?;
        Ok((r.eigenvalues.clone(), dict(py, &r)?))
    }

    fn index_count<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| bw::index_count(&self.0)).map_err(to_py)?;
        dict(py, &r)
    }

    fn verdict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| bw::verdict(&self.0)).map_err(to_py)?;
        dict(py, &r)
    }

    fn __repr__(&self) -> String {
        format!(
            "Wave(omega={}, p={}, n={}, residual={:.3e})",
            self.0.params.omega(),
            self.0.params.p(),
            self.0.grid().n(),
            self.0.residual
        )
    }
}

#[pyfunction]
#[pyo3(signature = (omega, p, grid, tol=None, max_iter=None))]
fn solve(
    py: Python<'_>,
    omega: f64,
    p: f64,
    grid: &PyGrid,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<PyWave> {
    let params = WaveParams::new(omega, p).map_err(to_py)?;
    let cfg = solver_config(tol, max_iter);
    let g = grid.0;
    py.detach(|| bw::solve_profile(&params, &g, &cfg))
        .map(PyWave)
        .map_err(to_py)
}

/// Maximizes the Gagliardo–Nirenberg quotient (give `alpha`) or the Sobolev
/// quotient (give `omega`). Returns `(wave, maximizer values, report)`.
#[pyfunction]
#[pyo3(signature = (p, grid, alpha=None, omega=None, tol=None, max_iter=None))]
fn maximize<'py>(
    py: Python<'py>,
    p: f64,
    grid: &PyGrid,
    alpha: Option<f64>,
    omega: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<(PyWave, Vec<f64>, Bound<'py, PyAny>)> {
    let problem = match (alpha, omega) {
        (Some(alpha), None) => bw::Problem::Gn { alpha },
        (None, Some(omega)) => bw::Problem::Sobolev { omega },
        _ => return Err(PyValueError::new_err("give exactly one of alpha and omega")),
    };
    let cfg = solver_config(tol, max_iter);
    let g = grid.0;
    let r = py
        .detach(|| bw::maximize_quotient(problem, p, &g, &cfg))
        .map_err(to_py)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        quotient_value: f64,
        alpha: Option<f64>,
        omega: f64,
        gradient_norm: f64,
        iterations: usize,
        route_detail: &'a str,
    }
    let summary = dict(
        py,
        &Summary {
            quotient_value: r.quotient_value,
            alpha: r.alpha,
            omega: r.omega,
            gradient_norm: r.gradient_norm,
            iterations: r.iterations,
            route_detail: &r.route_detail,
        },
    )?;
    Ok((PyWave(r.wave), r.varphi.into_values(), summary))
}

#[pyfunction]
#[pyo3(signature = (alphas, p, grid, tol=None, max_iter=None))]
fn sweep<'py>(
    py: Python<'py>,
    alphas: Vec<f64>,
    p: f64,
    grid: &PyGrid,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = solver_config(tol, max_iter);
    let g = grid.0;
    let t = py.detach(|| bw::sweep_alpha(&alphas, p, &g, &cfg)).map_err(to_py)?;
    dict(py, &t)
}

/// `ω = 4c/γ² − 1`
#[pyfunction]
fn physical_to_normalized(c: f64, gamma: f64) -> PyResult<f64> {
    bw::physical_to_normalized(bw::PhysicalParams { c, gamma }).map_err(to_py)
}

#[pyfunction]
fn gn_quotient(grid: &PyGrid, values: Vec<f64>, alpha: f64, p: f64) -> PyResult<f64> {
    bw::gn_quotient(&field(grid.0, values)?, alpha, p).map_err(to_py)
}

#[pyfunction]
fn sobolev_quotient(grid: &PyGrid, values: Vec<f64>, omega: f64, p: f64) -> PyResult<f64> {
    let params = WaveParams::new(omega, p).map_err(to_py)?;
    bw::sobolev_quotient(&field(grid.0, values)?, &params).map_err(to_py)
}

#[pyfunction]
fn instability_margin(omega: f64, p: f64) -> PyResult<f64> {
    Ok(bw::instability_margin(&WaveParams::new(omega, p).map_err(to_py)?))
}

#[pyfunction]
fn greens_function(grid: &PyGrid, omega: f64) -> PyResult<Vec<f64>> {
    bw::greens_function(&grid.0, omega).map(Field::into_values).map_err(to_py)
}

/// Band-limited unit-norm noise; identical for identical seeds.
#[pyfunction]
fn seeded_noise(grid: &PyGrid, seed: u64) -> Vec<f64> {
    bw::evolution::seeded_noise(&grid.0, seed).into_values()
}

/// Integrates the equation from `u0`. Returns `(times, frames, report)`.
#[pyfunction]
#[pyo3(signature = (grid, u0, omega, p, dt, t_final, save_every=100))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn evolve<'py>(
    py: Python<'py>,
    grid: &PyGrid,
    u0: Vec<f64>,
    omega: f64,
    p: f64,
    dt: f64,
    t_final: f64,
    save_every: usize,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, Bound<'py, PyAny>)> {
    let params = WaveParams::new(omega, p).map_err(to_py)?;
    let u0 = field(grid.0, u0)?;
    let cfg = bw::EvolveConfig {
        dt,
        t_final,
        save_every,
        ..bw::EvolveConfig::default()
    };
    let r = py.detach(|| bw::evolve(&u0, &params, &cfg)).map_err(to_py)?;
    #[derive(Serialize)]
    struct Summary {
        drift: bw::evolution::DriftRecord,
        initial: bw::Invariants,
        final_time: f64,
        steps_taken: usize,
        halted: Option<bw::HaltReason>,
    }
    let summary = dict(
        py,
        &Summary {
            drift: r.drift,
            initial: r.initial,
            final_time: r.final_time,
            steps_taken: r.steps_taken,
            halted: r.halted,
        },
    )?;
    let frames = r.frames.into_iter().map(Field::into_values).collect();
    Ok((r.times, frames, summary))
}

#[pymodule]
fn pybenjamin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyWave>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(maximize, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(physical_to_normalized, m)?)?;
    m.add_function(wrap_pyfunction!(gn_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(instability_margin, m)?)?;
    m.add_function(wrap_pyfunction!(greens_function, m)?)?;
    m.add_function(wrap_pyfunction!(seeded_noise, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    Ok(())
}
