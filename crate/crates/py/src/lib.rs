//! Python bindings: catalog access, steady and transient solves, the error
//! norm and the monotonicity audit, returned as plain Python data.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nlfv::solver::TransientReport;
use nlfv::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn scheme_of(name: &str) -> PyResult<SchemeKind> {
    SchemeKind::parse(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown scheme {name:?}")))
}

/// Names of the built-in benchmark cases.
#[pyfunction]
fn catalog() -> Vec<String> {
    benchmark_catalog().into_iter().map(|c| c.name).collect()
}

/// Serialized TOML definition of a catalog case.
#[pyfunction]
fn case_toml(name: &str) -> PyResult<String> {
    case_by_name(name).map_err(err)?.to_toml_string().map_err(err)
}

#[pyclass(name = "Solution")]
struct PySolution {
    #[pyo3(get)]
    nx: usize,
    #[pyo3(get)]
    ny: usize,
    #[pyo3(get)]
    field: Vec<f64>,
    #[pyo3(get)]
    n_iter: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    residuals: Vec<f64>,
    #[pyo3(get)]
    f_min: f64,
    #[pyo3(get)]
    f_max: f64,
    #[pyo3(get)]
    r_under: f64,
    #[pyo3(get)]
    r_over: f64,
    #[pyo3(get)]
    err2: Option<f64>,
    #[pyo3(get)]
    audit_pass: Option<bool>,
    #[pyo3(get)]
    centers_x: Vec<f64>,
    #[pyo3(get)]
    centers_y: Vec<f64>,
}

fn prepare_case(
    case_name_or_toml: &str,
    grid_n: Option<usize>,
    epsilon: Option<f64>,
    max_iter: Option<usize>,
    residual: Option<&str>,
    audit: bool,
) -> PyResult<BenchmarkCase> {
    let mut case = if case_name_or_toml.contains('\n') {
        BenchmarkCase::from_toml_str(case_name_or_toml).map_err(err)?
    } else {
        case_by_name(case_name_or_toml).map_err(err)?
    };
    if let Some(n) = grid_n {
        case = case.with_grid_size(n);
    }
    if let Some(e) = epsilon {
        case.picard.epsilon = e;
    }
    if let Some(m) = max_iter {
        case.picard.max_iter = m;
    }
    if let Some(r) = residual {
        case.picard.residual = match r {
            "delta" => ResidualKind::SuccessiveIterates,
            "algebraic" => ResidualKind::AlgebraicResidual,
            other => return Err(PyValueError::new_err(format!("unknown residual {other:?}"))),
        };
    }
    case.picard.audit = audit;
    Ok(case)
}

/// Solve a stationary case with one scheme. `case` is a catalog name or a
/// TOML case definition.
#[pyfunction]
#[pyo3(signature = (case, scheme, grid_n=None, epsilon=None, max_iter=None, residual=None, audit=false))]
fn solve(
    case: &str,
    scheme: &str,
    grid_n: Option<usize>,
    epsilon: Option<f64>,
    max_iter: Option<usize>,
    residual: Option<&str>,
    audit: bool,
) -> PyResult<PySolution> {
    let case = prepare_case(case, grid_n, epsilon, max_iter, residual, audit)?;
    let scheme = scheme_of(scheme)?;
    let prob = DiscreteProblem::build(&case).map_err(err)?;
    let (f, rep) = picard_solve(&prob, scheme, &case.picard).map_err(err)?;
    let (r_under, r_over) = extremum_ratios(&f, prob.kernels.dirichlet_bounds());
    let e2 = match &case.reference {
        Some(r) => Some(err2(&prob.grid, &f, r).map_err(err)?),
        None => None,
    };
    Ok(PySolution {
        nx: prob.grid.nx(),
        ny: prob.grid.ny(),
        field: f,
        n_iter: rep.n_iter,
        converged: rep.converged,
        residuals: rep.residuals,
        f_min: rep.f_min,
        f_max: rep.f_max,
        r_under,
        r_over,
        err2: e2,
        audit_pass: rep.audits.as_ref().map(|a| a.iter().all(|m| m.pass)),
        centers_x: prob.grid.centers_x().to_vec(),
        centers_y: prob.grid.centers_y().to_vec(),
    })
}

/// Backward-Euler transient solve; returns a dict with the final field and
/// per-step statistics.
#[pyfunction]
#[pyo3(signature = (case, scheme, dt=None, t_end=None, epsilon=None, max_iter=None))]
fn solve_transient(
    py: Python<'_>,
    case: &str,
    scheme: &str,
    dt: Option<f64>,
    t_end: Option<f64>,
    epsilon: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<Py<PyDict>> {
    let case = prepare_case(case, None, epsilon, max_iter, None, false)?;
    let Some(spec) = case.transient else {
        return Err(PyValueError::new_err(format!("case {:?} has no transient section", case.name)));
    };
    let scheme = scheme_of(scheme)?;
    let prob = DiscreteProblem::build(&case).map_err(err)?;
    let init = vec![spec.f_init; prob.n_cells()];
    let (f, rep): (Vec<f64>, TransientReport) = transient_solve(
        &prob,
        scheme,
        dt.unwrap_or(spec.dt),
        t_end.unwrap_or(spec.t_end),
        &init,
        &case.picard,
    )
    .map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("nx", prob.grid.nx())?;
    out.set_item("ny", prob.grid.ny())?;
    out.set_item("field", f)?;
    out.set_item("n_steps", rep.steps.len())?;
    out.set_item("n_iter_avg", rep.n_iter_avg)?;
    out.set_item("frac_nonconverged", rep.frac_nonconverged)?;
    out.set_item("f_min", rep.f_min)?;
    out.set_item("f_max", rep.f_max)?;
    out.set_item(
        "step_n_iter",
        rep.steps.iter().map(|s| s.n_iter).collect::<Vec<_>>(),
    )?;
    Ok(out.into())
}

/// Relaxation couple computed for a case grid, as (c1, c2, binding_bound).
#[pyfunction]
#[pyo3(signature = (case, grid_n=None))]
fn c_weights(case: &str, grid_n: Option<usize>) -> PyResult<(f64, f64, f64)> {
    let case = prepare_case(case, grid_n, None, None, None, false)?;
    let prob = DiscreteProblem::build(&case).map_err(err)?;
    let cw = prob.c_weights(0.0).map_err(err)?;
    Ok((cw.x.0, cw.x.1, cw.bound))
}

#[pymodule]
fn nlfv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(case_toml, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_transient, m)?)?;
    m.add_function(wrap_pyfunction!(c_weights, m)?)?;
    m.add_class::<PySolution>()?;
    Ok(())
}
