//! Python bindings for `starset`. Sets and results cross the boundary as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use starset::approx::{approximate as run_approximate, ApproxOptions};
use starset::conic::SolverOptions;
use starset::kernel::{inner_kernel as run_inner_kernel, outer_kernel as run_outer_kernel, support_directions, KernelOptions};
use starset::metrics::{volume_grid as run_volume_grid, GRID_RESOLUTION};
use starset::semialg::fixtures;
use starset::{Error, RayOptions, SemialgebraicSet};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::DimensionMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::Unbounded { .. }
        | Error::OriginNotInterior { .. }
        | Error::EmptyPolytope
        | Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_set(set_json: &str) -> PyResult<SemialgebraicSet> {
    serde_json::from_str(set_json).map_err(|e| PyValueError::new_err(format!("invalid set JSON: {e}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// JSON of a named fixture set (`disk`, `square`, `exampleA`, `exampleB`, `exampleE`).
#[pyfunction]
#[pyo3(signature = (name, c = 0.9, r = 0.4))]
fn fixture(name: &str, c: f64, r: f64) -> PyResult<String> {
    to_json(&fixtures::by_name(name, c, r).map_err(to_py)?)
}

/// Whether `point` satisfies every constraint.
#[pyfunction]
fn contains(set_json: &str, point: Vec<f64>) -> PyResult<bool> {
    let set = parse_set(set_json)?;
    set.membership(&point, 0.0).map_err(to_py)
}

/// Inner approximation and scaling; returns the result as JSON.
#[pyfunction]
#[pyo3(signature = (set_json, degree, eps = 1e-3, s_tol = 1e-3, mult_degree = None))]
fn approximate(set_json: &str, degree: u32, eps: f64, s_tol: f64, mult_degree: Option<u32>) -> PyResult<String> {
    let set = parse_set(set_json)?;
    let opts = ApproxOptions {
        eps,
        s_tol,
        mult_degree,
        ..ApproxOptions::default()
    };
    to_json(&run_approximate(&set, degree, &opts).map_err(to_py)?)
}

/// Outer kernel polytope from `samples` boundary points; returns the polytope as JSON.
#[pyfunction]
#[pyo3(signature = (set_json, samples = 2000, seed = 0))]
fn outer_kernel(set_json: &str, samples: usize, seed: u64) -> PyResult<String> {
    let set = parse_set(set_json)?;
    to_json(&run_outer_kernel(&set, samples, seed, &KernelOptions::default()).map_err(to_py)?)
}

/// Inner kernel polytope over `directions` support directions; returns the polytope as JSON.
#[pyfunction]
#[pyo3(signature = (set_json, directions = 64, mult_degree = 2, seed = 0))]
fn inner_kernel(set_json: &str, directions: usize, mult_degree: u32, seed: u64) -> PyResult<String> {
    let set = parse_set(set_json)?;
    let dirs = support_directions(set.n(), directions, seed);
    let k = run_inner_kernel(&set, &dirs, mult_degree, &SolverOptions::default()).map_err(to_py)?;
    to_json(&k.polytope)
}

/// Grid-counting volume over the set's bounding box.
#[pyfunction]
#[pyo3(signature = (set_json, resolution = GRID_RESOLUTION))]
fn volume_grid(set_json: &str, resolution: usize) -> PyResult<f64> {
    let set = parse_set(set_json)?;
    let bounds = set.bounding_box(720, 0.05, &RayOptions::default()).map_err(to_py)?;
    let v = run_volume_grid(|x| set.contains(x), &bounds, resolution).map_err(to_py)?;
    Ok(v.value)
}

#[pymodule]
fn starset_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(contains, m)?)?;
    m.add_function(wrap_pyfunction!(approximate, m)?)?;
    m.add_function(wrap_pyfunction!(outer_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(inner_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(volume_grid, m)?)?;
    Ok(())
}
