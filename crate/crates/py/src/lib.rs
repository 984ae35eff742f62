//! Thin Python layer. Scalars cross the boundary as text, results of the
//! larger computations as JSON strings.

use std::sync::Arc;

use padic_tree::hida::{ordinary_lift, FormSpace, LiftOptions};
use padic_tree::integral::mult_integral_divisor;
use padic_tree::measure::HarmonicMeasure;
use padic_tree::mumford::{build_quotient, l_invariant, periods as period_data, GroupPackage, PeriodMap, QuotientGraph, SchottkyGroup};
use padic_tree::tree::{reduction, ExtPoint, TreePoint, TreeVertex};
use padic_tree::{FieldDesc, PadicScalar};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field(p: u64, f: usize, prec: i64) -> PyResult<Arc<FieldDesc>> {
    FieldDesc::unramified(p, f, prec).map_err(err)
}

/// τ given in ℚ_{p^{2f}}.
fn ext_point(k: &Arc<FieldDesc>, tau: &str) -> PyResult<ExtPoint> {
    let l = field(k.p, 2 * k.f, k.n)?;
    let t = PadicScalar::parse(&l, tau).map_err(err)?;
    ExtPoint::new(t, k).map_err(err)
}

fn quotient(package_json: &str, prec: i64, depth: i64) -> PyResult<QuotientGraph> {
    let pkg: GroupPackage = serde_json::from_str(package_json).map_err(err)?;
    let g = SchottkyGroup::from_package(&pkg, prec).map_err(err)?;
    build_quotient(&g, depth).map_err(err)
}

/// Canonical text of a scalar in ℚ_{p^f}, e.g. normalizing "p^{0} * (1 + 3*g) mod p^12".
#[pyfunction]
fn normalize(p: u64, f: usize, prec: i64, x: &str) -> PyResult<String> {
    Ok(PadicScalar::parse(&field(p, f, prec)?, x).map_err(err)?.to_string())
}

/// Iwasawa logarithm (log p = 0).
#[pyfunction]
fn iwasawa_log(p: u64, f: usize, prec: i64, x: &str) -> PyResult<String> {
    let x = PadicScalar::parse(&field(p, f, prec)?, x).map_err(err)?;
    Ok(x.iwasawa_log().map_err(err)?.to_string())
}

#[pyfunction]
fn neighbors(p: u64, f: usize, prec: i64, vertex: &str) -> PyResult<Vec<String>> {
    let v = TreeVertex::parse(&field(p, f, prec)?, vertex).map_err(err)?;
    Ok(v.neighbors().iter().map(ToString::to_string).collect())
}

#[pyfunction]
fn distance(p: u64, f: usize, prec: i64, a: &str, b: &str) -> PyResult<i64> {
    let k = field(p, f, prec)?;
    let (a, b) = (TreeVertex::parse(&k, a).map_err(err)?, TreeVertex::parse(&k, b).map_err(err)?);
    Ok(a.distance(&b))
}

/// Reduction of τ ∈ ℚ_{p^{2f}} \ K: a vertex "V(..)" or an edge "E(..)".
#[pyfunction]
fn reduce(p: u64, f: usize, prec: i64, tau: &str) -> PyResult<String> {
    let k = field(p, f, prec)?;
    Ok(match reduction(&ext_point(&k, tau)?).map_err(err)? {
        TreePoint::Vertex(v) => v.to_string(),
        TreePoint::Midpoint(e) => e.to_string(),
    })
}

/// ×∫ of a degree-zero divisor against the Tate measure, as JSON.
#[pyfunction]
fn integrate_tate(p: u64, f: usize, prec: i64, depth: i64, divisor: Vec<(i64, String)>) -> PyResult<String> {
    let k = field(p, f, prec)?;
    let div = divisor.iter().map(|(n, t)| Ok((*n, ext_point(&k, t)?))).collect::<PyResult<Vec<_>>>()?;
    let x = mult_integral_divisor(&HarmonicMeasure::tate(&k), &div, depth).map_err(err)?;
    serde_json::to_string(&x.to_json().map_err(err)?).map_err(err)
}

/// Period matrix rows as scalar text.
#[pyfunction]
fn periods(package_json: &str, prec: i64, depth: i64) -> PyResult<Vec<Vec<String>>> {
    let per = period_data(&quotient(package_json, prec, depth)?, depth).map_err(err)?;
    Ok(per.rows.iter().map(|r| r.components.iter().map(ToString::to_string).collect()).collect())
}

/// ℒ-invariant matrix; `phi` is "log", "ord" or "log_norm".
#[pyfunction]
#[pyo3(signature = (package_json, prec, depth, phi="log"))]
fn linvariant(package_json: &str, prec: i64, depth: i64, phi: &str) -> PyResult<Vec<Vec<String>>> {
    let phi = match phi {
        "log" => PeriodMap::Log,
        "ord" => PeriodMap::Ord,
        "log_norm" => PeriodMap::LogNorm,
        _ => return Err(PyValueError::new_err(format!("unknown phi {phi}"))),
    };
    let per = period_data(&quotient(package_json, prec, depth)?, depth).map_err(err)?;
    let lin = l_invariant(&per, phi).map_err(err)?;
    Ok(lin.matrix.iter().map(|r| r.iter().map(|x| x.truncate_abs(per.guaranteed_prec).to_string()).collect()).collect())
}

/// Ordinary lift of integer weight-two values (one per quotient edge, in
/// quotient order). Returns (α coefficients, eigen residual valuation).
#[pyfunction]
#[pyo3(signature = (package_json, values, prec, depth, iterations=6, moments=4, germ_order=2))]
fn lift(
    package_json: &str,
    values: Vec<i64>,
    prec: i64,
    depth: i64,
    iterations: usize,
    moments: usize,
    germ_order: usize,
) -> PyResult<(Vec<String>, i64)> {
    let q = quotient(package_json, prec, depth)?;
    let space = Arc::new(FormSpace::new(&q).map_err(err)?);
    let phi = space.weight_two(&values).map_err(err)?;
    let opts = LiftOptions { iterations, moments, depth_cap: depth.min(prec), germ_order, period: None };
    let lf = ordinary_lift(&space, &phi, &opts).map_err(err)?;
    Ok((lf.alpha.to_json().coeffs, lf.eigen_residual().map_err(err)?))
}

#[pymodule]
fn padic_tree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(iwasawa_log, m)?)?;
    m.add_function(wrap_pyfunction!(neighbors, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_tate, m)?)?;
    m.add_function(wrap_pyfunction!(periods, m)?)?;
    m.add_function(wrap_pyfunction!(linvariant, m)?)?;
    m.add_function(wrap_pyfunction!(lift, m)?)?;
    Ok(())
}
