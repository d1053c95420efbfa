//! Python bindings for `conic_xi`.
//!
//! Cone models are named the same way as in run configs: `flat_cn`, `circle`,
//! `quadric`, `cyclic`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use conic_xi::char_algebra::TorusElement;
use conic_xi::cli::{self, CliError, RawConfig};
use conic_xi::gelfand_robbin::{xi_with_predomain as gr_xi, Predomain, TraceMethod};
use conic_xi::lefschetz::{self, TraceStream};
use conic_xi::model_cones::{self, parse_alpha, ConeModel, Twist};
use conic_xi::regularize::{hurwitz_zeta as hz, DEFAULT_S_GRID};
use conic_xi::spectral_partition::{self, L2Convention, Sector};

fn err(e: conic_xi::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn twist(name: &str) -> PyResult<Twist> {
    match name {
        "dolbeault" => Ok(Twist::Dolbeault),
        "spin" => Ok(Twist::Spin),
        _ => Err(PyValueError::new_err(format!(
            "unknown twist {name:?}; use dolbeault or spin"
        ))),
    }
}

fn element(angles: Vec<f64>) -> PyResult<TorusElement> {
    TorusElement::new(angles).map_err(err)
}

fn model(
    kind: &str,
    n: Option<usize>,
    alpha: Option<&str>,
    k: Option<u32>,
    weights: Option<Vec<i64>>,
    tw: &str,
) -> PyResult<ConeModel> {
    let tw = twist(tw)?;
    let need = |what: &str| PyValueError::new_err(format!("{kind} model needs {what}"));
    let m = match kind {
        "flat_cn" => ConeModel::flat(n.ok_or_else(|| need("n"))?, tw),
        "quadric" => ConeModel::quadric(tw),
        "circle" => {
            let a = parse_alpha(alpha.ok_or_else(|| need("alpha"))?).map_err(err)?;
            ConeModel::circle(a)
        }
        "cyclic" => ConeModel::cyclic(
            k.ok_or_else(|| need("k"))?,
            weights.ok_or_else(|| need("weights"))?,
        ),
        _ => return Err(PyValueError::new_err(format!("unknown model {kind:?}"))),
    };
    m.map_err(err)
}

/// Regularized ξ̃ by extrapolating the heat-damped character to s = 0.
/// Returns (value, error_bound).
#[pyfunction]
#[pyo3(signature = (model_kind, angles, n=None, alpha=None, k=None, weights=None, twist="dolbeault"))]
fn xi_tilde(
    model_kind: &str,
    angles: Vec<f64>,
    n: Option<usize>,
    alpha: Option<&str>,
    k: Option<u32>,
    weights: Option<Vec<i64>>,
    twist: &str,
) -> PyResult<(Complex64, f64)> {
    let m = model(model_kind, n, alpha, k, weights, twist)?;
    let est = model_cones::xi_tilde(&m, &element(angles)?).map_err(err)?;
    Ok((est.value, est.error_bound))
}

/// ξ̃ from the closed rational character.
#[pyfunction]
#[pyo3(signature = (model_kind, angles, n=None, alpha=None, k=None, weights=None, twist="dolbeault"))]
fn xi_tilde_closed(
    model_kind: &str,
    angles: Vec<f64>,
    n: Option<usize>,
    alpha: Option<&str>,
    k: Option<u32>,
    weights: Option<Vec<i64>>,
    twist: &str,
) -> PyResult<Complex64> {
    let m = model(model_kind, n, alpha, k, weights, twist)?;
    model_cones::xi_tilde_closed(&m, &element(angles)?).map_err(err)
}

/// ξ on the circle cone from the sector partition of the link spectrum.
/// Returns (xi, xi_h1, xi_h2, xi_h3).
#[pyfunction]
#[pyo3(signature = (alpha, phi, cutoff=2000, convention="theorem_a"))]
fn xi_spectral_circle(
    alpha: &str,
    phi: f64,
    cutoff: usize,
    convention: &str,
) -> PyResult<(Complex64, Complex64, Complex64, Complex64)> {
    let conv = match convention {
        "theorem_a" => L2Convention::TheoremA,
        "volume_form" => L2Convention::VolumeForm,
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown convention {convention:?}"
            )))
        }
    };
    let a = parse_alpha(alpha).map_err(err)?;
    let r = spectral_partition::xi_spectral_circle(a, phi, cutoff, conv, &DEFAULT_S_GRID)
        .map_err(err)?;
    let h = |sec| r.sector(sec).limit.value;
    Ok((
        r.total_limit.value,
        h(Sector::H1),
        h(Sector::H2),
        h(Sector::H3),
    ))
}

/// ξ on the circle cone with a Gelfand–Robbin predomain spanned by `span`.
#[pyfunction]
#[pyo3(signature = (alpha, phi, span=None))]
fn xi_with_predomain(
    alpha: &str,
    phi: f64,
    span: Option<Vec<Vec<Complex64>>>,
) -> PyResult<Complex64> {
    let a = parse_alpha(alpha).map_err(err)?;
    let w = match span {
        Some(s) => Predomain::new(a, s),
        None => Predomain::minimal(a),
    }
    .map_err(err)?;
    Ok(gr_xi(&w, phi, TraceMethod::Closed).map_err(err)?.xi)
}

/// Lefschetz sum over the quadric's fixed points: list of (label, value) and the total.
#[pyfunction]
#[pyo3(signature = (angles, twist="dolbeault"))]
fn quadric_lefschetz(
    angles: Vec<f64>,
    twist: &str,
) -> PyResult<(Vec<(String, Complex64)>, Complex64)> {
    let global = lefschetz::quadric_global(self::twist(twist)?).map_err(err)?;
    let a = lefschetz::assemble(&global, &element(angles)?).map_err(err)?;
    Ok((a.breakdown, a.total))
}

/// (η₁, η₂) limits on the sphere for the rotation `angles`.
#[pyfunction]
#[pyo3(signature = (angles, cutoff=300))]
fn eta12(angles: Vec<f64>, cutoff: usize) -> PyResult<(Complex64, Complex64)> {
    let l = lefschetz::eta12_limits(&element(angles)?, cutoff, &DEFAULT_S_GRID).map_err(err)?;
    Ok((l.eta1.value, l.eta2.value))
}

/// η₃ for trace coefficients polynomial in a and b: `slices[r]` holds the
/// coefficients of C_r(m) in m = a + b.
#[pyfunction]
#[pyo3(signature = (slices, n, cutoff=400))]
fn eta3_polynomial(slices: Vec<Vec<f64>>, n: usize, cutoff: usize) -> PyResult<(Complex64, f64)> {
    let stream = TraceStream::Polynomial { slices };
    let est = lefschetz::eta3_limit(&stream, n, cutoff, &DEFAULT_S_GRID).map_err(err)?;
    Ok((est.value, est.error_bound))
}

#[pyfunction]
fn hurwitz_zeta(s: f64, a: f64) -> PyResult<f64> {
    hz(s, a).map_err(err)
}

#[pyfunction]
fn teardrop_local(k: u32, phi: f64) -> Complex64 {
    lefschetz::teardrop_local(k, phi)
}

/// Runs a config given as JSON text (same keys as the CLI config file) and
/// returns the results document as JSON. No files are written.
#[pyfunction]
fn run(config_json: &str) -> PyResult<String> {
    let raw: RawConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("config error: {e}")))?;
    let cfg = raw.validate().map_err(cli_err)?;
    Ok(cli::run(&cfg).map_err(cli_err)?.to_json())
}

#[pymodule(name = "conic_xi")]
fn conic_xi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(xi_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(xi_tilde_closed, m)?)?;
    m.add_function(wrap_pyfunction!(xi_spectral_circle, m)?)?;
    m.add_function(wrap_pyfunction!(xi_with_predomain, m)?)?;
    m.add_function(wrap_pyfunction!(quadric_lefschetz, m)?)?;
    m.add_function(wrap_pyfunction!(eta12, m)?)?;
    m.add_function(wrap_pyfunction!(eta3_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(hurwitz_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(teardrop_local, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
