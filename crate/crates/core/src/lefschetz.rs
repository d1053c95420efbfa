//! Smooth fixed-point contributions, the η₁/η₂ series of odd spheres, a
//! caller-fed evaluator for shifted spectra of η₃ type, and global
//! Lefschetz sums.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::char_algebra::{complete_homogeneous_upto, HalfIntMonomial, TorusElement, POLE_TOL};
use crate::error::{Error, Result};
use crate::gelfand_robbin::{xi_with_predomain, Predomain, TraceMethod};
use crate::model_cones::{xi_tilde_closed, ConeModel, ConeVariant, Twist};
use crate::regularize::{
    extrapolate_zero, hurwitz_zeta, window, zeta_sum, LimitEstimate, SeriesBounds, SeriesValue,
    SpectralSeries,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointDatum {
    /// Tangent characters χ_i.
    pub weights: Vec<HalfIntMonomial>,
    pub twist: Twist,
    pub label: String,
}

/// √χ with each exponent halved; needs integer exponents.
fn half_monomial(m: &HalfIntMonomial) -> Result<HalfIntMonomial> {
    if m.doubled().iter().any(|d| d % 2 != 0) {
        return Err(Error::Invalid(
            "spin square root needs integer tangent weights".into(),
        ));
    }
    Ok(HalfIntMonomial::new(
        m.coeff.sqrt(),
        m.doubled().iter().map(|d| d / 2).collect(),
    ))
}

/// Dolbeault Π 1/(1−χ_i); spin Π √χ_i/(1−χ_i).
pub fn smooth_contribution(fp: &FixedPointDatum, g: &TorusElement) -> Result<Complex64> {
    let mut value = Complex64::new(1.0, 0.0);
    for w in &fp.weights {
        let chi = w.eval(g)?;
        let d = 1.0 - chi;
        if d.norm() < POLE_TOL {
            return Err(Error::UnitWeight(fp.label.clone()));
        }
        value /= d;
        if fp.twist == Twist::Spin {
            value *= half_monomial(w)?.eval(g)?;
        }
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularPoint {
    pub label: String,
    pub model: ConeModel,
    pub predomain: Option<Predomain>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModel {
    pub fixed_points: Vec<FixedPointDatum>,
    pub singular_points: Vec<SingularPoint>,
    pub expected_total: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assembly {
    pub total: Complex64,
    pub breakdown: Vec<(String, Complex64)>,
}

impl Assembly {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,re,im\n");
        for (label, v) in &self.breakdown {
            out.push_str(&format!("{label},{:.16e},{:.16e}\n", v.re, v.im));
        }
        out.push_str(&format!(
            "total,{:.16e},{:.16e}\n",
            self.total.re, self.total.im
        ));
        out
    }
}

pub fn singular_contribution(p: &SingularPoint, g: &TorusElement) -> Result<Complex64> {
    match (&p.predomain, &p.model.variant) {
        (None, _) => xi_tilde_closed(&p.model, g),
        (Some(w), ConeVariant::CircleCone { alpha }) if *alpha == w.alpha => {
            Ok(xi_with_predomain(w, g.angles()[0], TraceMethod::Closed)?.xi)
        }
        (Some(_), _) => Err(Error::Invalid(format!(
            "predomain at {} must belong to a circle cone of the same alpha",
            p.label
        ))),
    }
}

pub fn assemble(model: &GlobalModel, g: &TorusElement) -> Result<Assembly> {
    let mut breakdown = Vec::new();
    for fp in &model.fixed_points {
        breakdown.push((fp.label.clone(), smooth_contribution(fp, g)?));
    }
    for p in &model.singular_points {
        breakdown.push((p.label.clone(), singular_contribution(p, g)?));
    }
    let total = breakdown.iter().map(|b| b.1).sum();
    Ok(Assembly { total, breakdown })
}

fn mono(exps: &[i64]) -> HalfIntMonomial {
    HalfIntMonomial::integer(Complex64::new(1.0, 0.0), exps)
}

/// Projective closure of Z² = XY with the (λ, μ) action: smooth fixed
/// points a₁, a₂ and the cone vertex v. The local sums add up to 1
/// (Dolbeault) and 0 (spin).
pub fn quadric_global(twist: Twist) -> Result<GlobalModel> {
    Ok(GlobalModel {
        fixed_points: vec![
            FixedPointDatum {
                weights: vec![mono(&[-1, 1]), mono(&[-2, 0])],
                twist,
                label: "a1".into(),
            },
            FixedPointDatum {
                weights: vec![mono(&[1, -1]), mono(&[0, -2])],
                twist,
                label: "a2".into(),
            },
        ],
        singular_points: vec![SingularPoint {
            label: "v".into(),
            model: ConeModel::quadric(twist)?,
            predomain: None,
        }],
        expected_total: Some(Complex64::new(
            if twist == Twist::Dolbeault { 1.0 } else { 0.0 },
            0.0,
        )),
    })
}

/// The unit disc as a cone of angle 2π.
pub fn disc_as_cone() -> Result<GlobalModel> {
    Ok(GlobalModel {
        fixed_points: vec![],
        singular_points: vec![SingularPoint {
            label: "origin".into(),
            model: ConeModel::circle(crate::Rational::from_integer(1))?,
            predomain: None,
        }],
        expected_total: None,
    })
}

/// The unit disc with its smooth fixed point, weight λ.
pub fn disc_smooth() -> GlobalModel {
    GlobalModel {
        fixed_points: vec![FixedPointDatum {
            weights: vec![mono(&[1])],
            twist: Twist::Dolbeault,
            label: "origin".into(),
        }],
        singular_points: vec![],
        expected_total: None,
    }
}

/// Spin Dirac eigenvalue scale (2n−1+2a)/(2√2) shared by η₁ and η₂.
fn sphere_weight(n: usize, a: usize) -> f64 {
    (2 * n + 2 * a - 1) as f64 / (2.0 * SQRT_2)
}

fn sphere_series(n: usize, prefactor: Complex64, h: Vec<Complex64>) -> SpectralSeries {
    let bounds = SeriesBounds {
        coeff_bound: prefactor.norm(),
        degree: n as u32 - 1,
        weight_floor: 1.0 / (2.0 * SQRT_2),
    };
    SpectralSeries::new(h.len(), bounds, move |a| {
        (sphere_weight(n, a), prefactor * h[a])
    })
}

/// η₁ = (−1)ⁿ det^{1/2} Σ_a w_a^{−s} H_a(g) and
/// η₂ = det^{−1/2} Σ_a w_a^{−s} H_a(g⁻¹) on S^{2n−1}.
pub fn eta12_series(g: &TorusElement, s: f64, cutoff: usize) -> Result<(SeriesValue, SeriesValue)> {
    let (s1, s2) = eta12_streams(g, cutoff)?;
    Ok((zeta_sum(&s1, s)?, zeta_sum(&s2, s)?))
}

fn eta12_streams(g: &TorusElement, cutoff: usize) -> Result<(SpectralSeries, SpectralSeries)> {
    if g.has_unit_eigenvalue() {
        return Err(Error::NonIsolatedFixedLocus("g has eigenvalue 1".into()));
    }
    let n = g.dim();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let h1 = complete_homogeneous_upto(cutoff.saturating_sub(1), &g.eigenvalues());
    let h2 = complete_homogeneous_upto(cutoff.saturating_sub(1), &g.inverse().eigenvalues());
    Ok((
        sphere_series(n, sign * g.sqrt_det(), h1),
        sphere_series(n, g.sqrt_det().inv(), h2),
    ))
}

/// Closed forms of η₁(g,0) and η₂(g,0).
pub fn eta12_closed(g: &TorusElement) -> (Complex64, Complex64) {
    let sign = if g.dim().is_multiple_of(2) { 1.0 } else { -1.0 };
    let eta1 = sign * g.sqrt_det() / g.det_one_minus();
    let eta2 = g.sqrt_det().inv() / g.inverse().det_one_minus();
    (eta1, eta2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eta12Limits {
    pub eta1: LimitEstimate,
    pub eta2: LimitEstimate,
    pub closed1: Complex64,
    pub closed2: Complex64,
}

pub fn eta12_limits(g: &TorusElement, cutoff: usize, grid: &[f64]) -> Result<Eta12Limits> {
    let (s1, s2) = eta12_streams(g, cutoff)?;
    let eta1 = extrapolate_zero(|s| zeta_sum(&s1, s).map(|v| v.value), grid)?;
    let eta2 = extrapolate_zero(|s| zeta_sum(&s2, s).map(|v| v.value), grid)?;
    let (closed1, closed2) = eta12_closed(g);
    Ok(Eta12Limits {
        eta1,
        eta2,
        closed1,
        closed2,
    })
}

type CoeffFn = dyn Fn(usize, usize, usize) -> Complex64 + Send + Sync;

/// Caller-supplied traces c(a, r, b) = Tr(g | V_{μ(a,r,b)}), r = 0..n−1.
#[derive(Clone)]
pub enum TraceStream {
    /// General coefficients with |c(a,r,b)| ≤ C(1+a+b)^degree.
    General {
        coeff: Arc<CoeffFn>,
        growth_degree: Option<u32>,
    },
    /// Per r, the aggregated C_r(m) = Σ_{a+b=m} c(a,r,b) as a polynomial
    /// in m (coefficients in increasing degree).
    Polynomial { slices: Vec<Vec<f64>> },
}

impl std::fmt::Debug for TraceStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceStream::General { growth_degree, .. } => {
                write!(
                    f,
                    "TraceStream::General {{ growth_degree: {growth_degree:?} }}"
                )
            }
            TraceStream::Polynomial { slices } => {
                write!(f, "TraceStream::Polynomial {{ {slices:?} }}")
            }
        }
    }
}

impl TraceStream {
    pub fn general<F>(coeff: F, growth_degree: Option<u32>) -> Self
    where
        F: Fn(usize, usize, usize) -> Complex64 + Send + Sync + 'static,
    {
        TraceStream::General {
            coeff: Arc::new(coeff),
            growth_degree,
        }
    }
}

/// The two shifts p₁(r), p₂(r): eigenvalues are (p + 2m)/(2√2), m = a+b.
pub fn eta3_shifts(n: usize, r: usize) -> (i64, i64) {
    let (n, r) = (n as i64, r as i64);
    let parity = |e: i64| if e.rem_euclid(2) == 0 { 1 } else { -1 };
    (
        parity(n + r) + 2 * n,
        parity(n + r - 1) + 2 * (n - 2 * r - 2),
    )
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Σ_{m≥0} C(m) sign(y)|y|^{−s}, y = m + p/2, C a polynomial, via Hurwitz
/// zeta for the positive part.
fn hurwitz_shifted(poly: &[f64], p: i64, s: f64, r: usize) -> Result<f64> {
    let shift = p as f64 / 2.0;
    let eval = |m: f64| poly.iter().rev().fold(0.0, |acc, q| acc * m + q);
    let mut m0 = 0usize;
    let mut total = 0.0;
    while m0 as f64 + shift <= 0.0 {
        let y = m0 as f64 + shift;
        if y == 0.0 {
            return Err(Error::ZeroEigenvalue { r, m: m0 });
        }
        total -= eval(m0 as f64) * y.abs().powf(-s);
        m0 += 1;
    }
    // C(m) = Σ_j d_j y^j with m = y − shift
    let deg = poly.len();
    let mut d = vec![0.0; deg];
    for (k, q) in poly.iter().enumerate() {
        for j in 0..=k {
            d[j] += q * binomial(k, j) * (-shift).powi((k - j) as i32);
        }
    }
    let a = m0 as f64 + shift;
    for (j, dj) in d.iter().enumerate() {
        if *dj != 0.0 {
            total += dj * hurwitz_zeta(s - j as f64, a)?;
        }
    }
    Ok(total)
}

/// η₃(s) = Σ_r [Σ_m C_r(m) λ₁^{−s} − Σ_m C_r(m) λ₂^{−s}], signs of
/// nonpositive eigenvalues carried as sign(λ)|λ|^{−s}.
pub fn eta3_pluggable(stream: &TraceStream, n: usize, s: f64, cutoff: usize) -> Result<Complex64> {
    match stream {
        TraceStream::Polynomial { slices } => {
            if slices.len() > n {
                return Err(Error::Invalid(format!(
                    "{} slices for r < {n}",
                    slices.len()
                )));
            }
            let scale = 2f64.powf(s / 2.0);
            let mut total = 0.0;
            for (r, poly) in slices.iter().enumerate() {
                let (p1, p2) = eta3_shifts(n, r);
                total += hurwitz_shifted(poly, p1, s, r)? - hurwitz_shifted(poly, p2, s, r)?;
            }
            Ok(Complex64::new(scale * total, 0.0))
        }
        TraceStream::General {
            coeff,
            growth_degree,
            ..
        } => {
            growth_degree.ok_or(Error::MissingGrowthBound)?;
            let terms = eta3_terms(coeff.as_ref(), n, cutoff)?;
            Ok(eigenvalue_window(&terms, s).0)
        }
    }
}

/// (|λ|, sign(λ)·(±C_r(m))) for every r, both shifts and m < cutoff.
fn eta3_terms(coeff: &CoeffFn, n: usize, cutoff: usize) -> Result<Vec<(f64, Complex64)>> {
    let mut terms = Vec::with_capacity(4 * n * cutoff);
    for r in 0..n {
        let (p1, p2) = eta3_shifts(n, r);
        for m in 0..cutoff {
            let c: Complex64 = (0..=m).map(|a| coeff(a, r, m - a)).sum();
            for (p, sign) in [(p1, 1.0), (p2, -1.0)] {
                let lambda = p + 2 * m as i64;
                if lambda == 0 {
                    return Err(Error::ZeroEigenvalue { r, m });
                }
                terms.push((
                    (lambda.abs() as f64) / (2.0 * SQRT_2),
                    sign * lambda.signum() as f64 * c,
                ));
            }
        }
    }
    Ok(terms)
}

/// Σ c |λ|^{−s} φ(|λ|/Λ) with one cutoff Λ in the eigenvalue shared by all
/// shifted streams, so their polynomially divergent parts cancel; returns
/// the value and its change against Λ → 3Λ/4.
fn eigenvalue_window(terms: &[(f64, Complex64)], s: f64) -> (Complex64, f64) {
    let max = terms.iter().map(|t| t.0).fold(0.0, f64::max);
    // every stream is complete below 0.9·max once the cutoff exceeds ~10n
    let lambda = 0.9 * max;
    let sum = |cut: f64| -> Complex64 {
        terms
            .iter()
            .filter(|t| t.0 < cut)
            .map(|(w, c)| c * w.powf(-s) * window(w / cut))
            .sum()
    };
    let value = sum(lambda);
    (value, (value - sum(0.75 * lambda)).norm())
}

pub fn eta3_limit(
    stream: &TraceStream,
    n: usize,
    cutoff: usize,
    grid: &[f64],
) -> Result<LimitEstimate> {
    extrapolate_zero(|s| eta3_pluggable(stream, n, s, cutoff), grid)
}

/// (1/k) Σ_l 1/(1 − ĉ^l e^{−iφ/k}), ĉ = e^{−2πi/k}.
pub fn teardrop_local(k: u32, phi: f64) -> Complex64 {
    let c = Complex64::from_polar(1.0, -2.0 * PI / k as f64);
    let z = Complex64::from_polar(1.0, -phi / k as f64);
    (0..k)
        .map(|l| (1.0 - c.powi(l as i32) * z).inv())
        .sum::<Complex64>()
        / k as f64
}

/// Quadric identity on a grid of angle pairs, evaluated in parallel.
pub fn quadric_sweep(twist: Twist, angles: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let model = quadric_global(twist)?;
    angles
        .par_iter()
        .map(|&(a, b)| assemble(&model, &TorusElement::new(vec![a, b])?).map(|x| x.total))
        .collect()
}
