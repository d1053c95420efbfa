//! Gelfand–Robbin sections of circle cones that violate the spectral Witt
//! condition, their boundary pairing, predomains W with adjoints W*, and
//! the ξ̃ of the rolled-up extension selected by W.
//!
//! On the cone of angle 2πα (z = x e^{iθ}, 0 ≤ θ < 2πα) the holomorphic
//! block is τ_j = c z^{−j/α} for 0 < j < α and the dual block is
//! s_j = c' z̄^{j/α−1} dz̄. A rotation by φ acts on both by λ^{−j},
//! λ = e^{iφ/α}.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::char_algebra::TorusElement;
use crate::error::{Error, Result};
use crate::model_cones::{neumann_character, ConeModel};
use crate::quadrature::{integrate_2d, Rule, DEFAULT_REL_TOL};
use crate::Rational;

const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormDegree {
    Zero,
    ZeroOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrSection {
    pub radial_exponent: Rational,
    /// Frequency of the coefficient function in θ.
    pub angular_index: Rational,
    /// j in τ_j or s_j.
    pub mode: i64,
    pub degree: FormDegree,
    pub norm_const: f64,
}

impl GrSection {
    /// Coefficient function (of dz̄ for the dual block) at (x, θ).
    pub fn eval(&self, x: f64, theta: f64) -> Complex64 {
        self.norm_const * self.eval_unnormalized(x, theta)
    }

    pub fn eval_unnormalized(&self, x: f64, theta: f64) -> Complex64 {
        let e = self.radial_exponent.to_f64().unwrap_or(f64::NAN);
        let w = self.angular_index.to_f64().unwrap_or(f64::NAN);
        Complex64::from_polar(x.powf(e), w * theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrBasis {
    pub alpha: Rational,
    pub holomorphic: Vec<GrSection>,
    pub dual: Vec<GrSection>,
}

impl GrBasis {
    pub fn dim(&self) -> usize {
        self.holomorphic.len()
    }
}

fn alpha_f64(alpha: Rational) -> f64 {
    alpha.to_f64().unwrap_or(f64::NAN)
}

/// (2πα ∫₀¹ x^{2e+1} dx)^{−1/2} = (2πα/(2e+2))^{−1/2}
pub fn l2_normalize(exponent: Rational, alpha: Rational) -> Result<f64> {
    if exponent <= Rational::from_integer(-1) {
        return Err(Error::NotL2(exponent.to_string()));
    }
    if !alpha.is_positive() {
        return Err(Error::Invalid("alpha must be positive".into()));
    }
    let e = exponent.to_f64().unwrap_or(f64::NAN);
    Ok((2.0 * PI * alpha_f64(alpha) / (2.0 * e + 2.0)).powf(-0.5))
}

/// Same constant from a 2D quadrature of |x^e|² x over the truncated cone,
/// after substituting x = u^q (q the denominator of e) so the radial
/// integrand is a polynomial.
pub fn l2_normalize_quadrature(exponent: Rational, alpha: Rational) -> Result<f64> {
    if exponent <= Rational::from_integer(-1) {
        return Err(Error::NotL2(exponent.to_string()));
    }
    let q = *exponent.denom() as i32;
    let e = exponent.to_f64().unwrap_or(f64::NAN);
    let f = |u: f64, _theta: f64| {
        let x = u.powi(q);
        Complex64::new(x.powf(2.0 * e) * x * q as f64 * u.powi(q - 1), 0.0)
    };
    let v = integrate_2d(
        &Rule::default(),
        &f,
        (0.0, 1.0),
        (0.0, 2.0 * PI * alpha_f64(alpha)),
        DEFAULT_REL_TOL,
    )?;
    Ok(v.re.powf(-0.5))
}

pub fn gr_basis(alpha: Rational) -> Result<GrBasis> {
    if !alpha.is_positive() {
        return Err(Error::Invalid("alpha must be positive".into()));
    }
    let mut holomorphic = Vec::new();
    let mut dual = Vec::new();
    let mut j = 1i64;
    while Rational::from_integer(j) < alpha {
        let e = -Rational::from_integer(j) / alpha;
        holomorphic.push(GrSection {
            radial_exponent: e,
            angular_index: e,
            mode: j,
            degree: FormDegree::Zero,
            norm_const: l2_normalize(e, alpha)?,
        });
        // z̄^{e'} = x^{e'} e^{−i e' θ}
        let e_dual = Rational::from_integer(j) / alpha - 1;
        dual.push(GrSection {
            radial_exponent: e_dual,
            angular_index: -e_dual,
            mode: j,
            degree: FormDegree::ZeroOne,
            norm_const: l2_normalize(e_dual, alpha)?,
        });
        j += 1;
    }
    Ok(GrBasis {
        alpha,
        holomorphic,
        dual,
    })
}

/// [s, τ] = ∫₀^{2πα} e^{−iθ} s(1, θ) conj(τ(1, θ)) dθ by quadrature.
pub fn boundary_pairing(
    dual: &GrSection,
    hol: &GrSection,
    alpha: Rational,
    normalized: bool,
) -> Result<Complex64> {
    let f = |theta: f64| {
        let (s, t) = if normalized {
            (dual.eval(1.0, theta), hol.eval(1.0, theta))
        } else {
            (
                dual.eval_unnormalized(1.0, theta),
                hol.eval_unnormalized(1.0, theta),
            )
        };
        Complex64::from_polar(1.0, -theta) * s * t.conj()
    };
    Rule::default().adaptive(&f, 0.0, 2.0 * PI * alpha_f64(alpha), DEFAULT_REL_TOL)
}

pub fn boundary_pairing_closed(
    dual: &GrSection,
    hol: &GrSection,
    alpha: Rational,
    normalized: bool,
) -> Complex64 {
    if dual.mode != hol.mode {
        return Complex64::new(0.0, 0.0);
    }
    let c = if normalized {
        dual.norm_const * hol.norm_const
    } else {
        1.0
    };
    Complex64::new(2.0 * PI * alpha_f64(alpha) * c, 0.0)
}

/// Rows: dual block, columns: holomorphic block, normalized sections.
pub fn pairing_matrix(basis: &GrBasis) -> DMatrix<Complex64> {
    let n = basis.dim();
    DMatrix::from_fn(n, n, |m, k| {
        boundary_pairing_closed(&basis.dual[m], &basis.holomorphic[k], basis.alpha, true)
    })
}

pub fn pairing_matrix_quadrature(basis: &GrBasis) -> Result<DMatrix<Complex64>> {
    let n = basis.dim();
    let mut p = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for m in 0..n {
        for k in 0..n {
            p[(m, k)] = boundary_pairing(&basis.dual[m], &basis.holomorphic[k], basis.alpha, true)?;
        }
    }
    Ok(p)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Orthonormal basis of the span, dropping dependent vectors.
fn gram_schmidt(vectors: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                let c = dot(&w, e);
                w.iter_mut().zip(e).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&w, &w).re.sqrt();
        if norm > 1e-10 {
            out.push(w.iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// A subspace W of the holomorphic GR block and its adjoint W* in the dual
/// block. Both spans are stored orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Predomain {
    pub alpha: Rational,
    pub coeffs: Vec<Vec<Complex64>>,
    pub adjoint_coeffs: Vec<Vec<Complex64>>,
}

impl Predomain {
    pub fn new(alpha: Rational, span: Vec<Vec<Complex64>>) -> Result<Self> {
        let basis = gr_basis(alpha)?;
        let n = basis.dim();
        for v in &span {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if span.len() == 1 {
            let norm = dot(&span[0], &span[0]).re.sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                warn!("predomain vector has norm {norm}; normalizing");
            }
        }
        let coeffs = gram_schmidt(&span);
        if coeffs.len() != span.len() {
            return Err(Error::Invalid(
                "predomain spanning vectors are linearly dependent".into(),
            ));
        }
        let adjoint_coeffs = adjoint_predomain(&basis, &coeffs)?;
        Ok(Self {
            alpha,
            coeffs,
            adjoint_coeffs,
        })
    }

    pub fn minimal(alpha: Rational) -> Result<Self> {
        Self::new(alpha, vec![])
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }
}

/// W* = {v : [Σ v_m s_m, Σ w_k τ_k] = 0 for all w ∈ W}.
pub fn adjoint_predomain(basis: &GrBasis, span: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let p = pairing_matrix(basis);
    let n = basis.dim();
    if (0..n).any(|j| p[(j, j)].norm() < DEGENERACY_TOL) {
        return Err(Error::DegeneratePairing);
    }
    // v annihilates w iff ⟨v, conj(P conj(w))⟩ = 0
    let constraints: Vec<Vec<Complex64>> = span
        .iter()
        .map(|w| {
            (0..n)
                .map(|m| {
                    (0..n)
                        .map(|k| p[(m, k)] * w[k].conj())
                        .sum::<Complex64>()
                        .conj()
                })
                .collect()
        })
        .collect();
    let taken = gram_schmidt(&constraints);
    if taken.len() != span.len() {
        return Err(Error::DegeneratePairing);
    }
    let mut all = taken.clone();
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        all.push(e);
    }
    Ok(gram_schmidt(&all).split_off(taken.len()))
}

/// Compressed trace tr(G⁻¹M) with G the Gram matrix of the span and
/// M_ab = ⟨T w_b, w_a⟩.
fn compressed_trace(gram: &DMatrix<Complex64>, m: &DMatrix<Complex64>) -> Result<Complex64> {
    if gram.nrows() == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inv = gram.clone().try_inverse().ok_or(Error::DegeneratePairing)?;
    Ok((inv * m).trace())
}

/// Tr of the rotation by φ on span{Σ w_j (section)_j}, exact in λ.
pub fn trace_closed(
    sections: &[GrSection],
    span: &[Vec<Complex64>],
    alpha: Rational,
    phi: f64,
) -> Result<Complex64> {
    let lam = Complex64::from_polar(1.0, phi / alpha_f64(alpha));
    let k = span.len();
    let gram = DMatrix::from_fn(k, k, |a, b| dot(&span[b], &span[a]));
    let m = DMatrix::from_fn(k, k, |a, b| {
        sections
            .iter()
            .enumerate()
            .map(|(j, sec)| lam.powi(-sec.mode as i32) * span[b][j] * span[a][j].conj())
            .sum()
    });
    compressed_trace(&gram, &m)
}

/// Same trace from L² inner products of the rotated sections over the
/// truncated cone x ≤ 1. On (0,1)-forms the pullback also rotates dz̄.
pub fn trace_quadrature(
    sections: &[GrSection],
    span: &[Vec<Complex64>],
    alpha: Rational,
    phi: f64,
) -> Result<Complex64> {
    let k = span.len();
    if k == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // x = u^q turns every x^{e+e'+1} dx into a polynomial in u
    let q = sections
        .iter()
        .map(|s| *s.radial_exponent.denom())
        .fold(1, |a, b| a.lcm(&b)) as i32;
    let frame = |theta_shift: f64| match sections.first().map(|s| s.degree) {
        Some(FormDegree::ZeroOne) => Complex64::from_polar(1.0, -theta_shift),
        _ => Complex64::new(1.0, 0.0),
    };
    let field = |w: &[Complex64], x: f64, theta: f64| -> Complex64 {
        sections
            .iter()
            .zip(w)
            .map(|(s, c)| c * s.eval(x, theta))
            .sum()
    };
    let rule = Rule::default();
    let inner = |a: usize, b: usize, shift: f64| -> Result<Complex64> {
        let f = |u: f64, theta: f64| {
            let x = u.powi(q);
            let jac = x * q as f64 * u.powi(q - 1);
            frame(shift)
                * field(&span[b], x, theta + shift)
                * field(&span[a], x, theta).conj()
                * jac
        };
        integrate_2d(
            &rule,
            &f,
            (0.0, 1.0),
            (0.0, 2.0 * PI * alpha_f64(alpha)),
            DEFAULT_REL_TOL,
        )
    };
    let mut gram = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    let mut m = gram.clone();
    for a in 0..k {
        for b in 0..k {
            gram[(a, b)] = inner(a, b, 0.0)?;
            m[(a, b)] = inner(a, b, phi)?;
        }
    }
    compressed_trace(&gram, &m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    Closed,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredomainXi {
    /// ½(N_W + D_W)
    pub xi: Complex64,
    /// W = 0, i.e. 1/(1−λ)
    pub xi_min: Complex64,
    /// Neumann side with W
    pub neumann: Complex64,
    /// adjoint side with W*
    pub dirichlet: Complex64,
    pub trace_w: Complex64,
    pub trace_w_star: Complex64,
    /// ½(N_min + D with the dual GR block removed)
    pub reference: Complex64,
    /// reference + ½(Tr T|_W − Tr T*|_{W*})
    pub correction_form: Complex64,
}

pub fn xi_with_predomain(w: &Predomain, phi: f64, method: TraceMethod) -> Result<PredomainXi> {
    let alpha = w.alpha;
    let basis = gr_basis(alpha)?;
    let lam = Complex64::from_polar(1.0, phi / alpha_f64(alpha));
    if (lam - 1.0).norm() < 1e-12 {
        return Err(Error::NonIsolatedFixedLocus(
            "rotation acts trivially on the link".into(),
        ));
    }
    let model = ConeModel::circle(alpha)?;
    let n_min = neumann_character(&model, &TorusElement::new(vec![phi])?)?.eval(0.0)?;
    // −Σ_{j ≥ α} λ^{−j}
    let j0 = alpha.ceil().to_integer() as i32;
    let d_rest = -lam.powi(-j0) / (1.0 - lam.inv());
    let (trace_w, trace_w_star) = match method {
        TraceMethod::Closed => (
            trace_closed(&basis.holomorphic, &w.coeffs, alpha, phi)?,
            trace_closed(&basis.dual, &w.adjoint_coeffs, alpha, phi)?,
        ),
        TraceMethod::Quadrature => (
            trace_quadrature(&basis.holomorphic, &w.coeffs, alpha, phi)?,
            trace_quadrature(&basis.dual, &w.adjoint_coeffs, alpha, phi)?,
        ),
    };
    let neumann = n_min + trace_w;
    let dirichlet = d_rest - trace_w_star;
    let reference = 0.5 * (n_min + d_rest);
    Ok(PredomainXi {
        xi: 0.5 * (neumann + dirichlet),
        xi_min: (1.0 - lam).inv(),
        neumann,
        dirichlet,
        trace_w,
        trace_w_star,
        reference,
        correction_form: reference + 0.5 * (trace_w - trace_w_star),
    })
}
