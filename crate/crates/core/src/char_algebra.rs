//! Torus characters: group elements, half-integer monomials, symmetric
//! functions and factored rational closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vanishing factor is declared below this modulus.
pub const POLE_TOL: f64 = 1e-12;

/// Element diag(e^{iθ₁},…,e^{iθₙ}) of the n-torus.
///
/// Angles are kept exactly as given. λ_k^{1/2} is e^{iθ_k/2}, so shifting
/// θ_k by 2π flips the sign of the square root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusElement {
    angles: Vec<f64>,
}

impl TorusElement {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Invalid(
                "torus element needs at least one angle".into(),
            ));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("torus angles must be finite".into()));
        }
        Ok(Self { angles })
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.angles[k])
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn inverse(&self) -> Self {
        Self {
            angles: self.angles.iter().map(|a| -a).collect(),
        }
    }

    pub fn det(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angles.iter().sum())
    }

    /// det(g)^{1/2} on the branch fixed by the stored angles.
    pub fn sqrt_det(&self) -> Complex64 {
        Complex64::from_polar(1.0, 0.5 * self.angles.iter().sum::<f64>())
    }

    /// det(I − g)
    pub fn det_one_minus(&self) -> Complex64 {
        self.eigenvalues()
            .iter()
            .map(|l| Complex64::new(1.0, 0.0) - l)
            .product()
    }

    pub fn has_unit_eigenvalue(&self) -> bool {
        self.eigenvalues()
            .iter()
            .any(|l| (l - 1.0).norm() < POLE_TOL)
    }
}

/// coeff · z^{e} with half-integer exponents stored doubled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfIntMonomial {
    pub coeff: Complex64,
    doubled: Vec<i64>,
}

impl HalfIntMonomial {
    pub fn new(coeff: Complex64, doubled: Vec<i64>) -> Self {
        Self { coeff, doubled }
    }

    /// Monomial with integer exponents.
    pub fn integer(coeff: Complex64, exps: &[i64]) -> Self {
        Self {
            coeff,
            doubled: exps.iter().map(|e| 2 * e).collect(),
        }
    }

    pub fn constant(coeff: Complex64, n: usize) -> Self {
        Self {
            coeff,
            doubled: vec![0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.doubled.len()
    }

    pub fn doubled(&self) -> &[i64] {
        &self.doubled
    }

    pub fn exps(&self) -> Vec<f64> {
        self.doubled.iter().map(|&d| d as f64 / 2.0).collect()
    }

    pub fn eval(&self, g: &TorusElement) -> Result<Complex64> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: g.dim(),
            });
        }
        let phase: f64 = self
            .doubled
            .iter()
            .zip(g.angles())
            .map(|(&d, &t)| 0.5 * d as f64 * t)
            .sum();
        Ok(self.coeff * Complex64::from_polar(1.0, phase))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            coeff: self.coeff * other.coeff,
            doubled: self
                .doubled
                .iter()
                .zip(&other.doubled)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            coeff: self.coeff.inv(),
            doubled: self.doubled.iter().map(|d| -d).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeff: self.coeff * c,
            doubled: self.doubled.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A monomial together with its damping weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub monomial: HalfIntMonomial,
    pub grading: f64,
}

impl Factor {
    pub fn new(monomial: HalfIntMonomial, grading: f64) -> Self {
        Self { monomial, grading }
    }

    fn damped(&self, g: &TorusElement, s: f64) -> Result<Complex64> {
        Ok(self.monomial.eval(g)? * (-s * self.grading).exp())
    }
}

/// prefactor · Π(1 ± m) / Π(1 − m), each m damped by e^{−s·grading}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoredCharacter {
    pub prefactor: HalfIntMonomial,
    pub numerator: Vec<(Sign, Factor)>,
    pub denominator: Vec<Factor>,
}

impl FactoredCharacter {
    pub fn new(
        prefactor: HalfIntMonomial,
        numerator: Vec<(Sign, Factor)>,
        denominator: Vec<Factor>,
    ) -> Result<Self> {
        let n = prefactor.dim();
        for f in numerator.iter().map(|(_, f)| f).chain(&denominator) {
            if f.monomial.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: f.monomial.dim(),
                });
            }
            if !(f.grading >= 0.0) {
                return Err(Error::Invalid("gradings must be nonnegative".into()));
            }
        }
        Ok(Self {
            prefactor,
            numerator,
            denominator,
        })
    }

    pub fn dim(&self) -> usize {
        self.prefactor.dim()
    }

    pub fn eval(&self, g: &TorusElement, s: f64) -> Result<Complex64> {
        let mut value = self.prefactor.eval(g)?;
        for (sign, f) in &self.numerator {
            value *= 1.0 + sign.value() * f.damped(g, s)?;
        }
        for (i, f) in self.denominator.iter().enumerate() {
            let d = 1.0 - f.damped(g, s)?;
            if d.norm() < POLE_TOL {
                return Err(Error::Pole {
                    factor: format!("denominator #{i}"),
                });
            }
            value /= d;
        }
        Ok(value)
    }

    /// Smallest positive grading; every grading must be a multiple of it.
    pub fn grading_unit(&self) -> Result<f64> {
        let gradings: Vec<f64> = self
            .numerator
            .iter()
            .map(|(_, f)| f.grading)
            .chain(self.denominator.iter().map(|f| f.grading))
            .collect();
        let unit = gradings
            .iter()
            .copied()
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min);
        if !unit.is_finite() {
            return Ok(1.0);
        }
        for w in gradings {
            let r = w / unit;
            if (r - r.round()).abs() > 1e-9 {
                return Err(Error::Invalid(format!(
                    "grading {w} is not a multiple of {unit}"
                )));
            }
        }
        Ok(unit)
    }

    /// Coefficients c_L of the expansion Σ_L c_L q^L, q = e^{−s·unit}, for
    /// L < levels. Denominator factors of grading 0 have no expansion.
    pub fn level_series(
        &self,
        g: &TorusElement,
        levels: usize,
        unit: f64,
    ) -> Result<Vec<Complex64>> {
        let step = |w: f64| -> Result<usize> {
            let r = w / unit;
            if (r - r.round()).abs() > 1e-9 {
                return Err(Error::Invalid(format!(
                    "grading {w} is not a multiple of {unit}"
                )));
            }
            Ok(r.round() as usize)
        };
        let mut c = vec![Complex64::new(0.0, 0.0); levels];
        if levels == 0 {
            return Ok(c);
        }
        c[0] = self.prefactor.eval(g)?;
        for (sign, f) in &self.numerator {
            let d = step(f.grading)?;
            let m = sign.value() * f.monomial.eval(g)?;
            if d == 0 {
                c.iter_mut().for_each(|x| *x *= 1.0 + m);
                continue;
            }
            for l in (d..levels).rev() {
                let prev = c[l - d];
                c[l] += m * prev;
            }
        }
        for f in &self.denominator {
            let d = step(f.grading)?;
            if d == 0 {
                return Err(Error::Invalid("denominator factor of grading 0".into()));
            }
            let m = f.monomial.eval(g)?;
            for l in d..levels {
                let prev = c[l - d];
                c[l] += m * prev;
            }
        }
        Ok(c)
    }
}

/// H_0,…,H_{a_max} at the given eigenvalues.
pub fn complete_homogeneous_upto(a_max: usize, eigs: &[Complex64]) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); a_max + 1];
    h[0] = Complex64::new(1.0, 0.0);
    // multiply by 1/(1 − λt) one variable at a time
    for &l in eigs {
        for a in 1..=a_max {
            let prev = h[a - 1];
            h[a] += l * prev;
        }
    }
    h
}

pub fn complete_homogeneous(a: usize, g: &TorusElement) -> Complex64 {
    complete_homogeneous_upto(a, &g.eigenvalues())[a]
}

/// Schur character det(λ_i^{w_j+n−j}) / det(λ_i^{n−j}); weight given doubled.
pub fn schur_bialternant(doubled_weight: &[i64], g: &TorusElement) -> Result<Complex64> {
    let n = g.dim();
    if doubled_weight.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: doubled_weight.len(),
        });
    }
    if doubled_weight.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Invalid("weight must be weakly decreasing".into()));
    }
    let th = g.angles();
    let num = DMatrix::from_fn(n, n, |i, j| {
        let e = 0.5 * doubled_weight[j] as f64 + (n - 1 - j) as f64;
        Complex64::from_polar(1.0, th[i] * e)
    });
    let den = DMatrix::from_fn(n, n, |i, j| {
        Complex64::from_polar(1.0, th[i] * (n - 1 - j) as f64)
    });
    let d = den.determinant();
    if d.norm() < 1e-10 {
        return Err(Error::ConfluentElement);
    }
    Ok(num.determinant() / d)
}
