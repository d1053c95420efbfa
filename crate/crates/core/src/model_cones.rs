//! Catalog of model cones with the characters of their ∂̄-Neumann and
//! adjoint local cohomology, and the complex equivariant ξ̃ built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::char_algebra::{Factor, FactoredCharacter, HalfIntMonomial, Sign, TorusElement};
use crate::error::{Error, Result};
use crate::regularize::{
    extrapolate_zero, zeta_sum, LimitEstimate, SeriesBounds, SeriesValue, SpectralSeries,
};
use crate::Rational;

/// Levels of the character expansion used for zeta-weighted sums.
pub const DEFAULT_LEVELS: usize = 4000;

/// Grid for heat-damped closed forms. A damped factor 1/(1 − e^{−s}m) has
/// its pole at |s| ≈ |1 − m|, so the samples stay well inside that radius.
pub const HEAT_S_GRID: [f64; 6] = [0.05, 0.025, 0.0125, 0.00625, 0.003125, 0.0015625];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Twist {
    Dolbeault,
    Spin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeVariant {
    FlatCn {
        n: usize,
    },
    /// Cone over a circle of length 2πα.
    CircleCone {
        alpha: Rational,
    },
    /// Vertex of Z² = XY, i.e. C²/±1.
    QuadricConeVertex,
    /// C^n / Z_k, generator acting by e^{2πi w_j/k}.
    CyclicQuotient {
        k: u32,
        weights: Vec<i64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel {
    pub variant: ConeVariant,
    pub twist: Twist,
}

impl ConeModel {
    pub fn new(variant: ConeVariant, twist: Twist) -> Result<Self> {
        match &variant {
            ConeVariant::FlatCn { n } if *n == 0 => {
                return Err(Error::Invalid("FlatCn needs n >= 1".into()))
            }
            ConeVariant::CircleCone { alpha } if !alpha.is_positive() => {
                return Err(Error::Invalid("alpha must be positive".into()))
            }
            ConeVariant::CyclicQuotient { k, weights } => {
                if *k == 0 {
                    return Err(Error::Invalid("k must be a positive integer".into()));
                }
                if weights.is_empty() {
                    return Err(Error::Invalid(
                        "cyclic quotient needs at least one weight".into(),
                    ));
                }
            }
            _ => {}
        }
        let spin_ok = matches!(
            variant,
            ConeVariant::FlatCn { .. } | ConeVariant::QuadricConeVertex
        );
        if twist == Twist::Spin && !spin_ok {
            return Err(Error::Invalid(
                "spin twist needs a declared square root of the canonical bundle (FlatCn, quadric)"
                    .into(),
            ));
        }
        Ok(Self { variant, twist })
    }

    pub fn flat(n: usize, twist: Twist) -> Result<Self> {
        Self::new(ConeVariant::FlatCn { n }, twist)
    }

    pub fn circle(alpha: Rational) -> Result<Self> {
        Self::new(ConeVariant::CircleCone { alpha }, Twist::Dolbeault)
    }

    pub fn quadric(twist: Twist) -> Result<Self> {
        Self::new(ConeVariant::QuadricConeVertex, twist)
    }

    pub fn cyclic(k: u32, weights: Vec<i64>) -> Result<Self> {
        Self::new(ConeVariant::CyclicQuotient { k, weights }, Twist::Dolbeault)
    }

    /// Number of angles a group element must carry.
    pub fn element_dim(&self) -> usize {
        match &self.variant {
            ConeVariant::FlatCn { n } => *n,
            ConeVariant::CircleCone { .. } => 1,
            ConeVariant::QuadricConeVertex => 2,
            ConeVariant::CyclicQuotient { weights, .. } => weights.len(),
        }
    }

    pub fn name(&self) -> String {
        let twist = match self.twist {
            Twist::Dolbeault => "dolbeault",
            Twist::Spin => "spin",
        };
        match &self.variant {
            ConeVariant::FlatCn { n } => format!("flat_cn(n={n}, {twist})"),
            ConeVariant::CircleCone { alpha } => format!("circle_cone(alpha={alpha})"),
            ConeVariant::QuadricConeVertex => format!("quadric({twist})"),
            ConeVariant::CyclicQuotient { k, weights } => format!("cyclic(k={k}, w={weights:?})"),
        }
    }

    /// The torus element at which the closed forms are evaluated. For a
    /// circle cone, g = [φ] is a rotation by φ and acts on z^{1/α} by
    /// e^{iφ/α}; otherwise g is used as is.
    pub fn local_element(&self, g: &TorusElement) -> Result<TorusElement> {
        if g.dim() != self.element_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.element_dim(),
                got: g.dim(),
            });
        }
        match &self.variant {
            ConeVariant::CircleCone { alpha } => {
                TorusElement::new(vec![g.angles()[0] / alpha.to_f64().unwrap_or(f64::NAN)])
            }
            _ => Ok(g.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyCharacter {
    /// Summed; a single term except for cyclic quotients.
    pub closed_form: Vec<FactoredCharacter>,
    pub basis_note: String,
    pub boundary: Boundary,
    pub parity_sign: i8,
    pub element: TorusElement,
}

impl CohomologyCharacter {
    pub fn eval(&self, s: f64) -> Result<Complex64> {
        self.closed_form
            .iter()
            .map(|c| c.eval(&self.element, s))
            .sum()
    }

    /// min |1 − m(g)| over the denominator factors.
    pub fn min_pole_gap(&self) -> Result<f64> {
        let mut gap = f64::INFINITY;
        for c in &self.closed_form {
            for f in &c.denominator {
                gap = gap.min((1.0 - f.monomial.eval(&self.element)?).norm());
            }
        }
        Ok(gap)
    }

    /// Common grading step of all terms.
    pub fn grading_unit(&self) -> Result<f64> {
        let units = self
            .closed_form
            .iter()
            .map(|c| c.grading_unit())
            .collect::<Result<Vec<_>>>()?;
        let unit = units.iter().copied().fold(f64::INFINITY, f64::min);
        if units
            .iter()
            .any(|u| ((u / unit) - (u / unit).round()).abs() > 1e-9)
        {
            return Err(Error::Invalid("incommensurable gradings".into()));
        }
        Ok(unit)
    }

    /// Coefficient of each grading level L·unit.
    pub fn level_series(&self, levels: usize) -> Result<(Vec<Complex64>, f64)> {
        let unit = self.grading_unit()?;
        let mut total = vec![Complex64::new(0.0, 0.0); levels];
        for c in &self.closed_form {
            for (t, x) in total
                .iter_mut()
                .zip(c.level_series(&self.element, levels, unit)?)
            {
                *t += x;
            }
        }
        Ok((total, unit))
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn unit_vec(n: usize, k: usize, e: i64) -> Vec<i64> {
    let mut v = vec![0; n];
    v[k] = e;
    v
}

fn flat_character(n: usize, twist: Twist, boundary: Boundary) -> Result<FactoredCharacter> {
    let (sign_exp, pref_doubled, note_sign) = match boundary {
        Boundary::Neumann => (1, 0, 1.0),
        Boundary::Dirichlet => (-1, -2, if n.is_multiple_of(2) { 1.0 } else { -1.0 }),
    };
    let spin_shift = if twist == Twist::Spin { 1 } else { 0 };
    let prefactor = HalfIntMonomial::new(
        Complex64::new(note_sign, 0.0),
        vec![pref_doubled + spin_shift; n],
    );
    let den = (0..n)
        .map(|k| {
            Factor::new(
                HalfIntMonomial::integer(one(), &unit_vec(n, k, sign_exp)),
                1.0,
            )
        })
        .collect();
    FactoredCharacter::new(prefactor, vec![], den)
}

fn circle_character(alpha: Rational, boundary: Boundary) -> Result<FactoredCharacter> {
    let step = 1.0 / alpha.to_f64().unwrap_or(f64::NAN);
    match boundary {
        Boundary::Neumann => FactoredCharacter::new(
            HalfIntMonomial::constant(one(), 1),
            vec![],
            vec![Factor::new(HalfIntMonomial::integer(one(), &[1]), step)],
        ),
        Boundary::Dirichlet => FactoredCharacter::new(
            HalfIntMonomial::integer(-one(), &[-1]),
            vec![],
            vec![Factor::new(HalfIntMonomial::integer(one(), &[-1]), step)],
        ),
    }
}

fn quadric_character(twist: Twist, boundary: Boundary) -> Result<FactoredCharacter> {
    let e = match boundary {
        Boundary::Neumann => 1,
        Boundary::Dirichlet => -1,
    };
    let spin = if twist == Twist::Spin { 1 } else { 0 };
    let pref = match boundary {
        Boundary::Neumann => vec![spin, spin],
        Boundary::Dirichlet => vec![-2 + spin, -2 + spin],
    };
    FactoredCharacter::new(
        HalfIntMonomial::new(one(), pref),
        vec![(
            Sign::Plus,
            Factor::new(HalfIntMonomial::integer(one(), &[e, e]), 1.0),
        )],
        vec![
            Factor::new(HalfIntMonomial::integer(one(), &[2 * e, 0]), 1.0),
            Factor::new(HalfIntMonomial::integer(one(), &[0, 2 * e]), 1.0),
        ],
    )
}

fn root_of_unity(k: u32, p: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (p.rem_euclid(k as i64)) as f64 / k as f64)
}

/// Molien average over the group: one factored term per group element.
fn cyclic_characters(
    k: u32,
    weights: &[i64],
    boundary: Boundary,
) -> Result<Vec<FactoredCharacter>> {
    let n = weights.len();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    (0..k as i64)
        .map(|l| {
            let phases: Vec<Complex64> = weights.iter().map(|w| root_of_unity(k, l * w)).collect();
            match boundary {
                Boundary::Neumann => FactoredCharacter::new(
                    HalfIntMonomial::constant(Complex64::new(1.0 / k as f64, 0.0), n),
                    vec![],
                    (0..n)
                        .map(|j| {
                            Factor::new(
                                HalfIntMonomial::integer(phases[j], &unit_vec(n, j, 1)),
                                1.0,
                            )
                        })
                        .collect(),
                ),
                Boundary::Dirichlet => {
                    let inv: Complex64 = phases.iter().map(|p| p.inv()).product();
                    FactoredCharacter::new(
                        HalfIntMonomial::integer(inv * (sign / k as f64), &vec![-1; n]),
                        vec![],
                        (0..n)
                            .map(|j| {
                                Factor::new(
                                    HalfIntMonomial::integer(phases[j].inv(), &unit_vec(n, j, -1)),
                                    1.0,
                                )
                            })
                            .collect(),
                    )
                }
            }
        })
        .collect()
}

fn basis_note(model: &ConeModel, boundary: Boundary) -> String {
    let spin = if model.twist == Twist::Spin {
        ", times det^{1/2}"
    } else {
        ""
    };
    let text = match (&model.variant, boundary) {
        (ConeVariant::FlatCn { .. }, Boundary::Neumann) => "monomials z^m, m in N^n, weight |m|",
        (ConeVariant::FlatCn { .. }, Boundary::Dirichlet) => {
            "forms zbar^m dzbar_1..dzbar_n, weight |m|, parity (-1)^n"
        }
        (ConeVariant::CircleCone { .. }, Boundary::Neumann) => "z^{k/alpha}, k >= 0, weight k/alpha",
        (ConeVariant::CircleCone { .. }, Boundary::Dirichlet) => {
            "zbar^{j/alpha-1} dzbar, j >= 1, weight (j-1)/alpha, parity -1"
        }
        (ConeVariant::QuadricConeVertex, Boundary::Neumann) => {
            "x^a y^b and z x^a y^b on z^2 = xy, weight a+b (+1 for z)"
        }
        (ConeVariant::QuadricConeVertex, Boundary::Dirichlet) => {
            "invariant forms ubar^p vbar^q dubar dvbar on the double cover, p+q even, weight (p+q)/2"
        }
        (ConeVariant::CyclicQuotient { .. }, Boundary::Neumann) => {
            "invariant monomials z^m with sum w_i m_i = 0 mod k, weight |m|"
        }
        (ConeVariant::CyclicQuotient { .. }, Boundary::Dirichlet) => {
            "invariant forms zbar^m dzbar_1..dzbar_n, sum w_i (m_i+1) = 0 mod k, parity (-1)^n"
        }
    };
    format!("{text}{spin}")
}

fn character(
    model: &ConeModel,
    g: &TorusElement,
    boundary: Boundary,
) -> Result<CohomologyCharacter> {
    let element = model.local_element(g)?;
    let closed_form = match &model.variant {
        ConeVariant::FlatCn { n } => vec![flat_character(*n, model.twist, boundary)?],
        ConeVariant::CircleCone { alpha } => vec![circle_character(*alpha, boundary)?],
        ConeVariant::QuadricConeVertex => vec![quadric_character(model.twist, boundary)?],
        ConeVariant::CyclicQuotient { k, weights } => cyclic_characters(*k, weights, boundary)?,
    };
    let n = model.element_dim();
    let parity_sign = match (boundary, &model.variant) {
        (Boundary::Neumann, _) => 1,
        (Boundary::Dirichlet, ConeVariant::QuadricConeVertex) => 1,
        (Boundary::Dirichlet, _) => {
            if n.is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
    };
    let ch = CohomologyCharacter {
        closed_form,
        basis_note: basis_note(model, boundary),
        boundary,
        parity_sign,
        element,
    };
    match ch.eval(0.0) {
        Err(Error::Pole { .. }) => Err(Error::NonIsolatedFixedLocus(format!(
            "{} has a fixed direction at g = {:?}",
            model.name(),
            g.angles()
        ))),
        Err(e) => Err(e),
        Ok(_) => Ok(ch),
    }
}

pub fn neumann_character(model: &ConeModel, g: &TorusElement) -> Result<CohomologyCharacter> {
    character(model, g, Boundary::Neumann)
}

/// Adjoint complex; T acts through T* on forms, so monomials appear with
/// inverted exponents.
pub fn dirichlet_character(model: &ConeModel, g: &TorusElement) -> Result<CohomologyCharacter> {
    character(model, g, Boundary::Dirichlet)
}

/// ½(N + D) at s = 0 from the closed forms.
pub fn xi_tilde_closed(model: &ConeModel, g: &TorusElement) -> Result<Complex64> {
    let n = neumann_character(model, g)?;
    let d = dirichlet_character(model, g)?;
    Ok(0.5 * (n.eval(0.0)? + d.eval(0.0)?))
}

/// ½(N(s) + D(s)) with heat damping, extrapolated to s = 0.
pub fn xi_tilde(model: &ConeModel, g: &TorusElement) -> Result<LimitEstimate> {
    xi_tilde_on_grid(model, g, &HEAT_S_GRID)
}

pub fn xi_tilde_on_grid(
    model: &ConeModel,
    g: &TorusElement,
    grid: &[f64],
) -> Result<LimitEstimate> {
    let n = neumann_character(model, g)?;
    let d = dirichlet_character(model, g)?;
    extrapolate_zero(|s| Ok(0.5 * (n.eval(s)? + d.eval(s)?)), grid)
}

/// Σ_L c_L (1 + L·unit)^{−s} over grading levels of the character.
pub fn zeta_supertrace(ch: &CohomologyCharacter, s: f64, levels: usize) -> Result<SeriesValue> {
    let (coeffs, unit) = ch.level_series(levels)?;
    let bound = coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c.norm() / (1.0 + l as f64).powi(ch.element.dim() as i32 - 1))
        .fold(0.0, f64::max);
    let bounds = SeriesBounds {
        coeff_bound: bound,
        degree: ch.element.dim() as u32 - 1,
        weight_floor: unit.min(1.0),
    };
    let series = SpectralSeries::new(levels, bounds, move |l| (1.0 + l as f64 * unit, coeffs[l]));
    zeta_sum(&series, s)
}

/// ξ̃ with zeta weights in place of heat damping.
pub fn xi_tilde_zeta(
    model: &ConeModel,
    g: &TorusElement,
    grid: &[f64],
    levels: usize,
) -> Result<LimitEstimate> {
    let n = neumann_character(model, g)?;
    let d = dirichlet_character(model, g)?;
    extrapolate_zero(
        |s| {
            Ok(0.5
                * (zeta_supertrace(&n, s, levels)?.value + zeta_supertrace(&d, s, levels)?.value))
        },
        grid,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisSum {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Σ over the box 0 ≤ m_i ≤ M of Π x_i^{m_i}, complement of the full sum.
fn box_tail(n: usize, x: f64, m: usize) -> f64 {
    let full = (1.0 - x).powi(-(n as i32));
    let inside = ((1.0 - x.powi(m as i32 + 1)) / (1.0 - x)).powi(n as i32);
    (full - inside).max(0.0)
}

fn for_each_in_box(n: usize, max: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; n];
    loop {
        f(&idx);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            idx[k] += 1;
            if idx[k] <= max {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Damped sum over an explicit monomial basis, truncated at `per_index`
/// in each exponent. Independent of the factored closed forms.
pub fn basis_sum(
    model: &ConeModel,
    boundary: Boundary,
    g: &TorusElement,
    s: f64,
    per_index: usize,
) -> Result<BasisSum> {
    if !(s > 0.0) {
        return Err(Error::NonPositiveS(s));
    }
    let el = model.local_element(g)?;
    let th = el.angles().to_vec();
    let n = el.dim();
    let spin_phase = if model.twist == Twist::Spin {
        0.5 * th.iter().sum::<f64>()
    } else {
        0.0
    };
    let mut total = Complex64::new(0.0, 0.0);
    let tail;
    match (&model.variant, boundary) {
        (ConeVariant::FlatCn { .. }, _) => {
            let (dir, shift, sign) = match boundary {
                Boundary::Neumann => (1.0, 0.0, 1.0),
                Boundary::Dirichlet => (-1.0, 1.0, if n % 2 == 0 { 1.0 } else { -1.0 }),
            };
            for_each_in_box(n, per_index, |m| {
                let phase: f64 = m
                    .iter()
                    .zip(&th)
                    .map(|(&mi, t)| dir * (mi as f64 + shift) * t)
                    .sum();
                let deg: usize = m.iter().sum();
                total += sign * Complex64::from_polar((-s * deg as f64).exp(), phase + spin_phase);
            });
            tail = box_tail(n, (-s).exp(), per_index);
        }
        (ConeVariant::CircleCone { alpha }, _) => {
            let step = 1.0 / alpha.to_f64().unwrap_or(f64::NAN);
            for k in 0..=per_index {
                let damp = (-s * k as f64 * step).exp();
                total += match boundary {
                    Boundary::Neumann => Complex64::from_polar(damp, k as f64 * th[0]),
                    Boundary::Dirichlet => -Complex64::from_polar(damp, -((k + 1) as f64) * th[0]),
                };
            }
            tail = box_tail(1, (-s * step).exp(), per_index);
        }
        (ConeVariant::QuadricConeVertex, _) => {
            // u^p v^q on the double cover, p + q even
            let max = 2 * per_index + 1;
            let (dir, shift) = match boundary {
                Boundary::Neumann => (1.0, 0.0),
                Boundary::Dirichlet => (-1.0, 1.0),
            };
            for p in 0..=max {
                for q in (p % 2..=max).step_by(2) {
                    let phase = dir * ((p as f64 + shift) * th[0] + (q as f64 + shift) * th[1]);
                    let damp = (-s * (p + q) as f64 / 2.0).exp();
                    total += Complex64::from_polar(damp, phase + spin_phase);
                }
            }
            tail = box_tail(2, (-s / 2.0).exp(), max);
        }
        (ConeVariant::CyclicQuotient { k, weights }, _) => {
            let k = *k as i64;
            let (dir, shift, sign) = match boundary {
                Boundary::Neumann => (1.0, 0, 1.0),
                Boundary::Dirichlet => (-1.0, 1, if n % 2 == 0 { 1.0 } else { -1.0 }),
            };
            for_each_in_box(n, per_index, |m| {
                let charge: i64 = m
                    .iter()
                    .zip(weights)
                    .map(|(&mi, w)| (mi as i64 + shift) * w)
                    .sum();
                if charge.rem_euclid(k) != 0 {
                    return;
                }
                let phase: f64 = m
                    .iter()
                    .zip(&th)
                    .map(|(&mi, t)| dir * (mi as i64 + shift) as f64 * t)
                    .sum();
                let deg: usize = m.iter().sum();
                total += sign * Complex64::from_polar((-s * deg as f64).exp(), phase);
            });
            tail = box_tail(n, (-s).exp(), per_index);
        }
    }
    Ok(BasisSum {
        value: total,
        tail_bound: tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrosscheckEntry {
    pub series: Complex64,
    pub closed_form: Complex64,
    pub abs_diff: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub model: String,
    pub s: f64,
    pub per_index: usize,
    pub neumann: CrosscheckEntry,
    pub dirichlet: CrosscheckEntry,
}

pub fn series_crosscheck(
    model: &ConeModel,
    g: &TorusElement,
    s: f64,
    per_index: usize,
) -> Result<CrosscheckReport> {
    let entry = |boundary: Boundary| -> Result<CrosscheckEntry> {
        let ch = character(model, g, boundary)?;
        let closed = ch.eval(s)?;
        let b = basis_sum(model, boundary, g, s, per_index)?;
        Ok(CrosscheckEntry {
            series: b.value,
            closed_form: closed,
            abs_diff: (b.value - closed).norm(),
            tail_bound: b.tail_bound,
        })
    };
    Ok(CrosscheckReport {
        model: model.name(),
        s,
        per_index,
        neumann: entry(Boundary::Neumann)?,
        dirichlet: entry(Boundary::Dirichlet)?,
    })
}

/// Parse "p/q", an integer, or a decimal into a positive rational.
pub fn parse_alpha(text: &str) -> Result<Rational> {
    let text = text.trim();
    let r = if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad alpha {text:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad alpha {text:?}")))?;
        if q == 0 {
            return Err(Error::Invalid("alpha denominator is zero".into()));
        }
        Rational::new(p, q)
    } else if let Ok(p) = text.parse::<i64>() {
        Rational::from_integer(p)
    } else {
        let x: f64 = text
            .parse()
            .map_err(|_| Error::Invalid(format!("bad alpha {text:?}")))?;
        Rational::approximate_float(x)
            .ok_or_else(|| Error::Invalid(format!("bad alpha {text:?}")))?
    };
    if r.is_zero() || r.is_negative() {
        return Err(Error::Invalid("alpha must be positive".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularize::DEFAULT_S_GRID;

    fn g(angles: &[f64]) -> TorusElement {
        TorusElement::new(angles.to_vec()).unwrap()
    }

    #[test]
    fn flat_spin_neumann_example() {
        let m = ConeModel::flat(2, Twist::Spin).unwrap();
        let el = g(&[0.8, -2.1]);
        let v = neumann_character(&m, &el).unwrap().eval(0.0).unwrap();
        let (l1, l2) = (el.eigenvalue(0), el.eigenvalue(1));
        let expect = el.sqrt_det() / ((1.0 - l1) * (1.0 - l2));
        assert!((v - expect).norm() < 1e-14);
        let d = dirichlet_character(&m, &el).unwrap().eval(0.0).unwrap();
        let expect_d = el.sqrt_det().inv() / ((1.0 - l1.inv()) * (1.0 - l2.inv()));
        assert!((d - expect_d).norm() < 1e-14);
        assert!((v - d).norm() < 1e-13);
    }

    #[test]
    fn circle_alpha_three_min_domain() {
        let m = ConeModel::circle(Rational::from_integer(3)).unwrap();
        let phi = 1.2;
        let l = Complex64::from_polar(1.0, phi / 3.0);
        let v = neumann_character(&m, &g(&[phi]))
            .unwrap()
            .eval(0.0)
            .unwrap();
        assert!((v - (1.0 - l).inv()).norm() < 1e-14);
    }

    #[test]
    fn quadric_neumann_example() {
        let m = ConeModel::quadric(Twist::Dolbeault).unwrap();
        let el = g(&[0.5, 1.7]);
        let (l, mu) = (el.eigenvalue(0), el.eigenvalue(1));
        let v = neumann_character(&m, &el).unwrap().eval(0.0).unwrap();
        let expect = (1.0 + l * mu) / ((1.0 - l * l) * (1.0 - mu * mu));
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn unit_eigenvalue_is_out_of_scope() {
        let m = ConeModel::flat(2, Twist::Dolbeault).unwrap();
        assert!(matches!(
            neumann_character(&m, &g(&[0.0, 1.0])),
            Err(Error::NonIsolatedFixedLocus(_))
        ));
        assert!(matches!(
            xi_tilde(&m, &g(&[2.0 * PI, 1.0])),
            Err(Error::NonIsolatedFixedLocus(_))
        ));
    }

    #[test]
    fn spin_only_where_declared() {
        assert!(ConeModel::new(
            ConeVariant::CircleCone {
                alpha: Rational::from_integer(2)
            },
            Twist::Spin
        )
        .is_err());
        assert!(ConeModel::new(
            ConeVariant::CyclicQuotient {
                k: 3,
                weights: vec![1]
            },
            Twist::Spin
        )
        .is_err());
    }

    #[test]
    fn degeratu_closed_form_n2() {
        let m = ConeModel::flat(2, Twist::Spin).unwrap();
        let el = g(&[PI / 2.0, 2.0 * PI / 3.0]);
        let expect = el.sqrt_det() / el.det_one_minus();
        let closed = xi_tilde_closed(&m, &el).unwrap();
        assert!((closed - expect).norm() < 1e-8);
        let est = xi_tilde(&m, &el).unwrap();
        assert!((est.value - expect).norm() < 1e-8);
    }

    #[test]
    fn disc_rotation() {
        let m = ConeModel::circle(Rational::from_integer(1)).unwrap();
        let phi = 2.0 * PI / 7.0;
        let est = xi_tilde(&m, &g(&[phi])).unwrap();
        assert!((est.value - (1.0 - Complex64::from_polar(1.0, phi)).inv()).norm() < 1e-8);
    }

    #[test]
    fn cyclic_is_finite_average() {
        let phi = 1.1;
        for k in 2..=7u32 {
            let m = ConeModel::cyclic(k, vec![1]).unwrap();
            let el = g(&[-phi / k as f64]);
            let c = Complex64::from_polar(1.0, -2.0 * PI / k as f64);
            let avg: Complex64 = (0..k)
                .map(|l| {
                    (1.0 - c.powi(l as i32) * Complex64::from_polar(1.0, -phi / k as f64)).inv()
                })
                .sum::<Complex64>()
                / k as f64;
            assert!(
                (xi_tilde_closed(&m, &el).unwrap() - avg).norm() < 1e-12,
                "k={k}"
            );
        }
    }

    #[test]
    fn crosscheck_examples() {
        let quad = ConeModel::quadric(Twist::Dolbeault).unwrap();
        let r = series_crosscheck(&quad, &g(&[PI / 5.0, PI / 3.0]), 0.1, 300).unwrap();
        assert!(r.neumann.abs_diff < 1e-6 && r.dirichlet.abs_diff < 1e-6);

        let flat1 = ConeModel::flat(1, Twist::Dolbeault).unwrap();
        let r = series_crosscheck(&flat1, &g(&[0.9]), 0.2, 150).unwrap();
        let x = (-0.2f64).exp();
        assert!((r.neumann.tail_bound - x.powi(151) / (1.0 - x)).abs() < 1e-15);
        assert!(r.neumann.abs_diff <= r.neumann.tail_bound);

        let flat3 = ConeModel::flat(3, Twist::Spin).unwrap();
        let r = series_crosscheck(&flat3, &g(&[0.7, 2.3, -1.9]), 0.1, 200).unwrap();
        assert!(r.neumann.abs_diff < 1e-6 && r.dirichlet.abs_diff < 1e-6);
    }

    #[test]
    fn cyclic_crosscheck() {
        let m = ConeModel::cyclic(3, vec![1, 2]).unwrap();
        let r = series_crosscheck(&m, &g(&[0.4, 1.3]), 0.1, 300).unwrap();
        assert!(
            r.neumann.abs_diff < 1e-6 && r.dirichlet.abs_diff < 1e-6,
            "{r:?}"
        );
    }

    #[test]
    fn zeta_weights_same_limit() {
        let m = ConeModel::quadric(Twist::Spin).unwrap();
        let el = g(&[0.9, 2.6]);
        let z = xi_tilde_zeta(&m, &el, &DEFAULT_S_GRID, DEFAULT_LEVELS).unwrap();
        let closed = xi_tilde_closed(&m, &el).unwrap();
        assert!((z.value - closed).norm() < 1e-6, "{:?} vs {closed}", z);
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha("1/3").unwrap(), Rational::new(1, 3));
        assert_eq!(parse_alpha("3").unwrap(), Rational::from_integer(3));
        assert_eq!(parse_alpha("2.5").unwrap(), Rational::new(5, 2));
        assert_eq!(
            parse_alpha("0"),
            Err(Error::Invalid("alpha must be positive".into()))
        );
    }
}
