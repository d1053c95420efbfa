//! Regularized sums of weighted spectral series and s → 0 limits.

mod extrapolate;
mod hurwitz;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extrapolate::{
    extrapolate_samples, extrapolate_zero, validate_grid, ExtrapolationMethod, LimitEstimate,
    DEFAULT_S_GRID,
};
pub use hurwitz::hurwitz_zeta;

pub const DEFAULT_CUTOFF: usize = 2000;

/// Declared bounds: |c_j| ≤ coeff_bound·(1+j)^degree and
/// w_j ≥ weight_floor·(1+j), for every j including those past the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBounds {
    pub coeff_bound: f64,
    pub degree: u32,
    pub weight_floor: f64,
}

type TermFn = dyn Fn(usize) -> (f64, Complex64) + Send + Sync;

/// Restartable stream of (weight, coefficient) pairs in nondecreasing
/// weight order, truncated at `cutoff` terms.
#[derive(Clone)]
pub struct SpectralSeries {
    term: Arc<TermFn>,
    cutoff: usize,
    bounds: SeriesBounds,
}

impl std::fmt::Debug for SpectralSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSeries")
            .field("cutoff", &self.cutoff)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl SpectralSeries {
    pub fn new<F>(cutoff: usize, bounds: SeriesBounds, term: F) -> Self
    where
        F: Fn(usize) -> (f64, Complex64) + Send + Sync + 'static,
    {
        Self {
            term: Arc::new(term),
            cutoff,
            bounds,
        }
    }

    /// Finite list of (weight, coefficient); bounds are read off the list.
    pub fn from_terms(terms: Vec<(f64, Complex64)>) -> Self {
        let coeff_bound = terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
        let weight_floor = terms
            .iter()
            .enumerate()
            .map(|(j, t)| t.0 / (1 + j) as f64)
            .fold(f64::INFINITY, f64::min);
        let bounds = SeriesBounds {
            coeff_bound,
            degree: 0,
            weight_floor: if weight_floor.is_finite() {
                weight_floor
            } else {
                1.0
            },
        };
        let cutoff = terms.len();
        Self::new(cutoff, bounds, move |j| terms[j])
    }

    /// η-type series Σ sign(λ)|λ|^{−s}·trace from (eigenvalue, trace)
    /// pairs. Equal |λ| are merged first, so a symmetric spectrum with
    /// equal traces yields coefficients that are exactly zero.
    pub fn eta_from_spectrum(modes: &[(f64, Complex64)]) -> Result<Self> {
        if modes.iter().any(|m| m.0 == 0.0) {
            return Err(Error::ZeroWeight);
        }
        let mut signed: Vec<(f64, Complex64)> = modes
            .iter()
            .map(|&(l, c)| (l.abs(), c * l.signum()))
            .collect();
        signed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, Complex64)> = Vec::with_capacity(signed.len());
        for (w, c) in signed {
            match merged.last_mut() {
                Some(last) if last.0 == w => last.1 += c,
                _ => merged.push((w, c)),
            }
        }
        Ok(Self::from_terms(merged))
    }

    pub fn term(&self, j: usize) -> (f64, Complex64) {
        (self.term)(j)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn bounds(&self) -> SeriesBounds {
        self.bounds
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Self {
            term: self.term.clone(),
            cutoff,
            bounds: self.bounds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    Abel,
    ZetaSharp,
    ZetaSmoothWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub method: SumMethod,
}

fn checked_terms(series: &SpectralSeries) -> Result<Vec<(f64, Complex64)>> {
    let mut out = Vec::with_capacity(series.cutoff);
    let mut last = f64::NEG_INFINITY;
    for j in 0..series.cutoff {
        let t = series.term(j);
        if !(t.0 >= last) {
            return Err(Error::Invalid(format!(
                "weights not nondecreasing at index {j}"
            )));
        }
        last = t.0;
        out.push(t);
    }
    Ok(out)
}

/// Σ_{j<N} c_j e^{−s w_j} with a bound on the omitted tail.
pub fn abel_sum(series: &SpectralSeries, s: f64) -> Result<SeriesValue> {
    if !(s > 0.0) {
        return Err(Error::NonPositiveS(s));
    }
    let terms = checked_terms(series)?;
    let value = terms.iter().map(|(w, c)| c * (-s * w).exp()).sum();
    let b = series.bounds;
    let tail =
        b.coeff_bound * power_geometric_tail(series.cutoff, b.degree, (-s * b.weight_floor).exp());
    Ok(SeriesValue {
        value,
        tail_bound: tail,
        method: SumMethod::Abel,
    })
}

/// Σ_{m > n} m^d x^m for 0 ≤ x < 1.
fn power_geometric_tail(n: usize, d: u32, x: f64) -> f64 {
    if x >= 1.0 {
        return f64::INFINITY;
    }
    if x == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut m = n as f64 + 1.0;
    loop {
        let term = m.powi(d as i32) * x.powf(m);
        let ratio = ((m + 1.0) / m).powi(d as i32) * x;
        if ratio < 1.0 {
            // the ratio only decreases in m, so geometric domination holds
            return total + term / (1.0 - ratio);
        }
        total += term;
        m += 1.0;
        if m > n as f64 + 1e7 {
            return f64::INFINITY;
        }
    }
}

/// Smooth cutoff equal to 1 near 0 and vanishing to all orders at 1.
pub(crate) fn window(y: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if y >= 1.0 {
        return 0.0;
    }
    let psi = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    let a = psi(1.0 - y);
    a / (a + psi(y))
}

fn windowed(terms: &[(f64, Complex64)], len: usize, s: f64) -> Complex64 {
    let n = len as f64;
    terms[..len]
        .iter()
        .enumerate()
        .map(|(j, (w, c))| c * w.powf(-s) * window(j as f64 / n))
        .sum()
}

/// Σ c_j w_j^{−s}.
///
/// Where the series converges absolutely (s > degree + 1) the sum is
/// truncated sharply and the tail is bounded from the declared bounds.
/// Otherwise the terms are cut off by a smooth window, which recovers the
/// continued value for oscillating coefficients; the reported bound is then
/// the change between windows of length N and 3N/4.
pub fn zeta_sum(series: &SpectralSeries, s: f64) -> Result<SeriesValue> {
    let terms = checked_terms(series)?;
    if terms.iter().any(|t| t.0 <= 0.0) {
        return Err(Error::ZeroWeight);
    }
    let b = series.bounds;
    let excess = s - b.degree as f64 - 1.0;
    if excess > 1e-9 {
        let value = terms.iter().map(|(w, c)| c * w.powf(-s)).sum();
        let n = series.cutoff.max(1) as f64;
        let tail = b.coeff_bound * b.weight_floor.powf(-s) * n.powf(-excess) / excess;
        return Ok(SeriesValue {
            value,
            tail_bound: tail,
            method: SumMethod::ZetaSharp,
        });
    }
    let n = terms.len();
    if n < 8 {
        return Err(Error::Divergent {
            s,
            tail: f64::INFINITY,
        });
    }
    let value = windowed(&terms, n, s);
    let coarse = windowed(&terms, 3 * n / 4, s);
    Ok(SeriesValue {
        value,
        tail_bound: (value - coarse).norm(),
        method: SumMethod::ZetaSmoothWindow,
    })
}
