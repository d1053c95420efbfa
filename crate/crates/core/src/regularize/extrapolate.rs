use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_S_GRID: [f64; 6] = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationMethod {
    Polynomial,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: Complex64,
    pub error_bound: f64,
    pub s_grid: Vec<f64>,
    pub method: ExtrapolationMethod,
}

impl LimitEstimate {
    pub fn converged(&self, tol: f64) -> bool {
        self.error_bound <= tol
    }

    /// A limit known in closed form.
    pub fn exact(value: Complex64) -> Self {
        Self {
            value,
            error_bound: 0.0,
            s_grid: vec![],
            method: ExtrapolationMethod::Polynomial,
        }
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    let ok = grid.len() >= 4
        && grid.iter().all(|&s| s > 0.0 && s.is_finite())
        && grid.windows(2).all(|w| w[0] > w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGrid)
    }
}

/// Samples f on the grid (in parallel) and extrapolates to s = 0.
pub fn extrapolate_zero<F>(f: F, grid: &[f64]) -> Result<LimitEstimate>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    validate_grid(grid)?;
    let values = grid.par_iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    extrapolate_samples(grid, &values)
}

/// Polynomial (Neville) and rational (Bulirsch–Stoer) tables at s = 0;
/// whichever has the smaller error estimate is reported. The estimate is
/// the larger change seen when dropping either the largest or the smallest
/// grid point.
pub fn extrapolate_samples(grid: &[f64], values: &[Complex64]) -> Result<LimitEstimate> {
    validate_grid(grid)?;
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let n = grid.len();
    let estimate = |table: fn(&[f64], &[Complex64]) -> Option<(Complex64, f64)>| {
        let (v, e) = table(grid, values)?;
        let (w, _) = table(&grid[..n - 1], &values[..n - 1])?;
        let e = e.max((v - w).norm());
        e.is_finite().then_some((v, e))
    };
    let (pv, pe) = estimate(neville).ok_or(Error::Divergent {
        s: grid[n - 1],
        tail: f64::NAN,
    })?;
    let mut best = (pv, pe, ExtrapolationMethod::Polynomial);
    if let Some((rv, re)) = estimate(rational) {
        if re < pe {
            best = (rv, re, ExtrapolationMethod::Rational);
        }
    }
    Ok(LimitEstimate {
        value: best.0,
        error_bound: best.1,
        s_grid: grid.to_vec(),
        method: best.2,
    })
}

fn neville(x: &[f64], y: &[Complex64]) -> Option<(Complex64, f64)> {
    let n = x.len();
    if n < 2 {
        return Some((y[0], 0.0));
    }
    // t[i] holds the interpolant through points i..=i+k evaluated at 0
    let mut t = y.to_vec();
    let mut last_two = (t[n - 1], t[n - 1]);
    for k in 1..n {
        for i in 0..n - k {
            let j = i + k;
            t[i] = (-x[j] * t[i] + x[i] * t[i + 1]) / (x[i] - x[j]);
        }
        if k + 2 == n {
            last_two.1 = t[1];
        }
        if k == n - 1 {
            last_two.0 = t[0];
        }
    }
    let e = (last_two.0 - last_two.1).norm();
    (last_two.0.is_finite() && e.is_finite()).then_some((last_two.0, e))
}

fn rational(x: &[f64], y: &[Complex64]) -> Option<(Complex64, f64)> {
    let n = x.len();
    if n < 2 {
        return Some((y[0], 0.0));
    }
    let zero = Complex64::new(0.0, 0.0);
    // prev2 = column k−2, prev = column k−1, indexed by row i
    let mut prev2 = vec![zero; n];
    let mut prev = y.to_vec();
    let mut diag_prev = prev[n - 1];
    for k in 1..n {
        let mut cur = vec![zero; n];
        for i in k..n {
            let d1 = prev[i] - prev[i - 1];
            let d2 = prev[i] - prev2[i - 1];
            let ratio = x[i - k] / x[i];
            let denom = ratio * (1.0 - d1 / d2) - 1.0;
            cur[i] = prev[i] + d1 / denom;
        }
        if k == n - 1 {
            diag_prev = prev[n - 1];
        }
        prev2 = prev;
        prev = cur;
    }
    let v = prev[n - 1];
    let e = (v - diag_prev).norm();
    (v.is_finite() && e.is_finite()).then_some((v, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn geometric_abel_limit() {
        let l = Complex64::from_polar(1.0, 2.0 * PI / 7.0);
        let f = |s: f64| Ok((1.0 - l * (-s).exp()).inv());
        let est = extrapolate_zero(f, &[0.2, 0.1, 0.05, 0.025]).unwrap();
        assert!((est.value - (1.0 - l).inv()).norm() < 1e-6);
        let est = extrapolate_zero(f, &DEFAULT_S_GRID).unwrap();
        assert!((est.value - (1.0 - l).inv()).norm() < 1e-9);
        assert!(est.error_bound < 1e-7, "{:e}", est.error_bound);
    }

    #[test]
    fn identity_extrapolates_to_zero() {
        let est = extrapolate_zero(|s| Ok(Complex64::new(s, 0.0)), &DEFAULT_S_GRID).unwrap();
        assert!(est.value.norm() < 1e-15);
    }

    #[test]
    fn polynomials_are_exact() {
        let p = |s: f64| {
            Ok(Complex64::new(
                3.0 - 2.0 * s + 5.0 * s * s * s,
                s * s - 1.5 * s.powi(4),
            ))
        };
        let est = extrapolate_zero(p, &DEFAULT_S_GRID).unwrap();
        assert!((est.value - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert_eq!(est.method, ExtrapolationMethod::Polynomial);
    }

    #[test]
    fn bad_grids() {
        let f = |_s: f64| Ok(Complex64::new(0.0, 0.0));
        assert_eq!(
            extrapolate_zero(f, &[0.1, 0.2, 0.05, 0.01]),
            Err(Error::InvalidGrid)
        );
        assert_eq!(
            extrapolate_zero(f, &[0.2, 0.1, 0.05]),
            Err(Error::InvalidGrid)
        );
        assert_eq!(
            extrapolate_zero(f, &[0.2, 0.1, 0.05, 0.0]),
            Err(Error::InvalidGrid)
        );
    }

    #[test]
    fn stable_under_halving_smallest_s() {
        let l = Complex64::from_polar(1.0, 1.3);
        let f = |s: f64| Ok(l * (1.0 - l * (-s).exp()).inv() + (2.0 * s).sin());
        let est = extrapolate_zero(f, &DEFAULT_S_GRID).unwrap();
        let mut grid = DEFAULT_S_GRID.to_vec();
        grid.push(DEFAULT_S_GRID[5] / 2.0);
        let finer = extrapolate_zero(f, &grid).unwrap();
        let diff = (finer.value - est.value).norm();
        assert!(
            diff <= est.error_bound,
            "{diff:e} > {:e} ({:?} / {:?})",
            est.error_bound,
            est.method,
            finer.method
        );
    }
}
