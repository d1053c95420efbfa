//! Composite Gauss–Legendre quadrature with adaptive panel doubling.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 64;
pub const DEFAULT_REL_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: u32 = 12;

/// Nodes and weights on [−1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for Rule {
    fn default() -> Self {
        Self::new(DEFAULT_NODES)
    }
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn composite<F>(&self, f: &F, a: f64, b: f64, panels: usize) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        self.composite_with_abs(f, a, b, panels).0
    }

    fn composite_with_abs<F>(&self, f: &F, a: f64, b: f64, panels: usize) -> (Complex64, f64)
    where
        F: Fn(f64) -> Complex64,
    {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + 0.5 * h * x);
                total += w * v;
                abs += w * v.norm();
            }
        }
        (total * (0.5 * h), abs * (0.5 * h).abs())
    }

    /// Doubles the panel count until the change drops below tol relative
    /// to ∫|f|, which equals |∫f| unless the integrand cancels.
    pub fn adaptive<F>(&self, f: &F, a: f64, b: f64, tol: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        self.adaptive_scaled(f, a, b, tol, &|| 0.0).map(|(v, _)| v)
    }

    /// `floor` is an extra magnitude the change is measured against; it is
    /// read after each pass. Returns the value and ∫|f|.
    fn adaptive_scaled<F>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        floor: &dyn Fn() -> f64,
    ) -> Result<(Complex64, f64)>
    where
        F: Fn(f64) -> Complex64,
    {
        let mut panels = 1;
        let (mut prev, _) = self.composite_with_abs(f, a, b, panels);
        for _ in 0..MAX_DOUBLINGS {
            panels *= 2;
            let (cur, abs) = self.composite_with_abs(f, a, b, panels);
            let scale = abs.max(cur.norm()).max(floor());
            if (cur - prev).norm() <= tol * scale {
                return Ok((cur, abs));
            }
            prev = cur;
        }
        Err(Error::NoConvergence(format!(
            "quadrature did not reach relative tolerance {tol:e}"
        )))
    }
}

/// ∫_a^b ∫_c^d f(x, y) dy dx by nested adaptive rules. The outer tolerance
/// is relative to ∫∫|f|, so integrands that cancel to zero still converge.
pub fn integrate_2d<F>(
    rule: &Rule,
    f: &F,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    tol: f64,
) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64,
{
    let failed = std::cell::Cell::new(None);
    let peak = std::cell::Cell::new(0.0f64);
    let inner = |x: f64| match rule.adaptive_scaled(&|y| f(x, y), c, d, tol, &|| 0.0) {
        Ok((v, abs)) => {
            peak.set(peak.get().max(abs));
            v
        }
        Err(e) => {
            failed.set(Some(e));
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    let v = rule.adaptive_scaled(&inner, a, b, tol, &|| peak.get() * (b - a).abs());
    match failed.into_inner() {
        Some(e) => Err(e),
        None => v.map(|(v, _)| v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = Rule::new(8);
        let v = rule.composite(
            &|x: f64| Complex64::new(x.powi(15) + 3.0 * x * x, 0.0),
            0.0,
            1.0,
            1,
        );
        assert!((v.re - (1.0 / 16.0 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 7, 64] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn area_of_unit_disc() {
        let v = integrate_2d(
            &Rule::default(),
            &|x: f64, _t: f64| Complex64::new(x, 0.0),
            (0.0, 1.0),
            (0.0, 2.0 * std::f64::consts::PI),
            1e-10,
        )
        .unwrap();
        assert!((v.re - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn adaptive_oscillatory() {
        let rule = Rule::default();
        let f = |t: f64| Complex64::from_polar(1.0, 7.0 * t);
        let v = rule
            .adaptive(&f, 0.0, 2.0 * std::f64::consts::PI, 1e-12)
            .unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn cancelling_2d_integrand_converges() {
        let rule = Rule::default();
        let f = |x: f64, t: f64| Complex64::from_polar(x.sqrt(), 3.0 * t);
        let v = integrate_2d(
            &rule,
            &f,
            (0.0, 1.0),
            (0.0, 2.0 * std::f64::consts::PI),
            1e-10,
        )
        .unwrap();
        assert!(v.norm() < 1e-12);
    }
}
