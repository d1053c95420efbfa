use crate::error::{Error, Result};

// B_{2k}/(2k)! for k = 1..=10
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
];

/// Hurwitz zeta ζ(s, a) = Σ_{j≥0} (j+a)^{−s}, continued to all s ≠ 1.
///
/// Euler–Maclaurin after summing the first M terms directly.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() || !s.is_finite() {
        return Err(Error::Invalid(format!(
            "hurwitz_zeta needs a > 0, finite s (a={a}, s={s})"
        )));
    }
    if s == 1.0 {
        return Err(Error::HurwitzPole);
    }
    let m = 20 + s.abs().ceil() as usize;
    let head: f64 = (0..m).map(|j| (j as f64 + a).powf(-s)).sum();
    let x = m as f64 + a;
    let mut total = head + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s(s+1)…(s+2k−2)
    let mut rising = s;
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let k = k + 1;
        if k > 1 {
            rising *= (s + (2 * k - 3) as f64) * (s + (2 * k - 2) as f64);
        }
        if rising == 0.0 {
            break;
        }
        total += b * rising * x.powf(-s - (2 * k - 1) as f64);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn basel() {
        assert!((hurwitz_zeta(2.0, 1.0).unwrap() - PI * PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn half_shift() {
        assert!((hurwitz_zeta(2.0, 0.5).unwrap() - PI * PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn value_at_zero() {
        for a in [0.3, 1.7] {
            assert!((hurwitz_zeta(0.0, a).unwrap() - (0.5 - a)).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_integers_are_bernoulli_polynomials() {
        // ζ(−1, a) = −B₂(a)/2 = −(a² − a + 1/6)/2
        for a in [0.25, 1.0, 2.5] {
            let expect = -(a * a - a + 1.0 / 6.0) / 2.0;
            assert!((hurwitz_zeta(-1.0, a).unwrap() - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn pole() {
        assert_eq!(hurwitz_zeta(1.0, 0.5), Err(Error::HurwitzPole));
    }
}
