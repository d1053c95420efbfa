//! Link eigenmodes of circle cones, their sector classification, and the
//! spectral ξ_T split into the three sectors H1, H2, H3.
//!
//! Sign convention: the mode e^{ikθ/α} on the function slot has
//! A-eigenvalue k/α. For k ≥ 0 its extension is z^{k/α}, radial exponent
//! μ = k/α; for k < 0 the mode is moved to the β∧ slot (negating the
//! eigenvalue) and extends with μ = |k|/α. In every case the kernel ODE
//! ∂_x u + (λ/x)u = 0 holds with λ = −μ.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularize::{extrapolate_samples, zeta_sum, LimitEstimate, SpectralSeries};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    GPlus,
    GMinus,
    BetaGPlus,
    BetaGMinus,
}

impl Slot {
    pub fn is_beta(self) -> bool {
        matches!(self, Slot::BetaGPlus | Slot::BetaGMinus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    H1,
    H2,
    H3,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::H1, Sector::H2, Sector::H3];

    fn index(self) -> usize {
        match self {
            Sector::H1 => 0,
            Sector::H2 => 1,
            Sector::H3 => 2,
        }
    }
}

/// Lower bound an L² radial exponent must exceed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum L2Convention {
    /// ∫₀¹ x^{2μ} dx < ∞, μ > −1/2
    TheoremA,
    /// ∫₀¹ x^{2μ} x dx < ∞, μ > −1
    VolumeForm,
}

impl L2Convention {
    pub fn threshold(self) -> Rational {
        match self {
            L2Convention::TheoremA => Rational::new(-1, 2),
            L2Convention::VolumeForm => Rational::from_integer(-1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMode {
    /// A on the mode in its current slot.
    pub eigenvalue: Rational,
    pub angular_index: i64,
    pub slot: Slot,
    pub sector: Option<Sector>,
    pub char_coeff: Complex64,
    pub radial_exponent: Option<Rational>,
}

impl LinkMode {
    /// Eigenvalue on the function slot, undoing a β-shift.
    pub fn function_slot_eigenvalue(&self) -> Rational {
        if self.slot.is_beta() {
            -self.eigenvalue
        } else {
            self.eigenvalue
        }
    }
}

/// Modes e^{ikθ/α}, |k| ≤ cutoff, on the circle of length 2πα, rotated by φ.
pub fn circle_link_spectrum(alpha: Rational, cutoff: usize, phi: f64) -> Result<Vec<LinkMode>> {
    if cutoff < 1 {
        return Err(Error::Invalid("cutoff must be at least 1".into()));
    }
    if !alpha.is_positive() {
        return Err(Error::Invalid("alpha must be positive".into()));
    }
    let a = alpha.to_f64().unwrap_or(f64::NAN);
    let c = cutoff as i64;
    Ok((-c..=c)
        .map(|k| LinkMode {
            eigenvalue: Rational::from_integer(k) / alpha,
            angular_index: k,
            slot: Slot::GPlus,
            sector: None,
            char_coeff: Complex64::from_polar(1.0, k as f64 * phi / a),
            radial_exponent: None,
        })
        .collect())
}

/// No link eigenvalue in (−1/2, 1/2) other than 0.
pub fn spectral_witt_holds(alpha: Rational) -> bool {
    alpha.recip() >= Rational::new(1, 2)
}

/// Moves a mode between G and β∧G slots; the eigenvalue changes sign.
pub fn beta_shift(mode: &LinkMode) -> LinkMode {
    let slot = match mode.slot {
        Slot::GPlus => Slot::BetaGPlus,
        Slot::GMinus => Slot::BetaGMinus,
        Slot::BetaGPlus => Slot::GPlus,
        Slot::BetaGMinus => Slot::GMinus,
    };
    LinkMode {
        eigenvalue: -mode.eigenvalue,
        slot,
        ..mode.clone()
    }
}

/// Radial exponent μ = −λ of the solution x^μ of ∂_x u + (λ/x)u = 0.
pub fn harmonic_extension(ode_eigenvalue: Rational, conv: L2Convention) -> Result<Rational> {
    let mu = -ode_eigenvalue;
    if !mu.is_negative() {
        return Ok(mu);
    }
    if mu <= conv.threshold() {
        return Err(Error::NotL2(mu.to_string()));
    }
    match conv {
        L2Convention::TheoremA => Err(Error::GrSector(ode_eigenvalue.to_string())),
        L2Convention::VolumeForm => Ok(mu),
    }
}

pub fn classify(mode: &LinkMode, conv: L2Convention) -> Result<LinkMode> {
    let nu = mode.function_slot_eigenvalue();
    let in_window = match conv {
        L2Convention::TheoremA => !nu.is_zero() && nu.abs() < Rational::new(1, 2),
        L2Convention::VolumeForm => nu.is_negative() && nu > Rational::from_integer(-1),
    };
    if in_window {
        return Err(Error::GrSector(nu.to_string()));
    }
    let base = if mode.slot.is_beta() {
        beta_shift(mode)
    } else {
        mode.clone()
    };
    if !nu.is_negative() {
        let mu = harmonic_extension(-nu, conv)?;
        Ok(LinkMode {
            sector: Some(Sector::H1),
            radial_exponent: Some(mu),
            ..base
        })
    } else {
        let mu = harmonic_extension(nu, conv)?;
        let shifted = beta_shift(&base);
        Ok(LinkMode {
            sector: Some(Sector::H2),
            radial_exponent: Some(mu),
            ..shifted
        })
    }
}

/// coeff · x^exp
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialMonomial {
    pub coeff: Rational,
    pub exp: Rational,
}

fn collect_terms(terms: Vec<RadialMonomial>) -> Vec<RadialMonomial> {
    let mut out: Vec<RadialMonomial> = Vec::new();
    for t in terms {
        match out.iter_mut().find(|o| o.exp == t.exp) {
            Some(o) => o.coeff += t.coeff,
            None => out.push(t),
        }
    }
    out.retain(|t| !t.coeff.is_zero());
    out
}

/// ∂_x u + (λ/x)u for u = x^μ with λ = −μ, in exact arithmetic. Empty
/// means the residual vanishes identically.
pub fn kernel_ode_residual(mode: &LinkMode) -> Result<Vec<RadialMonomial>> {
    let mu = mode
        .radial_exponent
        .ok_or_else(|| Error::Invalid("mode has no radial extension".into()))?;
    let lambda = -mu;
    let u = RadialMonomial {
        coeff: Rational::from_integer(1),
        exp: mu,
    };
    let derivative = RadialMonomial {
        coeff: u.coeff * u.exp,
        exp: u.exp - 1,
    };
    let potential = RadialMonomial {
        coeff: lambda * u.coeff,
        exp: u.exp - 1,
    };
    Ok(collect_terms(vec![derivative, potential]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSeries {
    pub sector: Sector,
    pub h: Complex64,
    pub eta: Vec<Complex64>,
    pub xi: Vec<Complex64>,
    pub limit: LimitEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub s_grid: Vec<f64>,
    pub sectors: Vec<SectorSeries>,
    /// ξ_T(s) from the unpartitioned mode list.
    pub total: Vec<Complex64>,
    pub total_limit: LimitEstimate,
}

impl PartitionReport {
    pub fn sector(&self, s: Sector) -> &SectorSeries {
        &self.sectors[s.index()]
    }

    /// (quantity, s, re, im); the s = 0 rows hold the extrapolated limits.
    pub fn csv_rows(&self) -> Vec<(String, f64, f64, f64)> {
        let mut rows = Vec::new();
        for sec in &self.sectors {
            let name = format!("xi_{:?}", sec.sector).to_lowercase();
            for (s, v) in self.s_grid.iter().zip(&sec.xi) {
                rows.push((name.clone(), *s, v.re, v.im));
            }
            rows.push((name, 0.0, sec.limit.value.re, sec.limit.value.im));
        }
        for (s, v) in self.s_grid.iter().zip(&self.total) {
            rows.push(("xi_total".into(), *s, v.re, v.im));
        }
        rows.push((
            "xi_total".into(),
            0.0,
            self.total_limit.value.re,
            self.total_limit.value.im,
        ));
        rows
    }
}

/// (η(s) on the grid, h) for a set of classified modes.
fn eta_and_h(modes: &[&LinkMode], grid: &[f64]) -> Result<(Vec<Complex64>, Complex64)> {
    let mut h = Complex64::new(0.0, 0.0);
    let mut spectrum = Vec::new();
    for m in modes {
        let nu = m.function_slot_eigenvalue();
        if nu.is_zero() {
            // only the F⁺ constant enters h_T; its β∧ companion is not L²
            if m.radial_exponent.is_some() {
                h += m.char_coeff;
            }
        } else {
            spectrum.push((nu.to_f64().unwrap_or(f64::NAN), m.char_coeff));
        }
    }
    if spectrum.is_empty() {
        return Ok((vec![Complex64::new(0.0, 0.0); grid.len()], h));
    }
    let series = SpectralSeries::eta_from_spectrum(&spectrum)?;
    let eta = grid
        .par_iter()
        .map(|&s| zeta_sum(&series, s).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    Ok((eta, h))
}

pub fn xi_spectral(modes: &[LinkMode], s_grid: &[f64]) -> Result<PartitionReport> {
    if modes.iter().any(|m| m.sector.is_none()) {
        return Err(Error::Invalid("xi_spectral needs classified modes".into()));
    }
    let mut sectors = Vec::with_capacity(3);
    for sector in Sector::ALL {
        let chosen: Vec<&LinkMode> = modes.iter().filter(|m| m.sector == Some(sector)).collect();
        let (eta, h) = eta_and_h(&chosen, s_grid)?;
        let xi: Vec<Complex64> = eta.iter().map(|e| 0.5 * (e + h)).collect();
        let limit = extrapolate_samples(s_grid, &xi)?;
        sectors.push(SectorSeries {
            sector,
            h,
            eta,
            xi,
            limit,
        });
    }
    let all: Vec<&LinkMode> = modes.iter().collect();
    let (eta, h) = eta_and_h(&all, s_grid)?;
    let total: Vec<Complex64> = eta.iter().map(|e| 0.5 * (e + h)).collect();
    let total_limit = extrapolate_samples(s_grid, &total)?;
    Ok(PartitionReport {
        s_grid: s_grid.to_vec(),
        sectors,
        total,
        total_limit,
    })
}

/// Spectrum, classification and partition for a circle cone in one call.
pub fn xi_spectral_circle(
    alpha: Rational,
    phi: f64,
    cutoff: usize,
    conv: L2Convention,
    s_grid: &[f64],
) -> Result<PartitionReport> {
    let modes = circle_link_spectrum(alpha, cutoff, phi)?
        .iter()
        .map(|m| classify(m, conv))
        .collect::<Result<Vec<_>>>()?;
    xi_spectral(&modes, s_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularize::DEFAULT_S_GRID;
    use std::f64::consts::PI;

    #[test]
    fn spectrum_examples() {
        let modes = circle_link_spectrum(Rational::from_integer(1), 3, 0.4).unwrap();
        let eig: Vec<Rational> = modes.iter().map(|m| m.eigenvalue).collect();
        let expect: Vec<Rational> = (-3..=3).map(Rational::from_integer).collect();
        assert_eq!(eig, expect);

        assert!(!spectral_witt_holds(Rational::from_integer(3)));
        let m = circle_link_spectrum(Rational::from_integer(3), 1, 0.4).unwrap();
        assert_eq!(m[2].eigenvalue, Rational::new(1, 3));

        assert!(spectral_witt_holds(Rational::new(1, 2)));
        let m = circle_link_spectrum(Rational::new(1, 2), 2, 0.4).unwrap();
        assert!(m
            .windows(2)
            .all(|w| w[1].eigenvalue - w[0].eigenvalue == Rational::from_integer(2)));
        assert!(circle_link_spectrum(Rational::from_integer(1), 0, 0.4).is_err());
    }

    #[test]
    fn classify_examples() {
        let modes = circle_link_spectrum(Rational::from_integer(1), 3, 0.4).unwrap();
        let plus2 = classify(&modes[5], L2Convention::TheoremA).unwrap();
        assert_eq!(plus2.sector, Some(Sector::H1));
        assert_eq!(plus2.radial_exponent, Some(Rational::from_integer(2)));
        assert_eq!(plus2.slot, Slot::GPlus);

        let minus2 = classify(&modes[1], L2Convention::TheoremA).unwrap();
        assert_eq!(minus2.sector, Some(Sector::H2));
        assert!(minus2.slot.is_beta());
        assert_eq!(minus2.eigenvalue, Rational::from_integer(2));
        assert_eq!(minus2.radial_exponent, Some(Rational::from_integer(2)));
        assert_eq!(minus2.char_coeff, modes[1].char_coeff);

        let zero = classify(&modes[3], L2Convention::TheoremA).unwrap();
        assert_eq!(zero.radial_exponent, Some(Rational::zero()));
    }

    #[test]
    fn gr_modes_are_flagged() {
        let modes = circle_link_spectrum(Rational::from_integer(3), 2, 0.4).unwrap();
        assert!(matches!(
            classify(&modes[3], L2Convention::TheoremA),
            Err(Error::GrSector(_))
        ));
        assert!(matches!(
            classify(&modes[1], L2Convention::VolumeForm),
            Err(Error::GrSector(_))
        ));
        assert!(classify(&modes[3], L2Convention::VolumeForm).is_ok());
    }

    #[test]
    fn harmonic_extension_examples() {
        let r = Rational::from_integer;
        assert_eq!(harmonic_extension(r(-2), L2Convention::TheoremA), Ok(r(2)));
        assert_eq!(
            harmonic_extension(Rational::new(1, 3), L2Convention::VolumeForm),
            Ok(Rational::new(-1, 3))
        );
        assert!(matches!(
            harmonic_extension(Rational::new(1, 3), L2Convention::TheoremA),
            Err(Error::GrSector(_))
        ));
        assert_eq!(harmonic_extension(r(0), L2Convention::TheoremA), Ok(r(0)));
        assert!(matches!(
            harmonic_extension(r(1), L2Convention::VolumeForm),
            Err(Error::NotL2(_))
        ));
    }

    #[test]
    fn residual_vanishes() {
        let modes = circle_link_spectrum(Rational::new(1, 3), 50, 0.4).unwrap();
        for m in modes {
            let c = classify(&m, L2Convention::TheoremA).unwrap();
            assert!(kernel_ode_residual(&c).unwrap().is_empty());
        }
    }

    #[test]
    fn disc_matches_closed_form() {
        let phi = 2.0 * PI / 7.0;
        let r = xi_spectral_circle(
            Rational::from_integer(1),
            phi,
            2000,
            L2Convention::TheoremA,
            &DEFAULT_S_GRID,
        )
        .unwrap();
        let expect = (1.0 - Complex64::from_polar(1.0, phi)).inv();
        assert!((r.total_limit.value - expect).norm() < 1e-6);
        assert!(r
            .sector(Sector::H3)
            .xi
            .iter()
            .all(|v| *v == Complex64::new(0.0, 0.0)));
        for (i, s) in r.total.iter().enumerate() {
            let split: Complex64 = r.sectors.iter().map(|sec| sec.xi[i]).sum();
            assert!((split - s).norm() < 1e-12);
        }
    }

    #[test]
    fn trivial_action_has_no_asymmetry() {
        let modes: Vec<LinkMode> = circle_link_spectrum(Rational::from_integer(1), 300, 0.0)
            .unwrap()
            .iter()
            .map(|m| classify(m, L2Convention::TheoremA).unwrap())
            .filter(|m| m.angular_index != 0)
            .collect();
        let r = xi_spectral(&modes, &DEFAULT_S_GRID).unwrap();
        assert!(r.total.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }
}
