use std::f64::consts::PI;

use conic_xi::char_algebra::{
    complete_homogeneous_upto, schur_bialternant, HalfIntMonomial, TorusElement,
};
use conic_xi::gelfand_robbin::{
    gr_basis, pairing_matrix, pairing_matrix_quadrature, xi_with_predomain, Predomain, TraceMethod,
};
use conic_xi::lefschetz::{assemble, eta12_closed, quadric_global};
use conic_xi::model_cones::{
    dirichlet_character, neumann_character, xi_tilde, xi_tilde_closed, ConeModel, Twist,
};
use conic_xi::regularize::{
    abel_sum, extrapolate_zero, zeta_sum, SeriesBounds, SpectralSeries, DEFAULT_S_GRID,
};
use conic_xi::spectral_partition::{
    beta_shift, circle_link_spectrum, classify, spectral_witt_holds, xi_spectral, L2Convention,
    Sector, Slot,
};
use conic_xi::Rational;
use num_complex::Complex64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

/// Angles at least 0.3 from 0 mod 2π.
fn safe_angle() -> impl Strategy<Value = f64> {
    0.3..(2.0 * PI - 0.3)
}

fn element(n: usize) -> impl Strategy<Value = TorusElement> {
    prop::collection::vec(angle(), n).prop_map(|a| TorusElement::new(a).unwrap())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn monomial_multiplicativity(
        g in element(3),
        d1 in prop::collection::vec(-9i64..9, 3),
        d2 in prop::collection::vec(-9i64..9, 3),
    ) {
        let m1 = HalfIntMonomial::new(c(1.0), d1);
        let m2 = HalfIntMonomial::new(c(1.0), d2);
        let lhs = m1.mul(&m2).unwrap().eval(&g).unwrap();
        let rhs = m1.eval(&g).unwrap() * m2.eval(&g).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn branch_consistency(g in element(2), d in prop::collection::vec(-9i64..9, 2)) {
        let base = HalfIntMonomial::new(c(1.0), d.clone()).eval(&g).unwrap();
        let shifted = HalfIntMonomial::new(c(1.0), vec![d[0] + 4, d[1]]).eval(&g).unwrap();
        let factor = Complex64::from_polar(1.0, 2.0 * g.angles()[0]);
        prop_assert!((shifted - base * factor).norm() < 1e-12);
    }

    #[test]
    fn generating_function(g in element(3), t in 0.01f64..0.95) {
        let n_max = 60;
        let h = complete_homogeneous_upto(n_max, &g.eigenvalues());
        let partial: Complex64 = h.iter().enumerate().map(|(a, x)| x * t.powi(a as i32)).sum();
        let full: Complex64 = g.eigenvalues().iter().map(|l| (1.0 - l * t).inv()).product();
        // |H_a| ≤ C(a+2, 2), so the tail is at most (1−t)^{−3} minus its partial sum
        let head: f64 = (0..=n_max).map(|a| ((a + 1) * (a + 2) / 2) as f64 * t.powi(a as i32)).sum();
        let bound = (1.0 - t).powi(-3) - head;
        prop_assert!((partial - full).norm() <= bound.max(0.0) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn schur_symmetric_in_angles(
        a in prop::collection::vec(safe_angle(), 3),
        w in (0i64..5, 0i64..5, 0i64..5),
    ) {
        // well separated eigenvalues keep the Vandermonde away from 0
        prop_assume!((0..3).all(|i| (i + 1..3).all(|j| (Complex64::from_polar(1.0, a[i]) - Complex64::from_polar(1.0, a[j])).norm() > 0.2)));
        let weight = vec![2 * (w.0 + w.1 + w.2), 2 * (w.1 + w.2), 2 * w.2];
        let g = TorusElement::new(a.clone()).unwrap();
        let p = TorusElement::new(vec![a[2], a[0], a[1]]).unwrap();
        let v = schur_bialternant(&weight, &g).unwrap();
        let u = schur_bialternant(&weight, &p).unwrap();
        prop_assert!((v - u).norm() < 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn abel_geometric_within_tail(theta in safe_angle(), s in 0.05f64..0.5) {
        let l = Complex64::from_polar(1.0, theta);
        let bounds = SeriesBounds { coeff_bound: 1.0, degree: 0, weight_floor: 1.0 };
        let series = SpectralSeries::new(400, bounds, move |j| (j as f64, l.powi(j as i32)));
        let v = abel_sum(&series, s).unwrap();
        let exact = (1.0 - l * (-s).exp()).inv();
        prop_assert!((v.value - exact).norm() <= v.tail_bound * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn zeta_sharp_within_tail(s in 2.5f64..4.0) {
        let bounds = SeriesBounds { coeff_bound: 1.0, degree: 0, weight_floor: 1.0 };
        let series = SpectralSeries::new(3000, bounds, |j| ((j + 1) as f64, c(1.0)));
        let v = zeta_sum(&series, s).unwrap();
        let exact = conic_xi::regularize::hurwitz_zeta(s, 1.0).unwrap();
        prop_assert!((v.value.re - exact).abs() <= v.tail_bound);
    }

    #[test]
    fn extrapolation_exact_on_polynomials(coeffs in prop::collection::vec(-5.0f64..5.0, 1..6)) {
        let cs = coeffs.clone();
        let est = extrapolate_zero(
            move |s| Ok(c(cs.iter().rev().fold(0.0, |acc, q| acc * s + q))),
            &DEFAULT_S_GRID,
        )
        .unwrap();
        prop_assert!((est.value.re - coeffs[0]).abs() < 1e-9);
    }

    #[test]
    fn summators_are_linear(
        t1 in safe_angle(),
        t2 in safe_angle(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        s in 0.05f64..0.4,
    ) {
        let (l1, l2) = (Complex64::from_polar(1.0, t1), Complex64::from_polar(1.0, t2));
        let bounds = SeriesBounds { coeff_bound: 1.0, degree: 0, weight_floor: 1.0 };
        let mk = move |f: Box<dyn Fn(usize) -> Complex64 + Send + Sync>| {
            SpectralSeries::new(2000, bounds, move |j| ((j + 1) as f64, f(j)))
        };
        let x = mk(Box::new(move |j| l1.powi(j as i32)));
        let y = mk(Box::new(move |j| l2.powi(j as i32)));
        let z = mk(Box::new(move |j| a * l1.powi(j as i32) + b * l2.powi(j as i32)));
        for sum in [abel_sum, zeta_sum] {
            let (vx, vy, vz) = (sum(&x, s).unwrap().value, sum(&y, s).unwrap().value, sum(&z, s).unwrap().value);
            prop_assert!((vz - a * vx - b * vy).norm() < 1e-10);
        }
    }

    #[test]
    fn symmetric_spectrum_has_zero_eta(
        eig in prop::collection::vec(0.1f64..50.0, 1..40),
        coeffs in prop::collection::vec(-2.0f64..2.0, 40),
        s in 0.01f64..3.0,
    ) {
        let modes: Vec<(f64, Complex64)> = eig
            .iter()
            .zip(&coeffs)
            .flat_map(|(&l, &k)| [(l, c(k)), (-l, c(k))])
            .collect();
        let series = SpectralSeries::eta_from_spectrum(&modes).unwrap();
        prop_assert_eq!(abel_sum(&series, s).unwrap().value, c(0.0));
        if series.cutoff() >= 8 {
            prop_assert_eq!(zeta_sum(&series, s).unwrap().value, c(0.0));
        }
    }
}

fn catalog() -> Vec<ConeModel> {
    vec![
        ConeModel::flat(1, Twist::Dolbeault).unwrap(),
        ConeModel::flat(2, Twist::Spin).unwrap(),
        ConeModel::flat(3, Twist::Spin).unwrap(),
        ConeModel::circle(Rational::new(1, 2)).unwrap(),
        ConeModel::circle(Rational::from_integer(3)).unwrap(),
        ConeModel::quadric(Twist::Dolbeault).unwrap(),
        ConeModel::quadric(Twist::Spin).unwrap(),
        ConeModel::cyclic(4, vec![1, 3]).unwrap(),
    ]
}

fn pole_gap(model: &ConeModel, g: &TorusElement) -> f64 {
    let n = neumann_character(model, g).and_then(|c| c.min_pole_gap());
    let d = dirichlet_character(model, g).and_then(|c| c.min_pole_gap());
    match (n, d) {
        (Ok(a), Ok(b)) => a.min(b),
        _ => 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serre_duality(idx in 0usize..8, a in prop::collection::vec(safe_angle(), 3)) {
        let model = &catalog()[idx];
        let g = TorusElement::new(a[..model.element_dim()].to_vec()).unwrap();
        prop_assume!(pole_gap(model, &g) > 1e-3);
        let n = neumann_character(model, &g).unwrap().eval(0.0).unwrap();
        let d = dirichlet_character(model, &g).unwrap().eval(0.0).unwrap();
        prop_assert!((n - d).norm() < 1e-7 * (1.0 + n.norm()));
    }

    #[test]
    fn heat_limit_matches_closed_form(idx in 0usize..8, a in prop::collection::vec(safe_angle(), 3)) {
        let model = &catalog()[idx];
        let g = TorusElement::new(a[..model.element_dim()].to_vec()).unwrap();
        prop_assume!(pole_gap(model, &g) > 0.3);
        let est = xi_tilde(model, &g).unwrap();
        prop_assert!((est.value - xi_tilde_closed(model, &g).unwrap()).norm() < 1e-6);
    }

    #[test]
    fn conjugation_covariance(idx in 0usize..8, a in prop::collection::vec(safe_angle(), 3)) {
        let model = &catalog()[idx];
        let g = TorusElement::new(a[..model.element_dim()].to_vec()).unwrap();
        prop_assume!(pole_gap(model, &g) > 1e-3);
        let v = xi_tilde_closed(model, &g).unwrap();
        let w = xi_tilde_closed(model, &g.inverse()).unwrap();
        prop_assert!((w - v.conj()).norm() < 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn partition_is_exhaustive(den in 1i64..5, num in 1i64..3, phi in safe_angle()) {
        let alpha = Rational::new(num, den);
        prop_assume!(spectral_witt_holds(alpha));
        let modes = circle_link_spectrum(alpha, 200, phi).unwrap();
        let classified: Vec<_> = modes.iter().map(|m| classify(m, L2Convention::TheoremA).unwrap()).collect();
        for (m, k) in classified.iter().zip(&modes) {
            let sector = m.sector.unwrap();
            match sector {
                Sector::H1 => prop_assert!(matches!(m.slot, Slot::GPlus | Slot::GMinus)),
                Sector::H2 => prop_assert!(m.slot.is_beta()),
                Sector::H3 => {}
            }
            prop_assert_eq!(m.function_slot_eigenvalue(), k.eigenvalue);
            let back = beta_shift(&beta_shift(m));
            prop_assert_eq!(&back, m);
            prop_assert_eq!(beta_shift(m).eigenvalue, -m.eigenvalue);
        }
        let r = xi_spectral(&classified, &DEFAULT_S_GRID).unwrap();
        for (i, total) in r.total.iter().enumerate() {
            let split: Complex64 = r.sectors.iter().map(|sec| sec.xi[i]).sum();
            prop_assert!((split - total).norm() < 1e-12 * (1.0 + total.norm()));
        }
    }

    #[test]
    fn pairing_diagonal_for_any_alpha(num in 1i64..9, den in 1i64..4) {
        let basis = gr_basis(Rational::new(num, den)).unwrap();
        let closed = pairing_matrix(&basis);
        let quad = pairing_matrix_quadrature(&basis).unwrap();
        for m in 0..basis.dim() {
            prop_assert!(closed[(m, m)].norm() > 0.0);
            for k in 0..basis.dim() {
                if m != k {
                    prop_assert_eq!(closed[(m, k)], c(0.0));
                }
                prop_assert!((closed[(m, k)] - quad[(m, k)]).norm() < 1e-8 * closed[(m, m)].norm());
            }
        }
    }

    #[test]
    fn predomain_is_lagrangian(t in 0.0f64..(2.0 * PI), u in 0.0f64..(2.0 * PI)) {
        let alpha = Rational::from_integer(3);
        let w = Predomain::new(alpha, vec![vec![Complex64::from_polar(1.0, u) * t.cos(), c(t.sin())]]).unwrap();
        let p = pairing_matrix(&gr_basis(alpha).unwrap());
        for v in &w.adjoint_coeffs {
            for x in &w.coeffs {
                let pair: Complex64 = (0..2).flat_map(|m| (0..2).map(move |k| (m, k))).map(|(m, k)| v[m] * x[k].conj() * p[(m, k)]).sum();
                prop_assert!(pair.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn predomain_trace_and_duality(t in 0.0f64..(2.0 * PI), phi in safe_angle()) {
        let alpha = Rational::from_integer(3);
        let (a, b) = (t.cos(), t.sin());
        let w = Predomain::new(alpha, vec![vec![c(a), c(b)]]).unwrap();
        let lam = Complex64::from_polar(1.0, phi / 3.0);
        let closed = xi_with_predomain(&w, phi, TraceMethod::Closed).unwrap();
        prop_assert!((closed.trace_w - (a * a * lam.inv() + b * b * lam.powi(-2))).norm() < 1e-12);
        prop_assert!((closed.neumann - closed.dirichlet).norm() < 1e-7);
        let quad = xi_with_predomain(&w, phi, TraceMethod::Quadrature).unwrap();
        prop_assert!((quad.trace_w - closed.trace_w).norm() < 1e-9);
    }

    #[test]
    fn quadric_identities(a in safe_angle(), b in safe_angle()) {
        let g = TorusElement::new(vec![a, b]).unwrap();
        let l = Complex64::from_polar(1.0, a);
        let m = Complex64::from_polar(1.0, b);
        let gap = [(1.0 - m / l).norm(), (1.0 - l * l).norm(), (1.0 - m * m).norm()];
        prop_assume!(gap.iter().all(|x| *x > 0.05));
        let d = assemble(&quadric_global(Twist::Dolbeault).unwrap(), &g).unwrap();
        let s = assemble(&quadric_global(Twist::Spin).unwrap(), &g).unwrap();
        prop_assert!((d.total - 1.0).norm() < 1e-8);
        prop_assert!(s.total.norm() < 1e-8);
    }

    #[test]
    fn eta12_closed_forms_exchange(n in 1usize..5, a in prop::collection::vec(safe_angle(), 4)) {
        let g = TorusElement::new(a[..n].to_vec()).unwrap();
        let (e1, e2) = eta12_closed(&g);
        let (f1, f2) = eta12_closed(&g.inverse());
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((e1 - sign * f2).norm() < 1e-12 * (1.0 + e1.norm()));
        prop_assert!((e2 - sign * f1).norm() < 1e-12 * (1.0 + e2.norm()));
    }
}
