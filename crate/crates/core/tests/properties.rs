mod common;

use proptest::prelude::*;

use common::*;
use nctlab::heis::{heis_act, herm_heis, Generator};
use nctlab::nctorus::{sigma, Interpretation, TorusElement};
use nctlab::sections::{
    quasiperiodicity_defect_kind, to_alpha_gauge, wbz_inverse, FactorKind, ModuliParams, QuasiSection,
};
use nctlab::weyl::{mul_weyl, weyl_pointwise, WeylSum};

fn grid_101() -> Vec<f64> {
    (0..101).map(|k| -5.0 + 0.1 * k as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weyl_phase_is_unimodular(a in -3.0..3.0f64, b in -3.0..3.0f64, cc in -3.0..3.0f64, d in -3.0..3.0f64) {
        let (phase, x, y) = mul_weyl(a, b, cc, d).unwrap();
        prop_assert!((phase.norm() - 1.0).abs() < 1e-15);
        prop_assert_eq!((x, y), (a + cc, b + d));
    }

    #[test]
    fn weyl_law_against_direct_formula(
        a in -3.0..3.0f64, b in -3.0..3.0f64, cc in -3.0..3.0f64, d in -3.0..3.0f64,
        psi in packet_strategy(),
    ) {
        let (phase, x, y) = mul_weyl(a, b, cc, d).unwrap();
        let f = |t: f64| psi.eval(t);
        let inner = |t: f64| weyl_direct(cc, d, &f, t);
        for t in grid_101() {
            let lhs = weyl_direct(a, b, &inner, t);
            let rhs = phase * weyl_direct(x, y, &f, t);
            prop_assert!((lhs - rhs).norm() < 1e-10);
            let lib = weyl_pointwise(a, b, |s| psi.eval(s), t);
            prop_assert!((lib - weyl_direct(a, b, &f, t)).norm() < 1e-12);
        }
    }

    #[test]
    fn weyl_sum_associative(
        t in prop::collection::vec((coeff_strategy(), -2.0..2.0f64, -2.0..2.0f64), 3),
    ) {
        let s: Vec<WeylSum> = t.iter().map(|&(cf, a, b)| WeylSum::single(cf, a, b).unwrap()).collect();
        let lhs = s[0].mul(&s[1]).mul(&s[2]);
        let rhs = s[0].mul(&s[1].mul(&s[2]));
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn packet_inner_matches_quadrature(psi in packet_strategy(), phi in packet_strategy()) {
        let exact = psi.inner(&phi);
        let quad = simpson(|t| psi.eval(t).conj() * phi.eval(t), 12.0, 4000);
        prop_assert!((exact - quad).norm() <= 1e-9 * quad.norm().max(1.0));
    }

    #[test]
    fn torus_product_associative(
        theta in 0.0..1.0f64,
        xs in prop::collection::vec(prop::collection::vec(((-2i64..=2, -2i64..=2), coeff_strategy()), 1..6), 3),
    ) {
        let e: Vec<TorusElement> = xs
            .into_iter()
            .map(|c| TorusElement::from_coeffs(theta, Interpretation::Algebra, c).unwrap())
            .collect();
        let lhs = e[0].mul(&e[1]).unwrap().mul(&e[2]).unwrap();
        let rhs = e[0].mul(&e[1].mul(&e[2]).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn rep_pi_is_multiplicative(
        theta in 0.0..1.0f64,
        x in prop::collection::vec(((-2i64..=2, -2i64..=2), coeff_strategy()), 1..6),
        y in prop::collection::vec(((-2i64..=2, -2i64..=2), coeff_strategy()), 1..6),
    ) {
        let x = TorusElement::from_coeffs(theta, Interpretation::Algebra, x).unwrap();
        let y = TorusElement::from_coeffs(theta, Interpretation::Algebra, y).unwrap();
        let lhs = x.mul(&y).unwrap().rep_pi();
        let rhs = x.rep_pi().mul(&y.rep_pi());
        prop_assert!(lhs.distance(&rhs) < 1e-12);
        prop_assert!(x.adjoint().rep_pi().distance(&x.rep_pi().adjoint()) < 1e-12);
    }

    #[test]
    fn star_matches_twisted_convolution(
        theta in 0.0..1.0f64,
        f in torus_strategy(0.0, Interpretation::Function),
        g in torus_strategy(0.0, Interpretation::Function),
    ) {
        let f = TorusElement::from_coeffs(theta, Interpretation::Function, f.iter()).unwrap();
        let g = TorusElement::from_coeffs(theta, Interpretation::Function, g.iter()).unwrap();
        let got = f.star(&g).unwrap();
        prop_assert!(max_diff(&star_oracle(&f, &g, theta), &got) < 1e-13);
    }

    #[test]
    fn quantization_intertwines_products_and_involutions(
        theta in 0.0..1.0f64,
        f in torus_strategy(0.0, Interpretation::Function),
        g in torus_strategy(0.0, Interpretation::Function),
    ) {
        let f = TorusElement::from_coeffs(theta, Interpretation::Function, f.iter()).unwrap();
        let g = TorusElement::from_coeffs(theta, Interpretation::Function, g.iter()).unwrap();
        let lhs = f.star(&g).unwrap().quantize();
        let rhs = f.quantize().mul(&g.quantize()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        prop_assert!(f.conj().quantize().max_abs_diff(&f.quantize().adjoint()) <= 1e-13);
        prop_assert!(f.quantize().dequantize().max_abs_diff(&f) <= 1e-15);
    }

    #[test]
    fn adjoint_is_antimultiplicative(
        theta in 0.0..1.0f64,
        x in torus_strategy(0.0, Interpretation::Algebra),
        y in torus_strategy(0.0, Interpretation::Algebra),
    ) {
        let x = TorusElement::from_coeffs(theta, Interpretation::Algebra, x.iter()).unwrap();
        let y = TorusElement::from_coeffs(theta, Interpretation::Algebra, y.iter()).unwrap();
        let lhs = x.mul(&y).unwrap().adjoint();
        let rhs = y.adjoint().mul(&x.adjoint()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        prop_assert!(x.adjoint().adjoint().max_abs_diff(&x) <= 1e-14);
    }

    #[test]
    fn sigma_is_a_cocycle(
        theta in 0.0..1.0f64,
        v in prop::collection::vec((-20i64..=20, -20i64..=20), 3),
    ) {
        let add = |a: (i64, i64), b: (i64, i64)| (a.0 + b.0, a.1 + b.1);
        let (x, y, z) = (v[0], v[1], v[2]);
        let lhs = sigma(theta, x, y) * sigma(theta, add(x, y), z);
        let rhs = sigma(theta, y, z) * sigma(theta, x, add(y, z));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn undeformed_products_commute(
        f in torus_strategy(0.0, Interpretation::Function),
        g in torus_strategy(0.0, Interpretation::Function),
    ) {
        for ((j, k), _) in f.iter() {
            for ((m, n), _) in g.iter() {
                prop_assert_eq!(sigma(0.0, (j, k), (m, n)), c(1.0, 0.0));
            }
        }
        prop_assert!(f.star(&g).unwrap().max_abs_diff(&g.star(&f).unwrap()) < 1e-15);
        let (a, b) = (f.quantize(), g.quantize());
        prop_assert!(a.mul(&b).unwrap().max_abs_diff(&b.mul(&a).unwrap()) < 1e-15);
        prop_assert!(a.max_abs_diff(&f) == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wbz_round_trip(p in 1i64..=3, wy in 0.8..2.0f64, wx in -0.5..0.5f64, seed_fibers in fiber_strategy(3)) {
        let params = ModuliParams::new(0.0, c(wx, wy), p).unwrap();
        let fibers = nctlab::sections::FiberVector::new(seed_fibers.packets()[..p as usize].to_vec()).unwrap();
        let sec = QuasiSection::new(params, fibers.clone(), 12).unwrap();
        let ys: Vec<f64> = (0..9).map(|k| -1.0 + 0.25 * k as f64).collect();
        for n in 0..p {
            let got = wbz_inverse(|z| sec.eval(z), &params, n, &ys).unwrap();
            for (y, v) in ys.iter().zip(got) {
                prop_assert!((v - fibers.class(n).eval(*y)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn alpha_gauge_is_quasiperiodic(p in 1i64..=3, wy in 0.8..1.6f64, fibers in fiber_strategy(3)) {
        let tau = c(0.2, wy);
        let params = ModuliParams::new(0.0, tau, p).unwrap();
        let fibers = nctlab::sections::FiberVector::new(fibers.packets()[..p as usize].to_vec()).unwrap();
        let sec = QuasiSection::new(params, fibers, 12).unwrap();
        let g = to_alpha_gauge(|z| sec.eval(z), p, tau);
        prop_assert!(quasiperiodicity_defect_kind(&g, &params, FactorKind::Alpha, 10).unwrap() <= 1e-8);
    }

    #[test]
    fn heis_action_respects_commutation(p in 1i64..=3, s in -2i64..=2, theta in 0.0..1.0f64, fibers in fiber_strategy(3)) {
        let psi = nctlab::sections::FiberVector::new(fibers.packets()[..p as usize].to_vec()).unwrap();
        let uv = heis_act(Generator::V, &heis_act(Generator::U, &psi, p, s, theta).unwrap(), p, s, theta).unwrap();
        let vu = heis_act(Generator::U, &heis_act(Generator::V, &psi, p, s, theta).unwrap(), p, s, theta).unwrap();
        let vu = vu.scale(e(theta));
        prop_assert!(uv.max_diff_on(&vu, &grid_101()).unwrap() < 1e-10);
    }

    #[test]
    fn herm_heis_is_hermitian_and_positive(
        p in 1i64..=3, theta in 0.0..1.0f64, a in fiber_strategy(3), b in fiber_strategy(3),
    ) {
        let take = |f: &nctlab::sections::FiberVector| {
            nctlab::sections::FiberVector::new(f.packets()[..p as usize].to_vec()).unwrap()
        };
        let (psi, phi) = (take(&a), take(&b));
        let n = 4;
        let ab = herm_heis(&psi, &phi, p, 1, theta, n).unwrap().element;
        let ba = herm_heis(&phi, &psi, p, 1, theta, n).unwrap().element;
        prop_assert!(ab.adjoint().max_abs_diff(&ba) < 1e-12);
        let aa = herm_heis(&psi, &psi, p, 1, theta, n).unwrap().element.coeff(0, 0);
        prop_assert!(aa.re > 0.0 && aa.im.abs() < 1e-12 * aa.re.max(1.0));
    }
}

#[test]
fn theta_series_matches_direct_sum() {
    let tau = c(0.3, 1.1);
    for k in 0..10 {
        let z = c(0.1 * k as f64, -0.4 + 0.08 * k as f64);
        let (got, tail) = nctlab::sections::jacobi_theta(z, tau, 12).unwrap();
        let want = theta_oracle(z, tau, 40);
        assert!((got - want).norm() <= 1e-12 * want.norm().max(1.0), "{z}");
        assert!(tail < 1e-12);
    }
}
