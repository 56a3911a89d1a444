use proptest::prelude::*;
use superint::berezin::{berezin_full, naive_integral, OddPoly};
use superint::contour::{path_integral, path_inverse, path_sum, Path};
use superint::quadrature::{gauss_legendre, IntegrationMode};
use superint::random::Gen;
use superint::supersmooth::{BodyBox, SuperDomain, SupersmoothFn};
use superint::vvintegral::{cvf_residual, vv_integral, FoliatedManifold, ParameterSet};
use superint::{Grassmann, IndexSet, Parity, Q};

const EXACT: IntegrationMode = IntegrationMode::Exact;

fn q(v: i64) -> Q {
    Q::from_integer(v.into())
}

fn unit_box(m: usize) -> BodyBox<Q> {
    BodyBox::new(vec![q(0); m], vec![q(1); m]).unwrap()
}

#[test]
fn berezin_integral_picks_the_top_monomial() {
    for n in 0..=5usize {
        for a in IndexSet::all_subsets(n as u32) {
            let v = OddPoly::<Q>::monomial(a, n, 0).unwrap();
            let want = if a.len() as usize == n { 1 } else { 0 };
            assert_eq!(
                berezin_full(&v),
                Grassmann::from_i64(want, 0),
                "n = {n}, a = {a}"
            );
        }
    }
}

#[test]
fn gauss_legendre_is_exact_to_degree_2k_minus_1() {
    for order in [1usize, 2, 5, 16] {
        let rule = gauss_legendre(order);
        for k in 0..2 * order as i32 {
            let got: f64 = rule.iter().map(|(x, w)| w * x.powi(k)).sum();
            let want = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert!(
                (got - want).abs() < 1e-13,
                "order {order}, degree {k}: {got} vs {want}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn contour_integral_is_antiderivative_difference(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 10);
        let u = g.poly::<Q>(1, 3, 2, Some(Parity::Even));
        let big_u = SupersmoothFn::from_poly(0, u.antiderivative(0));
        let (lam, mu) = (g.even::<Q>(2), g.even::<Q>(2));
        let got = path_integral(&Path::straight(&lam, &mu).unwrap(), &SupersmoothFn::from_poly(0, u), &EXACT).unwrap();
        let want = &big_u.ss_eval(&[mu], &[]).unwrap() - &big_u.ss_eval(&[lam], &[]).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn contour_integrals_add_and_flip(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 11);
        let u = SupersmoothFn::from_poly(0, g.poly::<Q>(1, 2, 2, Some(Parity::Even)));
        let (a, b, c) = (g.even::<Q>(2), g.even::<Q>(2), g.even::<Q>(2));
        let ab = Path::straight(&a, &b).unwrap();
        let bc = Path::straight(&b, &c).unwrap();
        let whole = path_integral(&Path::straight(&a, &c).unwrap(), &u, &EXACT).unwrap();
        let joined = path_integral(&path_sum(&ab, &bc).unwrap(), &u, &EXACT).unwrap();
        prop_assert_eq!(&whole, &joined);
        let back = path_integral(&path_inverse(&ab), &u, &EXACT).unwrap();
        prop_assert_eq!(back, -path_integral(&ab, &u, &EXACT).unwrap());
    }

    #[test]
    fn flat_vv_integral_is_the_naive_integral(seed in any::<u64>(), m in 1usize..=2, n in 1usize..=2) {
        let mut g = Gen::new(seed, 12);
        let u = g.superfn::<Q>(m, n, 2, 2, None);
        let params = ParameterSet::new(unit_box(m), n);
        let vv = vv_integral(&FoliatedManifold::flat(params, 2), &u, &EXACT).unwrap();
        let naive = naive_integral(&u, &SuperDomain::new(unit_box(m), n), &EXACT).unwrap();
        prop_assert_eq!(vv, naive);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn change_of_variables_holds_for_random_superdiffeos(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 13);
        let (phi, inv) = g.superdiffeo::<Q>(2).unwrap();
        let u = g.superfn::<Q>(1, 2, 2, 2, None);
        let manifold = FoliatedManifold::flat(ParameterSet::new(unit_box(1), 2), 2);
        let r = cvf_residual(&phi, &inv, &manifold, &u, &EXACT).unwrap();
        prop_assert!(r.residual.is_zero(), "lhs {} rhs {}", r.lhs, r.rhs);
    }
}
