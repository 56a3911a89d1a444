use proptest::prelude::*;
use superint::random::Gen;
use superint::{
    sdet, sdet_formula_a, sdet_formula_b, sm_inverse, sm_mul, Grassmann, IndexSet, Parity, Q,
};

const LEVEL: u32 = 4;

fn element() -> impl Strategy<Value = Grassmann<Q>> {
    prop::collection::vec((0u64..1 << LEVEL, -5i64..=5, 1i64..=3), 0..6).prop_map(|terms| {
        let mut g = Grassmann::zero(LEVEL);
        for (bits, p, q) in terms {
            g.add_term(IndexSet::from_bits(bits), Q::new(p.into(), q.into()));
        }
        g
    })
}

fn homogeneous(parity: Parity) -> impl Strategy<Value = Grassmann<Q>> {
    element().prop_map(move |g| {
        let mut out = Grassmann::zero(LEVEL);
        for (k, c) in g.terms() {
            if Parity::of_degree(k.len()) == parity {
                out.add_term(k, c.clone());
            }
        }
        out
    })
}

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

proptest! {
    #[test]
    fn multiplication_is_associative(a in element(), b in element(), c in element()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn multiplication_distributes(a in element(), b in element(), c in element()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
    }

    #[test]
    fn supercommutativity((pa, pb) in (parity(), parity()), seed in any::<u64>()) {
        let mut g = Gen::new(seed, 0);
        let a: Grassmann<Q> = g.homogeneous(LEVEL, pa);
        let b: Grassmann<Q> = g.homogeneous(LEVEL, pb);
        let sign = if pa == Parity::Odd && pb == Parity::Odd { -1 } else { 1 };
        prop_assert_eq!(&a * &b, (&b * &a).scale(&Q::from_integer(sign.into())));
    }

    #[test]
    fn odd_elements_square_to_zero(a in homogeneous(Parity::Odd)) {
        prop_assert!((&a * &a).is_zero());
    }

    #[test]
    fn invertible_even_elements_invert(a in homogeneous(Parity::Even), c in 1i64..5) {
        let mut x = a.soul();
        x.add_term(IndexSet::EMPTY, Q::from_integer(c.into()));
        let inv = x.even_inverse().unwrap();
        prop_assert_eq!(&x * &inv, Grassmann::one(LEVEL));
    }

    #[test]
    fn text_form_round_trips(a in element()) {
        prop_assert_eq!(Grassmann::parse(&a.to_string(), LEVEL).unwrap(), a);
    }

    #[test]
    fn soul_is_nilpotent(a in element()) {
        prop_assert!(a.soul().pow(LEVEL + 1).is_zero());
    }

    #[test]
    fn sdet_formulas_and_multiplicativity(seed in any::<u64>(), m in 1usize..=2, n in 1usize..=2) {
        let mut g = Gen::new(seed, 1);
        let p = g.supermatrix::<Q>(m, n, 3);
        let q = g.supermatrix::<Q>(m, n, 3);
        prop_assert_eq!(sdet_formula_a(&p).unwrap(), sdet_formula_b(&p).unwrap());
        let pq = sm_mul(&p, &q).unwrap();
        prop_assert_eq!(sdet(&pq).unwrap(), &sdet(&p).unwrap() * &sdet(&q).unwrap());
        let inv = sm_inverse(&p).unwrap();
        prop_assert_eq!(&sdet(&inv).unwrap() * &sdet(&p).unwrap(), Grassmann::one(3));
    }
}

#[test]
fn parse_rejects_out_of_range_generators() {
    assert!(Grassmann::<Q>::parse("s[5]", 4).is_err());
    assert!(Grassmann::<Q>::parse("1 + ", 4).is_err());
}
