use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use soscert_core::poly::{coeff_l2_distance, parse_polynomial, ratio, Monomial, Polynomial};

const NVARS: usize = 3;

fn term() -> impl Strategy<Value = (Vec<u32>, i64, i64)> {
    (prop::collection::vec(0u32..=3, NVARS), -12i64..=12, 1i64..=6)
}

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(term(), 0..6).prop_map(|ts| {
        Polynomial::from_terms(NVARS, ts.into_iter().map(|(e, n, d)| (Monomial::new(e), ratio(n, d))))
    })
}

fn point() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-5i64..=5, 1i64..=4).prop_map(|(n, d)| ratio(n, d)), NVARS)
}

fn monomial() -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0u32..=4, NVARS).prop_map(Monomial::new)
}

proptest! {
    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(a.square(), &a * &a);
        prop_assert_eq!(a.pow(3), &a.square() * &a);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(), b in poly(), x in point()) {
        prop_assert_eq!((&a * &b).eval(&x), a.eval(&x) * b.eval(&x));
        prop_assert_eq!((&a + &b).eval(&x), a.eval(&x) + b.eval(&x));
    }

    #[test]
    fn print_then_parse(a in poly()) {
        let back = parse_polynomial(&a.to_string(), NVARS).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn no_stored_zeros(a in poly(), b in poly()) {
        for p in [&a + &b, &a - &b, &a * &b] {
            prop_assert!(p.terms().all(|(_, c)| !c.is_zero()));
        }
    }

    #[test]
    fn degree_of_product(a in poly(), b in poly()) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        prop_assert_eq!((&a * &b).total_degree(), a.total_degree() + b.total_degree());
    }

    #[test]
    fn coefficient_distance_is_a_metric(a in poly(), b in poly(), c in poly()) {
        let ab = coeff_l2_distance(&a, &b);
        prop_assert_eq!(coeff_l2_distance(&a, &a), 0.0);
        prop_assert_eq!(ab, coeff_l2_distance(&b, &a));
        prop_assert_eq!(ab == 0.0, a == b);
        let slack = 1e-12 * (1.0 + ab);
        prop_assert!(ab <= coeff_l2_distance(&a, &c) + coeff_l2_distance(&c, &b) + slack);
    }

    #[test]
    fn monomial_order_is_graded_and_multiplicative(a in monomial(), b in monomial(), c in monomial()) {
        if a.degree() < b.degree() {
            prop_assert!(a < b);
        }
        prop_assert_eq!(a.cmp(&b), a.mul(&c).cmp(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).checked_div(&b), Some(a.clone()));
        prop_assert_eq!(a.pow(2).half(), Some(a));
    }
}
