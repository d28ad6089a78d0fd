#![allow(clippy::needless_range_loop)]

use nalgebra::SymmetricEigen;
use num_rational::BigRational;
use proptest::prelude::*;
use soscert_core::gram::{
    full_basis, gram_to_poly, matching_system, project_onto_affine, support_restricted_basis, GramRational, MonomialBasis,
    DEFAULT_BASIS_CAP,
};
use soscert_core::poly::{expand_weighted_squares, int, ratio, Monomial, Polynomial};
use soscert_core::recover::exact_psd_check;
use soscert_core::verify::{check_certificate, gram_to_certificate};

fn basis() -> MonomialBasis {
    full_basis(2, 2, DEFAULT_BASIS_CAP).unwrap()
}

fn symmetric(m: usize) -> impl Strategy<Value = Vec<Vec<BigRational>>> {
    prop::collection::vec((-9i64..=9, 1i64..=3), m * (m + 1) / 2).prop_map(move |vals| {
        let mut rows = vec![vec![int(0); m]; m];
        let mut it = vals.into_iter();
        for i in 0..m {
            for j in i..m {
                let (n, d) = it.next().unwrap();
                rows[i][j] = ratio(n, d);
                rows[j][i] = ratio(n, d);
            }
        }
        rows
    })
}

/// `B·Bᵀ` for an integer `m × k` factor.
fn gram_of_factor(m: usize) -> impl Strategy<Value = Vec<Vec<BigRational>>> {
    (1usize..=m).prop_flat_map(move |k| prop::collection::vec(prop::collection::vec(-4i64..=4, k), m)).prop_map(|b| {
        let m = b.len();
        (0..m).map(|i| (0..m).map(|j| int(b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum())).collect()).collect()
    })
}

proptest! {
    #[test]
    fn projection_lands_on_the_affine_set_and_is_idempotent(target in symmetric(6), start in symmetric(6)) {
        let b = basis();
        let f = gram_to_poly(&GramRational::from_rows(b.clone(), &target));
        let sys = matching_system(&f, &b).unwrap();
        let p = project_onto_affine(&GramRational::from_rows(b.clone(), &start), &sys).unwrap();
        prop_assert!(sys.is_satisfied_by(&p));
        prop_assert_eq!(gram_to_poly(&p), f.clone());
        let again = project_onto_affine(&p, &sys).unwrap();
        prop_assert_eq!(again, p);
        let feasible = GramRational::from_rows(b, &target);
        prop_assert_eq!(project_onto_affine(&feasible, &sys).unwrap(), feasible);
    }

    #[test]
    fn factor_grams_are_psd_and_certify_their_polynomial(rows in gram_of_factor(6)) {
        let g = GramRational::from_rows(basis(), &rows);
        prop_assert!(exact_psd_check(&g).is_psd());
        let f = gram_to_poly(&g);
        let cert = gram_to_certificate(&g).unwrap();
        prop_assert!(check_certificate(&f, &cert).ok);
        prop_assert!(cert.squares.iter().all(|(w, _)| *w > int(0)));
    }

    #[test]
    fn exact_check_agrees_with_eigenvalues(rows in symmetric(5)) {
        let b = MonomialBasis::new(2, basis().monomials()[..5].to_vec()).unwrap();
        let g = GramRational::from_rows(b, &rows);
        let lambda_min = SymmetricEigen::new(g.to_dmatrix()).eigenvalues.min();
        prop_assume!(lambda_min.abs() > 1e-6);
        prop_assert_eq!(exact_psd_check(&g).is_psd(), lambda_min > 0.0);
    }

    #[test]
    fn support_basis_covers_every_decomposition(
        squares in prop::collection::vec(prop::collection::vec((prop::collection::vec(0u32..=2, 3), -3i64..=3), 1..4), 1..4)
    ) {
        let squares: Vec<(BigRational, Polynomial)> = squares
            .into_iter()
            .map(|ts| (int(1), Polynomial::from_terms(3, ts.into_iter().map(|(e, c)| (Monomial::new(e), int(c))))))
            .filter(|(_, q)| !q.is_zero())
            .collect();
        prop_assume!(!squares.is_empty());
        let f = expand_weighted_squares(3, &squares).unwrap();
        let b = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        for (_, q) in &squares {
            for (m, _) in q.terms() {
                prop_assert!(b.contains(m), "{} missing from basis of {}", m, f);
            }
        }
    }
}
