use proptest::prelude::*;
use soscert_core::gram::{full_basis, DEFAULT_BASIS_CAP};
use soscert_core::poly::{parse_polynomial, Polynomial};
use soscert_core::refine::{backward_error, gauss_newton, FactorMatrix, RefineConfig, ResidualModel};

fn target() -> Polynomial {
    parse_polynomial("x1^4 + 2*x1^2*x2^2 - 3*x1*x2 + x2^4 + 5/2*x1^2 + 1", 2).unwrap()
}

fn columns(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3).prop_flat_map(move |k| prop::collection::vec(prop::collection::vec(-2.0f64..2.0, m), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The residual is quadratic in the factor, so central differences are exact up to rounding.
    #[test]
    fn jacobian_matches_central_differences(cols in columns(6)) {
        let basis = full_basis(2, 2, DEFAULT_BASIS_CAP).unwrap();
        let model = ResidualModel::new(&target(), &basis);
        let l = FactorMatrix::from_f64(basis.clone(), &cols, 256);
        let jac = model.jacobian(&l);
        let h = 1e-3;
        let m = basis.len();
        for (i, col) in cols.iter().enumerate() {
            for a in 0..m {
                let bumped = |delta: f64| {
                    let mut c = cols.clone();
                    c[i][a] = col[a] + delta;
                    model.residual(&FactorMatrix::from_f64(basis.clone(), &c, 256), 256)
                };
                let (plus, minus) = (bumped(h), bumped(-h));
                for r in 0..model.rows().len() {
                    let fd = (plus[r].to_f64() - minus[r].to_f64()) / (2.0 * h);
                    let exact = jac[(r, i * m + a)];
                    prop_assert!((fd - exact).abs() <= 1e-9 * (1.0 + exact.abs()), "row {} col {}: {} vs {}", r, i * m + a, fd, exact);
                }
            }
        }
    }

    #[test]
    fn accepted_steps_never_increase_the_residual(cols in columns(6)) {
        let basis = full_basis(2, 2, DEFAULT_BASIS_CAP).unwrap();
        let f = target();
        let l0 = FactorMatrix::from_f64(basis, &cols, 128);
        let cfg = RefineConfig { precision_bits: 128, max_iters: 25, ..RefineConfig::default() };
        let out = gauss_newton(&f, &l0, &cfg);
        prop_assert!(out.theta_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(out.theta_final <= backward_error(&f, &l0));
        prop_assert!(out.iterations <= cfg.max_iters);
    }
}

#[test]
fn exact_factor_is_a_fixed_point() {
    let basis = full_basis(1, 2, DEFAULT_BASIS_CAP).unwrap();
    let f = parse_polynomial("x1^4 - 2*x1^3 + 3*x1^2 - 2*x1 + 1", 1).unwrap();
    // (x1^2 - x1 + 1)^2 over [1, x1, x1^2]
    let l0 = FactorMatrix::from_f64(basis, &[vec![1.0, -1.0, 1.0]], 256);
    assert_eq!(backward_error(&f, &l0), 0.0);
    let out = gauss_newton(&f, &l0, &RefineConfig::default());
    assert!(out.converged);
    assert_eq!(out.theta_final, 0.0);
}
