use num_rational::BigRational;
use proptest::prelude::*;
use soscert_core::conjecture::{format_sos_expression, parse_sos_expression, rank, ConjectureCandidate};
use soscert_core::datagen::{certificate_gram, generate, is_diagonally_dominant, GenConfig, Method};
use soscert_core::gram::{full_basis, DEFAULT_BASIS_CAP};
use soscert_core::lean::{emit_lean, parse_lean_terms, LeanEmitConfig};
use soscert_core::poly::{int, ratio, FloatPolynomial, Monomial, Polynomial};
use soscert_core::reward::{accuracy_reward, reward_from_parts, sdr, RewardConfig};
use soscert_core::verify::{check_certificate, decode_certificate, encode_certificate};

fn base() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..=2, 2), -7i64..=7, 1i64..=3), 1..4)
        .prop_map(|ts| Polynomial::from_terms(2, ts.into_iter().map(|(e, n, d)| (Monomial::new(e), ratio(n, d)))))
        .prop_filter("nonzero", |q| !q.is_zero())
}

fn squares() -> impl Strategy<Value = Vec<(BigRational, Polynomial)>> {
    prop::collection::vec(((1i64..=9, 1i64..=4).prop_map(|(n, d)| ratio(n, d)), base()), 1..4)
}

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

fn pair_config() -> impl Strategy<Value = GenConfig> {
    (1usize..=3, 1u32..=2, any::<u64>()).prop_map(|(nvars, half_degree, seed)| GenConfig {
        nvars,
        half_degree,
        seed,
        ..GenConfig::default()
    })
}

proptest! {
    #[test]
    fn sos_expression_round_trip(sq in squares()) {
        let text = format_sos_expression(&sq);
        prop_assert_eq!(parse_sos_expression(&text, 2).unwrap(), sq);
    }

    #[test]
    fn ranking_is_a_sorted_permutation(thetas in prop::collection::vec(prop_oneof![0.0f64..10.0, Just(f64::INFINITY), Just(f64::NAN)], 0..12)) {
        let cands: Vec<ConjectureCandidate> = thetas
            .iter()
            .enumerate()
            .map(|(i, &theta)| ConjectureCandidate { raw_text: i.to_string(), parsed: vec![], theta, source_tag: "t".into(), format_error: None })
            .collect();
        let ranked = rank(cands.clone());
        let mut ids: Vec<String> = ranked.iter().map(|c| c.raw_text.clone()).collect();
        ids.sort();
        let mut want: Vec<String> = cands.iter().map(|c| c.raw_text.clone()).collect();
        want.sort();
        prop_assert_eq!(ids, want);
        let key = |t: f64| if t.is_nan() { f64::INFINITY } else { t };
        prop_assert!(ranked.windows(2).all(|w| key(w[0].theta) <= key(w[1].theta)));
    }

    #[test]
    fn accuracy_reward_decreases_with_distance(sq in squares(), g in base(), small in 0i64..5, extra in 1i64..5) {
        let f = soscert_core::poly::expand_weighted_squares(2, &sq).unwrap();
        let near = (&f + &g.scale(&int(small))).to_float(128);
        let far = (&f + &g.scale(&int(small + extra))).to_float(128);
        let alpha = RewardConfig::default().alpha;
        let (a, b) = (accuracy_reward(&f, &near, alpha), accuracy_reward(&f, &far, alpha));
        prop_assert!(a > b);
        prop_assert!(a <= 1.0 && b > 0.0);
        prop_assert_eq!(a == 1.0, small == 0);
    }

    #[test]
    fn exact_match_has_no_penalty(sq in squares()) {
        let f = soscert_core::poly::expand_weighted_squares(2, &sq).unwrap();
        prop_assume!(!f.is_zero());
        let cfg = RewardConfig::default();
        let fhat = FloatPolynomial::from_exact(&f, 128);
        prop_assert_eq!(sdr(&f, &fhat, cfg.tau_coeff).unwrap(), 0.0);
        let b = reward_from_parts(&f, &fhat, true, &cfg);
        prop_assert_eq!(b.total, cfg.w_acc + cfg.w_fmt);
        prop_assert_eq!(b.total, b.recombine(&cfg));
    }

    #[test]
    fn generated_pairs_verify(m in method(), cfg in pair_config()) {
        let pair = generate(m, &cfg).unwrap();
        prop_assert!(check_certificate(&pair.f, &pair.decomposition).ok);
        let decoded = decode_certificate(&encode_certificate(&pair.decomposition)).unwrap();
        prop_assert_eq!(&decoded, &pair.decomposition);
        if m == Method::Dd {
            let basis = full_basis(cfg.nvars, cfg.half_degree, DEFAULT_BASIS_CAP).unwrap();
            let g = certificate_gram(&pair.decomposition, &basis).unwrap();
            prop_assert!(is_diagonally_dominant(&g));
        }
    }

    #[test]
    fn lean_terms_round_trip(m in method(), cfg in pair_config()) {
        let pair = generate(m, &cfg).unwrap();
        let lean = LeanEmitConfig::default();
        let script = emit_lean(&pair.f, &pair.decomposition, &lean).unwrap();
        prop_assert_eq!(&emit_lean(&pair.f, &pair.decomposition, &lean).unwrap(), &script);
        let back = parse_lean_terms(&script, cfg.nvars, &lean).unwrap();
        prop_assert_eq!(back.normalized(), pair.decomposition.normalized());
    }
}
