use std::path::Path;
use std::sync::Mutex;

use proptest::prelude::*;
use soscert::config::Config;
use soscert::io::{parse_problem, problem_text, read_certificate, write_certificate, Problem};
use soscert::lean_check::LeanStatus;
use soscert::pipeline::{problem_seed, solve, Outcome};
use soscert_core::conjecture::{ConjectureCandidate, ConjectureRequest, ConjectureSource, ReplaySource, SourceError};
use soscert_core::deadline::Deadline;
use soscert_core::poly::{parse_polynomial, ratio, Monomial, Polynomial};
use soscert_core::verify::SosCertificate;

const WORKED_EXAMPLE_SOS: &str = "1/2*(2*x1^2 - 3*x2^2 + x1*x2)^2 + 1/2*(x2^2 + 3*x1*x2)^2";

fn worked_example() -> Problem {
    Problem { id: "worked_example".into(), f: parse_polynomial("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4", 2).unwrap() }
}

/// Hands out one scripted expression per round and records the requests.
struct Scripted {
    rounds: Vec<&'static str>,
    seen: Mutex<Vec<(u32, usize)>>,
}

impl ConjectureSource for Scripted {
    fn tag(&self) -> &str {
        "scripted"
    }

    fn propose(&self, req: &ConjectureRequest, _: &dyn Deadline) -> Result<Vec<ConjectureCandidate>, SourceError> {
        self.seen.lock().unwrap().push((req.round, req.budget_k));
        Ok(self
            .rounds
            .get(req.round as usize)
            .map(|e| vec![ConjectureCandidate::from_expression(&req.f, e, "scripted")])
            .unwrap_or_default())
    }
}

#[test]
fn bad_candidates_are_skipped() {
    let src = ReplaySource::from_text("(x1 + \n(x1 - x2)^2\n");
    let r = solve(&worked_example(), &src, &Config::default(), None);
    assert_eq!(r.outcome, Outcome::RecoveryFailed);
    assert_eq!((r.proposed, r.attempted), (2, 2));
    assert!(r.failures.iter().any(|f| f.contains("format")), "{:?}", r.failures);

    // Ranking puts the exact candidate first.
    let src = ReplaySource::from_text(&format!("(x1 + \n(x1 - x2)^2\n{WORKED_EXAMPLE_SOS}\n"));
    let r = solve(&worked_example(), &src, &Config::default(), None);
    assert_eq!(r.outcome, Outcome::Proved);
    assert_eq!((r.proposed, r.attempted), (3, 1));
    assert_eq!(r.theta_candidate, Some(0.0));
    assert!(r.certificate.is_some() && r.lean_script.is_some());
}

#[test]
fn later_rounds_are_requested_after_failures() {
    let src = Scripted { rounds: vec!["(x1)^2", "(x2)^2", WORKED_EXAMPLE_SOS], seen: Mutex::new(Vec::new()) };
    let mut cfg = Config::default();
    cfg.pipeline.budget = 5;
    let r = solve(&worked_example(), &src, &cfg, None);
    assert_eq!(r.outcome, Outcome::Proved);
    assert_eq!((r.proposed, r.attempted), (3, 3));
    assert_eq!(*src.seen.lock().unwrap(), vec![(0, 5), (1, 4), (2, 3)]);
}

#[test]
fn rounds_stop_at_the_budget_or_when_the_source_is_dry() {
    let src = Scripted { rounds: vec!["(x1)^2"; 10], seen: Mutex::new(Vec::new()) };
    let mut cfg = Config::default();
    cfg.pipeline.budget = 4;
    let r = solve(&worked_example(), &src, &cfg, None);
    assert_eq!(r.outcome, Outcome::RecoveryFailed);
    assert_eq!(r.attempted, 4);
    assert_eq!(src.seen.lock().unwrap().len(), 4);

    let src = Scripted { rounds: vec!["(x1)^2"], seen: Mutex::new(Vec::new()) };
    let r = solve(&worked_example(), &src, &cfg, None);
    assert_eq!(r.outcome, Outcome::RecoveryFailed);
    assert_eq!(r.attempted, 1);
    assert_eq!(src.seen.lock().unwrap().len(), 2);
}

#[test]
fn empty_replay_is_no_candidate() {
    let r = solve(&worked_example(), &ReplaySource::default(), &Config::default(), None);
    assert_eq!(r.outcome, Outcome::NoCandidate);
    assert_eq!(r.outcome.exit_code(), 1);
}

#[cfg(unix)]
#[test]
fn lean_rejection_fails_the_candidate() {
    let src = ReplaySource::from_text(WORKED_EXAMPLE_SOS);
    let mut cfg = Config::default();
    cfg.lean.check_command = Some(vec!["false".into()]);
    let r = solve(&worked_example(), &src, &cfg, None);
    assert_eq!(r.outcome, Outcome::RecoveryFailed);
    assert!(r.failures.iter().any(|f| f.contains("lean")), "{:?}", r.failures);

    cfg.lean.check_command = Some(vec!["true".into()]);
    let r = solve(&worked_example(), &src, &cfg, None);
    assert_eq!(r.outcome, Outcome::Proved);
    assert_eq!(r.lean_status, Some(LeanStatus::Pass));
}

#[test]
fn baseline_is_reproducible() {
    let mut cfg = Config::default();
    cfg.pipeline.seed = 11;
    let p = worked_example();
    let run = || {
        let src = cfg.baseline(problem_seed(cfg.pipeline.seed, &p.id));
        solve(&p, &src, &cfg, None).certificate
    };
    let first = run();
    assert!(first.is_some());
    assert_eq!(first, run());
    assert_ne!(problem_seed(11, "a"), problem_seed(11, "b"));
    assert_ne!(problem_seed(11, "a"), problem_seed(12, "a"));
}

fn poly() -> impl Strategy<Value = Polynomial> {
    (1usize..=4).prop_flat_map(|n| {
        prop::collection::vec((prop::collection::vec(0u32..=3, n), -20i64..=20, 1i64..=7), 0..6).prop_map(move |ts| {
            Polynomial::from_terms(n, ts.into_iter().map(|(e, a, b)| (Monomial::new(e), ratio(a, b))))
        })
    })
}

proptest! {
    #[test]
    fn problem_text_round_trip(f in poly()) {
        prop_assume!(!f.is_zero());
        let p = parse_problem(&problem_text(&f), "p", Path::new("p.poly")).unwrap();
        prop_assert_eq!(p.f, f);
    }

    #[test]
    fn certificate_file_round_trip(bases in prop::collection::vec((1i64..=9, 1i64..=5, poly()), 1..4)) {
        let nvars = bases.iter().map(|(_, _, q)| q.nvars()).max().unwrap();
        let squares: Vec<_> = bases
            .into_iter()
            .filter(|(_, _, q)| q.nvars() == nvars && !q.is_zero())
            .map(|(a, b, q)| (ratio(a, b), q))
            .collect();
        let cert = SosCertificate { nvars, squares };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cert");
        write_certificate(&path, &cert).unwrap();
        prop_assert_eq!(read_certificate(&path).unwrap(), cert);
    }
}
