//! Symbolic correction of one candidate: refine, recover, and certify.

use alloc::vec::Vec;

use crate::conjecture::{ConjectureCandidate, SosParseError};
use crate::deadline::Deadline;
use crate::gram::{support_restricted_basis, GramError, GramRational, DEFAULT_BASIS_CAP};
use crate::recover::{recover_until, RecoverConfig, RecoverError, RecoveryPath};
use crate::refine::{gauss_newton_until, initial_factor, RefineConfig, RefineError, StopReason};
use crate::verify::{check_certificate, gram_to_certificate, SosCertificate};

#[derive(Clone, Debug, PartialEq)]
pub struct ProveConfig {
    pub refine: RefineConfig,
    pub recover: RecoverConfig,
    /// Recovery is attempted when refinement ends at or below this error,
    /// converged or not.
    pub recover_theta: f64,
    pub basis_cap: usize,
}

impl Default for ProveConfig {
    fn default() -> Self {
        ProveConfig {
            refine: RefineConfig::default(),
            recover: RecoverConfig::default(),
            recover_theta: 1e-6,
            basis_cap: DEFAULT_BASIS_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttemptError {
    #[error("candidate is malformed: {0}")]
    Format(SosParseError),
    #[error(transparent)]
    Basis(#[from] GramError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("refinement stopped at θ = {theta:e} ({stop:?})")]
    NotConverged { theta: f64, stop: StopReason },
    #[error(transparent)]
    Recover(RecoverError),
    #[error("deadline reached")]
    TimedOut,
    #[error("recovered certificate failed verification")]
    Unsound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Attempt {
    pub certificate: SosCertificate,
    pub gram: GramRational,
    pub path: RecoveryPath,
    pub numerical_rank: usize,
    pub theta_refined: f64,
    pub iterations: usize,
    pub theta_history: Vec<f64>,
}

/// Turns a candidate into a verified exact certificate for `f`, or reports
/// the stage that failed.
#[allow(clippy::neg_cmp_op_on_partial_ord, reason = "NaN must fail the gate")]
pub fn attempt_candidate(
    f: &crate::poly::Polynomial,
    candidate: &ConjectureCandidate,
    cfg: &ProveConfig,
    deadline: &dyn Deadline,
) -> Result<Attempt, AttemptError> {
    if let Some(e) = &candidate.format_error {
        return Err(AttemptError::Format(e.clone()));
    }
    let prec = cfg.refine.precision_bits;
    let basis = support_restricted_basis(f, cfg.basis_cap)?;
    let squares: Vec<_> = candidate.parsed.iter().map(|(w, q)| (w.clone(), q.to_float(prec))).collect();
    let l0 = initial_factor(&squares, &basis, prec, cfg.basis_cap)?;
    let refined = gauss_newton_until(f, &l0, &cfg.refine, deadline);
    if refined.stop == StopReason::TimedOut && !refined.converged {
        return Err(AttemptError::TimedOut);
    }
    if !(refined.theta_final <= cfg.recover_theta) {
        return Err(AttemptError::NotConverged { theta: refined.theta_final, stop: refined.stop });
    }
    let rec = match recover_until(f, &refined.gram, &cfg.recover, deadline) {
        Ok(r) => r,
        Err(RecoverError::TimedOut) => return Err(AttemptError::TimedOut),
        Err(e) => return Err(AttemptError::Recover(e)),
    };
    let certificate = gram_to_certificate(&rec.gram).map_err(|_| AttemptError::Unsound)?;
    if !check_certificate(f, &certificate).ok {
        return Err(AttemptError::Unsound);
    }
    Ok(Attempt {
        certificate,
        gram: rec.gram,
        path: rec.path,
        numerical_rank: rec.numerical_rank,
        theta_refined: refined.theta_final,
        iterations: refined.iterations,
        theta_history: refined.theta_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deadline::NoDeadline;
    use crate::gram::gram_to_poly;
    use crate::poly::{int, parse_polynomial};

    #[test]
    fn worked_example_candidate_certifies() {
        let f = parse_polynomial("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4", 2).unwrap();
        let text = "1/2*(2*x1^2 - 3*x2^2 + x1*x2)^2 + 1/2*(x2^2 + 3*x1*x2)^2";
        let c = ConjectureCandidate::from_expression(&f, text, "replay");
        assert_eq!(c.theta, 0.0);
        let a = attempt_candidate(&f, &c, &ProveConfig::default(), &NoDeadline).unwrap();
        assert!(check_certificate(&f, &a.certificate).ok);
        assert_eq!(gram_to_poly(&a.gram), f);
        let g = |i, j| a.gram.get(i, j).clone();
        assert_eq!(g(0, 0), int(2));
        assert_eq!(g(2, 2), int(5));
        assert_eq!(g(1, 1) + int(2) * g(0, 2), int(-1));
        assert_eq!(int(2) * g(0, 1), int(2));
        assert_eq!(int(2) * g(1, 2), int(0));
    }

    #[test]
    fn failures_are_typed() {
        let f = parse_polynomial("x1^2 + 1", 1).unwrap();
        let bad = ConjectureCandidate::from_expression(&f, "x1^2", "replay");
        assert!(matches!(attempt_candidate(&f, &bad, &ProveConfig::default(), &NoDeadline), Err(AttemptError::Format(_))));
        let neg = parse_polynomial("-x1^2 - 1", 1).unwrap();
        let c = ConjectureCandidate::from_expression(&neg, "(x1)^2 + (1)^2", "replay");
        assert!(matches!(
            attempt_candidate(&neg, &c, &ProveConfig::default(), &NoDeadline),
            Err(AttemptError::NotConverged { .. })
        ));
        let expired = || true;
        let c = ConjectureCandidate::from_expression(&f, "(x1 + 0.1)^2 + (1)^2", "replay");
        assert_eq!(attempt_candidate(&f, &c, &ProveConfig::default(), &expired), Err(AttemptError::TimedOut));
    }
}
