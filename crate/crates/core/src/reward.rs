//! Offline scoring of candidate structures: accuracy, format, and a
//! structural penalty combined into one weighted total.

use alloc::vec::Vec;

use crate::conjecture::{parse_sos_response, ConjectureCandidate};
use crate::poly::{coeff_l2_distance, expand_weighted_squares, FloatPolynomial, Polynomial};

const SCORE_PRECISION: u32 = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct RewardConfig {
    pub alpha: f64,
    pub w_acc: f64,
    pub w_fmt: f64,
    pub lambda_soft: f64,
    pub rho_max: f64,
    pub c_hard: f64,
    /// Coefficients at or below this magnitude do not count as present.
    pub tau_coeff: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { alpha: 0.5, w_acc: 0.9, w_fmt: 0.1, lambda_soft: 0.5, rho_max: 2.0, c_hard: 0.5, tau_coeff: 1e-5 }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RewardConfigError {
    #[error("{0} must be finite and nonnegative")]
    Negative(&'static str),
    #[error("w_acc + w_fmt = {0}, expected 1")]
    WeightSum(f64),
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardConfigError> {
        let fields = [
            ("alpha", self.alpha),
            ("w_acc", self.w_acc),
            ("w_fmt", self.w_fmt),
            ("lambda_soft", self.lambda_soft),
            ("rho_max", self.rho_max),
            ("c_hard", self.c_hard),
            ("tau_coeff", self.tau_coeff),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(RewardConfigError::Negative(name));
        }
        if self.w_acc + self.w_fmt != 1.0 {
            return Err(RewardConfigError::WeightSum(self.w_acc + self.w_fmt));
        }
        Ok(())
    }

    /// Settings that are legal but make a component meaningless.
    pub fn warnings(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.alpha == 0.0 {
            out.push("alpha = 0: accuracy reward is constant 1");
        }
        if self.w_fmt == 0.0 {
            out.push("w_fmt = 0: format reward is ignored");
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardBreakdown {
    pub r_acc: f64,
    pub r_fmt: f64,
    pub sdr: f64,
    pub p_soft: f64,
    pub p_hard: f64,
    pub total: f64,
}

impl RewardBreakdown {
    /// Rebuilds `total` from the parts.
    pub fn recombine(&self, cfg: &RewardConfig) -> f64 {
        cfg.w_acc * self.r_acc + cfg.w_fmt * self.r_fmt - (self.p_soft + self.p_hard)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("structural deviation is undefined for the zero polynomial")]
pub struct ZeroTarget;

/// `1 / (1 + α‖f − f̂‖₂)`.
pub fn accuracy_reward(f: &Polynomial, fhat: &FloatPolynomial, alpha: f64) -> f64 {
    1.0 / (1.0 + alpha * coeff_l2_distance(f, fhat))
}

/// 1 when the response carries a well-formed nonnegative SOS expression.
pub fn format_reward(raw_text: &str, nvars: usize) -> f64 {
    if parse_sos_response(raw_text, nvars).is_ok() {
        1.0
    } else {
        0.0
    }
}

fn exact_support(f: &Polynomial, tau: f64) -> alloc::collections::BTreeSet<crate::poly::Monomial> {
    f.to_float(SCORE_PRECISION).support(tau)
}

/// `(missing + spurious) / required` over supports thresholded at `tau`.
pub fn sdr(f: &Polynomial, fhat: &FloatPolynomial, tau: f64) -> Result<f64, ZeroTarget> {
    let required = exact_support(f, tau);
    if required.is_empty() {
        return Err(ZeroTarget);
    }
    let got = fhat.support(tau);
    let missing = required.difference(&got).count();
    let spurious = got.difference(&required).count();
    Ok((missing + spurious) as f64 / required.len() as f64)
}

/// `(sdr, p_soft, p_hard)`; a zero target with spurious terms saturates the soft part.
pub fn structure_penalty(f: &Polynomial, fhat: &FloatPolynomial, cfg: &RewardConfig) -> (f64, f64, f64) {
    let dev = match sdr(f, fhat, cfg.tau_coeff) {
        Ok(v) => v,
        Err(ZeroTarget) if fhat.support(cfg.tau_coeff).is_empty() => 0.0,
        Err(ZeroTarget) => f64::INFINITY,
    };
    let p_soft = cfg.lambda_soft * dev.min(cfg.rho_max);
    let target = f.to_float(SCORE_PRECISION);
    let degree_up = fhat.total_degree(cfg.tau_coeff) > target.total_degree(cfg.tau_coeff);
    let new_vars = !fhat.variables_used(cfg.tau_coeff).is_subset(&target.variables_used(cfg.tau_coeff));
    let p_hard = if degree_up || new_vars { cfg.c_hard } else { 0.0 };
    (dev, p_soft, p_hard)
}

/// Scores an expanded candidate with an explicit format verdict.
pub fn reward_from_parts(f: &Polynomial, fhat: &FloatPolynomial, format_ok: bool, cfg: &RewardConfig) -> RewardBreakdown {
    let r_acc = accuracy_reward(f, fhat, cfg.alpha);
    let r_fmt = if format_ok { 1.0 } else { 0.0 };
    let (sdr, p_soft, p_hard) = structure_penalty(f, fhat, cfg);
    let mut b = RewardBreakdown { r_acc, r_fmt, sdr, p_soft, p_hard, total: 0.0 };
    b.total = b.recombine(cfg);
    b
}

/// Scores a candidate; unparseable text is scored against the zero polynomial.
pub fn total_reward(f: &Polynomial, candidate: &ConjectureCandidate, cfg: &RewardConfig) -> RewardBreakdown {
    let fhat = candidate_expansion(f.nvars(), candidate);
    reward_from_parts(f, &fhat, candidate.format_ok(), cfg)
}

/// Scores a raw model response.
pub fn score_response(f: &Polynomial, response: &str, cfg: &RewardConfig) -> RewardBreakdown {
    total_reward(f, &ConjectureCandidate::from_response(f, response, "response"), cfg)
}

fn candidate_expansion(nvars: usize, c: &ConjectureCandidate) -> FloatPolynomial {
    match expand_weighted_squares(nvars, &c.parsed) {
        Ok(p) if c.format_ok() => p.to_float(SCORE_PRECISION),
        _ => FloatPolynomial::zero(nvars, SCORE_PRECISION),
    }
}
