//! Candidate SOS structures: the model prompt, the response grammar,
//! built-in sources, and ranking by backward error.
//!
//! A response carries its expression after a `<SOS Expression>:` (or
//! `(SOS Expression):`) delimiter. The expression is a `+`-separated list of
//! squares, each `c*(poly)^2` or `(poly)^2` with `c` a nonnegative decimal or
//! `p/q` literal. Parsing is exact: decimal coefficients become rationals.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::format;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deadline::Deadline;
use crate::gram::MonomialBasis;
use crate::poly::parse::Parser;
use crate::poly::{coeff_l2_distance, expand_weighted_squares, format_rational, ParseError, Polynomial};
use crate::refine::{gauss_newton_until, FactorMatrix, RefineConfig};

const PROMPT_TEMPLATE: &str = include_str!("prompt_template.txt");

/// Delimiters accepted before the expression.
pub const DELIMITERS: [&str; 2] = ["<SOS Expression>:", "(SOS Expression):"];

/// The model prompt with `f` substituted in canonical form.
pub fn build_prompt(f: &Polynomial) -> String {
    PROMPT_TEMPLATE.replace("{polynomial}", &f.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SosParseError {
    #[error("no `<SOS Expression>:` delimiter")]
    MissingDelimiter,
    #[error("empty expression")]
    Empty,
    #[error("term at byte {pos} is not a square")]
    NonSquare { pos: usize },
    #[error("negative weight at byte {pos}")]
    NegativeWeight { pos: usize },
    #[error(transparent)]
    Polynomial(#[from] ParseError),
}

impl SosParseError {
    /// Stable short code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            SosParseError::MissingDelimiter => "missing_delimiter",
            SosParseError::Empty => "empty",
            SosParseError::NonSquare { .. } => "non_square",
            SosParseError::NegativeWeight { .. } => "negative_weight",
            SosParseError::Polynomial(_) => "bad_polynomial",
        }
    }
}

/// Text after the last delimiter, up to the end of that line.
pub fn extract_payload(text: &str) -> Option<&str> {
    let (at, delim) = DELIMITERS.iter().filter_map(|d| text.rfind(d).map(|i| (i, *d))).max_by_key(|(i, _)| *i)?;
    let rest = &text[at + delim.len()..];
    let line = rest.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    Some(line.trim().trim_end_matches('.').trim())
}

/// Parses a full response, delimiter included.
pub fn parse_sos_response(text: &str, nvars: usize) -> Result<Vec<(BigRational, Polynomial)>, SosParseError> {
    let payload = extract_payload(text).ok_or(SosParseError::MissingDelimiter)?;
    parse_sos_expression(payload, nvars)
}

/// Parses a bare `Σ c*(poly)^2` expression.
pub fn parse_sos_expression(text: &str, nvars: usize) -> Result<Vec<(BigRational, Polynomial)>, SosParseError> {
    let mut p = Parser::new(text, nvars);
    if p.at_end() {
        return Err(SosParseError::Empty);
    }
    let mut out = Vec::new();
    loop {
        let start = p.pos;
        if p.eat(b'-') {
            return Err(SosParseError::NegativeWeight { pos: start });
        }
        p.eat(b'+');
        let weight = match p.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let mut w = p.number()?;
                if p.eat(b'/') {
                    let at = p.pos;
                    let d = p.number()?;
                    if d.is_zero() {
                        return Err(ParseError::DivisionByZero { pos: at }.into());
                    }
                    w /= d;
                }
                if !p.eat(b'*') {
                    return Err(SosParseError::NonSquare { pos: start });
                }
                w
            }
            _ => BigRational::one(),
        };
        if !p.eat(b'(') {
            return Err(SosParseError::NonSquare { pos: start });
        }
        let base = p.expr()?;
        if !p.eat(b')') {
            return Err(p.syntax("expected `)`").into());
        }
        p.skip_ws();
        if !p.eat_power() || p.exponent()? != 2 {
            return Err(SosParseError::NonSquare { pos: start });
        }
        out.push((weight, base));
        if p.at_end() {
            return Ok(out);
        }
        if p.peek() == Some(b'-') {
            return Err(SosParseError::NegativeWeight { pos: p.pos });
        }
        if !p.eat(b'+') {
            return Err(p.syntax("expected `+` between squares").into());
        }
    }
}

/// Prints squares in the grammar accepted by [`parse_sos_expression`].
pub fn format_sos_expression(squares: &[(BigRational, Polynomial)]) -> String {
    if squares.is_empty() {
        return "(0)^2".to_string();
    }
    let parts: Vec<String> = squares
        .iter()
        .map(|(w, q)| if w.is_one() { format!("({})^2", q) } else { format!("{}*({})^2", format_rational(w), q) })
        .collect();
    parts.join(" + ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureCandidate {
    /// The expression payload, or the whole response when no delimiter was found.
    pub raw_text: String,
    pub parsed: Vec<(BigRational, Polynomial)>,
    /// Coefficient distance to the target; `+∞` when the text did not parse.
    pub theta: f64,
    pub source_tag: String,
    pub format_error: Option<SosParseError>,
}

impl ConjectureCandidate {
    pub fn format_ok(&self) -> bool {
        self.format_error.is_none()
    }

    /// Scores a bare expression against `f`.
    pub fn from_expression(f: &Polynomial, expression: &str, source_tag: &str) -> Self {
        Self::scored(f, expression.to_string(), parse_sos_expression(expression, f.nvars()), source_tag)
    }

    /// Scores a full model response against `f`.
    pub fn from_response(f: &Polynomial, response: &str, source_tag: &str) -> Self {
        let raw = extract_payload(response).unwrap_or(response).to_string();
        Self::scored(f, raw, parse_sos_response(response, f.nvars()), source_tag)
    }

    fn scored(
        f: &Polynomial,
        raw_text: String,
        parsed: Result<Vec<(BigRational, Polynomial)>, SosParseError>,
        source_tag: &str,
    ) -> Self {
        match parsed {
            Ok(squares) => {
                let theta = score(f, &squares);
                ConjectureCandidate { raw_text, parsed: squares, theta, source_tag: source_tag.into(), format_error: None }
            }
            Err(e) => ConjectureCandidate {
                raw_text,
                parsed: Vec::new(),
                theta: f64::INFINITY,
                source_tag: source_tag.into(),
                format_error: Some(e),
            },
        }
    }
}

/// `‖coeff(f − Σ kᵢqᵢ²)‖₂`, computed exactly and rounded to `f64`.
pub fn score(f: &Polynomial, squares: &[(BigRational, Polynomial)]) -> f64 {
    match expand_weighted_squares(f.nvars(), squares) {
        Ok(e) => coeff_l2_distance(f, &e),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureRequest {
    pub f: Polynomial,
    pub budget_k: usize,
    pub timeout_s: f64,
    /// Zero on the first call for a target; later calls ask for fresh candidates.
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SourceError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("source timed out")]
    TimedOut,
    #[error("{0}")]
    Other(String),
}

impl SourceError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, SourceError::Transport(_))
    }
}

/// Anything that proposes candidate structures for a target.
pub trait ConjectureSource {
    fn tag(&self) -> &str;

    /// At most `req.budget_k` scored candidates.
    fn propose(&self, req: &ConjectureRequest, deadline: &dyn Deadline) -> Result<Vec<ConjectureCandidate>, SourceError>;
}

/// Replays fixed expressions, one per line; blank and `#` lines are skipped.
#[derive(Clone, Debug, Default)]
pub struct ReplaySource {
    pub lines: Vec<String>,
}

impl ReplaySource {
    pub fn from_text(text: &str) -> Self {
        ReplaySource {
            lines: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from)
                .collect(),
        }
    }
}

impl ConjectureSource for ReplaySource {
    fn tag(&self) -> &str {
        "replay"
    }

    fn propose(&self, req: &ConjectureRequest, _: &dyn Deadline) -> Result<Vec<ConjectureCandidate>, SourceError> {
        if req.round > 0 {
            return Ok(Vec::new());
        }
        Ok(self
            .lines
            .iter()
            .take(req.budget_k)
            .map(|l| {
                if DELIMITERS.iter().any(|d| l.contains(d)) {
                    ConjectureCandidate::from_response(&req.f, l, "replay")
                } else {
                    ConjectureCandidate::from_expression(&req.f, l, "replay")
                }
            })
            .collect())
    }
}

/// Numeric stand-in for a trained model: random factors refined by
/// Gauss–Newton, printed as SOS expressions.
#[derive(Clone, Debug)]
pub struct BaselineSource {
    pub seed: u64,
    pub refine: RefineConfig,
    pub basis_cap: usize,
    /// Stop proposing once a candidate reaches this backward error.
    pub stop_theta: Option<f64>,
}

impl Default for BaselineSource {
    fn default() -> Self {
        BaselineSource {
            seed: 0,
            refine: RefineConfig { tol_tau: 1e-12, precision_bits: 64, max_iters: 60, ..RefineConfig::default() },
            basis_cap: crate::gram::DEFAULT_BASIS_CAP,
            stop_theta: Some(1e-10),
        }
    }
}

impl ConjectureSource for BaselineSource {
    fn tag(&self) -> &str {
        "baseline"
    }

    fn propose(&self, req: &ConjectureRequest, deadline: &dyn Deadline) -> Result<Vec<ConjectureCandidate>, SourceError> {
        let basis = crate::gram::support_restricted_basis(&req.f, self.basis_cap)
            .map_err(|e| SourceError::Other(e.to_string()))?;
        if req.round == 0 {
            return Ok(baseline_conjecture_until(&req.f, &basis, req.budget_k, self, deadline));
        }
        // Fresh seed, and no full-width restart: that one already failed.
        let src = BaselineSource { seed: crate::datagen::split_seed(self.seed, u64::from(req.round)), ..self.clone() };
        Ok(baseline_restarts(&req.f, &basis, req.budget_k, &src, false, deadline))
    }
}

/// [`baseline_conjecture_until`] with default refinement settings and no deadline.
pub fn baseline_conjecture(f: &Polynomial, basis: &MonomialBasis, restarts: usize, seed: u64) -> Vec<ConjectureCandidate> {
    let src = BaselineSource { seed, stop_theta: None, ..Default::default() };
    baseline_conjecture_until(f, basis, restarts, &src, &crate::deadline::NoDeadline)
}

/// One candidate per restart that reaches a finite residual, sorted by `θ`.
/// Restart 0 uses a full-width factor; later ones draw the width at random.
pub fn baseline_conjecture_until(
    f: &Polynomial,
    basis: &MonomialBasis,
    restarts: usize,
    src: &BaselineSource,
    deadline: &dyn Deadline,
) -> Vec<ConjectureCandidate> {
    baseline_restarts(f, basis, restarts, src, true, deadline)
}

fn baseline_restarts(
    f: &Polynomial,
    basis: &MonomialBasis,
    restarts: usize,
    src: &BaselineSource,
    full_first: bool,
    deadline: &dyn Deadline,
) -> Vec<ConjectureCandidate> {
    let cfg = &src.refine;
    let m = basis.len();
    if m == 0 || f.total_degree() % 2 == 1 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(src.seed);
    let fmax = f.terms().map(|(_, c)| num_traits::ToPrimitive::to_f64(&num_traits::Signed::abs(c)).unwrap_or(1.0)).fold(0.0, f64::max);
    let scale = libm::sqrt(fmax.max(1e-12) / m as f64);
    let mut out = Vec::new();
    for r in 0..restarts {
        if deadline.expired() {
            break;
        }
        let width = if r == 0 && full_first { m } else { rng.gen_range(1..=m) };
        let cols: Vec<Vec<f64>> = (0..width).map(|_| (0..m).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).collect();
        let l0 = FactorMatrix::from_f64(basis.clone(), &cols, cfg.precision_bits);
        let outcome = gauss_newton_until(f, &l0, cfg, deadline);
        if !outcome.theta_final.is_finite() {
            continue;
        }
        let squares: Vec<String> = (0..outcome.factor.rank())
            .map(|i| outcome.factor.column_polynomial(i))
            .filter(|q| q.terms().any(|(_, c)| c.to_f64() != 0.0))
            .map(|q| format!("({})^2", q))
            .collect();
        if squares.is_empty() {
            continue;
        }
        let c = ConjectureCandidate::from_expression(f, &squares.join(" + "), "baseline");
        let done = src.stop_theta.is_some_and(|t| c.theta <= t);
        out.push(c);
        if done {
            break;
        }
    }
    rank(out)
}

/// Ascending `θ` (NaN and `+∞` last), then source tag, then arrival order.
pub fn rank(mut candidates: Vec<ConjectureCandidate>) -> Vec<ConjectureCandidate> {
    let key = |t: f64| if t.is_nan() { f64::INFINITY } else { t };
    candidates.sort_by(|a, b| key(a.theta).total_cmp(&key(b.theta)).then_with(|| a.source_tag.cmp(&b.source_tag)));
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::poly::{int, parse_polynomial, ratio};

    fn p(s: &str, n: usize) -> Polynomial {
        parse_polynomial(s, n).unwrap()
    }

    fn cand(theta: f64, tag: &str, text: &str) -> ConjectureCandidate {
        ConjectureCandidate { raw_text: text.into(), parsed: vec![], theta, source_tag: tag.into(), format_error: None }
    }

    #[test]
    fn prompt_substitution() {
        let f = p("x1^2 + 2*x1 + 1", 1);
        let s = build_prompt(&f);
        assert!(s.ends_with("Original polynomial: x1^2 + 2*x1 + 1\n"));
        assert!(s.contains("<SOS Expression>: <sum_of_squares_expression>"));
        assert_eq!(build_prompt(&p(&f.to_string(), 1)), s);
    }

    #[test]
    fn response_grammar() {
        let sq = parse_sos_response("(SOS Expression): (x1 + 1)^2", 1).unwrap();
        assert_eq!(sq, vec![(int(1), p("x1 + 1", 1))]);
        let sq = parse_sos_response("blah\n<SOS Expression>: 0.5*(x1 - x2)^2 + (x2)^2\nthanks", 2).unwrap();
        assert_eq!(sq, vec![(ratio(1, 2), p("x1 - x2", 2)), (int(1), p("x2", 2))]);
        assert_eq!(parse_sos_response("hello", 1), Err(SosParseError::MissingDelimiter));
        assert!(matches!(parse_sos_expression("x1^2", 1), Err(SosParseError::NonSquare { .. })));
        assert!(matches!(parse_sos_expression("(x1)^3", 1), Err(SosParseError::NonSquare { .. })));
        assert!(matches!(parse_sos_expression("-2*(x1)^2", 1), Err(SosParseError::NegativeWeight { .. })));
        assert!(matches!(parse_sos_expression("(x1)^2 - (x1)^2", 1), Err(SosParseError::NegativeWeight { .. })));
        assert_eq!(parse_sos_expression("3/4*(x1)**2", 1).unwrap(), vec![(ratio(3, 4), p("x1", 1))]);
    }

    #[test]
    fn replay_scores() {
        let f = p("x1^2 + 2*x1 + 1", 1);
        let req = ConjectureRequest { f, budget_k: 32, timeout_s: 10.0, round: 0 };
        let src = ReplaySource::from_text("(x1 + 1)^2\n");
        let c = src.propose(&req, &crate::deadline::NoDeadline).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].theta, 0.0);
        let again = ConjectureRequest { round: 1, ..req };
        assert!(src.propose(&again, &crate::deadline::NoDeadline).unwrap().is_empty());

        let f = p("5*x1^2 + 12*x1*x2 + 6*x1 + 9*x2^2 + 9", 2);
        let c = ConjectureCandidate::from_expression(&f, "(x1 + 2.99)^2 + (2*x1 + 3*x2)^2", "replay");
        assert!(c.theta > 0.0 && c.theta.is_finite());
        let req = ConjectureRequest { f, budget_k: 32, timeout_s: 10.0, round: 0 };
        assert!(ReplaySource::from_text("").propose(&req, &crate::deadline::NoDeadline).unwrap().is_empty());
    }

    #[test]
    fn ranking() {
        let r = rank(vec![cand(3.0, "a", "1"), cand(1.0, "a", "2"), cand(2.0, "a", "3")]);
        assert_eq!(r.iter().map(|c| c.theta).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
        let r = rank(vec![cand(f64::INFINITY, "a", "x"), cand(1.0, "b", "y"), cand(1.0, "a", "z"), cand(1.0, "b", "w")]);
        let order: Vec<&str> = r.iter().map(|c| c.raw_text.as_str()).collect();
        assert_eq!(order, vec!["z", "y", "w", "x"]);
    }

    #[test]
    fn baseline_finds_square() {
        let f = p("x1^2", 1);
        let basis = crate::gram::support_restricted_basis(&f, 64).unwrap();
        let c = baseline_conjecture(&f, &basis, 3, 7);
        assert!(!c.is_empty());
        assert!(c[0].theta < 1e-12, "{}", c[0].theta);
        let neg = p("-x1^2", 1);
        assert!(baseline_conjecture(&neg, &basis, 3, 7).iter().all(|c| c.theta >= 0.5));
    }
}
