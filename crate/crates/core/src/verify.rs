//! The exact certificate checker and the certificate text format.
//!
//! A certificate `Σ kᵢ·qᵢ²` is accepted only if every weight is nonnegative
//! and the expansion equals the target polynomial term by term in exact
//! arithmetic. Nothing else in the crate is trusted.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::gram::GramRational;
use crate::poly::{expand_weighted_squares, format_rational, parse_polynomial, ParseError, Polynomial};
use crate::recover::{exact_psd_check, PsdCheck};

/// `Σ weight·base²` with exact rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosCertificate {
    pub nvars: usize,
    pub squares: Vec<(BigRational, Polynomial)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    /// `f − Σ kᵢ·qᵢ²`.
    pub identity_residual: Polynomial,
    /// Indices of squares with negative weight.
    pub weight_violations: Vec<usize>,
    pub nvars_mismatch: bool,
}

impl SosCertificate {
    pub fn empty(nvars: usize) -> Self {
        SosCertificate { nvars, squares: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn expand(&self) -> Polynomial {
        expand_weighted_squares(self.nvars, &self.squares).unwrap_or_else(|_| Polynomial::zero(self.nvars))
    }

    /// Rescales each base to a primitive integer polynomial with positive
    /// leading coefficient, moving the factor into the weight, and drops
    /// zero squares. The expansion is unchanged.
    pub fn normalized(&self) -> SosCertificate {
        let mut squares = Vec::with_capacity(self.squares.len());
        for (w, q) in &self.squares {
            if w.is_zero() || q.is_zero() {
                continue;
            }
            let mut lcm = BigInt::one();
            let mut gcd = BigInt::zero();
            for (_, c) in q.terms() {
                lcm = lcm.lcm(c.denom());
                gcd = gcd.gcd(c.numer());
            }
            let mut factor = BigRational::new(lcm, gcd);
            let lead = q.leading_term().map(|(_, c)| c.is_negative()).unwrap_or(false);
            if lead {
                factor = -factor;
            }
            let base = q.scale(&factor);
            let weight = w / (&factor * &factor);
            squares.push((weight, base));
        }
        SosCertificate { nvars: self.nvars, squares }
    }
}

/// Exact check of `f = Σ kᵢ·qᵢ²` with `kᵢ ≥ 0`.
pub fn check_certificate(f: &Polynomial, cert: &SosCertificate) -> Verdict {
    let mismatch = cert.nvars != f.nvars() || cert.squares.iter().any(|(_, q)| q.nvars() != f.nvars());
    if mismatch {
        return Verdict {
            ok: false,
            identity_residual: f.clone(),
            weight_violations: Vec::new(),
            nvars_mismatch: true,
        };
    }
    let weight_violations: Vec<usize> =
        cert.squares.iter().enumerate().filter(|(_, (w, _))| w.is_negative()).map(|(i, _)| i).collect();
    let expansion = expand_weighted_squares(f.nvars(), &cert.squares).expect("nvars checked above");
    let residual = f - &expansion;
    Verdict {
        ok: residual.is_zero() && weight_violations.is_empty(),
        identity_residual: residual,
        weight_violations,
        nvars_mismatch: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("Gram matrix is not positive semidefinite")]
pub struct NotPsd {
    pub witness: Vec<BigRational>,
}

/// Squares `Dⱼ·(Lᵀ P v)ⱼ²` from the exact pivoted `LDLᵀ` of `g`, zero pivots dropped.
pub fn gram_to_certificate(g: &GramRational) -> Result<SosCertificate, NotPsd> {
    let f = match exact_psd_check(g) {
        PsdCheck::Psd(f) => f,
        PsdCheck::NotPsd { witness, .. } => return Err(NotPsd { witness }),
    };
    let basis = &g.basis;
    let n = g.dim();
    let mut squares = Vec::new();
    for j in 0..n {
        if f.d[j].is_zero() {
            continue;
        }
        let base = Polynomial::from_terms(
            basis.nvars(),
            (0..n).filter(|&i| !f.l[i][j].is_zero()).map(|i| (basis.get(f.perm[i]).clone(), f.l[i][j].clone())),
        );
        squares.push((f.d[j].clone(), base));
    }
    Ok(SosCertificate { nvars: basis.nvars(), squares }.normalized())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertFormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Polynomial { line: usize, source: ParseError },
}

/// Text form: header `nvars k`, then one `num/den<TAB>polynomial` line per square.
pub fn encode_certificate(cert: &SosCertificate) -> String {
    let mut s = format!("{} {}\n", cert.nvars, cert.squares.len());
    for (w, q) in &cert.squares {
        let _ = writeln!(s, "{}/{}\t{}", w.numer(), w.denom(), q);
    }
    s
}

pub fn decode_certificate(text: &str) -> Result<SosCertificate, CertFormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (hline, header) = lines.next().ok_or(CertFormatError::Malformed { line: 1, message: "missing header".into() })?;
    let mut fields = header.split_whitespace();
    let malformed = |line: usize, message: &str| CertFormatError::Malformed { line: line + 1, message: message.into() };
    let nvars: usize = fields
        .next()
        .and_then(|x| x.parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| malformed(hline, "header must be `nvars k`"))?;
    let count: usize = fields.next().and_then(|x| x.parse().ok()).ok_or_else(|| malformed(hline, "header must be `nvars k`"))?;
    let mut squares = Vec::with_capacity(count);
    for (ln, line) in lines {
        let (w, q) = line.split_once('\t').ok_or_else(|| malformed(ln, "expected `weight<TAB>polynomial`"))?;
        let weight = parse_weight(w.trim()).ok_or_else(|| malformed(ln, "weight must be an exact rational"))?;
        let base = parse_polynomial(q.trim(), nvars).map_err(|e| CertFormatError::Polynomial { line: ln + 1, source: e })?;
        squares.push((weight, base));
    }
    if squares.len() != count {
        return Err(malformed(hline, "square count differs from header"));
    }
    Ok(SosCertificate { nvars, squares })
}

fn parse_weight(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// `p` or `p/q`, the form used in generated proof scripts.
pub fn weight_text(w: &BigRational) -> String {
    format_rational(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{gram_to_poly, support_restricted_basis, DEFAULT_BASIS_CAP};
    use crate::poly::{int, ratio};
    use alloc::vec;

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s, 2).unwrap()
    }

    fn worked_example() -> (Polynomial, SosCertificate) {
        let f = p("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4");
        let cert = SosCertificate {
            nvars: 2,
            squares: vec![(ratio(1, 2), p("2*x1^2 - 3*x2^2 + x1*x2")), (ratio(1, 2), p("x2^2 + 3*x1*x2"))],
        };
        (f, cert)
    }

    #[test]
    fn worked_example_certificate_verifies() {
        let (f, cert) = worked_example();
        assert!(check_certificate(&f, &cert).ok);
        let mut bad = cert.clone();
        bad.squares[0].0 += ratio(1, 1_000_000);
        let v = check_certificate(&f, &bad);
        assert!(!v.ok && !v.identity_residual.is_zero());
        assert!(check_certificate(&Polynomial::zero(2), &SosCertificate::empty(2)).ok);
    }

    #[test]
    fn negative_weight_rejected() {
        let f = p("-x1^2");
        let cert = SosCertificate { nvars: 2, squares: vec![(int(-1), p("x1"))] };
        let v = check_certificate(&f, &cert);
        assert!(v.identity_residual.is_zero());
        assert_eq!(v.weight_violations, vec![0]);
        assert!(!v.ok);
    }

    #[test]
    fn gram_conversion() {
        let (f, _) = worked_example();
        let basis = support_restricted_basis(&f, DEFAULT_BASIS_CAP).unwrap();
        // basis [x1^2, x1*x2, x2^2]
        let g = GramRational::from_rows(
            basis,
            &[vec![int(2), int(1), int(-3)], vec![int(1), int(5), int(0)], vec![int(-3), int(0), int(5)]],
        );
        assert_eq!(gram_to_poly(&g), f);
        let cert = gram_to_certificate(&g).unwrap();
        assert_eq!(cert.len(), 2);
        assert!(check_certificate(&f, &cert).ok);
    }

    #[test]
    fn text_round_trip() {
        let (_, cert) = worked_example();
        let text = encode_certificate(&cert);
        assert!(text.starts_with("2 2\n1/2\t"));
        assert_eq!(decode_certificate(&text).unwrap(), cert);
        assert!(decode_certificate("2 3\n1/2\tx1\n").is_err());
    }
}
