//! Lean 4 proof scripts from exact certificates.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::poly::{default_names, parse_polynomial, Polynomial};
use crate::verify::{check_certificate, weight_text, SosCertificate};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeanEmitConfig {
    pub theorem_name: String,
    /// Defaults to `x1..xn` when `None`.
    pub variable_names: Option<Vec<String>>,
    pub include_imports: bool,
}

impl Default for LeanEmitConfig {
    fn default() -> Self {
        LeanEmitConfig { theorem_name: "sos_nonneg".into(), variable_names: None, include_imports: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LeanError {
    #[error("certificate does not verify; refusing to emit a proof")]
    UnsoundCertificate,
    #[error("`{0}` is not a usable Lean identifier")]
    InvalidIdentifier(String),
    #[error("expected {expected} variable names, got {found}")]
    VariableCount { expected: usize, found: usize },
    #[error("variable names must be distinct and differ from `I`")]
    NameCollision,
    #[error("could not locate the term list: {0}")]
    TermList(String),
}

const KEYWORDS: &[&str] = &[
    "theorem", "lemma", "def", "let", "have", "fun", "by", "in", "if", "then", "else", "do", "match", "with", "end",
    "import", "open", "namespace", "section", "variable", "where", "at", "show", "from", "Type", "Prop", "Sort",
];

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else { return false };
    (first.is_ascii_alphabetic() || first == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&s)
}

fn resolve_names(nvars: usize, cfg: &LeanEmitConfig) -> Result<Vec<String>, LeanError> {
    let names = cfg.variable_names.clone().unwrap_or_else(|| default_names(nvars));
    if names.len() != nvars {
        return Err(LeanError::VariableCount { expected: nvars, found: names.len() });
    }
    for n in &names {
        if !is_identifier(n) {
            return Err(LeanError::InvalidIdentifier(n.clone()));
        }
    }
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != names.len() || names.iter().any(|n| n == "I") {
        return Err(LeanError::NameCollision);
    }
    Ok(names)
}

/// Lean 4 script proving `f ≥ 0` from `cert`; refuses unsound certificates.
pub fn emit_lean(f: &Polynomial, cert: &SosCertificate, cfg: &LeanEmitConfig) -> Result<String, LeanError> {
    if !check_certificate(f, cert).ok {
        return Err(LeanError::UnsoundCertificate);
    }
    if !is_identifier(&cfg.theorem_name) {
        return Err(LeanError::InvalidIdentifier(cfg.theorem_name.clone()));
    }
    let names = resolve_names(f.nvars(), cfg)?;
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let pairs: Vec<String> = cert
        .squares
        .iter()
        .filter(|(w, q)| !num_traits::Zero::is_zero(w) && !q.is_zero())
        .map(|(w, q)| format!("({}, {})", weight_text(w), q.to_string_with(&refs)))
        .collect();
    let term_list = if pairs.is_empty() { "[]".to_string() } else { format!("[ {} ]", pairs.join(", ")) };

    let mut s = String::new();
    if cfg.include_imports {
        s.push_str("import Mathlib\n\n");
    }
    let _ = writeln!(s, "theorem {} ({} I : Real)", cfg.theorem_name, names.join(" "));
    let _ = writeln!(s, "  (h1 : I = {}) :", f.to_string_with(&refs));
    s.push_str("  I >= 0 := by\n");
    s.push_str("  -- Step 1: Construct SOS term list\n");
    s.push_str("  let terms : List (Real × Real) :=\n");
    let _ = writeln!(s, "    {}", term_list);
    s.push_str(concat!(
        "  -- Step 2: Prove equality between polynomial and its SOS expansion\n",
        "  have : I = (terms.map (fun (p, k) => p * k^2)).sum := by\n",
        "    unfold terms\n",
        "    simp only [List.map_cons, List.map_nil, List.sum_cons, List.sum_nil,\n",
        "      one_mul, mul_one, zero_mul, add_zero, zero_add, neg_mul]\n",
        "    linear_combination h1\n",
        "  -- Step 3: Substitute and simplify\n",
        "  rw [this]\n",
        "  unfold terms\n",
        "  simp only [List.map_cons, List.map_nil, List.sum_cons, List.sum_nil,\n",
        "    one_mul, mul_one, zero_mul, add_zero, zero_add, ge_iff_le]\n",
        "  -- Step 4: Apply positivity tactic to conclude\n",
        "  positivity\n",
    ));
    Ok(s)
}

/// Replaces whole identifiers according to `map`.
fn rename_identifiers(text: &str, map: &[(String, String)]) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            let word = &text[start..i];
            match map.iter().find(|(from, _)| from == word) {
                Some((_, to)) => out.push_str(to),
                None => out.push_str(word),
            }
        } else {
            out.push(c as char);
            i += 1;
        }
    }
    out
}

/// Reads the `terms` list back out of an emitted script.
pub fn parse_lean_terms(script: &str, nvars: usize, cfg: &LeanEmitConfig) -> Result<SosCertificate, LeanError> {
    let names = resolve_names(nvars, cfg)?;
    let map: Vec<(String, String)> = names.iter().cloned().zip(default_names(nvars)).collect();
    let start = script.find("let terms").ok_or_else(|| LeanError::TermList("no `let terms`".into()))?;
    let rest = &script[start..];
    let open = rest.find(":=").and_then(|p| rest[p..].find('[').map(|q| p + q)).ok_or_else(|| LeanError::TermList("no `[`".into()))?;
    let body_start = open + 1;
    let mut depth = 0i32;
    let mut end = None;
    for (k, ch) in rest[body_start..].char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' => depth -= 1,
            ']' if depth == 0 => {
                end = Some(body_start + k);
                break;
            }
            ']' => depth -= 1,
            _ => {}
        }
    }
    let end = end.ok_or_else(|| LeanError::TermList("unterminated list".into()))?;
    let body = rename_identifiers(&rest[body_start..end], &map);

    let mut squares = Vec::new();
    let mut depth = 0i32;
    let mut pair_start = None;
    for (k, ch) in body.char_indices() {
        match ch {
            '(' => {
                if depth == 0 {
                    pair_start = Some(k + 1);
                }
                depth += 1;
            }
            ')' => {
                depth -= 1;
                if depth == 0 {
                    let inner = &body[pair_start.take().unwrap_or(k)..k];
                    squares.push(parse_pair(inner, nvars)?);
                }
            }
            _ => {}
        }
    }
    Ok(SosCertificate { nvars, squares })
}

fn parse_pair(inner: &str, nvars: usize) -> Result<(num_rational::BigRational, Polynomial), LeanError> {
    let mut depth = 0i32;
    let mut split = None;
    for (k, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                split = Some(k);
                break;
            }
            _ => {}
        }
    }
    let k = split.ok_or_else(|| LeanError::TermList(format!("pair without comma: {}", inner)))?;
    let bad = |e: crate::poly::ParseError| LeanError::TermList(e.to_string());
    let w = parse_polynomial(inner[..k].trim(), nvars).map_err(bad)?;
    let q = parse_polynomial(inner[k + 1..].trim(), nvars).map_err(bad)?;
    let weight = match w.len() {
        0 => num_rational::BigRational::from_integer(0.into()),
        1 if w.total_degree() == 0 => w.terms().next().map(|(_, c)| c.clone()).expect("one term"),
        _ => return Err(LeanError::TermList("weight is not a constant".into())),
    };
    Ok((weight, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, parse_polynomial};
    use alloc::vec;

    #[test]
    fn minimal_script() {
        let f = parse_polynomial("x1^2", 1).unwrap();
        let cert = SosCertificate { nvars: 1, squares: vec![(int(1), parse_polynomial("x1", 1).unwrap())] };
        let s = emit_lean(&f, &cert, &LeanEmitConfig::default()).unwrap();
        assert!(s.contains("theorem sos_nonneg (x1 I : Real)\n  (h1 : I = x1^2) :\n"));
        assert!(s.contains("    [ (1, x1) ]\n"));
        assert_eq!(parse_lean_terms(&s, 1, &LeanEmitConfig::default()).unwrap(), cert);
    }

    #[test]
    fn refuses_unsound() {
        let f = parse_polynomial("x1^2", 1).unwrap();
        let cert = SosCertificate { nvars: 1, squares: vec![(int(2), parse_polynomial("x1", 1).unwrap())] };
        assert_eq!(emit_lean(&f, &cert, &LeanEmitConfig::default()), Err(LeanError::UnsoundCertificate));
    }

    #[test]
    fn custom_names_round_trip() {
        let f = parse_polynomial("x1^2 - 2*x1*x2 + x2^2", 2).unwrap();
        let cert = SosCertificate { nvars: 2, squares: vec![(int(1), parse_polynomial("x1 - x2", 2).unwrap())] };
        let cfg = LeanEmitConfig { variable_names: Some(vec!["a".into(), "b".into()]), ..Default::default() };
        let s = emit_lean(&f, &cert, &cfg).unwrap();
        assert!(s.contains("(a b I : Real)"));
        assert!(s.contains("(1, a - b)"), "{}", s);
        assert_eq!(parse_lean_terms(&s, 2, &cfg).unwrap(), cert);
        let bad = LeanEmitConfig { theorem_name: "have".into(), ..Default::default() };
        assert!(matches!(emit_lean(&f, &cert, &bad), Err(LeanError::InvalidIdentifier(_))));
    }
}
