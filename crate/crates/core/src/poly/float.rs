use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;

use super::{default_names, Monomial, Polynomial};
use crate::bigfloat::BigFloat;

/// Default coefficient threshold below which a float term counts as absent.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-5;

/// Sparse polynomial with binary floating-point coefficients of a fixed precision.
#[derive(Clone, PartialEq, Eq)]
pub struct FloatPolynomial {
    nvars: usize,
    precision: u32,
    terms: BTreeMap<Monomial, BigFloat>,
}

impl FloatPolynomial {
    pub fn zero(nvars: usize, precision: u32) -> Self {
        FloatPolynomial { nvars, precision, terms: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigFloat)>>(nvars: usize, precision: u32, terms: I) -> Self {
        let mut p = Self::zero(nvars, precision);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial length differs from nvars");
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigFloat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> BigFloat {
        self.terms.get(m).cloned().unwrap_or_else(BigFloat::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &BigFloat) {
        if c.is_zero() {
            return;
        }
        let prec = self.precision;
        let sum = match self.terms.get(&m) {
            Some(old) => old.add(c, prec),
            None => c.round_to(prec),
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn add(&self, other: &FloatPolynomial) -> FloatPolynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial operands must share nvars");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &FloatPolynomial) -> FloatPolynomial {
        self.add(&other.scale(&BigFloat::from_i64(-1)))
    }

    pub fn mul(&self, other: &FloatPolynomial) -> FloatPolynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial operands must share nvars");
        // accumulate exactly per monomial, round once
        let mut acc: BTreeMap<Monomial, BigFloat> = BTreeMap::new();
        let wide = u32::MAX;
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let e = acc.entry(m1.mul(m2)).or_insert_with(BigFloat::zero);
                *e = e.mul_add(c1, c2, wide);
            }
        }
        let prec = self.precision.max(other.precision);
        FloatPolynomial::from_terms(self.nvars, prec, acc.into_iter().map(|(m, c)| (m, c.round_to(prec))))
    }

    pub fn scale(&self, k: &BigFloat) -> FloatPolynomial {
        let prec = self.precision;
        FloatPolynomial::from_terms(self.nvars, prec, self.terms.iter().map(|(m, c)| (m.clone(), c.mul(k, prec))))
    }

    pub fn square(&self) -> FloatPolynomial {
        self.mul(self)
    }

    /// Monomials with `|c| > tau`.
    pub fn support(&self, tau: f64) -> BTreeSet<Monomial> {
        let t = BigFloat::from_f64(tau.abs());
        self.terms.iter().filter(|(_, c)| c.abs() > t).map(|(m, _)| m.clone()).collect()
    }

    /// Largest degree among terms with `|c| > tau`.
    pub fn total_degree(&self, tau: f64) -> u32 {
        self.support(tau).iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Variables appearing in terms with `|c| > tau`.
    pub fn variables_used(&self, tau: f64) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for m in self.support(tau) {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    /// Exact dyadic value of every coefficient.
    pub fn to_exact(&self) -> Polynomial {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), c.to_rational())))
    }

    pub fn from_exact(p: &Polynomial, precision: u32) -> Self {
        p.to_float(precision)
    }

    pub fn to_rational_coeffs(&self) -> Vec<(Monomial, BigRational)> {
        self.terms.iter().map(|(m, c)| (m.clone(), c.to_rational())).collect()
    }

    /// Prints with each coefficient as its shortest round-tripping `f64` decimal.
    pub fn to_string_with(&self, names: &[&str]) -> String {
        let mut s = String::new();
        self.write_with(&mut s, names).expect("writing to String cannot fail");
        s
    }

    fn write_with<W: fmt::Write>(&self, out: &mut W, names: &[&str]) -> fmt::Result {
        let mut first = true;
        for (m, c) in super::monomial::print_order(&self.terms) {
            let v = c.to_f64();
            if v == 0.0 {
                continue;
            }
            match (first, v < 0.0) {
                (true, true) => out.write_str("-")?,
                (true, false) => {}
                (false, true) => out.write_str(" - ")?,
                (false, false) => out.write_str(" + ")?,
            }
            first = false;
            let mag = v.abs();
            if m.is_one() {
                write!(out, "{}", mag)?;
            } else {
                if mag != 1.0 {
                    write!(out, "{}*", mag)?;
                }
                m.write_with(out, names)?;
            }
        }
        if first {
            out.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Display for FloatPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        self.write_with(f, &refs)
    }
}

impl fmt::Debug for FloatPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FloatPolynomial[{}; {} bits]({})", self.nvars, self.precision, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn threshold_support() {
        let p = FloatPolynomial::from_terms(
            2,
            64,
            vec![(Monomial::new(vec![2, 0]), BigFloat::one()), (Monomial::new(vec![0, 1]), BigFloat::from_f64(1e-9))],
        );
        let s = p.support(DEFAULT_SUPPORT_THRESHOLD);
        assert_eq!(s.len(), 1);
        assert!(!s.contains(&Monomial::new(vec![0, 1])));
        assert_eq!(p.variables_used(DEFAULT_SUPPORT_THRESHOLD).len(), 1);
    }

    #[test]
    fn print_shortest_decimal() {
        let p = FloatPolynomial::from_terms(
            1,
            53,
            vec![(Monomial::new(vec![1]), BigFloat::from_f64(-0.1)), (Monomial::one(1), BigFloat::from_f64(2.5))],
        );
        assert_eq!(p.to_string(), "-0.1*x1 + 2.5");
    }
}
