//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are stored in a `BTreeMap` keyed by [`Monomial`], so iteration is in
//! graded-lex order and printing is deterministic. Zero coefficients are
//! never stored.

mod float;
mod monomial;
pub(crate) mod parse;

pub use float::{FloatPolynomial, DEFAULT_SUPPORT_THRESHOLD};
pub use monomial::{default_names, Monomial};
pub use parse::{parse_polynomial, ParseError};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bigfloat::BigFloat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The variable `x_{index+1}`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, index), BigRational::one());
        p
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    /// Sums the given terms; repeated monomials accumulate.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial length differs from nvars");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// First term in display order.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        monomial::print_order(&self.terms).into_iter().next()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(PolyError::NvarsMismatch(self.nvars, other.nvars))
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check(other)?;
        let mut out = Polynomial::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigRational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn square(&self) -> Polynomial {
        self * self
    }

    /// Largest total degree of a stored term; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Smallest total degree of a stored term; 0 for the zero polynomial.
    pub fn min_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).min().unwrap_or(0)
    }

    pub fn support(&self) -> BTreeSet<Monomial> {
        self.terms.keys().cloned().collect()
    }

    /// Indices (0-based) of variables appearing with a nonzero exponent.
    pub fn variables_used(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn to_float(&self, prec: u32) -> FloatPolynomial {
        FloatPolynomial::from_terms(
            self.nvars,
            prec,
            self.terms.iter().map(|(m, c)| (m.clone(), BigFloat::from_rational(c, prec))),
        )
    }

    /// True when every coefficient is an integer.
    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Prints with caller-supplied variable names.
    pub fn to_string_with(&self, names: &[&str]) -> String {
        let mut s = String::new();
        self.write_with(&mut s, names).expect("writing to String cannot fail");
        s
    }

    fn write_with<W: fmt::Write>(&self, out: &mut W, names: &[&str]) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        for (idx, (m, c)) in monomial::print_order(&self.terms).into_iter().enumerate() {
            let neg = c.is_negative();
            match (idx, neg) {
                (0, true) => out.write_str("-")?,
                (0, false) => {}
                (_, true) => out.write_str(" - ")?,
                (_, false) => out.write_str(" + ")?,
            }
            let mag = c.abs();
            if m.is_one() {
                write_rational(out, &mag)?;
            } else {
                if !mag.is_one() {
                    write_rational(out, &mag)?;
                    out.write_char('*')?;
                }
                m.write_with(out, names)?;
            }
        }
        Ok(())
    }
}

/// Writes `p` or `p/q`.
pub fn write_rational<W: fmt::Write>(out: &mut W, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(out, "{}", r.numer())
    } else {
        write!(out, "{}/{}", r.numer(), r.denom())
    }
}

/// `p` or `p/q` as a string.
pub fn format_rational(r: &BigRational) -> String {
    let mut s = String::new();
    write_rational(&mut s, r).expect("writing to String cannot fail");
    s
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        self.write_with(f, &refs)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.nvars, self)
    }
}

macro_rules! panicking_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        /// Panics when the operands have different variable counts.
        impl core::ops::$trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial operands must share nvars")
            }
        }
    };
}

panicking_op!(Add, add, checked_add);
panicking_op!(Sub, sub, checked_sub);
panicking_op!(Mul, mul, checked_mul);

/// `Σ kᵢ·qᵢ²` computed exactly.
pub fn expand_weighted_squares(nvars: usize, terms: &[(BigRational, Polynomial)]) -> Result<Polynomial, PolyError> {
    let mut acc = Polynomial::zero(nvars);
    for (w, q) in terms {
        if q.nvars != nvars {
            return Err(PolyError::NvarsMismatch(nvars, q.nvars));
        }
        let sq = q.square().scale(w);
        for (m, c) in sq.terms {
            acc.add_term(m, c);
        }
    }
    Ok(acc)
}

/// Anything that exposes a coefficient vector for distance computations.
pub trait Coefficients {
    fn coeff_nvars(&self) -> usize;
    /// Exact coefficients when available.
    fn as_exact(&self) -> Option<&Polynomial>;
    /// Coefficients rounded to `prec` bits.
    fn float_terms(&self, prec: u32) -> BTreeMap<Monomial, BigFloat>;
    /// Native precision of float data, `None` for exact data.
    fn native_precision(&self) -> Option<u32>;
}

impl Coefficients for Polynomial {
    fn coeff_nvars(&self) -> usize {
        self.nvars
    }
    fn as_exact(&self) -> Option<&Polynomial> {
        Some(self)
    }
    fn float_terms(&self, prec: u32) -> BTreeMap<Monomial, BigFloat> {
        self.terms.iter().map(|(m, c)| (m.clone(), BigFloat::from_rational(c, prec))).collect()
    }
    fn native_precision(&self) -> Option<u32> {
        None
    }
}

impl Coefficients for FloatPolynomial {
    fn coeff_nvars(&self) -> usize {
        self.nvars()
    }
    fn as_exact(&self) -> Option<&Polynomial> {
        None
    }
    fn float_terms(&self, prec: u32) -> BTreeMap<Monomial, BigFloat> {
        self.terms().map(|(m, c)| (m.clone(), c.round_to(prec))).collect()
    }
    fn native_precision(&self) -> Option<u32> {
        Some(self.precision())
    }
}

const DISTANCE_EXTRA_BITS: u32 = 64;

/// Euclidean norm of the coefficient difference, evaluated at `prec` bits.
pub fn coeff_l2_distance_at<A: Coefficients + ?Sized, B: Coefficients + ?Sized>(a: &A, b: &B, prec: u32) -> BigFloat {
    assert_eq!(a.coeff_nvars(), b.coeff_nvars(), "coefficient vectors must share nvars");
    if let (Some(x), Some(y)) = (a.as_exact(), b.as_exact()) {
        let diff = x - y;
        let sq: BigRational = diff.terms.values().map(|c| c * c).sum();
        return BigFloat::from_rational(&sq, prec).sqrt(prec);
    }
    let wide = prec + DISTANCE_EXTRA_BITS;
    let mut diff = a.float_terms(wide);
    for (m, c) in b.float_terms(wide) {
        let e = diff.entry(m).or_insert_with(BigFloat::zero);
        *e = e.sub(&c, wide);
    }
    let mut acc = BigFloat::zero();
    for c in diff.values() {
        acc = acc.mul_add(c, c, wide);
    }
    acc.sqrt(prec)
}

/// `‖coeff(a) − coeff(b)‖₂` over the union of supports, as an `f64`.
pub fn coeff_l2_distance<A: Coefficients + ?Sized, B: Coefficients + ?Sized>(a: &A, b: &B) -> f64 {
    let prec = match (a.native_precision(), b.native_precision()) {
        (None, None) => 64,
        (Some(p), None) | (None, Some(p)) => p.max(53),
        (Some(p), Some(q)) => p.max(q),
    };
    coeff_l2_distance_at(a, b, prec).to_f64()
}

/// Integer as rational.
pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `n/d` as rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
