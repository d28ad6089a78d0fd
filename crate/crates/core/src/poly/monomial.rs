use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// Exponent vector `x1^e1 * ... * xn^en`.
///
/// Ordered graded-lexicographically: lower total degree first, then the larger
/// exponent vector first, so `1 < x1 < x2 < x1^2 < x1*x2 < x2^2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial { exponents }
    }

    pub fn one(nvars: usize) -> Self {
        Monomial { exponents: vec![0; nvars] }
    }

    /// The single variable `x_{index+1}`.
    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial { exponents: e }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial { exponents: self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect() }
    }

    /// `self / other` when every exponent of `other` fits.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.exponents.len());
        for (a, b) in self.exponents.iter().zip(&other.exponents) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Monomial { exponents: out })
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial { exponents: self.exponents.iter().map(|e| e * k).collect() }
    }

    /// Square root if every exponent is even.
    pub fn half(&self) -> Option<Monomial> {
        if self.exponents.iter().all(|e| e % 2 == 0) {
            Some(Monomial { exponents: self.exponents.iter().map(|e| e / 2).collect() })
        } else {
            None
        }
    }

    /// Writes the monomial as `x1^2*x3`, using `names` for the variables.
    pub fn write_with<W: fmt::Write>(&self, out: &mut W, names: &[&str]) -> fmt::Result {
        if self.is_one() {
            return out.write_str("1");
        }
        let mut first = true;
        for (i, &e) in self.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                out.write_char('*')?;
            }
            first = false;
            out.write_str(names[i])?;
            if e > 1 {
                write!(out, "^{}", e)?;
            }
        }
        Ok(())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exponents.cmp(&self.exponents))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars());
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        self.write_with(f, &refs)
    }
}

/// `["x1", "x2", ...]`.
pub fn default_names(nvars: usize) -> Vec<alloc::string::String> {
    (1..=nvars).map(|i| alloc::format!("x{}", i)).collect()
}

/// Display order: degree descending, then `x1` before `x2`.
pub(crate) fn print_order<V>(terms: &BTreeMap<Monomial, V>) -> Vec<(&Monomial, &V)> {
    let mut v: Vec<_> = terms.iter().collect();
    v.sort_by_key(|t| core::cmp::Reverse(t.0.degree()));
    v
}
