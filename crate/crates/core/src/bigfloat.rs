//! Arbitrary-precision binary floating point.
//!
//! A [`BigFloat`] is the dyadic number `mantissa * 2^exponent`. Every operation
//! takes the target precision in bits and rounds to nearest, ties to even.
//! Values are kept canonical (odd mantissa or zero) so structural equality is
//! value equality, and conversion to an exact rational is lossless.

use core::cmp::Ordering;
use core::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    mantissa: BigInt,
    exponent: i64,
}

fn bit_len(m: &BigInt) -> i64 {
    m.bits() as i64
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        BigFloat { mantissa: BigInt::one(), exponent: 0 }
    }

    /// Builds `mantissa * 2^exponent` rounded to `prec` bits.
    pub fn from_parts(mantissa: BigInt, exponent: i64, prec: u32) -> Self {
        Self::round_parts(mantissa, exponent, false, prec)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::round_parts(BigInt::from(v), 0, false, u32::MAX)
    }

    /// Exact conversion; panics on NaN or infinity.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "BigFloat::from_f64 on non-finite value");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Self::round_parts(BigInt::from(m) * sign, e, false, u32::MAX)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let num = r.numer();
        let den = r.denom();
        let shift = prec as i64 + 2 + bit_len(den) - bit_len(num);
        let (n, d) = if shift >= 0 {
            (num << shift as usize, den.clone())
        } else {
            (num.clone(), den << (-shift) as usize)
        };
        let (q, rem) = (&n / &d, &n % &d);
        Self::round_parts(q, -shift, !rem.is_zero(), prec)
    }

    /// Exact value as a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as usize)
        }
    }

    /// Nearest `f64`; saturates to infinity and flushes to zero outside range.
    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let r = Self::round_parts(self.mantissa.clone(), self.exponent, false, 53);
        let m = r.mantissa.to_i64().expect("53-bit mantissa fits i64") as f64;
        let e = r.exponent;
        if e > 2000 {
            return if m > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if e < -2200 {
            return 0.0;
        }
        // two steps keep intermediate results in range
        let half = (e / 2) as i32;
        libm::ldexp(libm::ldexp(m, half), e as i32 - half)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.sign() == Sign::Minus
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat { mantissa: -&self.mantissa, exponent: self.exponent }
    }

    pub fn abs(&self) -> Self {
        BigFloat { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Position just above the most significant bit (`|x| < 2^top`).
    fn top(&self) -> i64 {
        self.exponent + bit_len(&self.mantissa)
    }

    /// Rough base-2 magnitude, `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.top() - 1)
        }
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        if other.is_zero() {
            return Self::round_parts(self.mantissa.clone(), self.exponent, false, prec);
        }
        if self.is_zero() {
            return Self::round_parts(other.mantissa.clone(), other.exponent, false, prec);
        }
        // an operand lying entirely below the rounding position only acts as a sticky bit
        let (big, small) = if self.top() >= other.top() { (self, other) } else { (other, self) };
        let guard = big.top() - prec as i64 - 3;
        if prec != u32::MAX && small.top() < guard && small.top() < big.exponent {
            let pad = (prec as i64 + 3 - bit_len(&big.mantissa)).max(2);
            let m = (&big.mantissa << pad as usize) + small.mantissa.signum();
            return Self::round_parts(m, big.exponent - pad, true, prec);
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        Self::round_parts(a + b, e, false, prec)
    }

    pub fn sub(&self, other: &Self, prec: u32) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        Self::round_parts(&self.mantissa * &other.mantissa, self.exponent + other.exponent, false, prec)
    }

    /// Fused `self + a * b` with a single rounding.
    pub fn mul_add(&self, a: &Self, b: &Self, prec: u32) -> Self {
        let prod = BigFloat { mantissa: &a.mantissa * &b.mantissa, exponent: a.exponent + b.exponent };
        self.add(&prod, prec)
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &Self, prec: u32) -> Self {
        assert!(!other.is_zero(), "BigFloat division by zero");
        if self.is_zero() {
            return Self::zero();
        }
        let shift = (prec as i64 + 2 + bit_len(&other.mantissa) - bit_len(&self.mantissa)).max(0);
        let n = &self.mantissa << shift as usize;
        let q = &n / &other.mantissa;
        let rem = &n % &other.mantissa;
        Self::round_parts(q, self.exponent - other.exponent - shift, !rem.is_zero(), prec)
    }

    /// Square root; panics on negative input.
    pub fn sqrt(&self, prec: u32) -> Self {
        assert!(!self.is_negative(), "BigFloat sqrt of negative value");
        if self.is_zero() {
            return Self::zero();
        }
        let mut shift = (2 * (prec as i64 + 2) - bit_len(&self.mantissa)).max(0);
        if (self.exponent - shift) % 2 != 0 {
            shift += 1;
        }
        let m = &self.mantissa << shift as usize;
        let r = m.sqrt();
        let exact = &r * &r == m;
        Self::round_parts(r, (self.exponent - shift) / 2, !exact, prec)
    }

    pub fn round_to(&self, prec: u32) -> Self {
        Self::round_parts(self.mantissa.clone(), self.exponent, false, prec)
    }

    /// Rounds `m * 2^e` to `prec` bits. `sticky` records discarded nonzero bits
    /// below `e`, which only matter for breaking exact ties.
    fn round_parts(m: BigInt, e: i64, sticky: bool, prec: u32) -> Self {
        if m.is_zero() {
            return Self::zero();
        }
        let len = bit_len(&m);
        let mut mant = m;
        let mut exp = e;
        if prec != u32::MAX && len > prec as i64 {
            let shift = (len - prec as i64) as u64;
            let neg = mant.is_negative();
            let mag = mant.abs();
            let kept = &mag >> shift as usize;
            let rem = &mag - (&kept << shift as usize);
            let half = BigInt::one() << (shift - 1) as usize;
            let round_up = match rem.cmp(&half) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => sticky || kept.bit(0),
            };
            let mag = if round_up { kept + 1 } else { kept };
            mant = if neg { -mag } else { mag };
            exp += shift as i64;
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            mant >>= tz as usize;
            exp += tz as i64;
        }
        BigFloat { mantissa: mant, exponent: exp }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        let (s1, s2) = (self.signum(), other.signum());
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        if s1 == 0 {
            return Ordering::Equal;
        }
        let by_mag = match self.top().cmp(&other.top()) {
            Ordering::Equal => {
                let e = self.exponent.min(other.exponent);
                let a = self.mantissa.abs() << (self.exponent - e) as usize;
                let b = other.mantissa.abs() << (other.exponent - e) as usize;
                a.cmp(&b)
            }
            o => o,
        };
        if s1 < 0 {
            by_mag.reverse()
        } else {
            by_mag
        }
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

/// Euclidean norm of a slice, evaluated at `prec` bits.
pub fn l2_norm(values: &[BigFloat], prec: u32) -> BigFloat {
    let mut acc = BigFloat::zero();
    for v in values {
        acc = acc.mul_add(v, v, prec);
    }
    acc.sqrt(prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn f64_round_trip_is_exact() {
        for x in [0.0, 1.0, -2.5, 1e-300, 5e-324, 1.7976931348623157e308, 0.1, -3.0e-7] {
            assert_eq!(BigFloat::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn rational_conversion_rounds_to_precision() {
        let third = BigFloat::from_rational(&rat(1, 3), 53);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
        let exact = BigFloat::from_rational(&rat(3, 8), 10);
        assert_eq!(exact.to_rational(), rat(3, 8));
    }

    #[test]
    fn arithmetic_matches_f64_at_53_bits() {
        let a = BigFloat::from_f64(0.1);
        let b = BigFloat::from_f64(0.7);
        assert_eq!(a.add(&b, 53).to_f64(), 0.1 + 0.7);
        assert_eq!(a.mul(&b, 53).to_f64(), 0.1 * 0.7);
        assert_eq!(a.div(&b, 53).to_f64(), 0.1 / 0.7);
        assert_eq!(b.sub(&a, 53).to_f64(), 0.7 - 0.1);
        assert_eq!(BigFloat::from_f64(2.0).sqrt(53).to_f64(), 2f64.sqrt());
    }

    #[test]
    fn high_precision_sqrt_squares_back() {
        let two = BigFloat::from_i64(2);
        let s = two.sqrt(256);
        let err = s.mul(&s, 512).sub(&two, 512).abs();
        assert!(err.log2_floor().unwrap() < -250);
    }

    #[test]
    fn tiny_addend_is_absorbed() {
        let one = BigFloat::one();
        let tiny = BigFloat::from_f64(1e-300);
        assert_eq!(one.add(&tiny, 53), one);
        assert_eq!(tiny.add(&one, 53), one);
        assert!(one.sub(&tiny, 53) <= one);
    }

    #[test]
    fn ordering() {
        let a = BigFloat::from_f64(-1.5);
        let b = BigFloat::from_f64(0.25);
        let c = BigFloat::from_f64(0.5);
        assert!(a < b && b < c && a < c);
        assert_eq!(BigFloat::from_f64(0.5).cmp(&BigFloat::from_rational(&rat(1, 2), 8)), Ordering::Equal);
    }
}
