use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bigfloat::BigFloat;

/// Last continued-fraction convergent of `x` whose denominator is at most `bound`.
pub fn rationalize_exact(x: &BigRational, bound: &BigInt) -> BigRational {
    assert!(bound.is_positive(), "denominator bound must be positive");
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    loop {
        let a = num.div_floor(&den);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if &q2 > bound {
            break;
        }
        p0 = core::mem::replace(&mut p1, p2);
        q0 = core::mem::replace(&mut q1, q2);
        let rem = &num - &a * &den;
        if rem.is_zero() {
            break;
        }
        num = core::mem::replace(&mut den, rem);
    }
    BigRational::new(p1, q1)
}

/// [`rationalize_exact`] of the exact binary value of `x`.
pub fn rationalize(x: f64, bound: u64) -> BigRational {
    rationalize_exact(&BigFloat::from_f64(x).to_rational(), &BigInt::from(bound))
}
