//! Arbitrary-precision rational scalars.
//!
//! `Rat` is the exact number type used everywhere certification matters.
//! `num_rational` keeps every value reduced with a positive denominator,
//! which is exactly the invariant the identity suites rely on.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Integer rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Fraction `n/d`. Panics on `d == 0`.
pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_zero(r: &Rat) -> bool {
    r.is_zero()
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

/// Lossy conversion for float-mode work (ODE runs, eigen solves).
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn max_rat(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn rat_one() -> Rat {
    Rat::one()
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_with_positive_denominator() {
        let r = ratq(4, -6);
        assert_eq!(r, ratq(-2, 3));
        assert!(r.denom() > &BigInt::from(0));
    }

    #[test]
    fn f64_roundtrip_small() {
        assert_eq!(to_f64(&ratq(-7, 2)), -3.5);
    }
}
