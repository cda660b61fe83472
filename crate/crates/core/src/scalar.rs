//! Scalar abstraction so fields evaluate over exact rationals, floats, and
//! dual numbers of either, without duplicating the evaluation code.

use crate::exact::{to_f64, Rat};
use num::{One, Zero};

/// Commutative field operations needed by polynomial/field evaluation.
///
/// Implementors: `Rat` (exact mode), `f64` (float mode), and `Dual<S>` for
/// forward-mode derivatives over either.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Division; `None` when the divisor is (numerically) zero.
    fn div(&self, o: &Self) -> Option<Self>
    where
        Self: Sized;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

/// Scalars with transcendental support, for the canonical (q,p) charts.
pub trait FloatScalar: Scalar {
    fn from_f64(x: f64) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// Value part as f64 (dual numbers return the real part).
    fn re(&self) -> f64;
}

impl Scalar for Rat {
    fn zero() -> Self {
        num::Zero::zero()
    }
    fn one() -> Self {
        num::One::one()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        to_f64(r)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if *o == 0.0 {
            None
        } else {
            Some(self / o)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl FloatScalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn re(&self) -> f64 {
        *self
    }
}

/// `one()`/`zero()` helpers usable in generic code without UFCS noise.
pub fn s_sum<S: Scalar>(it: impl IntoIterator<Item = S>) -> S {
    it.into_iter().fold(S::zero(), |acc, x| acc.add(&x))
}

#[allow(unused)]
pub fn s_prod<S: Scalar>(it: impl IntoIterator<Item = S>) -> S {
    it.into_iter().fold(S::one(), |acc, x| acc.mul(&x))
}

impl Scalar for num::BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rat(r: &Rat) -> Self {
        assert!(r.is_integer(), "BigInt scalar requires integer rational");
        r.to_integer()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}
