//! Coefficient fields.
//!
//! Every algebraic structure in this crate (series, univariate polynomials,
//! Hensel factors, Puiseux branches) is generic over a [`Scalar`]: an exact
//! field of characteristic zero. The three instances are the rationals, simple
//! number fields `Q(α)` and rational functions `Q(x)`.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::upoly::UPoly;

/// Arbitrary precision rational number, always kept in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// An exact field of characteristic zero.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    /// Image of a rational number.
    fn from_rational(q: &Rational) -> Self;

    /// The rational value, if this element lies in the prime field.
    fn to_rational(&self) -> Option<Rational>;

    /// Total order used only for deterministic sorting.
    fn canonical_cmp(&self, other: &Self) -> Ordering;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn is_rational(&self) -> bool {
        self.to_rational().is_some()
    }

    /// `self / other`, `None` when `other` is zero.
    fn checked_div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.clone() * i)
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Monic gcd of two polynomials over this field. Fields whose
    /// elements grow under Euclid's algorithm override this.
    fn poly_gcd(a: &UPoly<Self>, b: &UPoly<Self>) -> UPoly<Self> {
        a.euclid_gcd(b)
    }

    /// Integer power allowing negative exponents. Panics on `0^-k`.
    fn powi(&self, e: i64) -> Self {
        if e >= 0 {
            self.pow(e as u64)
        } else {
            self.inv()
                .expect("negative power of zero")
                .pow(e.unsigned_abs())
        }
    }
}

impl Scalar for Rational {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Least common multiple of the denominators of `qs`.
pub fn denominator_lcm<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Greatest common divisor of the numerators of `qs`, zero for an empty or
/// all-zero input.
pub fn numerator_gcd<'a>(qs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::zero(), |acc, q| acc.gcd(q.numer()))
        .abs()
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm_i64(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        0
    } else {
        a.lcm(&b)
    }
}
