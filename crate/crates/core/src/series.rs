//! Truncated Laurent series `Σ a_k t^k + O(t^p)` with exact coefficients.
//!
//! A series stores its nonzero terms below a precision bound. The bound is
//! either a finite exponent `p` (the series is only known modulo `t^p`) or
//! [`Precision::Exact`], in which case the series is a Laurent polynomial.
//! Arithmetic propagates the bound so that every reported coefficient is
//! correct for every completion of the inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{Rational, Scalar};

/// Number of terms computed past the leading one when an operation has to
/// produce an infinite expansion and the caller gave no precision.
pub const DEFAULT_PRECISION: i64 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Precision {
    /// Known modulo `t^p`.
    At(i64),
    /// Known exactly.
    Exact,
}

impl Precision {
    pub fn finite(self) -> Option<i64> {
        match self {
            Precision::At(p) => Some(p),
            Precision::Exact => None,
        }
    }

    /// Shift by an exponent offset; exact stays exact.
    pub fn offset(self, k: i64) -> Precision {
        match self {
            Precision::At(p) => Precision::At(p + k),
            Precision::Exact => Precision::Exact,
        }
    }

    pub fn admits(self, exponent: i64) -> bool {
        match self {
            Precision::At(p) => exponent < p,
            Precision::Exact => true,
        }
    }
}

/// Valuation of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValResult {
    Finite(i64),
    /// No nonzero term is known below the precision bound.
    AtLeastPrecision(i64),
    /// The exact zero series.
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("division by the exact zero series")]
    DivisionByZero,
    #[error("valuation only known to be at least {0}; the leading term is undetermined")]
    IndeterminatePrecision(i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries<C> {
    terms: BTreeMap<i64, C>,
    precision: Precision,
}

impl<C: Scalar> LaurentSeries<C> {
    /// Builds a series from terms; zero coefficients and terms at or above the
    /// precision bound are dropped, repeated exponents are summed.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, C)>, precision: Precision) -> Self {
        let mut map: BTreeMap<i64, C> = BTreeMap::new();
        for (e, c) in terms {
            if !precision.admits(e) {
                continue;
            }
            let slot = map.entry(e).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        map.retain(|_, c| !c.is_zero());
        LaurentSeries {
            terms: map,
            precision,
        }
    }

    pub fn exact(terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        Self::from_terms(terms, Precision::Exact)
    }

    pub fn zero() -> Self {
        Self::exact(std::iter::empty())
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::exact([(0, c)])
    }

    pub fn monomial(c: C, e: i64) -> Self {
        Self::exact([(e, c)])
    }

    /// The uniformizer `t`.
    pub fn t() -> Self {
        Self::monomial(C::one(), 1)
    }

    /// `O(t^p)`.
    pub fn big_o(p: i64) -> Self {
        Self::from_terms(std::iter::empty(), Precision::At(p))
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision == Precision::Exact
    }

    pub fn is_exact_zero(&self) -> bool {
        self.is_exact() && self.terms.is_empty()
    }

    /// True when no nonzero term is known (exact zero or `O(t^p)`).
    pub fn has_no_terms(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &C)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of `t^e`; zero when absent. Coefficients at or above the
    /// precision bound are unknown and reported as zero.
    pub fn coeff(&self, e: i64) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::zero)
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn valuation(&self) -> ValResult {
        match (self.terms.keys().next(), self.precision) {
            (Some(&e), _) => ValResult::Finite(e),
            (None, Precision::At(p)) => ValResult::AtLeastPrecision(p),
            (None, Precision::Exact) => ValResult::Infinity,
        }
    }

    /// Largest known lower bound of the valuation, `None` for exact zero.
    pub fn val_lower_bound(&self) -> Option<i64> {
        match self.valuation() {
            ValResult::Finite(e) | ValResult::AtLeastPrecision(e) => Some(e),
            ValResult::Infinity => None,
        }
    }

    /// Coefficient of the initial monomial; zero for the exact zero series.
    pub fn angular_component(&self) -> Result<C, SeriesError> {
        match self.valuation() {
            ValResult::Finite(e) => Ok(self.terms[&e].clone()),
            ValResult::Infinity => Ok(C::zero()),
            ValResult::AtLeastPrecision(p) => Err(SeriesError::IndeterminatePrecision(p)),
        }
    }

    /// Drops every term at or above `p` and lowers the precision to `p`.
    pub fn truncate(&self, p: i64) -> Self {
        let precision = self.precision.min(Precision::At(p));
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c.clone())), precision)
    }

    /// Forgets the precision bound: the known terms as an exact polynomial.
    pub fn to_exact(&self) -> Self {
        LaurentSeries {
            terms: self.terms.clone(),
            precision: Precision::Exact,
        }
    }

    pub fn with_precision(&self, precision: Precision) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(e, c)| (*e, c.clone())),
            precision.min(self.precision),
        )
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(
            self.terms.iter().map(|(e, a)| (*e, a.clone() * c.clone())),
            self.precision,
        )
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            precision: self.precision.offset(k),
        }
    }

    /// Substitutes `t ↦ γ·t^q` (q ≥ 1).
    pub fn substitute_monomial(&self, gamma: &C, q: i64) -> Self {
        assert!(q >= 1);
        let precision = match self.precision {
            Precision::At(p) => Precision::At(p * q),
            Precision::Exact => Precision::Exact,
        };
        Self::from_terms(
            self.terms
                .iter()
                .map(|(e, c)| (e * q, c.clone() * gamma.powi(*e))),
            precision,
        )
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> LaurentSeries<D> {
        LaurentSeries::from_terms(self.terms.iter().map(|(e, c)| (*e, f(c))), self.precision)
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let precision = self.precision.min(other.precision);
        Self::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(e, c)| (*e, c.clone())),
            precision,
        )
    }

    pub fn neg_ref(&self) -> Self {
        LaurentSeries {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
            precision: self.precision,
        }
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let (Some(va), Some(vb)) = (self.val_lower_bound(), other.val_lower_bound()) else {
            return Self::zero();
        };
        let precision = self.precision.offset(vb).min(other.precision.offset(va));
        let mut out: BTreeMap<i64, C> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea + eb;
                if !precision.admits(e) {
                    break;
                }
                let slot = out.entry(e).or_insert_with(C::zero);
                *slot = slot.clone() + ca.clone() * cb.clone();
            }
        }
        out.retain(|_, c| !c.is_zero());
        LaurentSeries {
            terms: out,
            precision,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Multiplicative inverse known modulo `t^abs_prec` (or better, when the
    /// input is an exact monomial).
    pub fn inverse(&self, abs_prec: i64) -> Result<Self, SeriesError> {
        let m = match self.valuation() {
            ValResult::Finite(m) => m,
            ValResult::Infinity => return Err(SeriesError::DivisionByZero),
            ValResult::AtLeastPrecision(p) => return Err(SeriesError::IndeterminatePrecision(p)),
        };
        let lead_inv = self.terms[&m]
            .inv()
            .expect("stored coefficients are nonzero");
        if self.is_exact() && self.terms.len() == 1 {
            return Ok(Self::monomial(lead_inv, -m));
        }
        // self = t^m · B with B = Σ b_k t^k, b_0 ≠ 0.
        let target = match self.precision {
            Precision::At(p) => abs_prec.min(p - 2 * m),
            Precision::Exact => abs_prec,
        };
        let n = target + m;
        let mut d: Vec<C> = Vec::with_capacity(n.max(0) as usize);
        for k in 0..n {
            let c = if k == 0 {
                lead_inv.clone()
            } else {
                let mut acc = C::zero();
                for j in 1..=k {
                    if let Some(b) = self.terms.get(&(m + j)) {
                        acc = acc + b.clone() * d[(k - j) as usize].clone();
                    }
                }
                -(acc * lead_inv.clone())
            };
            d.push(c);
        }
        Ok(Self::from_terms(
            d.into_iter().enumerate().map(|(k, c)| (k as i64 - m, c)),
            Precision::At(target),
        ))
    }

    /// `self / other` known modulo `t^prec` at most.
    pub fn div_prec(&self, other: &Self, prec: i64) -> Result<Self, SeriesError> {
        let inv_prec = match self.val_lower_bound() {
            Some(va) => prec - va,
            None => {
                // exact zero numerator: still reject a bad divisor
                other.inverse(0)?;
                return Ok(Self::zero());
            }
        };
        let inv = other.inverse(inv_prec)?;
        let q = self.mul_ref(&inv);
        Ok(if q.precision.admits(prec) {
            q
        } else {
            q.truncate(prec)
        })
    }

    /// `self / other` with [`DEFAULT_PRECISION`] terms past the quotient's
    /// leading exponent when the quotient does not terminate.
    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        let vb = match other.valuation() {
            ValResult::Finite(v) => v,
            ValResult::Infinity => return Err(SeriesError::DivisionByZero),
            ValResult::AtLeastPrecision(p) => return Err(SeriesError::IndeterminatePrecision(p)),
        };
        let va = self.val_lower_bound().unwrap_or(vb);
        let q = self.div_prec(other, va - vb + DEFAULT_PRECISION)?;
        // exact quotients of Laurent polynomials stay exact
        if self.is_exact() && other.is_exact() {
            let exact = q.to_exact();
            if exact.mul_ref(other) == *self {
                return Ok(exact);
            }
        }
        Ok(q)
    }

    /// Human-readable form in the given variable, ascending exponents,
    /// with an `O(var^p)` suffix for inexact series.
    pub fn to_string_in(&self, var: &str) -> String {
        let mut out = String::new();
        for (e, c) in &self.terms {
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            crate::upoly::push_term(&mut out, &c.to_string(), &mono);
        }
        if let Precision::At(p) = self.precision {
            let o = match p {
                0 => "O(1)".to_string(),
                1 => format!("O({var})"),
                _ => format!("O({var}^{p})"),
            };
            if out.is_empty() {
                out = o;
            } else {
                out.push_str(" + ");
                out.push_str(&o);
            }
        } else if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl LaurentSeries<Rational> {
    pub fn from_i64_terms(terms: &[(i64, i64)], precision: Precision) -> Self {
        Self::from_terms(
            terms.iter().map(|&(e, c)| (e, crate::scalar::int(c))),
            precision,
        )
    }
}

impl<C: Scalar> fmt::Display for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("t"))
    }
}

impl<C: Scalar> Add for LaurentSeries<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl<C: Scalar> Sub for LaurentSeries<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.sub_ref(&rhs)
    }
}

impl<C: Scalar> Mul for LaurentSeries<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<C: Scalar> Neg for LaurentSeries<C> {
    type Output = Self;
    fn neg(self) -> Self {
        self.neg_ref()
    }
}

impl<'a, C: Scalar> Add<&'a LaurentSeries<C>> for &'a LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn add(self, rhs: &LaurentSeries<C>) -> LaurentSeries<C> {
        self.add_ref(rhs)
    }
}

impl<'a, C: Scalar> Sub<&'a LaurentSeries<C>> for &'a LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn sub(self, rhs: &LaurentSeries<C>) -> LaurentSeries<C> {
        self.sub_ref(rhs)
    }
}

impl<'a, C: Scalar> Mul<&'a LaurentSeries<C>> for &'a LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn mul(self, rhs: &LaurentSeries<C>) -> LaurentSeries<C> {
        self.mul_ref(rhs)
    }
}

impl<C: Scalar> Zero for LaurentSeries<C> {
    fn zero() -> Self {
        LaurentSeries::zero()
    }
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
}

impl<C: Scalar> One for LaurentSeries<C> {
    fn one() -> Self {
        LaurentSeries::one()
    }
}
