//! Polynomials in `y` whose coefficients are truncated Laurent series in `t`.

use std::fmt;

use crate::scalar::Scalar;
use crate::series::{LaurentSeries, Precision, ValResult};
use crate::upoly::UPoly;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyK<C> {
    coeffs: Vec<LaurentSeries<C>>,
}

impl<C: Scalar> PolyK<C> {
    /// Drops leading exact-zero coefficients.
    pub fn new(mut coeffs: Vec<LaurentSeries<C>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        PolyK { coeffs }
    }

    pub fn zero() -> Self {
        PolyK { coeffs: Vec::new() }
    }

    pub fn from_upoly(p: &UPoly<C>) -> Self {
        Self::new(
            p.coeffs()
                .iter()
                .cloned()
                .map(LaurentSeries::constant)
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[LaurentSeries<C>] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> LaurentSeries<C> {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(LaurentSeries::zero)
    }

    pub fn lc(&self) -> LaurentSeries<C> {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(LaurentSeries::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation at `y0`.
    pub fn eval(&self, y0: &LaurentSeries<C>) -> LaurentSeries<C> {
        self.coeffs
            .iter()
            .rev()
            .fold(LaurentSeries::zero(), |acc, c| &(&acc * y0) + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(&C::from_i64(i as i64)))
                .collect(),
        )
    }

    /// Smallest known lower bound on the coefficient valuations; `None` for
    /// the zero polynomial.
    pub fn min_valuation(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.val_lower_bound()).min()
    }

    /// True if every coefficient lies in the valuation ring.
    pub fn is_integral(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.val_lower_bound().is_none_or(|v| v >= 0))
    }

    /// Reduction modulo `t`: the residue polynomial of an integral polynomial.
    pub fn residue(&self) -> UPoly<C> {
        UPoly::new(self.coeffs.iter().map(|c| c.coeff(0)).collect())
    }

    /// Smallest precision among the coefficients.
    pub fn precision(&self) -> Precision {
        self.coeffs
            .iter()
            .map(|c| c.precision())
            .min()
            .unwrap_or(Precision::Exact)
    }

    pub fn truncate(&self, p: i64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.truncate(p)).collect())
    }

    pub fn scale(&self, s: &LaurentSeries<C>) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![LaurentSeries::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::new(vec![LaurentSeries::one()]);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Composition `self(y + shift)` with an exact constant shift.
    pub fn taylor_shift(&self, shift: &LaurentSeries<C>) -> Self {
        let lin = Self::new(vec![shift.clone(), LaurentSeries::one()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::new(vec![c.clone()]));
        }
        acc
    }

    /// Multiplicity of `y0` as a root, measured through the Taylor expansion
    /// at `y0`: number of leading coefficients that vanish exactly.
    pub fn root_multiplicity(&self, y0: &LaurentSeries<C>) -> usize {
        let shifted = self.taylor_shift(y0);
        shifted
            .coeffs
            .iter()
            .take_while(|c| c.valuation() == ValResult::Infinity)
            .count()
    }

    pub fn to_string_in(&self, tvar: &str, yvar: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_exact_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => yvar.to_string(),
                _ => format!("{yvar}^{i}"),
            };
            crate::upoly::push_term(&mut out, &c.to_string_in(tvar), &mono);
        }
        out
    }
}

impl<C: Scalar> fmt::Display for PolyK<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("t", "y"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::{PolyQ, Series};

    fn s(terms: &[(i64, i64)]) -> Series {
        Series::from_i64_terms(terms, Precision::Exact)
    }

    #[test]
    fn eval_examples() {
        // y^2 - (1 + t) at y = 1
        let f = PolyQ::new(vec![s(&[(0, -1), (1, -1)]), Series::zero(), s(&[(0, 1)])]);
        assert_eq!(f.eval(&s(&[(0, 1)])), s(&[(1, -1)]));
        let id = PolyQ::new(vec![Series::zero(), s(&[(0, 1)])]);
        assert_eq!(id.eval(&s(&[(5, 1)])), s(&[(5, 1)]));
    }

    #[test]
    fn eval_truncated_root() {
        let f = PolyQ::new(vec![s(&[(0, -1), (1, -1)]), Series::zero(), s(&[(0, 1)])]);
        let y0 = Series::from_terms(
            [(0, rat(1, 1)), (1, rat(1, 2)), (2, rat(-1, 8))],
            Precision::At(3),
        );
        let r = f.eval(&y0);
        assert!(r.has_no_terms());
        assert_eq!(r.precision(), Precision::At(3));
    }

    #[test]
    fn taylor_shift_and_multiplicity() {
        // (y - t)^2 (y + 1)
        let lin = PolyQ::new(vec![s(&[(1, -1)]), s(&[(0, 1)])]);
        let f = lin
            .pow(2)
            .mul(&PolyQ::new(vec![s(&[(0, 1)]), s(&[(0, 1)])]));
        assert_eq!(f.root_multiplicity(&s(&[(1, 1)])), 2);
        assert_eq!(f.root_multiplicity(&s(&[(0, -1)])), 1);
        assert_eq!(f.root_multiplicity(&s(&[(0, 3)])), 0);
    }
}
