//! Simple algebraic extensions `Q(α) = Q[z]/(m(z))` and univariate
//! factorization over `Q` and over such fields.

mod modp;
mod trager;
mod zassenhaus;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{fmt_rational, Rational, Scalar};
use crate::upoly::{QPoly, UPoly};

pub use trager::{adjoin_root, factor_over, norm, Extension};
pub use zassenhaus::{factor_rationals, is_irreducible, DEFAULT_DEGREE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfError {
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
    #[error("elements belong to different number fields")]
    FieldMismatch,
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("minimal polynomial {0} is not irreducible over Q")]
    Reducible(String),
    #[error("cannot factor the zero polynomial")]
    ZeroPolynomial,
}

/// `Q[z]/(m(z))` for a monic irreducible `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberField {
    min_poly: QPoly,
    generator: String,
}

impl NumberField {
    /// Builds the field, making `m` monic and checking irreducibility.
    pub fn new(m: &QPoly, cap: usize) -> Result<Arc<Self>, NfError> {
        let m = m.monic();
        if !is_irreducible(&m, cap)? {
            return Err(NfError::Reducible(m.to_string_in("z")));
        }
        Ok(Arc::new(NumberField {
            min_poly: m,
            generator: "a".into(),
        }))
    }

    pub fn min_poly(&self) -> &QPoly {
        &self.min_poly
    }

    pub fn degree(&self) -> usize {
        self.min_poly.degree().expect("nonconstant")
    }

    pub fn generator_name(&self) -> &str {
        &self.generator
    }

    pub fn generator(self: &Arc<Self>) -> NfElement {
        NfElement::from_poly(self, &QPoly::x())
    }

    fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || a.min_poly == b.min_poly
    }
}

/// Element of a number field in power-basis coordinates. Elements with no
/// field attached are rationals and combine with elements of any field; this
/// is what makes `zero()` and `one()` available without a context.
#[derive(Debug, Clone)]
pub struct NfElement {
    field: Option<Arc<NumberField>>,
    coords: Vec<Rational>,
}

impl NfElement {
    pub fn rational(q: Rational) -> Self {
        NfElement {
            field: None,
            coords: vec![q],
        }
    }

    /// Reduces `p(α)` modulo the minimal polynomial.
    pub fn from_poly(field: &Arc<NumberField>, p: &QPoly) -> Self {
        let r = p.rem(&field.min_poly);
        let mut coords: Vec<Rational> = r.coeffs().to_vec();
        coords.resize(field.degree(), Rational::zero());
        NfElement {
            field: Some(field.clone()),
            coords,
        }
    }

    pub fn field(&self) -> Option<&Arc<NumberField>> {
        self.field.as_ref()
    }

    /// Power-basis coordinates; a single entry for field-free rationals.
    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn as_poly(&self) -> QPoly {
        QPoly::new(self.coords.clone())
    }

    /// An element is rational iff every coordinate beyond the first is zero.
    pub fn rational_value(&self) -> Option<Rational> {
        self.coords[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coords[0].clone())
    }

    /// Moves the element into `field`, which must be its own field or any
    /// field if the element is rational.
    pub fn in_field(&self, field: &Arc<NumberField>) -> Result<Self, NfError> {
        match &self.field {
            Some(f) if NumberField::same(f, field) => Ok(self.clone()),
            Some(_) => match self.rational_value() {
                Some(q) => Ok(NfElement::from_poly(field, &QPoly::constant(q))),
                None => Err(NfError::FieldMismatch),
            },
            None => Ok(NfElement::from_poly(
                field,
                &QPoly::constant(self.coords[0].clone()),
            )),
        }
    }

    fn common_field(&self, other: &Self) -> Result<Option<Arc<NumberField>>, NfError> {
        match (&self.field, &other.field) {
            (Some(a), Some(b)) if !NumberField::same(a, b) => {
                if self.rational_value().is_some() {
                    Ok(Some(b.clone()))
                } else if other.rational_value().is_some() {
                    Ok(Some(a.clone()))
                } else {
                    Err(NfError::FieldMismatch)
                }
            }
            (Some(a), _) => Ok(Some(a.clone())),
            (None, b) => Ok(b.clone()),
        }
    }

    fn lift_pair(&self, other: &Self) -> Result<(Option<Arc<NumberField>>, QPoly, QPoly), NfError> {
        let f = self.common_field(other)?;
        let a = match (&f, &self.field) {
            (Some(f), Some(g)) if !NumberField::same(f, g) => {
                QPoly::constant(self.rational_value().expect("checked"))
            }
            _ => self.as_poly(),
        };
        let b = match (&f, &other.field) {
            (Some(f), Some(g)) if !NumberField::same(f, g) => {
                QPoly::constant(other.rational_value().expect("checked"))
            }
            _ => other.as_poly(),
        };
        Ok((f, a, b))
    }

    fn build(field: Option<Arc<NumberField>>, p: QPoly) -> Self {
        match field {
            Some(f) => NfElement::from_poly(&f, &p),
            None => NfElement::rational(p.coeff(0)),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NfError> {
        let (f, a, b) = self.lift_pair(other)?;
        Ok(Self::build(f, &a + &b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NfError> {
        let (f, a, b) = self.lift_pair(other)?;
        Ok(Self::build(f, &a - &b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, NfError> {
        let (f, a, b) = self.lift_pair(other)?;
        Ok(Self::build(f, &a * &b))
    }

    pub fn try_inv(&self) -> Result<Self, NfError> {
        if self.is_zero() {
            return Err(NfError::InverseOfZero);
        }
        match &self.field {
            None => Ok(NfElement::rational(self.coords[0].recip())),
            Some(f) => {
                let inv = self
                    .as_poly()
                    .inv_mod(&f.min_poly)
                    .expect("nonzero element of a field is invertible");
                Ok(NfElement::from_poly(f, &inv))
            }
        }
    }

    /// Minimal polynomial over `Q`, found as the first linear dependency among
    /// the powers of the element.
    pub fn min_poly(&self) -> QPoly {
        if let Some(q) = self.rational_value() {
            return QPoly::linear_root(q);
        }
        let n = self.coords.len();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut power = NfElement::one();
        let field = self
            .field
            .as_ref()
            .expect("irrational elements carry a field");
        for _ in 0..=n {
            let mut v = power.in_field(field).expect("same field").coords;
            v.resize(n, Rational::zero());
            rows.push(v);
            if let Some(rel) = linear_relation(&rows) {
                return QPoly::new(rel).monic();
            }
            power = power * self.clone();
        }
        unreachable!("n + 1 vectors in dimension n are dependent")
    }

    pub fn to_string_with(&self, generator: &str) -> String {
        match &self.field {
            None => fmt_rational(&self.coords[0]),
            Some(_) => self.as_poly().to_string_in(generator),
        }
    }
}

/// Coefficients `c` (with last entry nonzero) such that `Σ c_i rows_i = 0`,
/// where the relation must involve the last row.
fn linear_relation(rows: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let k = rows.len();
    let n = rows[0].len();
    // Solve Σ_{i<k-1} c_i rows_i = -rows_{k-1} by Gaussian elimination on the
    // transposed system.
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|j| {
            let mut r: Vec<Rational> = (0..k - 1).map(|i| rows[i][j].clone()).collect();
            r.push(-rows[k - 1][j].clone());
            r
        })
        .collect();
    let cols = k - 1;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..n).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pr);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=cols {
                    let d = &m[row][c] * &f;
                    m[r][c] = &m[r][c] - &d;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if (row..n).any(|r| !m[r][cols].is_zero()) {
        return None;
    }
    let mut c = vec![Rational::zero(); k];
    for (r, &col) in pivots.iter().enumerate() {
        c[col] = m[r][cols].clone();
    }
    c[k - 1] = Rational::one();
    Some(c)
}

/// Checked field arithmetic for the CLI and tests; the operator impls panic
/// on mixed fields instead.
pub fn nf_arith(op: NfOp, a: &NfElement, b: Option<&NfElement>) -> Result<NfElement, NfError> {
    let rhs = || b.ok_or(NfError::FieldMismatch);
    match op {
        NfOp::Add => a.try_add(rhs()?),
        NfOp::Sub => a.try_sub(rhs()?),
        NfOp::Mul => a.try_mul(rhs()?),
        NfOp::Inv => a.try_inv(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfOp {
    Add,
    Sub,
    Mul,
    Inv,
}

impl PartialEq for NfElement {
    fn eq(&self, other: &Self) -> bool {
        match self.lift_pair(other) {
            Ok((_, a, b)) => a == b,
            Err(_) => false,
        }
    }
}

impl fmt::Display for NfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.field.as_ref().map_or("a", |k| k.generator_name());
        f.write_str(&self.to_string_with(g))
    }
}

impl Zero for NfElement {
    fn zero() -> Self {
        NfElement::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

impl One for NfElement {
    fn one() -> Self {
        NfElement::rational(Rational::one())
    }
}

impl Add for NfElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("number field mismatch")
    }
}

impl Sub for NfElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("number field mismatch")
    }
}

impl Mul for NfElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("number field mismatch")
    }
}

impl Neg for NfElement {
    type Output = Self;
    fn neg(self) -> Self {
        NfElement {
            field: self.field,
            coords: self.coords.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Scalar for NfElement {
    fn inv(&self) -> Option<Self> {
        self.try_inv().ok()
    }

    fn from_rational(q: &Rational) -> Self {
        NfElement::rational(q.clone())
    }

    fn to_rational(&self) -> Option<Rational> {
        self.rational_value()
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.as_poly().canonical_cmp(&other.as_poly())
    }
}

/// Polynomials over a number field.
pub type NfPoly = UPoly<NfElement>;

/// Lifts a rational polynomial to one with number field coefficients.
pub fn nf_poly_from_q(p: &QPoly) -> NfPoly {
    p.map(|c| NfElement::rational(c.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn q(cs: &[i64]) -> QPoly {
        QPoly::new(cs.iter().map(|&c| int(c)).collect())
    }

    fn sqrt2() -> (Arc<NumberField>, NfElement) {
        let k = NumberField::new(&q(&[-2, 0, 1]), 16).unwrap();
        let a = k.generator();
        (k, a)
    }

    #[test]
    fn arithmetic_in_sqrt2() {
        let (_, a) = sqrt2();
        let one = NfElement::one();
        assert_eq!(
            (one.clone() + a.clone()) * (one - a.clone()),
            NfElement::from_i64(-1)
        );
        let inv = a.inv().unwrap();
        assert_eq!(inv, a.clone() * NfElement::rational(rat(1, 2)));
        assert!((a.clone() + (-a)).is_zero());
    }

    #[test]
    fn generator_satisfies_min_poly() {
        let k = NumberField::new(&q(&[-1, -1, 0, 1]), 16).unwrap();
        let a = k.generator();
        assert!(nf_poly_from_q(k.min_poly()).eval(&a).is_zero());
        let b = a.clone() * a.clone() + NfElement::one();
        let mb = b.min_poly();
        assert_eq!(mb.degree(), Some(3));
        assert!(nf_poly_from_q(&mb).eval(&b).is_zero());
    }

    #[test]
    fn reducible_min_poly_rejected() {
        assert!(matches!(
            NumberField::new(&q(&[-1, 0, 1]), 16),
            Err(NfError::Reducible(_))
        ));
    }

    #[test]
    fn field_mismatch_and_inverse_of_zero() {
        let (_, a) = sqrt2();
        let b = NumberField::new(&q(&[-3, 0, 1]), 16).unwrap().generator();
        assert_eq!(
            nf_arith(NfOp::Add, &a, Some(&b)),
            Err(NfError::FieldMismatch)
        );
        assert_eq!(
            nf_arith(NfOp::Inv, &NfElement::zero(), None),
            Err(NfError::InverseOfZero)
        );
        // rationals combine with any field
        assert!(nf_arith(NfOp::Mul, &NfElement::from_i64(2), Some(&b)).is_ok());
    }

    #[test]
    fn rendering() {
        let k = NumberField::new(&q(&[-5, 0, 0, 1]), 16).unwrap();
        let e = NfElement::from_poly(&k, &QPoly::new(vec![int(-3), int(0), rat(1, 2)]));
        assert_eq!(e.to_string(), "1/2*a^2 - 3");
    }
}
