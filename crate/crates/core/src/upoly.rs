//! Dense univariate polynomials over a [`Scalar`] field.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Rational, Scalar};

/// Dense polynomial, coefficients stored from degree 0 upwards with no
/// trailing zeros. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly<C> {
    coeffs: Vec<C>,
}

pub type QPoly = UPoly<Rational>;

impl<C: Scalar> UPoly<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate `X`.
    pub fn x() -> Self {
        Self::monomial(C::one(), 1)
    }

    pub fn monomial(c: C, deg: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![C::zero(); deg + 1];
        coeffs[deg] = c;
        UPoly { coeffs }
    }

    /// `X - root`.
    pub fn linear_root(root: C) -> Self {
        Self::new(vec![-root, C::one()])
    }

    pub fn from_rationals(qs: &[Rational]) -> Self {
        Self::new(qs.iter().map(C::from_rational).collect())
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to -1.
    pub fn deg_i(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    pub fn lc(&self) -> C {
        self.coeffs.last().cloned().unwrap_or_else(C::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn eval(&self, at: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * at.clone() + c.clone())
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> UPoly<D> {
        UPoly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn monic(&self) -> Self {
        match self.lc().inv() {
            Some(inv) => self.scale(&inv),
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * C::from_i64(i as i64))
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        UPoly { coeffs }
    }

    /// `self(other)`.
    pub fn compose(&self, other: &Self) -> Self {
        self.coeffs.iter().rev().fold(Self::zero(), |acc, c| {
            &(&acc * other) + &Self::constant(c.clone())
        })
    }

    /// Euclidean division. Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lc_inv = divisor.lc().inv().expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![C::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd].clone() * lc_inv.clone();
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - c.clone() * d.clone();
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Exact quotient, `None` if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(divisor);
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        C::poly_gcd(self, other)
    }

    /// [`UPoly::gcd`] by Euclid's algorithm.
    pub fn euclid_gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            // monic remainders keep coefficient growth in check
            let r = a.rem(&b);
            a = b;
            b = if r.is_zero() { r } else { r.monic() };
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::one(), Self::zero());
        let (mut t0, mut t1) = (Self::zero(), Self::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.lc().inv() {
            Some(inv) => (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv)),
            None => (r0, s0, t0),
        }
    }

    /// Inverse of `self` modulo `modulus`, if they are coprime.
    pub fn inv_mod(&self, modulus: &Self) -> Option<Self> {
        let (g, s, _) = self.rem(modulus).ext_gcd(modulus);
        (g.degree() == Some(0)).then(|| s.rem(modulus))
    }

    /// Yun's squarefree decomposition: returns `(a_i, i)` with
    /// `self = lc · Π a_i^i`, each `a_i` monic, squarefree and pairwise coprime.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_exact(&a0).expect("gcd divides");
        let mut c = fp.div_exact(&a0).expect("gcd divides");
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            b = b.div_exact(&a).expect("gcd divides");
            c = d.div_exact(&a).expect("gcd divides");
            d = &c - &b.derivative();
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    /// Product of the distinct irreducible factors, monic.
    pub fn squarefree_part(&self) -> Self {
        self.squarefree_decomposition()
            .into_iter()
            .fold(Self::one(), |acc, (a, _)| &acc * &a)
    }

    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.deg_i().cmp(&other.deg_i()).then_with(|| {
            for (a, b) in self.coeffs.iter().zip(&other.coeffs).rev() {
                let o = a.canonical_cmp(b);
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }

    /// Renders with the given indeterminate name, highest degree first.
    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            push_term(&mut out, &c.to_string(), &mono);
        }
        out
    }
}

/// Appends `coeff*mono` to a sum being rendered, handling signs and unit
/// coefficients.
pub(crate) fn push_term(out: &mut String, coeff: &str, mono: &str) {
    let compound = coeff.contains(['+', ' ']) || coeff[1..].contains('-');
    let (neg, body) = if !compound && coeff.starts_with('-') {
        (true, &coeff[1..])
    } else {
        (false, coeff)
    };
    let body = if compound {
        format!("({body})")
    } else {
        body.to_string()
    };
    let term = if mono.is_empty() {
        body
    } else if body == "1" {
        mono.to_string()
    } else {
        format!("{body}*{mono}")
    };
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    out.push_str(&term);
}

impl<C: Scalar> fmt::Display for UPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("X"))
    }
}

impl<'a, C: Scalar> Add<&'a UPoly<C>> for &'a UPoly<C> {
    type Output = UPoly<C>;
    fn add(self, rhs: &UPoly<C>) -> UPoly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<'a, C: Scalar> Sub<&'a UPoly<C>> for &'a UPoly<C> {
    type Output = UPoly<C>;
    fn sub(self, rhs: &UPoly<C>) -> UPoly<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<'a, C: Scalar> Mul<&'a UPoly<C>> for &'a UPoly<C> {
    type Output = UPoly<C>;
    fn mul(self, rhs: &UPoly<C>) -> UPoly<C> {
        if self.is_zero() || rhs.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        UPoly::new(out)
    }
}

impl<C: Scalar> Neg for &UPoly<C> {
    type Output = UPoly<C>;
    fn neg(self) -> UPoly<C> {
        UPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<C: Scalar> Add for UPoly<C> {
    type Output = UPoly<C>;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<C: Scalar> Sub for UPoly<C> {
    type Output = UPoly<C>;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<C: Scalar> Mul for UPoly<C> {
    type Output = UPoly<C>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<C: Scalar> Neg for UPoly<C> {
    type Output = UPoly<C>;
    fn neg(self) -> Self {
        -&self
    }
}

/// Resultant of two polynomials over a field, via the Euclidean remainder
/// sequence.
pub fn resultant<C: Scalar>(a: &UPoly<C>, b: &UPoly<C>) -> C {
    let (Some(mut da), Some(mut db)) = (a.degree(), b.degree()) else {
        return C::zero();
    };
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut acc = C::one();
    loop {
        if db == 0 {
            return acc * b.lc().pow(da as u64);
        }
        if da < db {
            if (da * db) % 2 == 1 {
                acc = -acc;
            }
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut da, &mut db);
            continue;
        }
        let r = a.rem(&b);
        let Some(dr) = r.degree() else {
            return C::zero();
        };
        // res(a, b) = (-1)^{da·db} lc(b)^{da - dr} res(b, r)
        if (da * db) % 2 == 1 {
            acc = -acc;
        }
        acc = acc * b.lc().pow((da - dr) as u64);
        a = b;
        da = db;
        b = r;
        db = dr;
    }
}
