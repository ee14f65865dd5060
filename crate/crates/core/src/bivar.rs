//! Sparse polynomials in two variables `x`, `y`.

use std::collections::BTreeMap;
use std::fmt;

use crate::polyk::PolyK;
use crate::scalar::{Rational, Scalar};
use crate::series::LaurentSeries;
use crate::upoly::UPoly;

/// `Σ c_{ij} x^i y^j` keyed by `(i, j)`. The `x` exponents may be negative,
/// which the Puiseux step needs for intermediate substitutions.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivar<C> {
    terms: BTreeMap<(i64, u32), C>,
}

/// Polynomial in `x`, `y` over `Q`.
pub type BivarPoly = Bivar<Rational>;

impl<C: Scalar> Bivar<C> {
    /// Sums repeated keys and drops zero coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = ((i64, u32), C)>) -> Self {
        let mut out: BTreeMap<(i64, u32), C> = BTreeMap::new();
        for (k, c) in terms {
            let slot = out.entry(k).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        out.retain(|_, c| !c.is_zero());
        Bivar { terms: out }
    }

    pub fn zero() -> Self {
        Bivar {
            terms: BTreeMap::new(),
        }
    }

    /// `Σ_j p_j(x) y^j` from the coefficient polynomials `p_j`.
    pub fn from_y_coeffs(ps: &[UPoly<C>]) -> Self {
        Self::from_terms(ps.iter().enumerate().flat_map(|(j, p)| {
            p.coeffs()
                .iter()
                .enumerate()
                .map(move |(i, c)| ((i as i64, j as u32), c.clone()))
        }))
    }

    pub fn terms(&self) -> &BTreeMap<(i64, u32), C> {
        &self.terms
    }

    pub fn coeff(&self, i: i64, j: u32) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_y(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    pub fn degree_x(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.0).max()
    }

    /// Smallest `x` exponent among the terms of `y^j`.
    pub fn x_order(&self, j: u32) -> Option<i64> {
        self.terms.keys().filter(|k| k.1 == j).map(|k| k.0).min()
    }

    pub fn min_x_exponent(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.0).min()
    }

    /// Support points `(j, ord_x p_j)` of the Newton polygon.
    pub fn newton_points(&self) -> Vec<(i64, i64)> {
        let mut ords: BTreeMap<u32, i64> = BTreeMap::new();
        for &(i, j) in self.terms.keys() {
            let e = ords.entry(j).or_insert(i);
            *e = (*e).min(i);
        }
        ords.into_iter().map(|(j, o)| (j as i64, o)).collect()
    }

    /// Multiplication by `x^a y^b` (with `b` possibly negative when `y^-b`
    /// divides every term).
    pub fn shift(&self, a: i64, b: i64) -> Self {
        Bivar {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| {
                    let j = j as i64 + b;
                    assert!(j >= 0, "negative y exponent");
                    ((i + a, j as u32), c.clone())
                })
                .collect(),
        }
    }

    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Bivar<D> {
        Bivar::from_terms(self.terms.iter().map(|(k, c)| (*k, f(c))))
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .chain(&other.terms)
                .map(|(k, c)| (*k, c.clone())),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().flat_map(|(&(i, j), a)| {
            other
                .terms
                .iter()
                .map(move |(&(k, l), b)| ((i + k, j + l), a.clone() * b.clone()))
        }))
    }

    pub fn derivative_y(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.1 > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c.clone() * C::from_i64(j as i64))),
        )
    }

    /// The coefficient of `y^j` as a polynomial in `x`; `x` exponents must
    /// be nonnegative.
    pub fn y_coeff(&self, j: u32) -> UPoly<C> {
        let mut cs = Vec::new();
        for (&(i, jj), c) in &self.terms {
            if jj != j {
                continue;
            }
            assert!(i >= 0, "negative x exponent");
            let i = i as usize;
            if cs.len() <= i {
                cs.resize(i + 1, C::zero());
            }
            cs[i] = c.clone();
        }
        UPoly::new(cs)
    }

    pub fn y_coeffs(&self) -> Vec<UPoly<C>> {
        match self.degree_y() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|j| self.y_coeff(j)).collect(),
        }
    }

    /// `x ↦ γ·s^q`: the polynomial in `y` over exact Laurent polynomials in `s`.
    pub fn to_polyk(&self, gamma: &C, q: i64) -> PolyK<C> {
        let d = self.degree_y().map_or(0, |d| d as usize + 1);
        let mut cs: Vec<BTreeMap<i64, C>> = vec![BTreeMap::new(); d];
        for (&(i, j), c) in &self.terms {
            cs[j as usize].insert(i * q, c.clone() * gamma.powi(i));
        }
        PolyK::new(cs.into_iter().map(LaurentSeries::exact).collect())
    }

    /// Value at `x = γ·s^q`, `y = y0`.
    pub fn eval_branch(&self, gamma: &C, q: i64, y0: &LaurentSeries<C>) -> LaurentSeries<C> {
        self.to_polyk(gamma, q).eval(y0)
    }

    pub fn eval(&self, x: &C, y: &C) -> C {
        self.terms.iter().fold(C::zero(), |acc, (&(i, j), c)| {
            acc + c.clone() * x.powi(i) * y.pow(j as u64)
        })
    }

    pub fn to_string_in(&self, xvar: &str, yvar: &str) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|a, b| (b.0 .1, b.0 .0).cmp(&(a.0 .1, a.0 .0)));
        for (&(i, j), c) in keys {
            let mut mono = Vec::new();
            if i != 0 {
                mono.push(power(xvar, i));
            }
            if j != 0 {
                mono.push(power(yvar, j as i64));
            }
            crate::upoly::push_term(&mut out, &c.to_string(), &mono.join("*"));
        }
        out
    }
}

fn power(var: &str, e: i64) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{e}")
    }
}

impl<C: Scalar> fmt::Display for Bivar<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("x", "y"))
    }
}
