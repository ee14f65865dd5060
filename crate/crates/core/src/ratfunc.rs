//! The rational function field `Q(u)` as a [`Scalar`], used to run
//! Euclidean algorithms on bivariate polynomials viewed as `Q(u)[y]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::scalar::{Rational, Scalar};
use crate::upoly::{QPoly, UPoly};

/// Reduced fraction `num / den` with `den` monic and coprime to `num`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc {
    num: QPoly,
    den: QPoly,
}

impl RatFunc {
    pub fn new(num: QPoly, den: QPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g).expect("gcd divides");
        let den = den.div_exact(&g).expect("gcd divides");
        let lc = den.lc().inv().expect("nonzero");
        RatFunc {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn from_poly(p: QPoly) -> Self {
        RatFunc {
            num: p,
            den: QPoly::one(),
        }
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            write!(f, "{}", self.num.to_string_in("u"))
        } else {
            write!(
                f,
                "({})/({})",
                self.num.to_string_in("u"),
                self.den.to_string_in("u")
            )
        }
    }
}

trait IsOnePoly {
    fn is_one_poly(&self) -> bool;
}

impl IsOnePoly for QPoly {
    fn is_one_poly(&self) -> bool {
        self.degree() == Some(0) && self.lc().is_one()
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc {
            num: QPoly::zero(),
            den: QPoly::one(),
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::from_poly(QPoly::one())
    }
}

impl Add for RatFunc {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den);
        }
        RatFunc::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for RatFunc {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for RatFunc {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for RatFunc {
    type Output = Self;
    fn neg(self) -> Self {
        RatFunc {
            num: -&self.num,
            den: self.den,
        }
    }
}

impl Scalar for RatFunc {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(RatFunc::new(self.den.clone(), self.num.clone()))
        }
    }

    fn from_rational(q: &Rational) -> Self {
        RatFunc::from_poly(QPoly::constant(q.clone()))
    }

    fn to_rational(&self) -> Option<Rational> {
        (self.num.deg_i() <= 0 && self.den.degree() == Some(0)).then(|| self.num.coeff(0))
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.num
            .canonical_cmp(&other.num)
            .then_with(|| self.den.canonical_cmp(&other.den))
    }

    /// Primitive remainder sequence over `Q[u][y]`: no rational function
    /// arithmetic until the final normalization.
    fn poly_gcd(a: &UPoly<Self>, b: &UPoly<Self>) -> UPoly<Self> {
        let (mut a, mut b) = (integral_primitive(a), integral_primitive(b));
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_empty() {
            let r = primitive(pseudo_rem(&a, &b));
            a = std::mem::replace(&mut b, r);
        }
        UPoly::new(a.into_iter().map(RatFunc::from_poly).collect()).monic()
    }
}

/// Coefficients over `Q[u]`, lowest degree first, without trailing zeros.
type Dense = Vec<QPoly>;

fn trim(mut cs: Dense) -> Dense {
    while cs.last().is_some_and(QPoly::is_zero) {
        cs.pop();
    }
    cs
}

/// `p / content(p)` for `p` over `Q[u]`.
fn primitive(cs: Dense) -> Dense {
    let cs = trim(cs);
    let content = cs.iter().fold(QPoly::zero(), |g, c| g.gcd(c));
    if content.is_zero() {
        return cs;
    }
    cs.iter()
        .map(|c| c.div_exact(&content).expect("content divides"))
        .collect()
}

/// A primitive polynomial over `Q[u]` proportional to `p`.
fn integral_primitive(p: &UPoly<RatFunc>) -> Dense {
    let l = p.coeffs().iter().fold(QPoly::one(), |l, c| {
        let g = l.gcd(&c.den);
        &l * &c.den.div_exact(&g).expect("gcd divides")
    });
    primitive(
        p.coeffs()
            .iter()
            .map(|c| &c.num * &l.div_exact(&c.den).expect("denominator divides"))
            .collect(),
    )
}

/// `lc(b)^k·a mod b` for the least sufficient `k`.
fn pseudo_rem(a: &[QPoly], b: &[QPoly]) -> Dense {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    while r.len() > db {
        let k = r.len() - 1;
        let lr = r[k].clone();
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (j, c) in b.iter().enumerate() {
            let i = j + k - db;
            r[i] = &r[i] - &(&lr * c);
        }
        r = trim(r);
    }
    r
}
