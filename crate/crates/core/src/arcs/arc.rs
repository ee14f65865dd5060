use std::fmt;

use num_traits::{One, Zero};

use super::ArcError;
use crate::bivar::BivarPoly;
use crate::hensel::{puiseux_expand, Limit};
use crate::presburger::{fresh_name, qe, Formula, Int, LinTerm};
use crate::scalar::{int, Rational};
use crate::series::{LaurentSeries, Precision, ValResult};

type Series = LaurentSeries<Rational>;

/// Largest monomial exponent tried by [`select_arc`].
pub const MONOMIAL_BOUND: u32 = 12;
const MONOMIAL_SCALES: [i64; 4] = [1, -1, 2, -2];

/// A subset of `K^2` minus the target point: the common zeros of `zeros`
/// where the valuations of `valued` satisfy `formula`. The formula's free
/// variables are the names in `valued`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneSet {
    pub zeros: Vec<BivarPoly>,
    pub valued: Vec<(String, BivarPoly)>,
    pub formula: Formula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcDomain {
    /// All of `R`.
    Whole,
    /// `v(z) >= 1` and `ac(z) = 1`.
    Positive,
}

impl fmt::Display for ArcDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcDomain::Whole => f.write_str("R"),
            ArcDomain::Positive => f.write_str("{v(z) >= 1, ac(z) = 1}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArcSource {
    /// Puiseux branch of a polynomial of the set, `swapped` when expanded
    /// with `x` as a function of `y`.
    Branch {
        poly: usize,
        swapped: bool,
    },
    Monomial {
        r: (u32, u32),
        w: (i64, i64),
    },
}

/// `z ↦ (φ_1(z), φ_2(z))` with `φ(0) = a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub components: (Series, Series),
    pub domain: ArcDomain,
    /// Exact, or the order in `z` to which the zero conditions hold.
    pub order: Precision,
    /// `v(f(φ(z))) = k·v(z)` for each valued polynomial, on the domain.
    pub valuations: Vec<(String, i64)>,
    pub source: ArcSource,
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "phi(z) = ({}, {}), E = {}",
            self.components.0.to_string_in("z"),
            self.components.1.to_string_in("z"),
            self.domain
        )
    }
}

fn binomial_powers(a: &Rational, n: u32) -> Vec<Rational> {
    // coefficients of (u + a)^n by ascending power of u
    let mut row = vec![Rational::one()];
    for _ in 0..n {
        let mut next = vec![Rational::zero(); row.len() + 1];
        for (k, c) in row.iter().enumerate() {
            next[k + 1] += c;
            next[k] += c * a;
        }
        row = next;
    }
    row
}

/// `P(x + a_1, y + a_2)`.
fn translate(p: &BivarPoly, a: &(Rational, Rational)) -> BivarPoly {
    let mut terms = Vec::new();
    for (&(i, j), c) in p.terms() {
        let bx = binomial_powers(&a.0, i as u32);
        let by = binomial_powers(&a.1, j);
        for (k, u) in bx.iter().enumerate() {
            for (l, w) in by.iter().enumerate() {
                terms.push(((k as i64, l as u32), c.clone() * u * w));
            }
        }
    }
    BivarPoly::from_terms(terms)
}

fn swap(p: &BivarPoly) -> BivarPoly {
    BivarPoly::from_terms(
        p.terms()
            .iter()
            .map(|(&(i, j), c)| ((j as i64, i as u32), c.clone())),
    )
}

fn eval_at(p: &BivarPoly, x: &Series, y: &Series) -> Series {
    let mut acc = Series::zero();
    for (&(i, j), c) in p.terms() {
        let term = x.pow(i as u32).mul_ref(&y.pow(j)).scale(c);
        acc = acc.add_ref(&term);
    }
    acc
}

fn rational_series(s: &LaurentSeries<crate::NfElement>) -> Option<Series> {
    let terms: Option<Vec<_>> = s
        .terms()
        .map(|(e, c)| c.rational_value().map(|q| (e, q)))
        .collect();
    Some(Series::from_terms(terms?, s.precision()))
}

struct Checker<'a> {
    set: &'a PlaneSet,
    order: i64,
}

impl Checker<'_> {
    /// The arc `ψ` (based at the origin) with its verified data.
    fn check(&self, psi: &(Series, Series), source: ArcSource) -> Option<Arc> {
        let mut exact = true;
        for f in &self.set.zeros {
            let v = eval_at(f, &psi.0, &psi.1);
            if v.is_exact_zero() {
                continue;
            }
            if v.terms().next().is_some_and(|(e, _)| e < self.order)
                || v.precision() < Precision::At(self.order)
            {
                return None;
            }
            exact = false;
        }
        let mut valuations = Vec::new();
        for (name, f) in &self.set.valued {
            match eval_at(f, &psi.0, &psi.1).valuation() {
                ValResult::Finite(k) => valuations.push((name.clone(), k)),
                _ => return None,
            }
        }
        let mut used = self.set.formula.all_vars();
        used.extend(self.set.valued.iter().map(|(n, _)| n.clone()));
        let u = fresh_name("u", &used);
        let mut body = self.set.formula.clone();
        for (name, k) in &valuations {
            body = body.substitute(name, &LinTerm::monomial(&u, *k as Int));
        }
        let claim = Formula::forall(
            &u,
            Formula::implies(Formula::ge(LinTerm::var(&u), LinTerm::constant(1)), body),
        );
        if qe(&claim) != Formula::True {
            return None;
        }
        let whole = exact && self.set.valued.is_empty();
        Some(Arc {
            components: psi.clone(),
            domain: if whole {
                ArcDomain::Whole
            } else {
                ArcDomain::Positive
            },
            order: if exact {
                Precision::Exact
            } else {
                Precision::At(self.order)
            },
            valuations,
            source,
        })
    }
}

/// An arc through `a` into `A \ {a}`: Puiseux branches of the polynomials of
/// the set are tried first, then monomial arcs `(w_1·z^{r_1}, w_2·z^{r_2})`
/// with `r_i <= MONOMIAL_BOUND` and `w_i ∈ {±1, ±2}`.
pub fn select_arc(set: &PlaneSet, a: &(Rational, Rational), order: i64) -> Result<Arc, ArcError> {
    let mut polys: Vec<&BivarPoly> = set.zeros.iter().collect();
    polys.extend(set.valued.iter().map(|(_, p)| p));
    for p in &polys {
        if p.is_zero() {
            return Err(ArcError::ZeroPolynomial);
        }
        if p.min_x_exponent().is_some_and(|e| e < 0) {
            return Err(ArcError::UnsupportedSet(
                "polynomials must lie in Q[x, y]".into(),
            ));
        }
    }
    let moved = PlaneSet {
        zeros: set.zeros.iter().map(|p| translate(p, a)).collect(),
        valued: set
            .valued
            .iter()
            .map(|(n, p)| (n.clone(), translate(p, a)))
            .collect(),
        formula: set.formula.clone(),
    };
    let checker = Checker { set: &moved, order };
    let mut tried = 0usize;
    let found = branch_candidates(&moved, order)
        .into_iter()
        .chain(monomial_candidates())
        .find_map(|(psi, source)| {
            tried += 1;
            checker.check(&psi, source)
        });
    let Some(mut arc) = found else {
        return Err(ArcError::NoArcFound { tried });
    };
    arc.components.0 = arc.components.0.add_ref(&Series::constant(a.0.clone()));
    arc.components.1 = arc.components.1.add_ref(&Series::constant(a.1.clone()));
    Ok(arc)
}

type Candidate = ((Series, Series), ArcSource);

fn branch_candidates(set: &PlaneSet, order: i64) -> Vec<Candidate> {
    let polys = set.zeros.iter().chain(set.valued.iter().map(|(_, p)| p));
    let mut out: Vec<Candidate> = Vec::new();
    for (k, p) in polys.enumerate() {
        for swapped in [false, true] {
            let q = if swapped { swap(p) } else { p.clone() };
            let Ok(branches) = puiseux_expand(&q, order) else {
                continue;
            };
            let mut local = Vec::new();
            for b in branches {
                let through_origin = matches!(&b.limit, Limit::Finite(c) if c.is_zero());
                let (Some(gamma), Some(ys)) =
                    (b.x_scale.rational_value(), rational_series(&b.series))
                else {
                    continue;
                };
                if !through_origin || ys.is_exact_zero() {
                    continue;
                }
                let xs = Series::monomial(gamma, b.ram_index as i64);
                local.push(if swapped { (ys, xs) } else { (xs, ys) });
            }
            // branches leaving with a positive leading coefficient first
            local.sort_by_key(|psi: &(Series, Series)| {
                let lead =
                    |s: &Series| s.terms().next().is_some_and(|(_, c)| *c < Rational::zero());
                (lead(&psi.0), lead(&psi.1))
            });
            for psi in local {
                if !out.iter().any(|(o, _)| *o == psi) {
                    out.push((psi, ArcSource::Branch { poly: k, swapped }));
                }
            }
        }
    }
    out
}

fn monomial_candidates() -> impl Iterator<Item = Candidate> {
    let mut rs: Vec<(u32, u32)> = (1..=MONOMIAL_BOUND)
        .flat_map(|a| (1..=MONOMIAL_BOUND).map(move |b| (a, b)))
        .collect();
    rs.sort_by_key(|&(a, b)| (a + b, a));
    rs.into_iter().flat_map(|r| {
        MONOMIAL_SCALES.iter().flat_map(move |&w1| {
            MONOMIAL_SCALES.iter().map(move |&w2| {
                let psi = (
                    Series::monomial(int(w1), r.0 as i64),
                    Series::monomial(int(w2), r.1 as i64),
                );
                (psi, ArcSource::Monomial { r, w: (w1, w2) })
            })
        })
    })
}
