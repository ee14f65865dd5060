//! From syntax trees to the objects of the core library.

use std::collections::BTreeMap;

use henselk_core::arcs::PlaneSet;
use henselk_core::closedness::{val_var, CellCondition, CellSet, ClosednessError, Y_VAL};
use henselk_core::presburger::{Formula, LinTerm};
use henselk_core::{BivarPoly, PolyQ, Rational, Series};
use thiserror::Error;

use crate::ast::{Cmp, Cond, Expr, Quant, VAtom, VTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
    #[error(transparent)]
    Closedness(#[from] ClosednessError),
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T, ConvertError> {
    Err(ConvertError::UnsupportedInput(msg.into()))
}

type Monomial = BTreeMap<String, u32>;

/// Polynomial in named variables with coefficients in `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Series>,
}

impl Poly {
    fn constant(c: Series) -> Self {
        Poly {
            terms: [(Monomial::new(), c)].into_iter().collect(),
        }
        .normalized()
    }

    fn var(v: &str) -> Self {
        Poly {
            terms: [([(v.to_string(), 1)].into_iter().collect(), Series::one())]
                .into_iter()
                .collect(),
        }
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_exact_zero());
        self
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let s = match out.terms.get(m) {
                Some(old) => old.add_ref(c),
                None => c.clone(),
            };
            out.terms.insert(m.clone(), s);
        }
        out.normalized()
    }

    fn neg(&self) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg_ref()))
                .collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Poly {
            terms: BTreeMap::new(),
        };
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut m = a.clone();
                for (v, e) in b {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                let term = Poly {
                    terms: [(m, x.mul_ref(y))].into_iter().collect(),
                };
                out = out.add(&term);
            }
        }
        out.normalized()
    }

    fn pow(&self, k: u32) -> Self {
        (0..k).fold(Poly::constant(Series::one()), |acc, _| acc.mul(self))
    }

    /// Variables with a nonzero exponent.
    pub fn vars(&self) -> Vec<String> {
        let mut vs: Vec<String> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    fn check_vars(&self, allowed: &[&str]) -> Result<(), ConvertError> {
        match self
            .vars()
            .into_iter()
            .find(|v| !allowed.contains(&v.as_str()))
        {
            Some(v) => unsupported(format!(
                "variable {v} (expected only {})",
                if allowed.is_empty() {
                    "t".to_string()
                } else {
                    allowed.join(", ")
                }
            )),
            None => Ok(()),
        }
    }

    fn degree_in(m: &Monomial, v: &str) -> u32 {
        m.get(v).copied().unwrap_or(0)
    }

    pub fn to_series(&self) -> Result<Series, ConvertError> {
        self.check_vars(&[])?;
        Ok(self
            .terms
            .get(&Monomial::new())
            .cloned()
            .unwrap_or_else(Series::zero))
    }

    /// As a polynomial in `y` over `K`.
    pub fn to_polyk(&self) -> Result<PolyQ, ConvertError> {
        self.check_vars(&["y"])?;
        let d = self
            .terms
            .keys()
            .map(|m| Self::degree_in(m, "y"))
            .max()
            .unwrap_or(0) as usize;
        let mut cs = vec![Series::zero(); d + 1];
        for (m, c) in &self.terms {
            cs[Self::degree_in(m, "y") as usize] = c.clone();
        }
        Ok(PolyQ::new(cs))
    }

    /// As a polynomial in `x, y` with rational coefficients.
    pub fn to_bivar(&self) -> Result<BivarPoly, ConvertError> {
        self.check_vars(&["x", "y"])?;
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            if !c.is_exact() || c.terms().any(|(e, _)| e != 0) {
                return unsupported(
                    "coefficients must be exact rationals; write the curve in x and y",
                );
            }
            let i = Self::degree_in(m, "x") as i64;
            terms.push(((i, Self::degree_in(m, "y")), c.coeff(0)));
        }
        Ok(BivarPoly::from_terms(terms))
    }
}

pub fn expr_poly(e: &Expr) -> Result<Poly, ConvertError> {
    Ok(match e {
        Expr::Num(q) => Poly::constant(Series::constant(q.clone())),
        Expr::T => Poly::constant(Series::t()),
        Expr::Var(v) => Poly::var(v),
        Expr::BigO(n) => Poly {
            terms: [(Monomial::new(), Series::big_o(*n))].into_iter().collect(),
        },
        Expr::Neg(a) => expr_poly(a)?.neg(),
        Expr::Add(a, b) => expr_poly(a)?.add(&expr_poly(b)?),
        Expr::Sub(a, b) => expr_poly(a)?.add(&expr_poly(b)?.neg()),
        Expr::Mul(a, b) => expr_poly(a)?.mul(&expr_poly(b)?),
        Expr::Pow(a, k) => {
            let base = expr_poly(a)?;
            if *k >= 0 {
                base.pow(*k as u32)
            } else {
                let s = base.to_series().map_err(|_| {
                    ConvertError::UnsupportedInput("negative powers only of constants".into())
                })?;
                let inv = Series::one()
                    .div(&s)
                    .map_err(|e| ConvertError::UnsupportedInput(e.to_string()))?;
                Poly::constant(inv).pow(k.unsigned_abs() as u32)
            }
        }
    })
}

pub fn series(e: &Expr) -> Result<Series, ConvertError> {
    expr_poly(e)?.to_series()
}

pub fn polyk(e: &Expr) -> Result<PolyQ, ConvertError> {
    expr_poly(e)?.to_polyk()
}

pub fn bivar(e: &Expr) -> Result<BivarPoly, ConvertError> {
    expr_poly(e)?.to_bivar()
}

/// Name of the value-group variable standing for `v(e)`.
fn plain_name(e: &Expr) -> String {
    format!("v({e})")
}

/// Maps the symbols of a value-group term to variable names.
fn lin_term(
    t: &VTerm,
    name: &mut dyn FnMut(&Expr) -> Result<String, ConvertError>,
) -> Result<LinTerm, ConvertError> {
    let mut acc = LinTerm::constant(0);
    for m in &t.monos {
        let piece = match &m.atom {
            None => LinTerm::constant(m.coeff),
            Some(VAtom::Var(v)) => LinTerm::monomial(v, m.coeff),
            Some(VAtom::Val(e)) => LinTerm::monomial(&name(e)?, m.coeff),
        };
        acc = acc.add(&piece);
    }
    Ok(acc)
}

/// The Presburger formula of a condition, with `name` mapping each `v(e)`
/// to a variable; `ac` and `= inf` atoms are rejected.
fn formula_with(
    c: &Cond,
    name: &mut dyn FnMut(&Expr) -> Result<String, ConvertError>,
) -> Result<Formula, ConvertError> {
    Ok(match c {
        Cond::Bool(true) => Formula::True,
        Cond::Bool(false) => Formula::False,
        Cond::Cmp(l, op, r) => {
            let (l, r) = (lin_term(l, name)?, lin_term(r, name)?);
            match op {
                Cmp::Eq => Formula::eq(l, r),
                Cmp::Le => Formula::le(l, r),
                Cmp::Ge => Formula::ge(l, r),
                Cmp::Lt => Formula::lt(l, r),
                Cmp::Gt => Formula::gt(l, r),
            }
        }
        Cond::Cong(l, r, m) => Formula::cong(lin_term(l, name)?, lin_term(r, name)?, *m),
        Cond::Ac(..) => return unsupported(format!("'{c}' is not a value-group condition")),
        Cond::Inf(..) => return unsupported(format!("'{c}' is not a value-group condition")),
        Cond::Not(a) => Formula::not(formula_with(a, name)?),
        Cond::And(cs) => Formula::and(
            cs.iter()
                .map(|c| formula_with(c, name))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Cond::Or(cs) => Formula::or(
            cs.iter()
                .map(|c| formula_with(c, name))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Cond::Quant(q, v, body) => {
            let b = formula_with(body, name)?;
            match q {
                Quant::Exists => Formula::exists(v, b),
                Quant::Forall => Formula::forall(v, b),
            }
        }
    })
}

/// A Presburger formula; `v(e)` becomes the variable named `v(e)`.
pub fn formula(c: &Cond) -> Result<Formula, ConvertError> {
    formula_with(c, &mut |e| Ok(plain_name(e)))
}

pub fn linterm(t: &VTerm) -> Result<LinTerm, ConvertError> {
    lin_term(t, &mut |e| Ok(plain_name(e)))
}

fn flatten_or(c: &Cond) -> Vec<&Cond> {
    match c {
        Cond::Or(cs) => cs.iter().flat_map(flatten_or).collect(),
        _ => vec![c],
    }
}

fn flatten_and(c: &Cond) -> Vec<&Cond> {
    match c {
        Cond::And(cs) => cs.iter().flat_map(flatten_and).collect(),
        _ => vec![c],
    }
}

/// What `v(e)` or `ac(e)` refers to in a cell description.
enum Coordinate {
    X(String),
    /// `y - center`.
    Y(Series),
}

fn coordinate(e: &Expr) -> Result<Coordinate, ConvertError> {
    let p = expr_poly(e)?;
    let bad = || unsupported(format!("'{e}' is neither a coordinate x_i nor y - c"));
    let mut center = Series::zero();
    let mut var = None;
    for (m, c) in &p.terms {
        match m.len() {
            0 => center = c.neg_ref(),
            1 => {
                let (v, k) = m.iter().next().unwrap();
                if *k != 1 || !c.is_exact() || *c != Series::one() || var.is_some() {
                    return bad();
                }
                var = Some(v.clone());
            }
            _ => return bad(),
        }
    }
    match var {
        Some(v) if v == "y" => Ok(Coordinate::Y(center)),
        Some(v) if center.is_exact_zero() => Ok(Coordinate::X(v)),
        _ => bad(),
    }
}

/// The x coordinates mentioned in `c`, in sorted order.
fn x_vars(c: &Cond, out: &mut Vec<String>) {
    let mut visit = |e: &Expr| {
        if let Ok(p) = expr_poly(e) {
            out.extend(p.vars().into_iter().filter(|v| v != "y"));
        }
    };
    fn walk(c: &Cond, f: &mut dyn FnMut(&Expr)) {
        let term = |t: &VTerm, f: &mut dyn FnMut(&Expr)| {
            for m in &t.monos {
                if let Some(VAtom::Val(e)) = &m.atom {
                    f(e);
                }
            }
        };
        match c {
            Cond::Cmp(l, _, r) | Cond::Cong(l, r, _) => {
                term(l, f);
                term(r, f);
            }
            Cond::Ac(e, _) | Cond::Inf(e) => f(e),
            Cond::Not(a) | Cond::Quant(_, _, a) => walk(a, f),
            Cond::And(cs) | Cond::Or(cs) => cs.iter().for_each(|c| walk(c, f)),
            Cond::Bool(_) => {}
        }
    }
    walk(c, &mut visit);
}

/// A finite union of cells: top-level `|` separates disjuncts, and within
/// one disjunct `ac` and `v(y - c) = inf` atoms must be top-level conjuncts.
pub fn cell_set(c: &Cond) -> Result<CellSet, ConvertError> {
    let mut xs = Vec::new();
    x_vars(c, &mut xs);
    xs.sort();
    xs.dedup();
    if xs.is_empty() {
        xs.push("x".to_string());
    }
    let mut disjuncts = Vec::new();
    for d in flatten_or(c) {
        let mut center: Option<Series> = None;
        let mut ac = BTreeMap::new();
        let mut y_is_center = false;
        let mut parts = Vec::new();
        let use_center = |s: Series, center: &mut Option<Series>| match center {
            Some(c0) if *c0 != s => {
                unsupported(format!("two centers {} and {} in one cell", c0, s))
            }
            _ => {
                *center = Some(s);
                Ok(())
            }
        };
        for a in flatten_and(d) {
            match a {
                Cond::Ac(e, q) => match coordinate(e)? {
                    Coordinate::X(v) => {
                        ac.insert(v, q.clone());
                    }
                    Coordinate::Y(s) => {
                        use_center(s, &mut center)?;
                        ac.insert("y".to_string(), q.clone());
                    }
                },
                Cond::Inf(e) => match coordinate(e)? {
                    Coordinate::Y(s) => {
                        use_center(s, &mut center)?;
                        y_is_center = true;
                    }
                    Coordinate::X(_) => {
                        return unsupported(format!("'{a}': only y may equal its center"))
                    }
                },
                _ => {
                    let f = formula_with(a, &mut |e| match coordinate(e)? {
                        Coordinate::X(v) => Ok(val_var(&v)),
                        Coordinate::Y(s) => {
                            use_center(s, &mut center)?;
                            Ok(Y_VAL.to_string())
                        }
                    })?;
                    parts.push(f);
                }
            }
        }
        let mut cell = CellCondition::new(center.unwrap_or_else(Series::zero), Formula::and(parts));
        cell.ac = ac;
        cell.y_is_center = y_is_center;
        disjuncts.push(cell);
    }
    Ok(CellSet::new(xs, disjuncts)?)
}

/// A plane set: `v(f) = inf` conjuncts give zero conditions, every other
/// `v(f)` becomes a valued polynomial.
pub fn plane_set(c: &Cond) -> Result<PlaneSet, ConvertError> {
    let mut zeros = Vec::new();
    let mut valued: Vec<(String, BivarPoly)> = Vec::new();
    let mut parts = Vec::new();
    for a in flatten_and(c) {
        if let Cond::Inf(e) = a {
            zeros.push(bivar(e)?);
            continue;
        }
        let f = formula_with(a, &mut |e| {
            let name = plain_name(e);
            let p = bivar(e)?;
            if !valued.iter().any(|(n, _)| *n == name) {
                valued.push((name.clone(), p));
            }
            Ok(name)
        })?;
        parts.push(f);
    }
    Ok(PlaneSet {
        zeros,
        valued,
        formula: Formula::and(parts),
    })
}

/// `1`, `-1/2`, … as a rational.
pub fn rational(e: &Expr) -> Result<Rational, ConvertError> {
    let s = series(e)?;
    if !s.is_exact() || s.terms().any(|(k, _)| k != 0) {
        return unsupported(format!("'{e}' is not a rational number"));
    }
    Ok(s.coeff(0))
}
