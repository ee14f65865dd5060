use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::lift::newton_root;
use super::polygon::lower_hull;
use super::HenselError;
use crate::bivar::{Bivar, BivarPoly};
use crate::numberfield::{
    adjoin_root, factor_over, Extension, NfElement, NfPoly, NumberField, DEFAULT_DEGREE_CAP,
};
use crate::ratfunc::RatFunc;
use crate::scalar::{fmt_rational, Rational, Scalar};
use crate::series::{LaurentSeries, Precision, ValResult};
use crate::upoly::{QPoly, UPoly};

type NfSeries = LaurentSeries<NfElement>;

/// Point of the projective line over a number field.
#[derive(Clone, Debug, PartialEq)]
pub enum Limit {
    Finite(NfElement),
    AtInfinity,
}

/// `v(y - limit) = (p/q)·v(x) + beta` along a branch (`v(y)` itself for a
/// limit at infinity); `AtInfinity` when `y` equals its limit identically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlopeLine {
    Line { p: i64, q: i64, beta: Rational },
    AtInfinity,
}

impl fmt::Display for SlopeLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlopeLine::Line { p, q, beta } => write!(f, "{p}/{q}*k + {}", fmt_rational(beta)),
            SlopeLine::AtInfinity => f.write_str("inf"),
        }
    }
}

/// A conjugacy class of Puiseux roots of `P(x, y) = 0` at `x = 0`, in the
/// parametrization `x = x_scale·s^ram_index`, `y = series(s)`. The roots of
/// the class are the images of the branch under the embeddings of `field`.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub ram_index: u32,
    pub x_scale: NfElement,
    pub field: Option<Arc<NumberField>>,
    pub series: NfSeries,
    pub limit: Limit,
    pub is_k_rational: bool,
    pub multiplicity: u32,
    pub slope_line: SlopeLine,
}

impl Branch {
    pub fn field_degree(&self) -> usize {
        self.field.as_ref().map_or(1, |f| f.degree())
    }

    /// Number of Puiseux roots represented, without multiplicity.
    pub fn conjugates(&self) -> usize {
        self.ram_index as usize * self.field_degree()
    }

    /// `P(x_scale·s^q, series(s))`.
    pub fn residual(&self, p: &BivarPoly) -> NfSeries {
        embed_rational(p).eval_branch(&self.x_scale, self.ram_index as i64, &self.series)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchLimit {
    pub limit: Limit,
    pub is_k_rational: bool,
    pub slope_line: SlopeLine,
    pub multiplicity: u32,
    pub field: Option<Arc<NumberField>>,
}

pub fn puiseux_expand(p: &BivarPoly, order: i64) -> Result<Vec<Branch>, HenselError> {
    puiseux_expand_with(p, order, DEFAULT_DEGREE_CAP)
}

/// Limits at `x = 0` of the roots `y(x)` of `P`, one entry per branch.
pub fn branch_limits(p: &BivarPoly) -> Result<Vec<BranchLimit>, HenselError> {
    Ok(puiseux_expand(p, 1)?
        .into_iter()
        .map(|b| BranchLimit {
            limit: b.limit,
            is_k_rational: b.is_k_rational,
            slope_line: b.slope_line,
            multiplicity: b.multiplicity,
            field: b.field,
        })
        .collect())
}

/// Puiseux branches of `P` at `x = 0`, each with `P(x_scale·s^q, series)`
/// vanishing modulo `s^order`.
pub fn puiseux_expand_with(
    p: &BivarPoly,
    order: i64,
    cap: usize,
) -> Result<Vec<Branch>, HenselError> {
    if p.is_zero() {
        return Err(HenselError::ZeroPolynomial);
    }
    if p.degree_y() == Some(0) {
        return Err(HenselError::ConstantInY);
    }
    let order = order.max(1);
    let ctx = Ctx {
        target: embed_rational(p),
        order,
        cap,
        guard: p.degree_y().unwrap_or(1) as i64,
    };
    let mut found = Vec::new();
    for (a, mult) in squarefree_factors(p) {
        let start = found.len();
        let st = State {
            field: None,
            g: embed_rational(&a),
            gamma: NfElement::one(),
            q: 1,
            head: BTreeMap::new(),
            kappa: NfElement::one(),
            e: 0,
        };
        expand(st, None, &ctx, &mut found)?;
        for f in &mut found[start..] {
            f.multiplicity = mult;
        }
    }
    // left to right along the polygon, then by residue factor
    found.sort_by(|a, b| match (&a.slope, &b.slope) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y).then_with(|| a.residue.canonical_cmp(&b.residue)),
    });
    Ok(found.into_iter().map(Found::into_branch).collect())
}

fn embed_rational(p: &BivarPoly) -> Bivar<NfElement> {
    p.map(|c| NfElement::rational(c.clone()))
}

/// Squarefree factorization over `Q(x)`, with each factor made primitive in
/// `Q[x][y]`.
pub(crate) fn squarefree_factors(p: &BivarPoly) -> Vec<(BivarPoly, u32)> {
    to_qx(p)
        .squarefree_decomposition()
        .into_iter()
        .filter(|(f, _)| f.degree().unwrap_or(0) > 0)
        .map(|(f, m)| (primitive_part(&f), m))
        .collect()
}

pub(crate) fn to_qx(p: &BivarPoly) -> UPoly<RatFunc> {
    UPoly::new(p.y_coeffs().into_iter().map(RatFunc::from_poly).collect())
}

/// Clears denominators and content of a polynomial over `Q(x)`.
pub(crate) fn primitive_part(f: &UPoly<RatFunc>) -> BivarPoly {
    let den = f.coeffs().iter().fold(QPoly::one(), |acc, c| {
        let g = acc.gcd(c.den());
        &acc * &c.den().div_exact(&g).expect("gcd divides")
    });
    let nums: Vec<QPoly> = f
        .coeffs()
        .iter()
        .map(|c| c.num() * &den.div_exact(c.den()).expect("common denominator"))
        .collect();
    let content = nums.iter().fold(QPoly::zero(), |acc, c| acc.gcd(c));
    let prim: Vec<QPoly> = nums
        .iter()
        .map(|c| c.div_exact(&content).expect("content divides"))
        .collect();
    BivarPoly::from_y_coeffs(&prim)
}

struct Ctx {
    target: Bivar<NfElement>,
    order: i64,
    cap: usize,
    guard: i64,
}

/// Current chart: `x = gamma·X^q`, `y = head(X) + kappa·X^e·Y` and `g(X, Y)`
/// the transformed polynomial.
#[derive(Clone)]
struct State {
    field: Option<Arc<NumberField>>,
    g: Bivar<NfElement>,
    gamma: NfElement,
    q: i64,
    head: BTreeMap<i64, NfElement>,
    kappa: NfElement,
    e: i64,
}

impl State {
    fn embed(&self, ext: &Extension) -> State {
        State {
            field: ext.field.clone(),
            g: self.g.map(|c| ext.embed(c)),
            gamma: ext.embed(&self.gamma),
            q: self.q,
            head: self.head.iter().map(|(k, c)| (*k, ext.embed(c))).collect(),
            kappa: ext.embed(&self.kappa),
            e: self.e,
        }
    }

    fn head_series(&self) -> NfSeries {
        LaurentSeries::exact(self.head.iter().map(|(k, c)| (*k, c.clone())))
    }

    /// The chart change `X = θ^v X'^q`, `Y = X'^m (θ^u + Y')` for the edge
    /// of slope `-m/q` and a root `θ` of its characteristic polynomial.
    fn descend(&self, theta: &NfElement, m: i64, q: i64) -> State {
        let v = (0..q)
            .find(|v| (v * m + 1).rem_euclid(q) == 0)
            .expect("m, q coprime");
        let u = (1 + v * m) / q;
        let tu = theta.powi(u);
        let mut terms = Vec::new();
        for (&(i, j), a) in self.g.terms() {
            let base = a.clone() * theta.powi(v * i);
            let xe = q * i + m * j as i64;
            let mut binom = NfElement::one();
            for k in (0..=j).rev() {
                // C(j, k) θ^{u(j-k)} Y'^k
                terms.push((
                    (xe, k),
                    base.clone() * binom.clone() * tu.pow((j - k) as u64),
                ));
                if k > 0 {
                    binom = binom
                        * NfElement::from_i64(k as i64)
                        * NfElement::from_i64((j - k + 1) as i64).inv().unwrap();
                }
            }
        }
        let g = Bivar::from_terms(terms);
        let low = g.min_x_exponent().unwrap_or(0);
        let tv = theta.powi(v);
        let tve = theta.powi(v * self.e);
        let mut head: BTreeMap<i64, NfElement> = self
            .head
            .iter()
            .map(|(k, c)| (k * q, c.clone() * tv.powi(*k)))
            .collect();
        let kappa = self.kappa.clone() * tve;
        let lead = q * self.e + m;
        let slot = head.entry(lead).or_insert_with(NfElement::zero);
        *slot = slot.clone() + kappa.clone() * tu.clone();
        head.retain(|_, c| !c.is_zero());
        State {
            field: self.field.clone(),
            g: g.shift(-low, 0),
            gamma: self.gamma.clone() * tv.powi(self.q),
            q: self.q * q,
            head,
            kappa,
            e: lead,
        }
    }
}

struct Found {
    slope: Option<Rational>,
    residue: QPoly,
    field: Option<Arc<NumberField>>,
    gamma: NfElement,
    q: i64,
    y: NfSeries,
    multiplicity: u32,
}

impl Found {
    fn into_branch(self) -> Branch {
        let q = self.q;
        let line = |p: i64| {
            let g = p.gcd(&q);
            SlopeLine::Line {
                p: p / g,
                q: q / g,
                beta: Rational::zero(),
            }
        };
        let (limit, slope_line) = match self.y.valuation() {
            ValResult::Finite(v) if v < 0 => (Limit::AtInfinity, line(v)),
            _ => {
                let w = self.y.coeff(0);
                let rest = self.y.sub_ref(&LaurentSeries::constant(w.clone()));
                let sl = match rest.valuation() {
                    ValResult::Finite(v) => line(v),
                    _ => SlopeLine::AtInfinity,
                };
                (Limit::Finite(w), sl)
            }
        };
        let is_k_rational = match &limit {
            Limit::Finite(w) => w.rational_value().is_some(),
            Limit::AtInfinity => true,
        };
        Branch {
            ram_index: q as u32,
            x_scale: self.gamma,
            field: self.field,
            series: self.y,
            limit,
            is_k_rational,
            multiplicity: self.multiplicity,
            slope_line,
        }
    }
}

/// `key` is `None` at the top level and the polygon slope and residue
/// factor of the top-level edge below it.
fn expand(
    mut st: State,
    key: Option<(Option<Rational>, QPoly)>,
    ctx: &Ctx,
    out: &mut Vec<Found>,
) -> Result<(), HenselError> {
    let top = key.is_none();
    if st.g.x_order(0).is_none() {
        // Y divides g: Y = 0 is an exact root
        let (slope, residue) = key.clone().unwrap_or((None, QPoly::x()));
        out.push(Found {
            slope,
            residue,
            field: st.field.clone(),
            gamma: st.gamma.clone(),
            q: st.q,
            y: st.head_series(),
            multiplicity: 1,
        });
        st.g = st.g.shift(0, -1);
        if st.g.degree_y().unwrap_or(0) == 0 {
            return Ok(());
        }
    }
    let low = st.g.min_x_exponent().unwrap_or(0);
    st.g = st.g.shift(-low, 0);
    let points = st.g.newton_points();
    let mut edges = lower_hull(&points);
    if !top {
        let r0 = points.iter().find(|p| p.1 == 0).map_or(0, |p| p.0);
        if r0 == 0 {
            return Ok(());
        }
        if r0 == 1 {
            let (slope, residue) = key.unwrap();
            out.push(lift_branch(&st, slope, residue, ctx)?);
            return Ok(());
        }
        edges.retain(|e| e.to.0 <= r0);
    }
    for edge in edges {
        let mu = edge.exponent();
        let m = mu.numer().to_i64().expect("small exponent");
        let q = mu.denom().to_i64().expect("small exponent");
        let (i0, o0) = edge.from;
        let steps = edge.length / q;
        let phi: NfPoly = UPoly::new(
            (0..=steps)
                .map(|k| st.g.coeff(o0 - k * m, (i0 + k * q) as u32))
                .collect(),
        );
        for (psi, _) in factor_over(st.field.as_ref(), &phi, ctx.cap)? {
            let sub_key = match &key {
                Some(k) => k.clone(),
                None => (
                    Some(edge.slope.clone()),
                    psi.map(|c| c.rational_value().expect("rational at the top level")),
                ),
            };
            let (base, theta) = if psi.degree() == Some(1) {
                (st.clone(), -psi.coeff(0))
            } else {
                let ext = adjoin_root(st.field.as_ref(), &psi, ctx.cap)?;
                (st.embed(&ext), ext.root.clone())
            };
            expand(base.descend(&theta, m, q), Some(sub_key), ctx, out)?;
        }
    }
    Ok(())
}

/// Expansion of the simple root `Y → 0` of `g`, lifted until the residual of
/// the input polynomial vanishes to the requested order.
fn lift_branch(
    st: &State,
    slope: Option<Rational>,
    residue: QPoly,
    ctx: &Ctx,
) -> Result<Found, HenselError> {
    let gy = st.g.to_polyk(&NfElement::one(), 1);
    let head = st.head_series();
    let mut m = ctx.order + st.q * ctx.guard;
    loop {
        let root = newton_root(&gy, &NfElement::zero(), m)?;
        let y = head.add_ref(&root.shift(st.e).scale(&st.kappa));
        let residual = ctx.target.eval_branch(&st.gamma, st.q, &y);
        let enough = residual.precision() >= Precision::At(ctx.order);
        debug_assert!(residual
            .val_lower_bound()
            .is_none_or(|v| v >= ctx.order.min(m)));
        let w = y.coeff(0);
        let settled = !matches!(
            y.sub_ref(&LaurentSeries::constant(w)).valuation(),
            ValResult::AtLeastPrecision(_)
        );
        if (enough && settled) || root.is_exact() {
            return Ok(Found {
                slope,
                residue,
                field: st.field.clone(),
                gamma: st.gamma.clone(),
                q: st.q,
                y,
                multiplicity: 1,
            });
        }
        m += ctx.order.max(8);
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Limit::Finite(w) => write!(f, "{w}"),
            Limit::AtInfinity => f.write_str("inf"),
        }
    }
}
