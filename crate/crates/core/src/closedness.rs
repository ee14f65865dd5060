//! Closure points of sets in cell form over `K = Q((t))` and fiber
//! shrinking, decided through Presburger reasoning on the valuations.
//!
//! A cell condition constrains `(v(x_1), …, v(x_n), v(y - c))` by a
//! Presburger formula, for a constant center `c`, and may fix angular
//! components. Every point has `x_i ≠ 0` and `y ∈ R = Q[[t]]`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::presburger::{
    extremum, find_ray_in, qe, sat, Direction, Extremum, Formula, Int, LinTerm, Point, Ray,
    RayResult, SatResult,
};
use crate::scalar::{fmt_rational, Rational};
use crate::series::{LaurentSeries, ValResult};

type Series = LaurentSeries<Rational>;

/// Presburger variable standing for `v(y - c)`.
pub const Y_VAL: &str = "v(y-c)";

/// Presburger variable standing for `v(x)`.
pub fn val_var(x: &str) -> String {
    format!("v({x})")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosednessError {
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellCondition {
    /// Constant center `c`; an exact Laurent polynomial.
    pub center: Series,
    /// Formula in `v(x_i)` and `v(y-c)`.
    pub val_formula: Formula,
    /// Fixed angular components, keyed by `x_i` or `y` (meaning `y - c`).
    pub ac: BTreeMap<String, Rational>,
    /// `y = c` identically; the formula then does not mention `v(y-c)`.
    pub y_is_center: bool,
}

impl CellCondition {
    pub fn new(center: Series, val_formula: Formula) -> Self {
        CellCondition {
            center,
            val_formula,
            ac: BTreeMap::new(),
            y_is_center: false,
        }
    }

    pub fn with_ac(mut self, var: &str, xi: Rational) -> Self {
        self.ac.insert(var.to_string(), xi);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSet {
    pub x_vars: Vec<String>,
    pub disjuncts: Vec<CellCondition>,
}

impl CellSet {
    pub fn new(
        x_vars: Vec<String>,
        disjuncts: Vec<CellCondition>,
    ) -> Result<Self, ClosednessError> {
        let s = CellSet { x_vars, disjuncts };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.x_vars.len()
    }

    fn kvars(&self) -> Vec<String> {
        self.x_vars.iter().map(|x| val_var(x)).collect()
    }

    pub fn validate(&self) -> Result<(), ClosednessError> {
        let bad = |m: String| Err(ClosednessError::UnsupportedSet(m));
        if self.x_vars.is_empty() {
            return bad("at least one x variable is required".into());
        }
        if self.disjuncts.is_empty() {
            return bad("at least one disjunct is required".into());
        }
        let mut allowed = self.kvars();
        allowed.push(Y_VAL.to_string());
        for d in &self.disjuncts {
            if !d.center.is_exact() {
                return bad("centers must be exact".into());
            }
            for v in d.val_formula.free_vars() {
                if !allowed.contains(&v) || (d.y_is_center && v == Y_VAL) {
                    return bad(format!("unexpected valuation variable {v}"));
                }
            }
            for (k, xi) in &d.ac {
                if xi.is_zero() {
                    return bad(format!("ac({k}) must be nonzero"));
                }
                if !(self.x_vars.contains(k) || (k == "y" && !d.y_is_center)) {
                    return bad(format!("ac constraint on unknown coordinate {k}"));
                }
            }
        }
        Ok(())
    }
}

fn var(v: &str) -> LinTerm {
    LinTerm::var(v)
}

fn konst(c: Int) -> LinTerm {
    LinTerm::constant(c)
}

fn val_of(s: &Series) -> Option<Int> {
    match s.valuation() {
        ValResult::Finite(e) => Some(e as Int),
        _ => None,
    }
}

/// Some `u` with `v(u) = val` and `ac(u) = ac` (when fixed) satisfies
/// `v(u - d) >= level`.
fn approach(val: &LinTerm, d: &Series, level: &LinTerm, ac: Option<&Rational>) -> Formula {
    let deep = Formula::ge(val.clone(), level.clone());
    let Some(e) = val_of(d) else {
        return deep;
    };
    let compat = ac.is_none_or(|xi| *xi == d.coeff(e as i64));
    Formula::or([
        Formula::and([deep, Formula::ge(konst(e), level.clone())]),
        Formula::and([
            Formula::eq(val.clone(), konst(e)),
            Formula::lt(konst(e), level.clone()),
            if compat {
                Formula::True
            } else {
                Formula::False
            },
        ]),
    ])
}

/// Relation between `l = v(y - c)` and `m = v(y - w)` for `d = w - c`.
fn achievable(l: &str, m: &str, d: &Series, ac: Option<&Rational>) -> Formula {
    let Some(e) = val_of(d) else {
        return Formula::eq(var(m), var(l));
    };
    let a = d.coeff(e as i64);
    let tie = match ac {
        None => Formula::ge(var(m), konst(e)),
        Some(xi) if *xi == a => Formula::gt(var(m), konst(e)),
        Some(_) => Formula::eq(var(m), konst(e)),
    };
    Formula::or([
        Formula::and([Formula::lt(var(l), konst(e)), Formula::eq(var(m), var(l))]),
        Formula::and([Formula::gt(var(l), konst(e)), Formula::eq(var(m), konst(e))]),
        Formula::and([Formula::eq(var(l), konst(e)), tie]),
    ])
}

/// Valuation data of one disjunct: `T(k, l)` including `y ∈ R`.
fn valuation_set(d: &CellCondition) -> Formula {
    if d.y_is_center {
        let in_r = val_of(&d.center).is_none_or(|e| e >= 0);
        return Formula::and([
            d.val_formula.clone(),
            if in_r { Formula::True } else { Formula::False },
        ]);
    }
    let minus_c = d.center.neg_ref();
    Formula::and([
        d.val_formula.clone(),
        approach(&var(Y_VAL), &minus_c, &konst(0), d.ac.get("y")),
    ])
}

/// `sup` of `min_i vars_i` over `f`.
fn min_sup(f: &Formula, vars: &[String]) -> Extremum {
    let mut used = f.all_vars();
    used.extend(vars.iter().cloned());
    let mu = crate::presburger::fresh_name("mu", &used);
    let body = Formula::and(
        std::iter::once(f.clone()).chain(vars.iter().map(|v| Formula::le(var(&mu), var(v)))),
    );
    extremum(&body, &var(&mu), Direction::Sup)
}

fn accumulates(f: &Formula, vars: &[String]) -> bool {
    matches!(min_sup(f, vars), Extremum::Unbounded { .. })
}

/// Membership of the point at level `ν`: some point of the disjunct lies
/// within `v(· - point) >= ν` in every coordinate.
fn level_formula(set: &CellSet, d: &CellCondition, point: &[Series], level: &LinTerm) -> Formula {
    let mut parts = vec![valuation_set(d)];
    for (x, a) in set.x_vars.iter().zip(point) {
        parts.push(approach(&var(&val_var(x)), a, level, d.ac.get(x)));
    }
    let w = &point[set.n()];
    if d.y_is_center {
        let gap = d.center.sub_ref(w);
        parts.push(match val_of(&gap) {
            None => Formula::True,
            Some(e) => Formula::ge(konst(e), level.clone()),
        });
    } else {
        parts.push(approach(
            &var(Y_VAL),
            &w.sub_ref(&d.center),
            level,
            d.ac.get("y"),
        ));
    }
    Formula::and(parts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipResult {
    pub member: bool,
    /// Disjunct index and witness valuations for `ν = 0, 1, …` up to the
    /// working precision or the first failing level.
    pub certificates: Vec<(i64, usize, Point)>,
    pub failing_level: Option<i64>,
}

/// Whether `point = (x_1, …, x_n, y)` lies in the closure of `B`: checked
/// level by level up to `precision` with witnesses, and for all levels at
/// once by eliminating the level variable.
pub fn is_in_closure(
    set: &CellSet,
    point: &[Series],
    precision: i64,
) -> Result<MembershipResult, ClosednessError> {
    set.validate()?;
    if point.len() != set.n() + 1 {
        return Err(ClosednessError::Arity {
            expected: set.n() + 1,
            got: point.len(),
        });
    }
    if point.iter().any(|p| !p.is_exact()) {
        return Err(ClosednessError::UnsupportedSet(
            "point coordinates must be exact".into(),
        ));
    }
    let mut certificates = Vec::new();
    let mut failing_level = None;
    'levels: for nu in 0..=precision {
        for (j, d) in set.disjuncts.iter().enumerate() {
            if let SatResult::Sat(p) = sat(&level_formula(set, d, point, &konst(nu as Int))) {
                certificates.push((nu, j, p));
                continue 'levels;
            }
        }
        failing_level = Some(nu);
        break;
    }
    let member = failing_level.is_none() && set.disjuncts.iter().any(|d| all_levels(set, d, point));
    Ok(MembershipResult {
        member,
        certificates,
        failing_level,
    })
}

/// `∀ν ∃ valuations`: the disjunct approaches the point arbitrarily closely.
fn all_levels(set: &CellSet, d: &CellCondition, point: &[Series]) -> bool {
    let f = level_formula(set, d, point, &var("nu"));
    let mut vars = set.kvars();
    if !d.y_is_center {
        vars.push(Y_VAL.to_string());
    }
    let body = Formula::exists_all(&vars, f);
    qe(&Formula::forall("nu", body)) == Formula::True
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub l: Int,
    pub xi: Rational,
    /// Valuations `(v(x_1), …)` still in play after this step.
    pub lambda: Formula,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceOutcome {
    /// `v(y - w)` grows without bound along the set: `w` is exact.
    Converged(Series),
    /// The loop reached the requested precision; `w` is truncated.
    Stopped(Series),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureTrace {
    pub steps: Vec<TraceStep>,
    pub outcome: TraceOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosurePoint {
    pub w: Series,
    pub disjunct: usize,
    pub trace: ClosureTrace,
    /// For each level `ν ≤ N`, valuations of a point of the disjunct with
    /// `v(x_i) >= ν` and `v(y - w) >= ν`.
    pub certificates: Vec<(i64, Point)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClosureOutcome {
    Point(ClosurePoint),
    /// The projection omits a punctured neighbourhood of the origin:
    /// `min_i v(x_i) <= bound` on it (`None` when the set is empty).
    NotInClosure {
        bound: Option<Int>,
    },
}

/// A point `(0, w)` in the closure of `B` with `w ∈ R`, or a certificate
/// that the origin is not in the closure of the projection of `B`.
pub fn construct_closure_point(set: &CellSet, n: i64) -> Result<ClosureOutcome, ClosednessError> {
    set.validate()?;
    let kvars = set.kvars();
    let mut bound: Option<Int> = None;
    for (j, d) in set.disjuncts.iter().enumerate() {
        let t = valuation_set(d);
        let lambda = if d.y_is_center {
            qe(&t)
        } else {
            qe(&Formula::exists(Y_VAL, t.clone()))
        };
        match min_sup(&lambda, &kvars) {
            Extremum::Unbounded { .. } => {}
            Extremum::Finite { value, .. } => {
                bound = Some(bound.map_or(value, |b| b.max(value)));
                continue;
            }
            Extremum::Empty => continue,
        }
        let trace = if d.y_is_center {
            ClosureTrace {
                steps: Vec::new(),
                outcome: TraceOutcome::Converged(d.center.clone()),
            }
        } else {
            closure_loop(d, &t, lambda, &kvars, n)
        };
        let w = match &trace.outcome {
            TraceOutcome::Converged(w) | TraceOutcome::Stopped(w) => w.clone(),
        };
        let mut point = vec![Series::zero(); set.n()];
        point.push(w.clone());
        let mut certificates = Vec::new();
        for nu in 0..=n {
            match sat(&level_formula(set, d, &point, &konst(nu as Int))) {
                SatResult::Sat(p) => certificates.push((nu, p)),
                SatResult::Unsat => panic!("closure certificate fails at level {nu} for w = {w}"),
            }
        }
        return Ok(ClosureOutcome::Point(ClosurePoint {
            w,
            disjunct: j,
            trace,
            certificates,
        }));
    }
    Ok(ClosureOutcome::NotInClosure { bound })
}

/// The digit-by-digit construction of `w` for one disjunct with valuation
/// set `t` and accumulating projection `lambda`.
fn closure_loop(
    d: &CellCondition,
    t: &Formula,
    lambda: Formula,
    kvars: &[String],
    n: i64,
) -> ClosureTrace {
    let ac = d.ac.get("y");
    let (m, m2) = ("m", "m'");
    let mut lambda = lambda;
    let mut w = Series::zero();
    let mut steps = Vec::new();
    // ∃l. T(k, l) ∧ (l, m) achievable for the current approximation
    let xi_set = |w: &Series, m: &str| {
        let gap = w.sub_ref(&d.center);
        qe(&Formula::exists(
            Y_VAL,
            Formula::and([t.clone(), achievable(Y_VAL, m, &gap, ac)]),
        ))
    };
    loop {
        let xi_now = xi_set(&w, m);
        let here = Formula::and([lambda.clone(), xi_now.clone()]);
        let mut with_m = kvars.to_vec();
        with_m.push(m.to_string());
        if accumulates(&here, &with_m) {
            return ClosureTrace {
                steps,
                outcome: TraceOutcome::Converged(w),
            };
        }
        // values of v(y - w) recurring for arbitrarily small x
        let close = Formula::and(
            std::iter::once(here.clone())
                .chain(kvars.iter().map(|k| Formula::ge(var(k), var("nu")))),
        );
        let recurring = qe(&Formula::forall("nu", Formula::exists_all(kvars, close)));
        let top = match extremum(&recurring, &var(m), Direction::Sup) {
            Extremum::Finite { value, .. } => value,
            _ => break,
        };
        let mut advanced = false;
        'levels: for l in (0..=top).rev() {
            if l >= n as Int {
                continue;
            }
            let mut env = Point::new();
            env.insert(m.to_string(), l);
            if recurring.instantiate(&env).eval(&Point::new()) != Some(true) {
                continue;
            }
            for xi in residue_candidates(&w, d, l) {
                let next = w.add_ref(&Series::monomial(xi.clone(), l as i64));
                let deeper = Formula::and([xi_set(&next, m2), Formula::gt(var(m2), konst(l))]);
                let narrowed = qe(&Formula::and([lambda.clone(), Formula::exists(m2, deeper)]));
                if accumulates(&narrowed, kvars) {
                    steps.push(TraceStep {
                        l,
                        xi: xi.clone(),
                        lambda: narrowed.clone(),
                    });
                    lambda = narrowed;
                    w = next;
                    advanced = true;
                    break 'levels;
                }
            }
        }
        if !advanced {
            break;
        }
    }
    ClosureTrace {
        steps,
        outcome: TraceOutcome::Stopped(w),
    }
}

/// Possible angular components of `y - w` at `v(y - w) = l`: the input ac
/// constant, the one forced by the center, and a free choice.
fn residue_candidates(w: &Series, d: &CellCondition, l: Int) -> Vec<Rational> {
    let c_digit = d.center.coeff(l as i64) - w.coeff(l as i64);
    let mut out: Vec<Rational> = Vec::new();
    if let Some(xi) = d.ac.get("y") {
        out.push(xi.clone());
        out.push(xi.clone() + c_digit.clone());
    } else {
        out.push(Rational::from_integer(1.into()));
    }
    out.push(c_digit);
    let mut seen = Vec::new();
    out.retain(|x| {
        if x.is_zero() || seen.contains(x) {
            return false;
        }
        seen.push(x.clone());
        true
    });
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ShrinkResult {
    Shrink {
        /// Coordinate order; the first plays the role of the parameter.
        permutation: Vec<usize>,
        ray: Ray,
        /// Valuation vectors of the shrinking: the set on the ray.
        description: Formula,
    },
    /// The origin is not an accumulation point: `min_i v(x_i) <= bound`.
    NoShrink { bound: Option<Int> },
    /// Accumulating, but no ray with direction entries in `[1, bound]`.
    NoRay { bound: Int },
}

/// A semi-line of valuation vectors inside the projection of `A` along which
/// every coordinate tends to zero.
pub fn fiber_shrink(set: &CellSet) -> Result<ShrinkResult, ClosednessError> {
    set.validate()?;
    let kvars = set.kvars();
    let lambda = qe(&Formula::or(set.disjuncts.iter().map(|d| {
        let t = valuation_set(d);
        if d.y_is_center || !t.free_vars().contains(Y_VAL) {
            t
        } else {
            Formula::exists(Y_VAL, t)
        }
    })));
    match min_sup(&lambda, &kvars) {
        Extremum::Unbounded { .. } => {}
        Extremum::Finite { value, .. } => return Ok(ShrinkResult::NoShrink { bound: Some(value) }),
        Extremum::Empty => return Ok(ShrinkResult::NoShrink { bound: None }),
    }
    let permutation: Vec<usize> = (0..set.n()).collect();
    match find_ray_in(&lambda, &kvars) {
        RayResult::Ray(ray) => {
            let description = qe(&Formula::and([lambda.clone(), on_ray(&ray)]));
            Ok(ShrinkResult::Shrink {
                permutation,
                ray,
                description,
            })
        }
        RayResult::NoRay { bound } => Ok(ShrinkResult::NoRay { bound }),
    }
}

/// `∃r ≥ 0. vars = base + r·step·direction`.
fn on_ray(ray: &Ray) -> Formula {
    let r = "r";
    let eqs = ray
        .vars
        .iter()
        .zip(&ray.base)
        .zip(&ray.direction)
        .map(|((v, b), dir)| {
            Formula::eq(var(v), konst(*b).add(&LinTerm::monomial(r, dir * ray.step)))
        });
    Formula::exists(
        r,
        Formula::and(std::iter::once(Formula::ge(var(r), konst(0))).chain(eqs)),
    )
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "l = {}, xi = {}, lambda: {}",
            self.l,
            fmt_rational(&self.xi),
            self.lambda
        )
    }
}
