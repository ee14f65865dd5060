//! The acceptance criteria, one test per criterion. Each prints a
//! `PASS`/`FAIL` line and fails on a miss.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use henselk_cli::convert::cell_set;
use henselk_cli::parse_cond;
use henselk_core::arcs::{anisotropic_form, loja_exponent};
use henselk_core::closedness::{
    construct_closure_point, fiber_shrink, val_var, CellCondition, CellSet, ClosureOutcome,
    ShrinkResult, Y_VAL,
};
use henselk_core::hensel::{hensel_decompose, hensel_lift, puiseux_expand, Limit, SlopeLine};
use henselk_core::numberfield::{factor_rationals, NfElement, DEFAULT_DEGREE_CAP};
use henselk_core::presburger::{qe, sat, Formula, Int, LinTerm, SatResult};
use henselk_core::scalar::{int, rat};
use henselk_core::{
    BivarPoly, LaurentSeries, PolyQ, Precision, QPoly, Rational, Series, ValResult,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Straight to the process's stdout, past the test harness's capture.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "\n{line}");
    let _ = out.flush();
}

/// Criteria run one at a time so each is timed alone.
static SERIAL: Mutex<()> = Mutex::new(());

fn report(n: u32, what: &str, limit: Duration, f: impl FnOnce() -> Result<String, String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f));
    let took = start.elapsed();
    let outcome = match res {
        Ok(Ok(detail)) if took <= limit => Ok(detail),
        Ok(Ok(detail)) => Err(format!("{detail}; took {took:.1?}, limit {limit:?}")),
        Ok(Err(e)) => Err(e),
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    };
    match outcome {
        Ok(detail) => say(&format!(
            "PASS criterion {n} ({what}): {detail} in {took:.2?}"
        )),
        Err(e) => {
            say(&format!("FAIL criterion {n} ({what}): {e}"));
            panic!("criterion {n} failed: {e}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// 1. series algebra

/// Laurent polynomial as exponent → coefficient, zero terms dropped.
type Lp = BTreeMap<i64, i128>;

fn lp_mul(a: &Lp, b: &Lp) -> Lp {
    let mut out = Lp::new();
    for (i, x) in a {
        for (j, y) in b {
            *out.entry(i + j).or_insert(0) += x * y;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn lp_add(a: &Lp, b: &Lp) -> Lp {
    let mut out = a.clone();
    for (j, y) in b {
        *out.entry(*j).or_insert(0) += y;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn lp_series(a: &Lp, prec: Option<i64>) -> Series {
    let terms = a
        .iter()
        .map(|(e, c)| (*e, Rational::from_integer((*c).into())));
    match prec {
        None => Series::exact(terms),
        Some(p) => Series::from_terms(terms.filter(|(e, _)| *e < p), Precision::At(p)),
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> Lp {
    let mut a = Lp::new();
    for _ in 0..rng.gen_range(1..=5) {
        let c = rng.gen_range(1..=5) * if rng.gen() { 1 } else { -1 };
        a.insert(rng.gen_range(-4..=6), c);
    }
    a
}

/// Coefficients of `s` agree with `exact` below the precision of `s`.
fn agrees_below(s: &Series, exact: &Lp) -> bool {
    let p = match s.precision() {
        Precision::At(p) => p,
        Precision::Exact => return s == &lp_series(exact, None),
    };
    let lo = exact
        .keys()
        .next()
        .copied()
        .unwrap_or(p)
        .min(s.terms().next().map_or(p, |t| t.0));
    (lo..p)
        .all(|e| s.coeff(e) == Rational::from_integer(exact.get(&e).copied().unwrap_or(0).into()))
}

fn series_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases = 10_000;
    for _ in 0..cases {
        let (a, b, c) = (
            random_lp(&mut rng),
            random_lp(&mut rng),
            random_lp(&mut rng),
        );
        let (sa, sb, sc) = (
            lp_series(&a, None),
            lp_series(&b, None),
            lp_series(&c, None),
        );
        let va = *a.keys().next().unwrap();
        let vb = *b.keys().next().unwrap();
        ensure!(sa.valuation() == ValResult::Finite(va), "valuation of {sa}");
        // ultrametric inequality
        let sum = sa.add_ref(&sb);
        ensure!(sum == lp_series(&lp_add(&a, &b), None), "sum {sa} + {sb}");
        if let ValResult::Finite(v) = sum.valuation() {
            ensure!(v >= va.min(vb), "v({sa} + {sb}) = {v}");
        }
        // v(ab) = v(a) + v(b) and ac(ab) = ac(a)·ac(b)
        let prod = sa.mul_ref(&sb);
        ensure!(
            prod == lp_series(&lp_mul(&a, &b), None),
            "product {sa} * {sb}"
        );
        ensure!(
            prod.valuation() == ValResult::Finite(va + vb),
            "v({sa} * {sb})"
        );
        let ac = |s: &Series| s.angular_component().unwrap();
        ensure!(ac(&prod) == ac(&sa) * ac(&sb), "ac({sa} * {sb})");
        // a(b + c) = ab + ac
        ensure!(
            sa.mul_ref(&sb.add_ref(&sc)) == prod.add_ref(&sa.mul_ref(&sc)),
            "distributivity at {sa}, {sb}, {sc}"
        );
        // truncated operands: claimed digits are correct and the claimed
        // precision does not exceed what the operands determine
        let (pa, pb) = (va + rng.gen_range(1..=5), vb + rng.gen_range(1..=5));
        let (ta, tb) = (lp_series(&a, Some(pa)), lp_series(&b, Some(pb)));
        let tp = ta.mul_ref(&tb);
        ensure!(
            agrees_below(&tp, &lp_mul(&a, &b)),
            "truncated product {ta} * {tb} = {tp}"
        );
        ensure!(
            tp.precision() <= Precision::At((pa + vb).min(pb + va)),
            "product precision {:?} of {ta} * {tb}",
            tp.precision()
        );
        let ts = ta.add_ref(&tb);
        ensure!(
            agrees_below(&ts, &lp_add(&a, &b)),
            "truncated sum {ta} + {tb}"
        );
        ensure!(
            ts.precision() <= Precision::At(pa.min(pb)),
            "sum precision of {ta} + {tb}"
        );
        let tq = ta.div(&tb).map_err(|e| e.to_string())?;
        let back = tq.mul_ref(&sb);
        if let Precision::At(p) = tq.precision() {
            // q·b agrees with a below the quotient's precision shifted by v(b)
            ensure!(
                (va.min(p + vb)..(p + vb).min(pa)).all(|e| back.coeff(e) == sa.coeff(e)),
                "quotient {ta} / {tb} = {tq}"
            );
        }
    }
    Ok(format!("{cases} random triples"))
}

#[test]
fn criterion_1_series_algebra() {
    report(1, "series algebra", Duration::from_secs(10), series_suite);
}

// ---------------------------------------------------------------------------
// 2. Hensel lifting

fn random_poly(rng: &mut ChaCha8Rng, residue_roots: &[i64], unit: &Series) -> PolyQ {
    let mut p = PolyQ::new(vec![Series::one()]);
    for r in residue_roots {
        p = p.mul(&PolyQ::new(vec![Series::constant(int(-r)), Series::one()]));
    }
    let d = residue_roots.len();
    let perturb: Vec<Series> = (0..d)
        .map(|_| Series::exact((1..=5).map(|e| (e, int(rng.gen_range(-3..=3))))))
        .collect();
    p.add(&PolyQ::new(perturb)).scale(unit)
}

/// Power series `num / den` as dense integer coefficients of
/// `t^0 … t^(n-1)`; everything at or above `t^n` is discarded, so products
/// are exact below `t^n`.
#[derive(Clone)]
struct Dense {
    num: Vec<BigInt>,
    den: BigInt,
}

impl Dense {
    fn zero(n: usize) -> Dense {
        Dense {
            num: vec![BigInt::zero(); n],
            den: BigInt::one(),
        }
    }

    fn of(s: &Series, n: i64) -> Dense {
        assert!(s.terms().all(|(e, _)| e >= 0), "negative exponent in {s}");
        let cs: Vec<Rational> = (0..n).map(|e| s.coeff(e)).collect();
        let den = cs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let num = cs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Dense { num, den }
    }

    fn mul(&self, other: &Dense) -> Dense {
        let n = self.num.len();
        let mut num = vec![BigInt::zero(); n];
        for (i, x) in self.num.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in other.num[..n - i].iter().enumerate() {
                num[i + j] += x * y;
            }
        }
        Dense {
            num,
            den: &self.den * &other.den,
        }
    }

    fn add(&self, other: &Dense) -> Dense {
        let den = self.den.lcm(&other.den);
        let (sa, sb) = (&den / &self.den, &den / &other.den);
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(x, y)| x * &sa + y * &sb)
            .collect();
        Dense { num, den }
    }

    fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    fn same(&self, other: &Dense) -> bool {
        self.num
            .iter()
            .zip(&other.num)
            .all(|(x, y)| x * &other.den == y * &self.den)
    }
}

/// Dense coefficients of a polynomial in `y`, lowest degree first.
fn dense_poly(p: &PolyQ, n: i64) -> Vec<Dense> {
    p.coeffs()
        .iter()
        .map(|c| Dense::of(&c.to_exact(), n))
        .collect()
}

fn dense_poly_mul(a: &[Dense], b: &[Dense]) -> Vec<Dense> {
    let n = a[0].num.len();
    let mut out = vec![Dense::zero(n); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// `f(y)` below `t^n` by Horner's rule.
fn dense_eval(f: &[Dense], y: &Dense) -> Dense {
    f.iter()
        .rev()
        .fold(Dense::zero(y.num.len()), |acc, c| acc.mul(y).add(c))
}

fn hensel_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 32;
    let mut lifts = 0;
    for case in 0..50 {
        let d = rng.gen_range(1..=5);
        let mut roots: Vec<i64> = Vec::new();
        while roots.len() < d {
            let r = rng.gen_range(-4..=4);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        let f = random_poly(&mut rng, &roots, &Series::one());
        for r0 in &roots {
            let y = hensel_lift(&f, &int(*r0), n).map_err(|e| format!("case {case}: {e}"))?;
            ensure!(y.coeff(0) == int(*r0), "case {case}: lift of {r0} is {y}");
            ensure!(
                y.precision() >= Precision::At(n),
                "case {case}: lift known to {:?}",
                y.precision()
            );
            // the known digits as an exact polynomial: F of it vanishes below t^n
            let res = dense_eval(&dense_poly(&f, n), &Dense::of(&y.to_exact(), n));
            ensure!(res.is_zero(), "case {case}: v(F(y)) < {n} for F = {f}");
            lifts += 1;
        }
        // decomposition, now with repeated residue roots and a unit
        let mut rep = roots.clone();
        if rng.gen_bool(0.5) {
            rep.push(roots[0]);
        }
        let unit = Series::exact([
            (0, int(rng.gen_range(1..=3))),
            (1, int(rng.gen_range(-2..=2))),
        ]);
        let p = random_poly(&mut rng, &rep, &unit);
        let h = hensel_decompose(&p, n).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(
            h.precision >= Precision::At(n),
            "case {case}: precision {:?}",
            h.precision
        );
        let prod = h
            .factors
            .iter()
            .fold(vec![Dense::of(&h.unit.to_exact(), n)], |acc, f| {
                dense_poly_mul(&acc, &dense_poly(&f.factor, n))
            });
        let target = dense_poly(&p, n);
        ensure!(
            prod.len() == target.len() && prod.iter().zip(&target).all(|(a, b)| a.same(b)),
            "case {case}: product differs from {p} below t^{n}"
        );
    }
    Ok(format!("50 polynomials, {lifts} lifted roots"))
}

#[test]
fn criterion_2_hensel_residuals() {
    report(2, "Hensel residuals", Duration::from_secs(30), hensel_suite);
}

// ---------------------------------------------------------------------------
// 3. Puiseux expansions

const PUISEUX_CORPUS: [&str; 25] = [
    "y^2 - x^3",
    "y^2 - x^2 - x^3",
    "(y-1)^2 - x",
    "x*y - 1",
    "y^2 - 2 - x",
    "y^3 - x^2",
    "y^2 - x^5",
    "y*(y-1) - x",
    "y^3 - x^3 - x^4",
    "(y^2 - x^3)*(y - x)",
    "y^2 + x^2",
    "y^4 - x",
    "y^3 - 2*x",
    "(y-2)^3 - x^2",
    "x*y^2 - 1",
    "y^3 - y - x",
    "(y - x)^2 - x^3",
    "y^5 - x^2",
    "(y^2 - 2)^2 - x",
    "y^2 - x^4 - x^7",
    "y^3 + x*y + x^2",
    "(1 + x)*y^2 - 1",
    "y^2 - y + x",
    "x^2*y^3 + y - 1",
    "(y^2 + 1)*(y - x^2) - x^3",
];

fn bivar_of(src: &str) -> BivarPoly {
    let e = henselk_cli::parse_expr(src).unwrap();
    henselk_cli::convert::bivar(&e).unwrap()
}

/// Minimal polynomial of an algebraic number, made monic.
fn min_poly(z: &NfElement) -> QPoly {
    z.min_poly().monic()
}

fn nf_val(s: &LaurentSeries<NfElement>) -> ValResult {
    s.valuation()
}

fn puiseux_suite() -> Result<String, String> {
    let order = 16;
    let mut branches = 0;
    let mut samples = 0;
    for src in PUISEUX_CORPUS {
        let p = bivar_of(src);
        let bs = puiseux_expand(&p, order).map_err(|e| format!("{src}: {e}"))?;
        // residuals
        for b in &bs {
            match nf_val(&b.residual(&p)) {
                ValResult::Finite(v) if v < order => {
                    return Err(format!("{src}: residual order {v}"))
                }
                ValResult::AtLeastPrecision(v) if v < order => {
                    return Err(format!("{src}: residual known only to order {v}"))
                }
                _ => {}
            }
        }
        branches += bs.len();
        // finite limits against the roots of P(0, y)
        let p0 = QPoly::from_rationals(
            &(0..=p.degree_y().unwrap())
                .map(|j| p.coeff(0, j))
                .collect::<Vec<_>>(),
        );
        let mut expected: BTreeMap<String, usize> = BTreeMap::new();
        if p0.degree().unwrap_or(0) > 0 {
            for (g, e) in factor_rationals(&p0, DEFAULT_DEGREE_CAP).map_err(|e| e.to_string())? {
                *expected.entry(g.monic().to_string()).or_insert(0) +=
                    g.degree().unwrap() * e as usize;
            }
        }
        let mut found: BTreeMap<String, usize> = BTreeMap::new();
        for b in &bs {
            if let Limit::Finite(z) = &b.limit {
                *found.entry(min_poly(z).to_string()).or_insert(0) +=
                    b.conjugates() * b.multiplicity as usize;
            }
        }
        ensure!(
            found == expected,
            "{src}: limits {found:?}, roots of P(0, y) {expected:?}"
        );
        // slope lines at v(x) = 2, 4, 6
        for b in &bs {
            let SlopeLine::Line { p: sp, q: sq, beta } = &b.slope_line else {
                continue;
            };
            let q = b.ram_index as i64;
            let gap = match &b.limit {
                Limit::Finite(z) => b.series.sub_ref(&LaurentSeries::constant(z.clone())),
                Limit::AtInfinity => b.series.clone(),
            };
            let ValResult::Finite(e) = gap.valuation() else {
                return Err(format!("{src}: undetermined gap valuation"));
            };
            for k in [2i64, 4, 6] {
                let line = rat(*sp, *sq) * int(k) + beta.clone();
                ensure!(
                    line == rat(e * k, q),
                    "{src}: slope line {} at v(x) = {k}",
                    b.slope_line
                );
                // substitute x = t^k directly when the branch is over Q
                let rational: Option<Vec<(i64, Rational)>> = b
                    .series
                    .terms()
                    .map(|(i, c)| c.rational_value().map(|r| (i, r)))
                    .collect();
                let (Some(terms), true, 0) = (rational, b.x_scale == NfElement::one(), k % q)
                else {
                    continue;
                };
                let m = k / q;
                let y = Series::from_terms(
                    terms.into_iter().map(|(i, c)| (i * m, c)),
                    b.series
                        .precision()
                        .offset(0)
                        .finite()
                        .map_or(Precision::Exact, |pr| Precision::At(pr * m)),
                );
                let x = Series::monomial(Rational::one(), k);
                let value = p.terms().iter().fold(Series::zero(), |acc, (&(i, j), c)| {
                    acc.add_ref(&x.pow(i as u32).mul_ref(&y.pow(j)).scale(c))
                });
                ensure!(
                    value.terms().all(|(i, _)| i >= order * m),
                    "{src}: P(t^{k}, y) has a term below t^{}",
                    order * m
                );
                let lam = match &b.limit {
                    Limit::Finite(z) => Series::constant(z.rational_value().unwrap()),
                    Limit::AtInfinity => Series::zero(),
                };
                let got = y.sub_ref(&lam).valuation();
                ensure!(
                    got == ValResult::Finite(e * m),
                    "{src}: v(y - limit) = {got:?} at v(x) = {k}, slope line gives {line}"
                );
                samples += 1;
            }
        }
    }
    Ok(format!(
        "25 polynomials, {branches} branch classes, {samples} direct slope samples"
    ))
}

#[test]
fn criterion_3_puiseux_residuals_and_limits() {
    report(
        3,
        "Puiseux residuals and limits",
        Duration::from_secs(60),
        puiseux_suite,
    );
}

// ---------------------------------------------------------------------------
// 4. Presburger quantifier elimination

/// Formula with bounded quantifiers over variables indexed into an array.
#[derive(Clone, Debug)]
enum Q {
    True,
    False,
    Le(Vec<i64>, i64),
    Eq(Vec<i64>, i64),
    Cong(Vec<i64>, i64, i64),
    Not(Box<Q>),
    And(Vec<Q>),
    Or(Vec<Q>),
    Ex(usize, i64, i64, Box<Q>),
    All(usize, i64, i64, Box<Q>),
}

const VARS: [&str; 6] = ["a", "b", "c", "q0", "q1", "q2"];

fn dot(cs: &[i64], c: i64, env: &[i64; 6]) -> i64 {
    cs.iter().zip(env).map(|(a, b)| a * b).sum::<i64>() + c
}

impl Q {
    fn eval(&self, env: &mut [i64; 6]) -> bool {
        match self {
            Q::True => true,
            Q::False => false,
            Q::Le(cs, c) => dot(cs, *c, env) <= 0,
            Q::Eq(cs, c) => dot(cs, *c, env) == 0,
            Q::Cong(cs, c, m) => dot(cs, *c, env).rem_euclid(*m) == 0,
            Q::Not(a) => !a.eval(env),
            Q::And(qs) => qs.iter().all(|q| q.eval(env)),
            Q::Or(qs) => qs.iter().any(|q| q.eval(env)),
            Q::Ex(v, lo, hi, body) => (*lo..=*hi).any(|x| {
                env[*v] = x;
                body.eval(env)
            }),
            Q::All(v, lo, hi, body) => (*lo..=*hi).all(|x| {
                env[*v] = x;
                body.eval(env)
            }),
        }
    }

    fn formula(&self) -> Formula {
        let term = |cs: &[i64], c: i64| {
            LinTerm::from_parts(
                cs.iter()
                    .enumerate()
                    .filter(|(_, a)| **a != 0)
                    .map(|(i, a)| (VARS[i].to_string(), *a as Int)),
                c as Int,
            )
        };
        let zero = || LinTerm::constant(0);
        let range = |v: usize, lo: i64, hi: i64| {
            Formula::and([
                Formula::ge(LinTerm::var(VARS[v]), LinTerm::constant(lo as Int)),
                Formula::le(LinTerm::var(VARS[v]), LinTerm::constant(hi as Int)),
            ])
        };
        match self {
            Q::True => Formula::True,
            Q::False => Formula::False,
            Q::Le(cs, c) => Formula::le(term(cs, *c), zero()),
            Q::Eq(cs, c) => Formula::eq(term(cs, *c), zero()),
            Q::Cong(cs, c, m) => Formula::cong(term(cs, *c), zero(), *m as Int),
            Q::Not(a) => Formula::not(a.formula()),
            Q::And(qs) => Formula::and(qs.iter().map(Q::formula)),
            Q::Or(qs) => Formula::or(qs.iter().map(Q::formula)),
            Q::Ex(v, lo, hi, b) => {
                Formula::exists(VARS[*v], Formula::and([range(*v, *lo, *hi), b.formula()]))
            }
            Q::All(v, lo, hi, b) => {
                Formula::forall(VARS[*v], Formula::implies(range(*v, *lo, *hi), b.formula()))
            }
        }
    }

    /// The quantifier-free output of elimination, in the same representation.
    fn compile(f: &Formula) -> Q {
        let vec_of = |t: &LinTerm| {
            let mut cs = vec![0i64; 6];
            for (v, a) in t.coeffs() {
                let i = VARS.iter().position(|x| x == v).expect("known variable");
                cs[i] = i64::try_from(*a).expect("coefficient fits");
            }
            (cs, i64::try_from(t.constant_term()).expect("constant fits"))
        };
        match f {
            Formula::True => Q::True,
            Formula::False => Q::False,
            Formula::Atom(a) => {
                let (cs, c) = vec_of(&a.term);
                match a.kind {
                    henselk_core::presburger::AtomKind::Le => Q::Le(cs, c),
                    henselk_core::presburger::AtomKind::Eq => Q::Eq(cs, c),
                    henselk_core::presburger::AtomKind::Cong(m) => Q::Cong(cs, c, m as i64),
                }
            }
            Formula::Not(a) => Q::Not(Box::new(Q::compile(a))),
            Formula::And(fs) => Q::And(fs.iter().map(Q::compile).collect()),
            Formula::Or(fs) => Q::Or(fs.iter().map(Q::compile).collect()),
            Formula::Exists(..) | Formula::Forall(..) => {
                panic!("quantifier left after elimination")
            }
        }
    }
}

/// Random formula over the free variables `0..free` and the bound
/// variables in `bound`, using at most `quants` further quantifiers.
fn random_q(
    rng: &mut ChaCha8Rng,
    free: usize,
    bound: &[usize],
    quants: &mut usize,
    depth: u32,
) -> Q {
    let atom = |rng: &mut ChaCha8Rng| {
        let mut cs = vec![0i64; 6];
        for i in (0..free).chain(bound.iter().copied()) {
            cs[i] = rng.gen_range(-5..=5);
        }
        let k = rng.gen_range(-10..=10);
        match rng.gen_range(0..3) {
            0 => Q::Le(cs, k),
            1 => Q::Eq(cs, k),
            _ => Q::Cong(cs, k, rng.gen_range(2..=5)),
        }
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return atom(rng);
    }
    let sub =
        |rng: &mut ChaCha8Rng, quants: &mut usize| random_q(rng, free, bound, quants, depth - 1);
    match rng.gen_range(0..5) {
        0 => Q::Not(Box::new(sub(rng, quants))),
        1 => Q::And(vec![sub(rng, quants), sub(rng, quants)]),
        2 => Q::Or(vec![sub(rng, quants), sub(rng, quants)]),
        _ if *quants > 0 => {
            *quants -= 1;
            let v = 5 - *quants;
            let (lo, hi) = (rng.gen_range(-3..=0), rng.gen_range(0..=3));
            let inner: Vec<usize> = bound.iter().copied().chain([v]).collect();
            let body = Box::new(random_q(rng, free, &inner, quants, depth - 1));
            if rng.gen() {
                Q::Ex(v, lo, hi, body)
            } else {
                Q::All(v, lo, hi, body)
            }
        }
        _ => atom(rng),
    }
}

fn qe_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut points: u64 = 0;
    let mut by_arity = [0usize; 4];
    for case in 0..500 {
        let n = 1 + case % 3;
        let mut quants = 3;
        let g = random_q(&mut rng, n, &[], &mut quants, 4);
        let f = g.formula();
        let e = qe(&f);
        ensure!(e.is_quantifier_free(), "case {case}: {e}");
        let fast = Q::compile(&e);
        by_arity[n] += 1;
        let mut env = [0i64; 6];
        let range = -50..=50i64;
        let c_range = if n == 3 { range.clone() } else { 0..=0 };
        let b_range = if n >= 2 { range.clone() } else { 0..=0 };
        for a in range.clone() {
            for b in b_range.clone() {
                for c in c_range.clone() {
                    env[..3].copy_from_slice(&[a, b, c]);
                    let want = g.eval(&mut env.clone());
                    if fast.eval(&mut env.clone()) != want {
                        return Err(format!("case {case} at ({a}, {b}, {c}): {f} became {e}"));
                    }
                    points += 1;
                }
            }
        }
    }
    Ok(format!(
        "500 formulas ({} / {} / {} with 1 / 2 / 3 free variables), {points} points",
        by_arity[1], by_arity[2], by_arity[3]
    ))
}

#[test]
fn criterion_4_presburger_qe() {
    report(
        4,
        "Presburger QE oracle",
        Duration::from_secs(120),
        qe_suite,
    );
}

// ---------------------------------------------------------------------------
// 5. closure points

const CELL_CORPUS: [&str; 10] = [
    "v(y) = 2*v(x) & ac(y) = 3 & v(x) >= 1",
    "v(y-(1+t)) >= 2*v(x) & v(x) >= 1",
    "v(y - t) = 3*v(x) & v(x) === 0 mod 2 & v(x) >= 2",
    "v(y - 1) <= v(x) & ac(y - 1) = 2 & v(x) >= 1",
    "v(y) >= 0 & v(x) >= 1",
    "(v(y - 2) = v(x) & v(x) === 1 mod 2) | (v(y) = 0 & v(x) <= 3)",
    "v(y - t^2) >= v(x) + 1 & ac(y - t^2) = -1 & v(x) >= 3",
    "v(y - (1 + t^3)) = inf & v(x) >= 1",
    "v(y - t) >= v(x1) + v(x2) & v(x1) >= 1 & v(x2) >= 1",
    "v(y - 1) = 5 & ac(x) = 1 & v(x) >= 1",
];

fn parse_set(src: &str) -> CellSet {
    cell_set(&parse_cond(src).unwrap()).unwrap()
}

fn val(s: &Series) -> Option<i64> {
    match s.valuation() {
        ValResult::Finite(v) => Some(v),
        _ => None,
    }
}

/// Builds a point of the disjunct with the witnessed valuations that lies
/// within `t^ν` of `(0, w)`, and checks it against the disjunct.
fn check_certificate(
    set: &CellSet,
    d: &CellCondition,
    w: &Series,
    nu: i64,
    witness: &BTreeMap<String, Int>,
) -> Result<(), String> {
    let mut env: BTreeMap<String, Int> = BTreeMap::new();
    for x in &set.x_vars {
        let k = *witness.get(&val_var(x)).ok_or("missing x valuation")? as i64;
        ensure!(k >= nu, "v({x}) = {k} below level {nu}");
        env.insert(val_var(x), k as Int);
    }
    let y = if d.y_is_center {
        d.center.clone()
    } else {
        let l = *witness.get(Y_VAL).ok_or("missing y valuation")? as i64;
        let gap = w.sub_ref(&d.center);
        let xi = d.ac.get("y").cloned().unwrap_or_else(Rational::one);
        match val(&gap) {
            Some(g) if g < nu => w.clone(),
            _ => d.center.add_ref(&Series::monomial(xi, l)),
        }
    };
    ensure!(
        y.sub_ref(w).terms().all(|(e, _)| e >= nu),
        "the point is not within t^{nu} of w"
    );
    ensure!(y.terms().all(|(e, _)| e >= 0), "y = {y} outside R");
    let z = y.sub_ref(&d.center);
    if !d.y_is_center {
        let l = val(&z).ok_or("y equals the center")?;
        ensure!(
            Some(&(l as Int)) == witness.get(Y_VAL),
            "v(y - c) = {l} differs from the witness"
        );
        if let Some(xi) = d.ac.get("y") {
            ensure!(
                &z.coeff(l) == xi,
                "ac(y - c) = {} instead of {xi}",
                z.coeff(l)
            );
        }
        env.insert(Y_VAL.to_string(), l as Int);
    }
    ensure!(
        d.val_formula.eval(&env) == Some(true),
        "the disjunct fails at {env:?}"
    );
    let pinned = Formula::and(
        std::iter::once(d.val_formula.clone()).chain(
            env.iter()
                .map(|(k, v)| Formula::eq(LinTerm::var(k), LinTerm::constant(*v))),
        ),
    );
    ensure!(
        matches!(sat(&pinned), SatResult::Sat(_)),
        "sat rejects the witness {env:?}"
    );
    Ok(())
}

/// Exhaustive search oracle for cells `v(x) >= 1 ∧ atoms(v(x), v(y - c))`.
mod boxed {
    use super::*;

    #[derive(Clone, Debug)]
    pub struct Atom {
        pub a: i64,
        pub b: i64,
        pub c: i64,
        pub parity: bool,
    }

    #[derive(Clone, Debug)]
    pub struct Cell {
        pub center: Vec<(i64, i64)>,
        pub atoms: Vec<Atom>,
        pub ac: Option<i64>,
    }

    pub const LEVELS: i64 = 16;
    const DIGITS: i64 = 12;
    const WINDOW: i64 = 24;

    impl Cell {
        pub fn random(rng: &mut ChaCha8Rng) -> Cell {
            let center = (0..4).map(|i| (i - 1, rng.gen_range(-1..=1))).collect();
            let atoms = (0..rng.gen_range(1..4))
                .map(|_| Atom {
                    a: rng.gen_range(-2..=2),
                    b: rng.gen_range(-2..=2),
                    c: rng.gen_range(-4..=4),
                    parity: rng.gen_bool(0.2),
                })
                .collect();
            let ac = [None, Some(1), Some(-1)][rng.gen_range(0..3)];
            Cell { center, atoms, ac }
        }

        fn center(&self) -> Series {
            Series::exact(self.center.iter().map(|&(e, c)| (e, int(c))))
        }

        fn holds(&self, k: i64, l: i64) -> bool {
            k >= 1
                && self.atoms.iter().all(|a| {
                    let s = a.a * k + a.b * l + a.c;
                    if a.parity {
                        s.rem_euclid(2) == 0
                    } else {
                        s >= 0
                    }
                })
        }

        pub fn set(&self) -> CellSet {
            let vx = val_var("x");
            let f = Formula::and(
                std::iter::once(Formula::ge(LinTerm::var(&vx), LinTerm::constant(1))).chain(
                    self.atoms.iter().map(|a| {
                        let t = LinTerm::from_parts(
                            [(vx.clone(), a.a as Int), (Y_VAL.to_string(), a.b as Int)],
                            a.c as Int,
                        );
                        if a.parity {
                            Formula::cong(t, LinTerm::constant(0), 2)
                        } else {
                            Formula::ge(t, LinTerm::constant(0))
                        }
                    }),
                ),
            );
            let mut d = CellCondition::new(self.center(), f);
            if let Some(xi) = self.ac {
                d = d.with_ac("y", int(xi));
            }
            CellSet::new(vec!["x".into()], vec![d]).unwrap()
        }

        /// Some `(t^k, y)` in the cell with `k >= ν` and `v(y - w) >= ν`.
        pub fn near(&self, w: &Series, nu: i64) -> bool {
            let c = self.center();
            let gap = w.sub_ref(&c);
            let high = Series::exact(
                gap.terms()
                    .filter(|(e, _)| *e >= nu)
                    .map(|(e, x)| (e, x.clone())),
            );
            let xi = int(self.ac.unwrap_or(1));
            let mut zs = vec![gap.clone()];
            for j in nu..nu + WINDOW {
                zs.push(gap.sub_ref(&high).add_ref(&Series::monomial(xi.clone(), j)));
            }
            zs.into_iter().any(|z| {
                let Some(l) = val(&z) else { return false };
                if self.ac.is_some_and(|a| z.coeff(l) != int(a)) {
                    return false;
                }
                let y = c.add_ref(&z);
                if y.terms().any(|(e, _)| e < 0) || y.sub_ref(w).terms().any(|(e, _)| e < nu) {
                    return false;
                }
                (nu.max(1)..nu.max(1) + WINDOW).any(|k| self.holds(k, l))
            })
        }

        /// Depth-first search over Laurent polynomials with support in
        /// `[0, DIGITS]` and coefficients in `{-2, …, 2}`.
        pub fn brute_force(&self) -> Option<Series> {
            fn go(cell: &Cell, digits: &mut Vec<i64>) -> Option<Series> {
                let w = Series::exact(digits.iter().enumerate().map(|(i, c)| (i as i64, int(*c))));
                let nu = digits.len() as i64;
                if !cell.near(&w, nu) {
                    return None;
                }
                if nu > DIGITS {
                    return (nu..=LEVELS).all(|m| cell.near(&w, m)).then_some(w);
                }
                for c in [0, 1, -1, 2, -2] {
                    digits.push(c);
                    let found = go(cell, digits);
                    digits.pop();
                    if found.is_some() {
                        return found;
                    }
                }
                None
            }
            let ls = match val(&self.center()) {
                Some(e) if e < 0 => e..e + 1,
                _ => 0..3 * WINDOW,
            };
            let deep = (LEVELS..LEVELS + WINDOW).any(|k| ls.clone().any(|l| self.holds(k, l)));
            if !deep {
                return None;
            }
            go(self, &mut Vec::new())
        }
    }
}

fn closure_suite() -> Result<String, String> {
    let levels = 16;
    let mut certs = 0;
    for src in CELL_CORPUS {
        let set = parse_set(src);
        let ClosureOutcome::Point(p) =
            construct_closure_point(&set, levels).map_err(|e| e.to_string())?
        else {
            return Err(format!("{src}: no closure point"));
        };
        let d = &set.disjuncts[p.disjunct];
        for nu in 0..=levels {
            let (_, witness) = p
                .certificates
                .iter()
                .find(|(m, _)| *m == nu)
                .ok_or(format!("{src}: no certificate at level {nu}"))?;
            check_certificate(&set, d, &p.w, nu, witness)
                .map_err(|e| format!("{src}, level {nu}: {e}"))?;
            certs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut agree, mut with_point) = (0, 0);
    for _ in 0..40 {
        let cell = boxed::Cell::random(&mut rng);
        let found =
            construct_closure_point(&cell.set(), boxed::LEVELS).map_err(|e| e.to_string())?;
        let brute = cell.brute_force();
        ensure!(
            matches!(found, ClosureOutcome::Point(_)) == brute.is_some(),
            "{cell:?}: construction {:?}, search {:?}",
            matches!(found, ClosureOutcome::Point(_)),
            brute.map(|w| w.to_string())
        );
        with_point += brute.is_some() as usize;
        agree += 1;
    }
    Ok(format!(
        "10 corpus sets with {certs} level certificates; {agree} boxed cells agree with search ({with_point} with a point)"
    ))
}

#[test]
fn criterion_5_closedness_certificates() {
    report(
        5,
        "closedness certificates",
        Duration::from_secs(120),
        closure_suite,
    );
}

// ---------------------------------------------------------------------------
// 6. fiber shrinking

const SHRINK_CORPUS: [&str; 10] = [
    "v(x2) = 2*v(x1) & v(x1) >= 1",
    "v(x1) === 1 mod 2 & v(x2) >= v(x1)",
    "v(x) >= 0",
    "v(x1) + v(x2) >= 5 & v(x1) >= 1 & v(x2) >= 1",
    "v(x1) >= 3 & v(x2) = v(x1) + 2 & v(x3) >= 2*v(x1)",
    "v(x1) === 0 mod 3 & v(x2) === 1 mod 2 & v(x1) >= 1 & v(x2) >= 1",
    "v(x1) <= 2*v(x2) & v(x2) <= 2*v(x1) & v(x1) >= 1",
    "(v(x1) = 1 & v(x2) >= 0) | (v(x1) = v(x2) & v(x1) >= 4)",
    "3*v(x1) = 2*v(x2) & v(x1) >= 1",
    "v(x1) - v(x2) >= 3 & v(x2) >= 1 & v(x1) === 2 mod 4",
];

fn shrink_suite() -> Result<String, String> {
    for src in SHRINK_CORPUS {
        let set = parse_set(src);
        // the set of valuation vectors, computed from the text
        let lambda =
            Formula::and(
                std::iter::once(henselk_cli::convert::formula(&parse_cond(src).unwrap()).unwrap())
                    .chain(set.x_vars.iter().map(|x| {
                        Formula::ge(LinTerm::var(&format!("v({x})")), LinTerm::constant(0))
                    })),
            );
        let ShrinkResult::Shrink { ray, .. } = fiber_shrink(&set).map_err(|e| e.to_string())?
        else {
            return Err(format!("{src}: no shrinking"));
        };
        ensure!(
            ray.direction.iter().all(|d| *d >= 1),
            "{src}: direction {:?}",
            ray.direction
        );
        let member = ray.membership_formula(&lambda);
        ensure!(
            qe(&member) == Formula::True,
            "{src}: {member} does not reduce to true"
        );
    }
    Ok("10 sets, every ray's membership formula eliminates to true".into())
}

#[test]
fn criterion_6_fiber_shrinking() {
    report(6, "fiber shrinking", Duration::from_secs(30), shrink_suite);
}

// ---------------------------------------------------------------------------
// 7. Lojasiewicz certificates

fn polyk_of(src: &str) -> PolyQ {
    henselk_cli::convert::polyk(&henselk_cli::parse_expr(src).unwrap()).unwrap()
}

/// `(s - 1)·v(f(y)) - v(g(y))` and `s·v(f(y)) - v(g(y))` at `y = r + t^m`.
fn orders(f: &PolyQ, g: &PolyQ, r: &Series, m: i64, s: u32) -> (i64, i64) {
    let head = Series::exact(
        r.terms()
            .filter(|(e, _)| *e < m)
            .map(|(e, c)| (e, c.clone())),
    );
    let y = head.add_ref(&Series::monomial(Rational::one(), m));
    let (fv, gv) = (val(&f.eval(&y)).unwrap(), val(&g.eval(&y)).unwrap());
    ((s as i64 - 1) * fv - gv, s as i64 * fv - gv)
}

fn loja_check(f: &PolyQ, g: &PolyQ, expect: Option<(u32, &str)>) -> Result<(), String> {
    let cert = loja_exponent(f, g).map_err(|e| format!("{f}, {g}: {e}"))?;
    if let Some((s, h)) = expect {
        ensure!(
            cert.s == s && cert.h_string() == h,
            "{f}, {g}: s = {}, h = {}",
            cert.s,
            cert.h_string()
        );
    }
    ensure!(
        cert.check(f, g) == Ok(true),
        "{f}, {g}: the identity f^s = h*g fails"
    );
    // f^s·h_den = h_num·g, checked independently at sample points
    let mut minimal = cert.roots.is_empty() && cert.s == 1;
    for r in &cert.roots {
        ensure!(
            r.mult_f * cert.s >= r.mult_g,
            "{f}, {g}: negative order at {}",
            r.root
        );
        let samples: Vec<(i64, i64)> = [24, 28, 32]
            .iter()
            .map(|&m| orders(f, g, &r.root, m, cert.s))
            .collect();
        ensure!(
            samples.windows(2).all(|w| w[1].1 >= w[0].1),
            "{f}, {g}: h loses order approaching {}",
            r.root
        );
        if samples.windows(2).all(|w| w[1].0 < w[0].0) && samples[2].0 < 0 {
            minimal = true;
        }
    }
    ensure!(
        minimal,
        "{f}, {g}: s - 1 = {} is not shown to fail",
        cert.s - 1
    );
    Ok(())
}

fn loja_suite() -> Result<String, String> {
    for (f, g, s, h) in [
        ("y", "y^3", 3, "1"),
        ("y^2", "y^3", 2, "y"),
        ("y*(y - t)", "y^3", 3, "y^3 - 3*t*y^2 + 3*t^2*y - t^3"),
    ] {
        loja_check(&polyk_of(f), &polyk_of(g), Some((s, h)))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 20 {
        // shared roots c·t^e with multiplicities a (in f) and b (in g)
        let k = rng.gen_range(1..=3);
        let mut f = PolyQ::new(vec![Series::constant(int(rng.gen_range(1..=3)))]);
        let mut g = PolyQ::new(vec![Series::one()]);
        let lin = |c: i64, e: i64| PolyQ::new(vec![Series::monomial(int(-c), e), Series::one()]);
        for i in 0..k {
            let (c, e) = (
                rng.gen_range(1..=3) * if rng.gen() { 1 } else { -1 },
                i as i64 + rng.gen_range(0..=1),
            );
            let (a, b) = (rng.gen_range(1..=3), rng.gen_range(0..=4));
            f = f.mul(&lin(c, e).pow(a));
            g = g.mul(&lin(c, e).pow(b));
        }
        // a root of g outside R does not matter
        if rng.gen_bool(0.3) {
            g = g.mul(&PolyQ::new(vec![Series::constant(int(-1)), Series::t()]));
        }
        if g.degree() == Some(0) {
            continue;
        }
        loja_check(&f, &g, None)?;
        done += 1;
    }
    Ok("3 worked examples and 20 random split pairs".into())
}

#[test]
fn criterion_7_loja_certificates() {
    report(
        7,
        "Lojasiewicz certificates",
        Duration::from_secs(30),
        loja_suite,
    );
}

// ---------------------------------------------------------------------------
// 8. anisotropic forms

/// Laurent polynomial over `Z`: `cs[i]` is the coefficient of `t^(lo + i)`.
#[derive(Clone)]
struct Lz {
    lo: i64,
    cs: Vec<BigInt>,
}

impl Lz {
    fn of(terms: &[(i64, i64)]) -> Lz {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(0);
        let hi = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut cs = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (e, c) in terms {
            cs[(e - lo) as usize] += *c;
        }
        Lz { lo, cs }
    }

    fn mul(&self, o: &Lz) -> Lz {
        let mut cs = vec![BigInt::zero(); self.cs.len() + o.cs.len() - 1];
        for (i, x) in self.cs.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in o.cs.iter().enumerate() {
                cs[i + j] += x * y;
            }
        }
        Lz {
            lo: self.lo + o.lo,
            cs,
        }
    }

    fn pow(&self, k: u32) -> Lz {
        (0..k).fold(Lz::of(&[(0, 1)]), |acc, _| acc.mul(self))
    }

    /// `self - t·o`.
    fn sub_t(&self, o: &Lz) -> Lz {
        let lo = self.lo.min(o.lo + 1);
        let hi = (self.lo + self.cs.len() as i64).max(o.lo + 1 + o.cs.len() as i64);
        let mut cs = vec![BigInt::zero(); (hi - lo) as usize];
        for (i, x) in self.cs.iter().enumerate() {
            cs[(self.lo - lo) as usize + i] += x;
        }
        for (i, x) in o.cs.iter().enumerate() {
            cs[(o.lo + 1 - lo) as usize + i] -= x;
        }
        Lz { lo, cs }
    }

    fn is_zero(&self) -> bool {
        self.cs.iter().all(Zero::is_zero)
    }

    fn to_series(&self) -> Series {
        Series::exact(
            self.cs
                .iter()
                .enumerate()
                .map(|(i, c)| (self.lo + i as i64, Rational::from_integer(c.clone()))),
        )
    }
}

/// `G_r` evaluated through the recursion rather than the expanded form.
fn nested_value(xs: &[Lz]) -> Lz {
    let mut g = xs[0].clone();
    let mut d = 1u32;
    for x in &xs[1..] {
        g = g.mul(&g).sub_t(&x.pow(2 * d));
        d *= 2;
    }
    g
}

fn gform_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for r in 1..=5 {
        let g = anisotropic_form(r);
        ensure!(g.check(), "G_{r}: proof check fails");
        let mut seen = 0;
        while seen < 200 {
            let xs: Vec<Vec<(i64, i64)>> = (0..r)
                .map(|_| (-3..=3).map(|e| (e, rng.gen_range(-3..=3))).collect())
                .collect();
            if xs.iter().flatten().all(|t| t.1 == 0) {
                continue;
            }
            let v = nested_value(&xs.iter().map(|x| Lz::of(x)).collect::<Vec<_>>());
            ensure!(!v.is_zero(), "G_{r} vanishes at a nonzero point");
            if seen < 10 {
                let at: Vec<Series> = xs
                    .iter()
                    .map(|x| Series::exact(x.iter().map(|&(e, c)| (e, int(c)))))
                    .collect();
                ensure!(
                    g.poly.eval(&at) == v.to_series(),
                    "G_{r}: expanded and nested forms differ"
                );
            }
            seen += 1;
        }
    }
    Ok("r = 1..5, 200 nonzero samples each".into())
}

#[test]
fn criterion_8_anisotropic_forms() {
    report(8, "anisotropic forms", Duration::from_secs(10), gform_suite);
}

// ---------------------------------------------------------------------------
// 9. command line

#[test]
fn criterion_9_cli_determinism() {
    report(
        9,
        "CLI determinism and round trip",
        Duration::from_secs(120),
        || {
            let runs = common::check_golden()?;
            let trips = common::check_round_trip()?;
            Ok(format!(
                "{runs} golden invocations byte-identical twice, {trips} round trips"
            ))
        },
    );
}
