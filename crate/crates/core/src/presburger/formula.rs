use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::term::{checked, gcd, Int, LinTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    /// `term <= 0`
    Le,
    /// `term = 0`
    Eq,
    /// `term ≡ 0 (mod m)`, `m >= 2`
    Cong(Int),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub kind: AtomKind,
    pub term: LinTerm,
}

impl Atom {
    pub fn le(term: LinTerm) -> Self {
        Atom {
            kind: AtomKind::Le,
            term,
        }
    }

    pub fn eq(term: LinTerm) -> Self {
        Atom {
            kind: AtomKind::Eq,
            term,
        }
    }

    pub fn cong(term: LinTerm, m: Int) -> Self {
        assert!(m >= 1, "congruence modulus must be positive");
        Atom {
            kind: AtomKind::Cong(m),
            term,
        }
    }

    pub fn eval(&self, env: &BTreeMap<String, Int>) -> Option<bool> {
        let v = self.term.eval(env)?;
        Some(match self.kind {
            AtomKind::Le => v <= 0,
            AtomKind::Eq => v == 0,
            AtomKind::Cong(m) => v.rem_euclid(m) == 0,
        })
    }

    /// Canonical form of the atom, or a truth value when it is decided.
    pub fn normalize(&self) -> Result<Atom, bool> {
        let t = &self.term;
        let g = t.content();
        let c = t.constant_term();
        match self.kind {
            AtomKind::Le => {
                if g == 0 {
                    return Err(c <= 0);
                }
                let ceil = -((-c).div_euclid(g));
                Ok(Atom::le(divide_vars(t, g).add_constant(ceil)))
            }
            AtomKind::Eq => {
                if g == 0 {
                    return Err(c == 0);
                }
                if c % g != 0 {
                    return Err(false);
                }
                let mut t = divide_vars(t, g).add_constant(c / g);
                if t.coeffs().values().next().is_some_and(|&a| a < 0) {
                    t = t.scale(-1);
                }
                Ok(Atom::eq(t))
            }
            AtomKind::Cong(m) => normalize_cong(t, m),
        }
    }
}

fn divide_vars(t: &LinTerm, g: Int) -> LinTerm {
    LinTerm::from_parts(t.coeffs().iter().map(|(v, c)| (v.clone(), c / g)), 0)
}

fn reduce_mod(t: &LinTerm, m: Int) -> LinTerm {
    LinTerm::from_parts(
        t.coeffs().iter().map(|(v, c)| (v.clone(), c.rem_euclid(m))),
        t.constant_term().rem_euclid(m),
    )
}

fn inverse_mod(a: Int, m: Int) -> Option<Int> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1 as Int, 0 as Int);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

fn normalize_cong(t: &LinTerm, m: Int) -> Result<Atom, bool> {
    if m == 1 {
        return Err(true);
    }
    let mut t = reduce_mod(t, m);
    let mut m = m;
    if t.is_constant() {
        return Err(t.constant_term() == 0);
    }
    let d = gcd(t.content(), m);
    if t.constant_term() % d != 0 {
        return Err(false);
    }
    if d > 1 {
        t = LinTerm::from_parts(
            t.coeffs().iter().map(|(v, c)| (v.clone(), c / d)),
            t.constant_term() / d,
        );
        m /= d;
        if m == 1 {
            return Err(true);
        }
    }
    let lead = *t.coeffs().values().next().expect("nonconstant");
    if let Some(u) = inverse_mod(lead, m) {
        t = reduce_mod(&t.scale(u), m);
    }
    Ok(Atom::cong(t, m))
}

/// First-order formula over `(Z, +, <, ≡_m)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }

    /// `lhs <= rhs`
    pub fn le(lhs: LinTerm, rhs: LinTerm) -> Self {
        Formula::Atom(Atom::le(lhs.sub(&rhs)))
    }

    /// `lhs < rhs`
    pub fn lt(lhs: LinTerm, rhs: LinTerm) -> Self {
        Formula::Atom(Atom::le(lhs.sub(&rhs).add_constant(1)))
    }

    pub fn ge(lhs: LinTerm, rhs: LinTerm) -> Self {
        Self::le(rhs, lhs)
    }

    pub fn gt(lhs: LinTerm, rhs: LinTerm) -> Self {
        Self::lt(rhs, lhs)
    }

    pub fn eq(lhs: LinTerm, rhs: LinTerm) -> Self {
        Formula::Atom(Atom::eq(lhs.sub(&rhs)))
    }

    /// `lhs ≡ rhs (mod m)`
    pub fn cong(lhs: LinTerm, rhs: LinTerm, m: Int) -> Self {
        Formula::Atom(Atom::cong(lhs.sub(&rhs), m))
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Self {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or([Formula::not(a), b])
    }

    pub fn exists(v: &str, body: Formula) -> Self {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Self {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists_all(vars: &[String], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for v in a.term.vars() {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.to_string());
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| a.term.collect_vars(&mut out));
        self.visit_binders(&mut |v| {
            out.insert(v.to_string());
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
        }
    }

    fn visit_binders(&self, f: &mut impl FnMut(&str)) {
        match self {
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                f(v);
                g.visit_binders(f);
            }
            Formula::Not(g) => g.visit_binders(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_binders(f)),
            _ => {}
        }
    }

    /// Least common multiple of all congruence moduli (1 if there are none).
    pub fn moduli_lcm(&self) -> Int {
        let mut l = 1;
        self.visit_atoms(&mut |a| {
            if let AtomKind::Cong(m) = a.kind {
                l = super::term::lcm(l, m);
            }
        });
        l
    }

    /// Substitutes a term for a free variable. The term's variables must not
    /// be bound inside `self`; callers use fresh names to guarantee this.
    pub fn substitute(&self, v: &str, by: &LinTerm) -> Formula {
        self.map_terms(v, &|t| t.substitute(v, by))
    }

    pub fn rename(&self, from: &str, to: &str) -> Formula {
        self.substitute(from, &LinTerm::var(to))
    }

    fn map_terms(&self, v: &str, f: &impl Fn(&LinTerm) -> LinTerm) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(Atom {
                kind: a.kind,
                term: f(&a.term),
            }),
            Formula::Not(g) => Formula::not(g.map_terms(v, f)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.map_terms(v, f)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.map_terms(v, f)).collect()),
            Formula::Exists(b, _) | Formula::Forall(b, _) if b == v => self.clone(),
            Formula::Exists(b, g) => Formula::exists(b, g.map_terms(v, f)),
            Formula::Forall(b, g) => Formula::forall(b, g.map_terms(v, f)),
        }
    }

    /// Assigns values to some free variables.
    pub fn instantiate(&self, env: &BTreeMap<String, Int>) -> Formula {
        env.iter().fold(self.clone(), |acc, (v, &x)| {
            acc.substitute(v, &LinTerm::constant(x))
        })
    }

    /// Truth value of a quantifier-free formula; `None` if a variable is
    /// unassigned or the formula has quantifiers.
    pub fn eval(&self, env: &BTreeMap<String, Int>) -> Option<bool> {
        Some(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => a.eval(env)?,
            Formula::Not(f) => !f.eval(env)?,
            Formula::And(fs) => {
                let mut acc = true;
                for f in fs {
                    acc &= f.eval(env)?;
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = false;
                for f in fs {
                    acc |= f.eval(env)?;
                }
                acc
            }
            Formula::Exists(..) | Formula::Forall(..) => return None,
        })
    }

    /// Renames bound variables so that they differ from every free variable
    /// and from each other.
    pub fn alpha_normalize(&self) -> Formula {
        let mut used = self.free_vars();
        self.alpha_inner(&mut used)
    }

    fn alpha_inner(&self, used: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let fresh = fresh_name(v, used);
                used.insert(fresh.clone());
                let body = if &fresh == v {
                    (**g).clone()
                } else {
                    g.rename(v, &fresh)
                };
                let body = body.alpha_inner(used);
                match self {
                    Formula::Exists(..) => Formula::exists(&fresh, body),
                    _ => Formula::forall(&fresh, body),
                }
            }
            Formula::Not(g) => Formula::not(g.alpha_inner(used)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.alpha_inner(used)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.alpha_inner(used)).collect()),
            _ => self.clone(),
        }
    }

    /// Negation normal form: negations only in front of congruence atoms,
    /// all atoms normalized.
    pub fn nnf(&self) -> Formula {
        nnf(self, false)
    }

    pub fn negate_nnf(&self) -> Formula {
        nnf(self, true)
    }
}

/// `base`, or `base'1`, `base'2`, ... whichever is not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}'{i}"))
        .find(|c| !used.contains(c))
        .expect("infinitely many candidates")
}

fn literal(a: &Atom, negated: bool) -> Formula {
    let a = match a.normalize() {
        Ok(a) => a,
        Err(b) => {
            return if b != negated {
                Formula::True
            } else {
                Formula::False
            }
        }
    };
    if !negated {
        return Formula::Atom(a);
    }
    match a.kind {
        AtomKind::Le => literal(&Atom::le(a.term.scale(-1).add_constant(1)), false),
        AtomKind::Eq => Formula::Or(vec![
            literal(&Atom::le(a.term.add_constant(1)), false),
            literal(&Atom::le(a.term.scale(-1).add_constant(1)), false),
        ]),
        AtomKind::Cong(_) => Formula::not(Formula::Atom(a)),
    }
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::True => {
            if neg {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if neg {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Atom(a) => literal(a, neg),
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(gs) => {
            let parts = gs.iter().map(|g| nnf(g, neg)).collect();
            if neg {
                Formula::Or(parts)
            } else {
                Formula::And(parts)
            }
        }
        Formula::Or(gs) => {
            let parts = gs.iter().map(|g| nnf(g, neg)).collect();
            if neg {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Exists(v, g) => {
            if neg {
                Formula::forall(v, nnf(g, true))
            } else {
                Formula::exists(v, nnf(g, false))
            }
        }
        Formula::Forall(v, g) => {
            if neg {
                Formula::exists(v, nnf(g, true))
            } else {
                Formula::forall(v, nnf(g, false))
            }
        }
    }
}

fn needs_parens(f: &Formula) -> bool {
    matches!(
        f,
        Formula::And(_) | Formula::Or(_) | Formula::Exists(..) | Formula::Forall(..)
    )
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.term;
        let c = t.constant_term();
        match self.kind {
            AtomKind::Le => {
                if t.is_constant() {
                    return write!(f, "{c} <= 0");
                }
                if t.coeffs().values().next().is_some_and(|&a| a < 0) {
                    write!(f, "{} >= {}", t.without_constant_neg().fmt_vars(), c)
                } else {
                    write!(f, "{} <= {}", t.fmt_vars(), -c)
                }
            }
            AtomKind::Eq => {
                if t.is_constant() {
                    return write!(f, "{c} = 0");
                }
                write!(f, "{} = {}", t.fmt_vars(), -c)
            }
            AtomKind::Cong(m) => {
                write!(f, "{} === {} mod {}", t.fmt_vars(), (-c).rem_euclid(m), m)
            }
        }
    }
}

impl LinTerm {
    fn without_constant_neg(&self) -> LinTerm {
        LinTerm::from_parts(self.coeffs().iter().map(|(v, c)| (v.clone(), -c)), 0)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                if gs.is_empty() {
                    return f.write_str(if matches!(self, Formula::And(_)) {
                        "true"
                    } else {
                        "false"
                    });
                }
                let sep = if matches!(self, Formula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    if needs_parens(g) {
                        write!(f, "({g})")?;
                    } else {
                        write!(f, "{g}")?;
                    }
                }
                Ok(())
            }
            Formula::Exists(v, g) => write!(f, "E {v}. ({g})"),
            Formula::Forall(v, g) => write!(f, "A {v}. ({g})"),
        }
    }
}

/// Bound on simplification passes; normalization reaches its fixpoint well
/// before this on every formula the tests exercise.
const MAX_PASSES: usize = 8;

/// Simplifies a quantifier-free NNF formula to a canonical form. Applying it
/// twice gives the same result as applying it once.
pub fn simplify(f: &Formula) -> Formula {
    let mut cur = simplify_once(f);
    for _ in 0..MAX_PASSES {
        let next = simplify_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn simplify_once(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => literal(a, false),
        Formula::Not(g) => match simplify_once(g) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) if matches!(a.kind, AtomKind::Cong(_)) => {
                combine(vec![Formula::not(Formula::Atom(a))], true)
            }
            Formula::Not(h) => *h,
            other => simplify_once(&other.negate_nnf()),
        },
        Formula::And(gs) => {
            let mut parts = Vec::new();
            for g in gs {
                match simplify_once(g) {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    Formula::And(hs) => parts.extend(hs),
                    h => parts.push(h),
                }
            }
            combine(parts, true)
        }
        Formula::Or(gs) => {
            let mut parts = Vec::new();
            for g in gs {
                match simplify_once(g) {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    Formula::Or(hs) => parts.extend(hs),
                    h => parts.push(h),
                }
            }
            combine(parts, false)
        }
        Formula::Exists(v, g) => Formula::exists(v, simplify_once(g)),
        Formula::Forall(v, g) => Formula::forall(v, simplify_once(g)),
    }
}

/// Merges literals of a flattened conjunction (`conj`) or disjunction:
/// keeps the tightest (resp. loosest) bound per linear form, detects
/// complementary bounds, equalities and congruence classes.
fn combine(parts: Vec<Formula>, conj: bool) -> Formula {
    // bounds: variable part -> constant c of `K + c <= 0`
    let mut bounds: BTreeMap<LinTerm, Int> = BTreeMap::new();
    let mut eqs: BTreeMap<LinTerm, BTreeSet<Int>> = BTreeMap::new();
    let mut congs: BTreeMap<(LinTerm, Int), (BTreeSet<Int>, BTreeSet<Int>)> = BTreeMap::new();
    let mut rest: Vec<Formula> = Vec::new();
    for p in parts {
        match &p {
            Formula::Atom(a) => {
                let key = a.term.add_constant(-a.term.constant_term());
                let c = a.term.constant_term();
                match a.kind {
                    AtomKind::Le => {
                        let e = bounds.entry(key).or_insert(c);
                        *e = if conj { (*e).max(c) } else { (*e).min(c) };
                    }
                    AtomKind::Eq => {
                        eqs.entry(key).or_default().insert(c);
                    }
                    AtomKind::Cong(m) => {
                        congs.entry((key, m)).or_default().0.insert(c);
                    }
                }
            }
            Formula::Not(inner) => match &**inner {
                Formula::Atom(a) => {
                    if let AtomKind::Cong(m) = a.kind {
                        let key = a.term.add_constant(-a.term.constant_term());
                        congs
                            .entry((key, m))
                            .or_default()
                            .1
                            .insert(a.term.constant_term());
                    } else {
                        rest.push(p.clone());
                    }
                }
                _ => rest.push(p.clone()),
            },
            _ => rest.push(p),
        }
    }
    let mut out: Vec<Formula> = Vec::new();
    // complementary bounds K <= -c1 and K >= c2
    let keys: Vec<LinTerm> = bounds.keys().cloned().collect();
    for k in &keys {
        let neg = k.scale(-1);
        if let (Some(&c1), Some(&c2)) = (bounds.get(k), bounds.get(&neg)) {
            if k > &neg {
                continue;
            }
            if conj {
                if c2 > -c1 {
                    return Formula::False;
                }
                if c2 == -c1 {
                    bounds.remove(k);
                    bounds.remove(&neg);
                    eqs.entry(eq_key(k)).or_default().insert(eq_const(k, c1));
                }
            } else if c2 <= checked((-c1).checked_add(1)) {
                return Formula::True;
            }
        }
    }
    for (k, cs) in &eqs {
        if conj && cs.len() > 1 {
            return Formula::False;
        }
        if conj {
            let c = *cs.iter().next().expect("nonempty");
            // the equality fixes K = -c; check and drop bounds on ±K
            for (bk, sign) in [(k.clone(), 1), (k.scale(-1), -1)] {
                if let Some(&bc) = bounds.get(&bk) {
                    if checked((-c * sign).checked_add(bc)) > 0 {
                        return Formula::False;
                    }
                    bounds.remove(&bk);
                }
            }
        }
        for c in cs {
            out.push(Formula::Atom(Atom::eq(k.add_constant(*c))));
        }
    }
    for (k, c) in bounds {
        out.push(Formula::Atom(Atom::le(k.add_constant(c))));
    }
    for ((k, m), (pos, negs)) in congs {
        let lit = |c: Int| Formula::Atom(Atom::cong(k.add_constant(c), m));
        if conj {
            if pos.len() > 1 || pos.iter().any(|c| negs.contains(c)) {
                return Formula::False;
            }
            if let Some(&c) = pos.iter().next() {
                out.push(lit(c));
                continue;
            }
            if negs.len() as Int == m {
                return Formula::False;
            }
            if negs.len() as Int == m - 1 {
                let c = (0..m).find(|c| !negs.contains(c)).expect("one class left");
                out.push(lit(c));
                continue;
            }
            out.extend(negs.into_iter().map(|c| Formula::not(lit(c))));
        } else {
            if negs.len() > 1 || pos.iter().any(|c| negs.contains(c)) {
                return Formula::True;
            }
            if let Some(&c) = negs.iter().next() {
                out.push(Formula::not(lit(c)));
                continue;
            }
            if pos.len() as Int == m {
                return Formula::True;
            }
            if pos.len() as Int == m - 1 {
                let c = (0..m).find(|c| !pos.contains(c)).expect("one class left");
                out.push(Formula::not(lit(c)));
                continue;
            }
            out.extend(pos.into_iter().map(lit));
        }
    }
    out.extend(rest);
    out.sort();
    out.dedup();
    match out.len() {
        0 => {
            if conj {
                Formula::True
            } else {
                Formula::False
            }
        }
        1 => out.pop().expect("one element"),
        _ => {
            if conj {
                Formula::And(out)
            } else {
                Formula::Or(out)
            }
        }
    }
}

/// Sign-normalized key for the equality `K + c = 0`.
fn eq_key(k: &LinTerm) -> LinTerm {
    if k.coeffs().values().next().is_some_and(|&a| a < 0) {
        k.scale(-1)
    } else {
        k.clone()
    }
}

fn eq_const(k: &LinTerm, c: Int) -> Int {
    if k.coeffs().values().next().is_some_and(|&a| a < 0) {
        -c
    } else {
        c
    }
}
