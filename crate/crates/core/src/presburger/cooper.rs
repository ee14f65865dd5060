//! Cooper's quantifier elimination for Presburger arithmetic.

use std::collections::BTreeSet;

use super::formula::{simplify, Atom, AtomKind, Formula};
use super::term::{checked, lcm, Int, LinTerm};

/// Equivalent quantifier-free formula, in normalized form.
pub fn qe(f: &Formula) -> Formula {
    simplify(&elim(&f.alpha_normalize().nnf()))
}

fn elim(f: &Formula) -> Formula {
    match f {
        Formula::Exists(x, body) => simplify(&exists(x, &elim(body))),
        Formula::Forall(x, body) => {
            let inner = elim(body).negate_nnf();
            simplify(&simplify(&exists(x, &simplify(&inner))).negate_nnf())
        }
        Formula::And(gs) => simplify(&Formula::And(gs.iter().map(elim).collect())),
        Formula::Or(gs) => simplify(&Formula::Or(gs.iter().map(elim).collect())),
        other => simplify(other),
    }
}

fn mentions(f: &Formula, x: &str) -> bool {
    let mut hit = false;
    f.visit_atoms(&mut |a| hit |= a.term.coeff(x) != 0);
    hit
}

/// Eliminates `∃x` from a quantifier-free NNF formula.
fn exists(x: &str, f: &Formula) -> Formula {
    if !mentions(f, x) {
        return f.clone();
    }
    if let Formula::Or(gs) = f {
        return Formula::Or(gs.iter().map(|g| simplify(&exists(x, g))).collect());
    }
    if let Formula::And(gs) = flatten_and(f.clone()) {
        let (inner, mut outer): (Vec<Formula>, Vec<Formula>) =
            gs.into_iter().partition(|g| mentions(g, x));
        if !outer.is_empty() {
            outer.push(exists(x, &Formula::And(inner)));
            return Formula::And(outer);
        }
    }
    let (g, l) = unit_coefficients(x, f);
    let g = if l > 1 {
        Formula::And(vec![g, Formula::Atom(Atom::cong(LinTerm::var(x), l))])
    } else {
        g
    };
    let g = flatten_and(g);
    if let Some(t) = top_level_equality(x, &g) {
        return simplify(&substitute_unit(x, &g, &t));
    }
    if let Some((lo, hi)) = constant_range(x, f) {
        let mut b = Bounds {
            delta: 1,
            ..Bounds::default()
        };
        collect_bounds(x, &g, &mut b);
        let tests = (b.lower.len().min(b.upper.len()) as Int + 1).saturating_mul(b.delta);
        if hi < lo {
            return Formula::False;
        }
        if hi - lo < tests {
            return Formula::Or(
                (lo..=hi)
                    .map(|c| {
                        simplify(&map_literals(f, &|a| Atom {
                            kind: a.kind,
                            term: a.term.substitute(x, &LinTerm::constant(c)),
                        }))
                    })
                    .collect(),
            );
        }
    }
    cooper(x, &g)
}

/// Bounds `lo <= x <= hi` with constant `lo`, `hi` among the top-level
/// conjuncts of `f`.
fn constant_range(x: &str, f: &Formula) -> Option<(Int, Int)> {
    let conjuncts: &[Formula] = match f {
        Formula::And(gs) => gs,
        other => std::slice::from_ref(other),
    };
    let (mut lo, mut hi) = (None::<Int>, None::<Int>);
    for g in conjuncts {
        let Formula::Atom(a) = g else { continue };
        let c = a.term.coeff(x);
        if a.kind != AtomKind::Le || c == 0 || a.term.coeffs().len() != 1 {
            continue;
        }
        // c·x + k <= 0
        let k = a.term.constant_term();
        if c > 0 {
            let b = (-k).div_euclid(c);
            hi = Some(hi.map_or(b, |h| h.min(b)));
        } else {
            let b = -((-k).div_euclid(-c));
            lo = Some(lo.map_or(b, |l| l.max(b)));
        }
    }
    Some((lo?, hi?))
}

fn flatten_and(f: Formula) -> Formula {
    match f {
        Formula::And(gs) => {
            let mut out = Vec::new();
            for g in gs {
                match flatten_and(g) {
                    Formula::And(hs) => out.extend(hs),
                    h => out.push(h),
                }
            }
            Formula::And(out)
        }
        other => other,
    }
}

/// Scales every literal mentioning `x` so that the coefficient of `x` is `±l`
/// and then replaces `l·x` by `x`. Returns the new formula and `l`.
fn unit_coefficients(x: &str, f: &Formula) -> (Formula, Int) {
    let mut l = 1;
    f.visit_atoms(&mut |a| {
        let c = a.term.coeff(x);
        if c != 0 {
            l = lcm(l, c);
        }
    });
    (map_literals(f, &|a| scale_atom(x, a, l)), l)
}

fn scale_atom(x: &str, a: &Atom, l: Int) -> Atom {
    let c = a.term.coeff(x);
    if c == 0 {
        return a.clone();
    }
    let k = l / c.abs();
    let term = a.term.scale(k).with_coeff(x, c.signum());
    let kind = match a.kind {
        AtomKind::Cong(m) => AtomKind::Cong(checked(m.checked_mul(k))),
        other => other,
    };
    Atom { kind, term }
}

fn map_literals(f: &Formula, g: &impl Fn(&Atom) -> Atom) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(g(a)),
        Formula::Not(h) => Formula::not(map_literals(h, g)),
        Formula::And(hs) => Formula::And(hs.iter().map(|h| map_literals(h, g)).collect()),
        Formula::Or(hs) => Formula::Or(hs.iter().map(|h| map_literals(h, g)).collect()),
        other => other.clone(),
    }
}

/// If a top-level conjunct is `±x + s = 0`, the value of `x` it forces.
fn top_level_equality(x: &str, f: &Formula) -> Option<LinTerm> {
    let conjuncts: &[Formula] = match f {
        Formula::And(gs) => gs,
        other => std::slice::from_ref(other),
    };
    conjuncts.iter().find_map(|g| match g {
        Formula::Atom(a) if a.kind == AtomKind::Eq && a.term.coeff(x) != 0 => {
            let c = a.term.coeff(x);
            Some(a.term.without(x).scale(-c))
        }
        _ => None,
    })
}

/// Substitutes `x := t` in a formula where `x` has coefficient `±1`.
fn substitute_unit(x: &str, f: &Formula, t: &LinTerm) -> Formula {
    map_literals(f, &|a| Atom {
        kind: a.kind,
        term: a.term.substitute(x, t),
    })
}

#[derive(Default)]
struct Bounds {
    lower: BTreeSet<LinTerm>,
    upper: BTreeSet<LinTerm>,
    delta: Int,
}

fn collect_bounds(x: &str, f: &Formula, b: &mut Bounds) {
    match f {
        Formula::Atom(a) => {
            let c = a.term.coeff(x);
            if c == 0 {
                return;
            }
            // with c = ±1: the literal is c·x + s ⋈ 0
            let s = a.term.without(x);
            match a.kind {
                AtomKind::Le if c < 0 => {
                    // x >= s, i.e. x > s - 1
                    b.lower.insert(s.add_constant(-1));
                }
                AtomKind::Le => {
                    // x <= -s, i.e. x < -s + 1
                    b.upper.insert(s.scale(-1).add_constant(1));
                }
                AtomKind::Eq => {
                    let v = s.scale(-c);
                    b.lower.insert(v.add_constant(-1));
                    b.upper.insert(v.add_constant(1));
                }
                AtomKind::Cong(m) => b.delta = lcm(b.delta, m),
            }
        }
        Formula::Not(h) => collect_bounds(x, h, b),
        Formula::And(hs) | Formula::Or(hs) => hs.iter().for_each(|h| collect_bounds(x, h, b)),
        _ => {}
    }
}

/// The formula at `x → -∞` (`minus = true`) or `x → +∞`: bounds on `x` become
/// constants, congruences stay.
fn at_infinity(x: &str, f: &Formula, minus: bool) -> Formula {
    match f {
        Formula::Atom(a) => {
            let c = a.term.coeff(x);
            if c == 0 {
                return f.clone();
            }
            match a.kind {
                AtomKind::Le => {
                    // upper bound (c > 0) holds at -∞
                    if (c > 0) == minus {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                AtomKind::Eq => Formula::False,
                AtomKind::Cong(_) => f.clone(),
            }
        }
        Formula::Not(h) => Formula::not(at_infinity(x, h, minus)),
        Formula::And(hs) => Formula::And(hs.iter().map(|h| at_infinity(x, h, minus)).collect()),
        Formula::Or(hs) => Formula::Or(hs.iter().map(|h| at_infinity(x, h, minus)).collect()),
        other => other.clone(),
    }
}

fn cooper(x: &str, f: &Formula) -> Formula {
    let mut b = Bounds {
        delta: 1,
        ..Bounds::default()
    };
    collect_bounds(x, f, &mut b);
    let minus = b.lower.len() <= b.upper.len();
    let (points, sign) = if minus { (&b.lower, 1) } else { (&b.upper, -1) };
    let inf = simplify(&at_infinity(x, f, minus));
    let mut out = Vec::new();
    let inf_has_x = mentions(&inf, x);
    for j in 1..=b.delta {
        if !inf_has_x && j > 1 {
            break;
        }
        let d = simplify(&substitute_unit(x, &inf, &LinTerm::constant(sign * j)));
        if d == Formula::True {
            return Formula::True;
        }
        out.push(d);
    }
    for p in points {
        for j in 1..=b.delta {
            let d = simplify(&substitute_unit(x, f, &p.add_constant(sign * j)));
            if d == Formula::True {
                return Formula::True;
            }
            out.push(d);
        }
    }
    Formula::Or(out)
}
