//! Decision procedures on top of quantifier elimination: satisfiability with
//! witnesses, extrema of linear objectives and semi-line extraction.

use std::collections::{BTreeMap, BTreeSet};

use super::cooper::qe;
use super::formula::{fresh_name, AtomKind, Formula};
use super::term::{checked, Int, LinTerm};

pub type Point = BTreeMap<String, Int>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Unsat,
    Sat(Point),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

/// Candidates for a one-variable quantifier-free formula in the order
/// smallest `|v|` first, positive before negative: every point within one
/// period of zero or of a place where some atom changes truth value. The
/// truth pattern between consecutive such places is periodic with period
/// `lcm` of the moduli, so the first satisfying candidate is the least one in
/// that order.
fn candidates(f: &Formula, x: &str) -> Vec<Int> {
    let period = f.moduli_lcm();
    let mut centers = vec![0];
    f.visit_atoms(&mut |a| {
        let c = a.term.coeff(x);
        if c != 0 && !matches!(a.kind, AtomKind::Cong(_)) {
            let r = -a.term.constant_term();
            centers.push(r.div_euclid(c));
            centers.push(r.div_euclid(c) + 1);
        }
    });
    let mut out: BTreeSet<Int> = BTreeSet::new();
    for c in centers {
        for d in -(period + 1)..=(period + 1) {
            out.insert(checked(c.checked_add(d)));
        }
    }
    let mut v: Vec<Int> = out.into_iter().collect();
    v.sort_by_key(|&a| (a.abs(), a < 0));
    v
}

/// Least satisfying value of a quantifier-free formula in one variable.
fn solve_univariate(f: &Formula, x: &str) -> Option<Int> {
    let mut env = Point::new();
    candidates(f, x).into_iter().find(|&c| {
        env.insert(x.to_string(), c);
        f.eval(&env).expect("formula in one variable")
    })
}

/// Satisfiability over `Z`. Variables are fixed in lexicographic order, each
/// to the value of least absolute value (positive first) that extends to a
/// full solution.
pub fn sat(f: &Formula) -> SatResult {
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    let mut point = Point::new();
    for (i, v) in vars.iter().enumerate() {
        let rest = &vars[i + 1..];
        let proj = qe(&Formula::exists_all(rest, f.instantiate(&point)));
        match proj {
            Formula::False => return SatResult::Unsat,
            _ => match solve_univariate(&proj, v) {
                Some(val) => {
                    point.insert(v.clone(), val);
                }
                None => return SatResult::Unsat,
            },
        }
    }
    if vars.is_empty() && qe(f) != Formula::True {
        return SatResult::Unsat;
    }
    SatResult::Sat(point)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Sup,
    Inf,
}

/// A line `base + r·step·direction`, `r ∈ N`, inside a set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub base: Vec<Int>,
    pub direction: Vec<Int>,
    pub step: Int,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extremum {
    Empty,
    Finite {
        value: Int,
        witness: Point,
    },
    /// Along `certificate` (when the bounded search finds one) the objective
    /// moves strictly in the requested direction.
    Unbounded {
        certificate: Option<Line>,
        vars: Vec<String>,
    },
}

/// `sup` or `inf` of a linear objective over the solutions of `f`.
pub fn extremum(f: &Formula, objective: &LinTerm, mode: Direction) -> Extremum {
    let mut used = f.all_vars();
    used.extend(objective.vars().map(str::to_string));
    let z = fresh_name("z", &used);
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    let body = Formula::and([f.clone(), Formula::eq(LinTerm::var(&z), objective.clone())]);
    let proj = qe(&Formula::exists_all(&vars, body));
    if proj == Formula::False {
        return Extremum::Empty;
    }
    let cands = candidates(&proj, &z);
    let mut env = Point::new();
    let mut holds = |c: Int| {
        env.insert(z.clone(), c);
        proj.eval(&env).expect("one variable")
    };
    let (Some(&lo), Some(&hi)) = (cands.iter().min(), cands.iter().max()) else {
        return Extremum::Empty;
    };
    // Past the outermost threshold the pattern is periodic: a hit within one
    // period there means the objective is unbounded in that direction.
    let period = proj.moduli_lcm();
    let tail = match mode {
        Direction::Sup => (hi - period)..=hi,
        Direction::Inf => lo..=(lo + period),
    };
    if tail.into_iter().any(&mut holds) {
        let cert = unbounded_certificate(f, &vars, objective, mode);
        return Extremum::Unbounded {
            certificate: cert,
            vars,
        };
    }
    let mut sorted = cands.clone();
    sorted.sort();
    if mode == Direction::Sup {
        sorted.reverse();
    }
    let Some(value) = sorted.into_iter().find(|&c| holds(c)) else {
        return Extremum::Empty;
    };
    let fixed = Formula::and([
        f.clone(),
        Formula::eq(objective.clone(), LinTerm::constant(value)),
    ]);
    match sat(&fixed) {
        SatResult::Sat(witness) => Extremum::Finite { value, witness },
        SatResult::Unsat => unreachable!("the projection says the value is attained"),
    }
}

fn mode_sign(mode: Direction) -> Int {
    match mode {
        Direction::Sup => 1,
        Direction::Inf => -1,
    }
}

/// Largest entry bound for searched directions.
pub const DIRECTION_BOUND: Int = 8;

/// Primitive integer vectors with entries in `[lo, DIRECTION_BOUND]`, ordered
/// by 1-norm and then lexicographically.
fn directions(n: usize, lo: Int) -> Vec<Vec<Int>> {
    let mut out: Vec<Vec<Int>> = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=DIRECTION_BOUND).map(move |e| {
                    let mut q = p.clone();
                    q.push(e);
                    q
                })
            })
            .collect();
    }
    out.retain(|d| {
        d.iter().any(|&e| e != 0) && d.iter().fold(0, |g, &e| super::term::gcd(g, e)) == 1
    });
    out.sort_by_key(|d| (d.iter().map(|e| e.abs()).sum::<Int>(), d.clone()));
    out
}

/// `∀r ≥ 0: f(v + r·step·dir)` as a formula in the variables `vars` (which
/// then play the role of the base point).
pub fn line_membership(f: &Formula, vars: &[String], dir: &[Int], step: Int) -> Formula {
    let mut used = f.all_vars();
    used.extend(vars.iter().cloned());
    let r = fresh_name("r", &used);
    let shifted = vars.iter().zip(dir).fold(f.clone(), |acc, (v, &d)| {
        acc.substitute(
            v,
            &LinTerm::var(v).add(&LinTerm::monomial(&r, checked(d.checked_mul(step)))),
        )
    });
    Formula::forall(
        &r,
        Formula::implies(Formula::ge(LinTerm::var(&r), LinTerm::constant(0)), shifted),
    )
}

fn search_line(
    f: &Formula,
    vars: &[String],
    dirs: Vec<Vec<Int>>,
    extra: impl Fn(&[Int]) -> bool,
) -> Option<Line> {
    let step = super::term::lcm(qe(f).moduli_lcm(), f.moduli_lcm());
    for dir in dirs {
        if !extra(&dir) {
            continue;
        }
        let member = line_membership(f, vars, &dir, step);
        if let SatResult::Sat(p) = sat(&member) {
            let base: Vec<Int> = vars
                .iter()
                .map(|v| p.get(v).copied().unwrap_or(0))
                .collect();
            let check = member.instantiate(&p);
            if qe(&check) == Formula::True {
                return Some(Line {
                    base,
                    direction: dir,
                    step,
                });
            }
        }
    }
    None
}

fn unbounded_certificate(
    f: &Formula,
    vars: &[String],
    objective: &LinTerm,
    mode: Direction,
) -> Option<Line> {
    let dirs = directions(vars.len(), -DIRECTION_BOUND);
    let obj: Vec<Int> = vars.iter().map(|v| objective.coeff(v)).collect();
    search_line(f, vars, dirs, |d| {
        let slope: Int = d.iter().zip(&obj).map(|(a, b)| a * b).sum();
        slope * mode_sign(mode) > 0
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub vars: Vec<String>,
    pub base: Vec<Int>,
    pub direction: Vec<Int>,
    pub step: Int,
}

impl Ray {
    /// `∀r ≥ 0: f(base + r·step·direction)` with the base substituted.
    pub fn membership_formula(&self, f: &Formula) -> Formula {
        let member = line_membership(f, &self.vars, &self.direction, self.step);
        let env: Point = self
            .vars
            .iter()
            .cloned()
            .zip(self.base.iter().copied())
            .collect();
        member.instantiate(&env)
    }

    pub fn point(&self, r: Int) -> Vec<Int> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, d)| b + r * self.step * d)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RayResult {
    Ray(Ray),
    /// No ray with direction entries in `[1, bound]` lies in the set.
    NoRay {
        bound: Int,
    },
}

/// A semi-line with strictly positive direction inside the set defined by
/// `f`, whose free variables are taken in lexicographic order.
pub fn find_ray(f: &Formula) -> RayResult {
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    find_ray_in(f, &vars)
}

/// As [`find_ray`] with an explicit coordinate order; variables of `vars`
/// not occurring in `f` are unconstrained.
pub fn find_ray_in(f: &Formula, vars: &[String]) -> RayResult {
    let bound = DIRECTION_BOUND;
    match search_line(f, vars, directions(vars.len(), 1), |_| true) {
        Some(l) => RayResult::Ray(Ray {
            vars: vars.to_vec(),
            base: l.base,
            direction: l.direction,
            step: l.step,
        }),
        None => RayResult::NoRay { bound },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> LinTerm {
        LinTerm::var(n)
    }

    fn k(c: Int) -> LinTerm {
        LinTerm::constant(c)
    }

    #[test]
    fn sat_examples() {
        let f = Formula::and([Formula::gt(v("k"), k(0)), Formula::lt(v("k"), k(1))]);
        assert_eq!(sat(&f), SatResult::Unsat);
        let g = Formula::and([Formula::cong(v("k"), k(2), 5), Formula::ge(v("k"), k(100))]);
        assert_eq!(sat(&g), SatResult::Sat(Point::from([("k".into(), 102)])));
        assert_eq!(sat(&Formula::True), SatResult::Sat(Point::new()));
    }

    #[test]
    fn witnesses_prefer_small_positive_values() {
        let f = Formula::or([Formula::eq(v("x"), k(-3)), Formula::eq(v("x"), k(3))]);
        assert_eq!(sat(&f), SatResult::Sat(Point::from([("x".into(), 3)])));
    }

    #[test]
    fn extremum_examples() {
        let f = Formula::and([Formula::cong(v("k"), k(1), 3), Formula::le(v("k"), k(10))]);
        assert!(matches!(
            extremum(&f, &v("k"), Direction::Sup),
            Extremum::Finite { value: 10, .. }
        ));
        let g = Formula::cong(v("k"), k(1), 3);
        match extremum(&g, &v("k"), Direction::Sup) {
            Extremum::Unbounded {
                certificate: Some(l),
                ..
            } => {
                assert_eq!(l.direction, vec![1]);
                assert_eq!(l.step, 3);
            }
            other => panic!("{other:?}"),
        }
        let h = Formula::and([Formula::gt(v("k"), k(5)), Formula::cong(v("k"), k(0), 4)]);
        assert!(matches!(
            extremum(&h, &v("k"), Direction::Inf),
            Extremum::Finite { value: 8, .. }
        ));
        assert_eq!(
            extremum(&Formula::False, &v("k"), Direction::Inf),
            Extremum::Empty
        );
    }

    #[test]
    fn ray_examples() {
        let f = Formula::and([
            Formula::eq(v("k2"), v("k1").scale(2)),
            Formula::cong(v("k1"), k(0), 3),
        ]);
        match find_ray(&f) {
            RayResult::Ray(r) => {
                assert_eq!(
                    (r.base.clone(), r.direction.clone(), r.step),
                    (vec![0, 0], vec![1, 2], 3)
                );
                assert_eq!(qe(&r.membership_formula(&f)), Formula::True);
            }
            other => panic!("{other:?}"),
        }
        match find_ray(&Formula::ge(v("k"), k(7))) {
            RayResult::Ray(r) => assert_eq!((r.base, r.direction, r.step), (vec![7], vec![1], 1)),
            other => panic!("{other:?}"),
        }
        let g = Formula::eq(v("k1").add(&v("k2")), k(0));
        assert!(matches!(find_ray(&g), RayResult::NoRay { .. }));
    }
}
