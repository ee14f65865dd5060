use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Integers of the value group. Wider than `i64` because Cooper elimination
/// multiplies coefficients by least common multiples at every level.
pub type Int = i128;

pub(crate) fn checked(x: Option<Int>) -> Int {
    x.expect("Presburger coefficient overflow")
}

pub(crate) fn gcd(a: Int, b: Int) -> Int {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: Int, b: Int) -> Int {
    if a == 0 || b == 0 {
        return 0;
    }
    checked((a / gcd(a, b)).checked_mul(b)).abs()
}

/// `Σ c_v · v + constant`, with no zero coefficient stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinTerm {
    coeffs: BTreeMap<String, Int>,
    constant: Int,
}

impl LinTerm {
    pub fn constant(c: Int) -> Self {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(name, 1)
    }

    pub fn monomial(name: &str, c: Int) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0 {
            coeffs.insert(name.to_string(), c);
        }
        LinTerm {
            coeffs,
            constant: 0,
        }
    }

    pub fn from_parts(coeffs: impl IntoIterator<Item = (String, Int)>, constant: Int) -> Self {
        let mut t = LinTerm::constant(constant);
        for (v, c) in coeffs {
            t = t.add(&LinTerm::monomial(&v, c));
        }
        t
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Int> {
        &self.coeffs
    }

    pub fn constant_term(&self) -> Int {
        self.constant
    }

    pub fn coeff(&self, v: &str) -> Int {
        self.coeffs.get(v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        out.extend(self.coeffs.keys().cloned());
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (v, c) in &other.coeffs {
            let e = coeffs.entry(v.clone()).or_insert(0);
            *e = checked(e.checked_add(*c));
            if *e == 0 {
                coeffs.remove(v);
            }
        }
        LinTerm {
            coeffs,
            constant: checked(self.constant.checked_add(other.constant)),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: Int) -> Self {
        if k == 0 {
            return LinTerm::default();
        }
        LinTerm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), checked(c.checked_mul(k))))
                .collect(),
            constant: checked(self.constant.checked_mul(k)),
        }
    }

    pub fn add_constant(&self, c: Int) -> Self {
        let mut t = self.clone();
        t.constant = checked(t.constant.checked_add(c));
        t
    }

    /// The term with the `v` part removed.
    pub fn without(&self, v: &str) -> Self {
        let mut t = self.clone();
        t.coeffs.remove(v);
        t
    }

    pub fn with_coeff(&self, v: &str, c: Int) -> Self {
        self.without(v).add(&LinTerm::monomial(v, c))
    }

    /// Replaces `v` by the term `by`.
    pub fn substitute(&self, v: &str, by: &LinTerm) -> Self {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(&c) => self.without(v).add(&by.scale(c)),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Self {
        self.substitute(from, &LinTerm::var(to))
    }

    /// Gcd of the variable coefficients (0 for a constant term).
    pub fn content(&self) -> Int {
        self.coeffs.values().fold(0, |g, c| gcd(g, *c))
    }

    pub fn eval(&self, env: &BTreeMap<String, Int>) -> Option<Int> {
        let mut acc = self.constant;
        for (v, c) in &self.coeffs {
            acc = checked(acc.checked_add(checked(c.checked_mul(*env.get(v)?))));
        }
        Some(acc)
    }

    /// Renders the variable part only, e.g. `x - 2*y`; `0` if there is none.
    pub fn fmt_vars(&self) -> String {
        let mut out = String::new();
        for (v, &c) in &self.coeffs {
            let mag = c.abs();
            let body = if mag == 1 {
                v.clone()
            } else {
                format!("{mag}*{v}")
            };
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "{}", self.constant);
        }
        f.write_str(&self.fmt_vars())?;
        match self.constant {
            0 => Ok(()),
            c if c < 0 => write!(f, " - {}", -c),
            c => write!(f, " + {c}"),
        }
    }
}
