use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Rational;
use crate::series::LaurentSeries;
use crate::upoly::{push_term, QPoly};

type Series = LaurentSeries<Rational>;

/// Polynomial in `x_1, …, x_n` with coefficients in `Q[t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly {
    pub nvars: usize,
    terms: BTreeMap<Vec<u32>, QPoly>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, QPoly)>) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            out.add_term(e, c);
        }
        out
    }

    /// `c·x_i^k`.
    pub fn monomial(nvars: usize, i: usize, k: u32, c: QPoly) -> Self {
        let mut e = vec![0; nvars];
        e[i] = k;
        Self::from_terms(nvars, [(e, c)])
    }

    fn add_term(&mut self, e: Vec<u32>, c: QPoly) {
        let sum = match self.terms.remove(&e) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(e, sum);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, QPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in the `x_i`.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn with_nvars(&self, nvars: usize) -> Self {
        assert!(nvars >= self.nvars);
        Self::from_terms(
            nvars,
            self.terms.iter().map(|(e, c)| {
                let mut e = e.clone();
                e.resize(nvars, 0);
                (e, c.clone())
            }),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&QPoly::constant(Rational::from_integer((-1).into()))))
    }

    pub fn scale(&self, c: &QPoly) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, x)| (e.clone(), x * c)),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(e, x * y);
            }
        }
        out
    }

    /// Value at a point of `K^n`.
    pub fn eval(&self, xs: &[Series]) -> Series {
        assert_eq!(xs.len(), self.nvars);
        // powers of each variable, built up from the previous one
        let mut powers: Vec<BTreeMap<u32, Series>> = vec![BTreeMap::new(); self.nvars];
        for e in self.terms.keys() {
            for (table, k) in powers.iter_mut().zip(e) {
                table.insert(*k, Series::zero());
            }
        }
        for (table, x) in powers.iter_mut().zip(xs) {
            let mut prev: Option<(u32, Series)> = None;
            for (k, slot) in table.iter_mut() {
                *slot = match &prev {
                    Some((j, p)) => p.mul_ref(&x.pow(k - j)),
                    None => x.pow(*k),
                };
                prev = Some((*k, slot.clone()));
            }
        }
        let mut acc = Series::zero();
        for (e, c) in &self.terms {
            let coeff = Series::exact(
                c.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (i as i64, q.clone())),
            );
            let term = e
                .iter()
                .zip(&powers)
                .fold(coeff, |m, (k, table)| m.mul_ref(&table[k]));
            acc = acc.add_ref(&term);
        }
        acc
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut out = String::new();
        // graded lexicographic, highest first
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for e in keys {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| match k {
                    1 => format!("x{}", i + 1),
                    _ => format!("x{}^{k}", i + 1),
                })
                .collect();
            push_term(&mut out, &self.terms[e].to_string_in("t"), &mono.join("*"));
        }
        f.write_str(&out)
    }
}

/// One level of the construction: `G_{r+1} = G_r^2 - t·x_{r+1}^{2·d_r}`.
/// The first summand has even valuation and the second odd valuation, so
/// they never cancel and `G_{r+1} = 0` forces `G_r = 0` and `x_{r+1} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityStep {
    pub level: usize,
    pub prev_degree: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropicForm {
    pub r: usize,
    pub poly: MPoly,
    /// `d_1, …, d_r`: total degrees of `G_1, …, G_r`.
    pub degrees: Vec<u32>,
    /// `G_r` written through `G_{r-1}`.
    pub nested: String,
    pub proof: Vec<ParityStep>,
}

fn t_poly() -> QPoly {
    QPoly::monomial(Rational::from_integer(1.into()), 1)
}

fn one() -> QPoly {
    QPoly::constant(Rational::from_integer(1.into()))
}

/// `G_2(a, b) = a^2 - t·b^2`: the form attached to `y^2 - t`, which has no
/// root in `K` since `v(y^2)` is even.
fn g2(a: &MPoly, b: &MPoly) -> MPoly {
    a.mul(a).sub(&b.mul(b).scale(&t_poly()))
}

/// `G_r` with `G_1 = x_1` and `G_{r+1} = G_2(G_r, x_{r+1}^{d_r})`; its only
/// zero in `K^r` is the origin.
pub fn anisotropic_form(r: usize) -> AnisotropicForm {
    assert!(r >= 1, "at least one variable");
    let mut g = MPoly::monomial(1, 0, 1, one());
    let mut nested = "x1".to_string();
    let mut degrees = vec![1];
    let mut proof = Vec::new();
    for level in 1..r {
        let d = g.degree();
        let widened = g.with_nvars(level + 1);
        let power = MPoly::monomial(level + 1, level, d, one());
        g = g2(&widened, &power);
        let base = if level == 1 {
            nested.clone()
        } else {
            format!("({nested})")
        };
        nested = format!("{base}^2 - t*x{}^{}", level + 1, 2 * d);
        degrees.push(g.degree());
        proof.push(ParityStep {
            level: level + 1,
            prev_degree: d,
        });
    }
    AnisotropicForm {
        r,
        poly: g,
        degrees,
        nested,
        proof,
    }
}

impl AnisotropicForm {
    /// Rebuilds every level from the proof steps and compares.
    pub fn check(&self) -> bool {
        let mut g = MPoly::monomial(1, 0, 1, one());
        if self.proof.len() + 1 != self.r {
            return false;
        }
        for (k, step) in self.proof.iter().enumerate() {
            let n = k + 2;
            if step.level != n || step.prev_degree != g.degree() || self.degrees[k] != g.degree() {
                return false;
            }
            let power = MPoly::monomial(n, n - 1, step.prev_degree, one());
            g = g2(&g.with_nvars(n), &power);
        }
        g == self.poly && self.degrees.last() == Some(&g.degree())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        assert_eq!(anisotropic_form(1).poly.to_string(), "x1");
        assert_eq!(anisotropic_form(2).poly.to_string(), "x1^2 - t*x2^2");
        let g3 = anisotropic_form(3);
        assert_eq!(g3.nested, "(x1^2 - t*x2^2)^2 - t*x3^4");
        assert_eq!(
            g3.poly.to_string(),
            "x1^4 - 2*t*x1^2*x2^2 + t^2*x2^4 - t*x3^4"
        );
        assert_eq!(g3.degrees, vec![1, 2, 4]);
        assert!(g3.check());
    }

    #[test]
    fn tampered_proof_fails() {
        let mut g = anisotropic_form(3);
        g.proof[1].prev_degree = 3;
        assert!(!g.check());
    }
}
