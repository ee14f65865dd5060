use num_traits::{One, Zero};

use super::ArcError;
use crate::bivar::BivarPoly;
use crate::hensel::{primitive_part, puiseux_expand, to_qx, Limit};
use crate::ratfunc::RatFunc;
use crate::scalar::{fmt_rational, Rational, Scalar};
use crate::series::{LaurentSeries, ValResult};
use crate::upoly::{push_term, UPoly};
use crate::PolyQ;

type Series = LaurentSeries<Rational>;
type QxPoly = UPoly<RatFunc>;

/// Working precision of the roots in `R`.
const ROOT_ORDER: i64 = 48;

/// A common root `ρ ∈ R` of `f` and `g`. For `v(y - ρ) > sigma`,
/// `v(f(y)) = f_lead + mult_f·v(y - ρ)` and likewise for `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonRoot {
    pub root: Series,
    pub mult_f: u32,
    pub mult_g: u32,
    pub sigma: Rational,
    pub f_lead: i64,
    pub g_lead: i64,
}

/// `y_m = ρ + (unit)·t^m` for growing `m`: `v(f^{s-1}(y_m)) - v(g(y_m))`
/// decreases without bound, so `f^{s-1}/g` is unbounded near `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityWitness {
    pub root: usize,
    /// `(m, v(f^{s-1}(y_m)), v(g(y_m)))`.
    pub samples: Vec<(i64, i64, i64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LojaCertificate {
    pub s: u32,
    /// `h = h_num / h_den` in lowest terms over `Q(t)`, `h_den` monic.
    pub h_num: QxPoly,
    pub h_den: QxPoly,
    pub roots: Vec<CommonRoot>,
    /// Largest `v(f)` on the boundaries of the discs `v(y - ρ) > sigma`.
    pub gamma0: Option<i64>,
    pub minimality: Option<MinimalityWitness>,
}

impl LojaCertificate {
    /// `f^s·h_den = h_num·g` exactly, and `h` has nonnegative order at every
    /// common root.
    pub fn check(&self, f: &PolyQ, g: &PolyQ) -> Result<bool, ArcError> {
        let (ff, gg) = (to_qx(&to_bivar(f)?), to_qx(&to_bivar(g)?));
        let lhs = &ff.pow(self.s) * &self.h_den;
        let rhs = &self.h_num * &gg;
        let same = (&lhs - &rhs).is_zero();
        Ok(same && self.roots.iter().all(|r| self.s * r.mult_f >= r.mult_g))
    }

    pub fn h_string(&self) -> String {
        if self.h_den.degree() == Some(0) {
            return fmt_qx(&self.h_num);
        }
        format!("({}) / ({})", fmt_qx(&self.h_num), fmt_qx(&self.h_den))
    }
}

/// Renders a polynomial over `Q(t)` in `y`.
pub fn fmt_qx(p: &QxPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "y".to_string(),
            _ => format!("y^{i}"),
        };
        let coeff = if c.den().degree() == Some(0) {
            c.num().to_string_in("t")
        } else {
            format!(
                "({})/({})",
                c.num().to_string_in("t"),
                c.den().to_string_in("t")
            )
        };
        push_term(&mut out, &coeff, &mono);
    }
    out
}

/// `P(t, y)` with the powers of `t` shifted to be nonnegative.
pub(crate) fn to_bivar(p: &PolyQ) -> Result<BivarPoly, ArcError> {
    let mut terms = Vec::new();
    for (j, c) in p.coeffs().iter().enumerate() {
        if !c.is_exact() {
            return Err(ArcError::InexactCoefficients);
        }
        terms.extend(c.terms().map(|(e, x)| ((e, j as u32), x.clone())));
    }
    let b = BivarPoly::from_terms(terms);
    match b.min_x_exponent() {
        None => Err(ArcError::ZeroPolynomial),
        Some(low) => Ok(b.shift(-low, 0)),
    }
}

/// Roots of `p` in `R = Q[[t]]`.
fn roots_in_r(p: &QxPoly) -> Result<Vec<Series>, ArcError> {
    if p.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for b in puiseux_expand(&primitive_part(p), ROOT_ORDER)? {
        if b.ram_index != 1 || !matches!(b.limit, Limit::Finite(_)) {
            continue;
        }
        let Some(gamma) = b.x_scale.rational_value() else {
            continue;
        };
        let coeffs: Option<Vec<(i64, Rational)>> = b
            .series
            .terms()
            .map(|(e, c)| c.rational_value().map(|q| (e, q)))
            .collect();
        let Some(coeffs) = coeffs else { continue };
        let in_s = Series::from_terms(coeffs, b.series.precision());
        let inv = gamma.inv().expect("nonzero scale");
        out.push(in_s.substitute_monomial(&inv, 1));
    }
    Ok(out)
}

/// Order and leading valuation of `p` at `ρ`, and the `σ` beyond which the
/// leading Taylor term dominates.
fn local_data(p: &PolyQ, rho: &Series, mult: u32) -> (i64, Rational) {
    let shifted = p.taylor_shift(rho);
    let a = shifted.coeff(mult as usize);
    let lead = match a.valuation() {
        ValResult::Finite(v) => v,
        _ => panic!("leading Taylor coefficient undetermined at the working precision"),
    };
    let mut sigma: Option<Rational> = None;
    for (k, c) in shifted.coeffs().iter().enumerate().skip(mult as usize + 1) {
        let Some(low) = c.val_lower_bound() else {
            continue;
        };
        let cand = Rational::new((lead - low).into(), (k as i64 - mult as i64).into());
        sigma = Some(sigma.map_or(cand.clone(), |s| s.max(cand)));
    }
    (
        lead,
        sigma.unwrap_or_else(|| Rational::from_integer((-1).into())),
    )
}

/// The least `s >= 1` with `f^s = h·g` for an `h` continuous on `R`, when
/// every root of `g` in `R` is a root of `f`.
pub fn loja_exponent(f: &PolyQ, g: &PolyQ) -> Result<LojaCertificate, ArcError> {
    let (fb, gb) = (to_bivar(f)?, to_bivar(g)?);
    let (ff, gg) = (to_qx(&fb), to_qx(&gb));
    let sf_f: Vec<(QxPoly, u32)> = ff
        .squarefree_decomposition()
        .into_iter()
        .filter(|(p, _)| p.degree().unwrap_or(0) > 0)
        .collect();
    let mut roots = Vec::new();
    for (gi, i) in gg.squarefree_decomposition() {
        if gi.degree().unwrap_or(0) == 0 {
            continue;
        }
        let shared = gi.gcd(&ff);
        let rest = gi.div_exact(&shared).expect("gcd divides");
        if let Some(root) = roots_in_r(&rest)?.into_iter().next() {
            return Err(ArcError::HypothesisFails { root });
        }
        for (fj, j) in &sf_f {
            let d = gi.gcd(fj);
            for rho in roots_in_r(&d)? {
                let (f_lead, sf) = local_data(f, &rho, *j);
                let (g_lead, sg) = local_data(g, &rho, i);
                roots.push(CommonRoot {
                    root: rho,
                    mult_f: *j,
                    mult_g: i,
                    sigma: sf.max(sg),
                    f_lead,
                    g_lead,
                });
            }
        }
    }
    let s = roots
        .iter()
        .map(|r| r.mult_g.div_ceil(r.mult_f))
        .max()
        .unwrap_or(1)
        .max(1);
    let fs = ff.pow(s);
    let common = fs.gcd(&gg);
    let (num, den) = (
        fs.div_exact(&common).expect("gcd divides"),
        gg.div_exact(&common).expect("gcd divides"),
    );
    let lc = den.lc().inv().expect("nonzero");
    let gamma0 = roots
        .iter()
        .map(|r| {
            let edge = Rational::from_integer(r.f_lead.into())
                + r.sigma.clone() * Rational::from_integer(r.mult_f.into());
            edge.ceil()
                .to_integer()
                .try_into()
                .expect("threshold fits in i64")
        })
        .max();
    let minimality = if s > 1 {
        let k = roots
            .iter()
            .position(|r| (s - 1) * r.mult_f < r.mult_g)
            .expect("some root forces s");
        Some(witness(f, g, s - 1, k, &roots[k]))
    } else {
        None
    };
    Ok(LojaCertificate {
        s,
        h_num: num.scale(&lc),
        h_den: den.scale(&lc),
        roots,
        gamma0,
        minimality,
    })
}

fn witness(f: &PolyQ, g: &PolyQ, s: u32, index: usize, r: &CommonRoot) -> MinimalityWitness {
    let floor: i64 = r
        .sigma
        .floor()
        .to_integer()
        .try_into()
        .expect("small threshold");
    let start = (floor + 1).max(0);
    let samples = (start..start + 4)
        .map(|m| {
            let unit = r.root.coeff(m) + Rational::one();
            let y = r
                .root
                .truncate(m)
                .to_exact()
                .add_ref(&Series::monomial(unit, m));
            let vf = f.eval(&y).pow(s).valuation();
            let vg = g.eval(&y).valuation();
            match (vf, vg) {
                (ValResult::Finite(a), ValResult::Finite(b)) => (m, a, b),
                _ => panic!("sample lands on a root"),
            }
        })
        .collect();
    MinimalityWitness {
        root: index,
        samples,
    }
}

impl std::fmt::Display for CommonRoot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "root {}: mult_f = {}, mult_g = {}, sigma = {}",
            self.root,
            self.mult_f,
            self.mult_g,
            fmt_rational(&self.sigma)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn poly(cs: &[&[(i64, i64)]]) -> PolyQ {
        PolyQ::new(
            cs.iter()
                .map(|c| Series::exact(c.iter().map(|&(e, x)| (e, int(x)))))
                .collect(),
        )
    }

    fn y_pow(k: usize) -> PolyQ {
        let mut cs: Vec<&[(i64, i64)]> = vec![&[]; k];
        cs.push(&[(0, 1)]);
        poly(&cs)
    }

    #[test]
    fn power_of_y() {
        let c = loja_exponent(&y_pow(1), &y_pow(3)).unwrap();
        assert_eq!(c.s, 3);
        assert_eq!(c.h_string(), "1");
        assert!(c.check(&y_pow(1), &y_pow(3)).unwrap());
        let w = c.minimality.unwrap();
        let diffs: Vec<i64> = w.samples.iter().map(|(_, a, b)| a - b).collect();
        assert!(diffs.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn square_over_cube() {
        let c = loja_exponent(&y_pow(2), &y_pow(3)).unwrap();
        assert_eq!(c.s, 2);
        assert_eq!(c.h_string(), "y");
    }

    #[test]
    fn extra_root_of_f() {
        let f = poly(&[&[], &[(1, -1)], &[(0, 1)]]);
        let c = loja_exponent(&f, &y_pow(3)).unwrap();
        assert_eq!(c.s, 3);
        assert_eq!(c.h_string(), "y^3 - 3*t*y^2 + 3*t^2*y - t^3");
        assert_eq!(c.roots.len(), 1);
        assert!(c.check(&f, &y_pow(3)).unwrap());
    }

    #[test]
    fn root_of_g_only() {
        let g = poly(&[&[(1, -1)], &[(0, 1)]]);
        match loja_exponent(&y_pow(1), &g) {
            Err(ArcError::HypothesisFails { root }) => assert_eq!(root, Series::t()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn roots_outside_r_do_not_count() {
        // g = t·y - 1 has its root 1/t outside R
        let g = poly(&[&[(0, -1)], &[(1, 1)]]);
        let c = loja_exponent(&y_pow(1), &g).unwrap();
        assert_eq!(c.s, 1);
        assert!(c.roots.is_empty());
    }
}
