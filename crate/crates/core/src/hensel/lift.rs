use num_traits::Signed;

use super::HenselError;
use crate::numberfield::{factor_rationals, NfElement, NumberField, DEFAULT_DEGREE_CAP};
use crate::polyk::PolyK;
use crate::scalar::{Rational, Scalar};
use crate::series::{LaurentSeries, Precision};
use crate::upoly::{QPoly, UPoly};

/// Root of the integral polynomial `f` congruent to `r0` modulo `t`, known
/// modulo `t^n` (or exactly, when Newton's iteration hits an exact root).
/// The precision is capped by that of the coefficients of `f`.
pub fn newton_root<C: Scalar>(
    f: &PolyK<C>,
    r0: &C,
    n: i64,
) -> Result<LaurentSeries<C>, HenselError> {
    if f.is_zero() {
        return Err(HenselError::ZeroPolynomial);
    }
    if !f.is_integral() {
        return Err(HenselError::NotIntegral);
    }
    let fbar = f.residue();
    if !fbar.eval(r0).is_zero() {
        return Err(HenselError::NotARoot);
    }
    if fbar.derivative().eval(r0).is_zero() {
        return Err(HenselError::NotASimpleRoot);
    }
    let n = match f.precision() {
        Precision::At(p) => n.min(p),
        Precision::Exact => n,
    };
    let df = f.derivative();
    let mut y = LaurentSeries::constant(r0.clone());
    let mut prec = 1;
    let mut settled = true;
    loop {
        // a vanishing Newton correction hints at a polynomial root
        if settled && f.precision() == Precision::Exact && f.eval(&y).is_exact_zero() {
            return Ok(y);
        }
        if prec >= n {
            break;
        }
        prec = (2 * prec).min(n);
        let cut = y.with_precision(Precision::At(prec));
        let num = f.eval(&cut).truncate(prec);
        let den = df.eval(&cut).truncate(prec);
        let step = num.div_prec(&den, prec)?;
        settled = step.has_no_terms();
        y = cut.sub_ref(&step).to_exact();
    }
    Ok(y.with_precision(Precision::At(n)))
}

/// Lifts the simple residue root `r0` of `f` to a root in `Q[[t]]` known
/// modulo `t^n`.
pub fn hensel_lift(
    f: &PolyK<Rational>,
    r0: &Rational,
    n: i64,
) -> Result<LaurentSeries<Rational>, HenselError> {
    newton_root(f, r0, n)
}

/// One factor of a Hensel decomposition: monic in `y`, with residue
/// `residue_factor^multiplicity` for an irreducible `residue_factor`.
#[derive(Clone, Debug, PartialEq)]
pub struct HenselFactor {
    pub factor: PolyK<Rational>,
    pub residue_factor: QPoly,
    pub multiplicity: u32,
    /// A root of `residue_factor`: rational, or the generator of the field
    /// it defines.
    pub residue_root: NfElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HenselFactorization {
    /// The leading coefficient of the input.
    pub unit: LaurentSeries<Rational>,
    pub factors: Vec<HenselFactor>,
    /// The product is correct modulo `t^precision`, or exactly if `Exact`.
    pub precision: Precision,
}

impl HenselFactorization {
    pub fn product(&self) -> PolyK<Rational> {
        self.factors
            .iter()
            .fold(PolyK::new(vec![self.unit.clone()]), |acc, f| {
                acc.mul(&f.factor)
            })
    }
}

/// `P = unit · Π F_j` with the `F_j` monic and pairwise coprime modulo `t`,
/// one for each irreducible factor of the residue of `P / lc(P)`.
pub fn hensel_decompose(p: &PolyK<Rational>, n: i64) -> Result<HenselFactorization, HenselError> {
    let d = p.degree().ok_or(HenselError::ZeroPolynomial)?;
    let unit = p.lc();
    let k = p.min_valuation().ok_or(HenselError::ZeroPolynomial)?;
    if unit.valuation() != crate::series::ValResult::Finite(k) {
        return Err(HenselError::LeadingCoefficientVanishes);
    }
    let mut n = n;
    if let Precision::At(pr) = p.precision() {
        n = n.min(pr - k);
    }
    // monic normalization
    let mut qc: Vec<LaurentSeries<Rational>> = Vec::with_capacity(d + 1);
    for c in &p.coeffs()[..d] {
        qc.push(c.div_prec(&unit, n)?);
    }
    qc.push(LaurentSeries::one());
    let q = PolyK::new(qc);
    let residue = q.residue();
    let mut groups = factor_rationals(&residue, DEFAULT_DEGREE_CAP)?;
    // rational roots first, by absolute value with the positive one first
    groups.sort_by(|(a, _), (b, _)| {
        let key = |g: &QPoly| {
            let w = -g.coeff(0);
            (g.degree(), w.abs(), w.is_negative())
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(if ka.0 == Some(1) {
            (ka.1, ka.2).cmp(&(kb.1, kb.2))
        } else {
            a.canonical_cmp(b)
        })
    });
    let mut meta = Vec::with_capacity(groups.len());
    for (g, e) in &groups {
        let root = if g.degree() == Some(1) {
            NfElement::rational(-g.coeff(0))
        } else {
            NumberField::new(g, DEFAULT_DEGREE_CAP)?.generator()
        };
        meta.push((g.clone(), *e, root));
    }
    let residues: Vec<QPoly> = groups.iter().map(|(g, e)| g.pow(*e)).collect();
    let (digits, exact) = lift_factors(&q, &residues, n);
    let precision = if exact {
        Precision::Exact
    } else {
        Precision::At(n)
    };
    let factors = digits
        .into_iter()
        .zip(meta)
        .map(|(ds, (g, e, root))| HenselFactor {
            factor: from_digits(&ds, precision),
            residue_factor: g,
            multiplicity: e,
            residue_root: root,
        })
        .collect();
    Ok(HenselFactorization {
        unit,
        factors,
        precision,
    })
}

/// `t`-adic digits of an integral polynomial: digit `i` is the polynomial in
/// `y` formed by the `t^i` coefficients.
fn digit(q: &PolyK<Rational>, i: i64) -> QPoly {
    UPoly::new(q.coeffs().iter().map(|c| c.coeff(i)).collect())
}

fn from_digits(ds: &[QPoly], precision: Precision) -> PolyK<Rational> {
    let d = ds
        .iter()
        .filter_map(|p| p.degree())
        .max()
        .map_or(0, |d| d + 1);
    PolyK::new(
        (0..d)
            .map(|j| {
                LaurentSeries::from_terms(
                    ds.iter().enumerate().map(|(i, p)| (i as i64, p.coeff(j))),
                    precision,
                )
            })
            .collect(),
    )
}

/// Digit `i` of the product of digit sequences `a`, `b`.
fn product_digit(a: &[QPoly], b: &[QPoly], i: usize) -> QPoly {
    (0..=i).fold(QPoly::zero(), |acc, k| match (a.get(k), b.get(i - k)) {
        (Some(x), Some(y)) => &acc + &(x * y),
        _ => acc,
    })
}

/// Linear multi-factor lifting. Returns the digit sequences of the factors
/// and whether their product equals `q` exactly.
fn lift_factors(q: &PolyK<Rational>, residues: &[QPoly], n: i64) -> (Vec<Vec<QPoly>>, bool) {
    let r = residues.len();
    let mut fs: Vec<Vec<QPoly>> = residues.iter().map(|g| vec![g.clone()]).collect();
    if r == 1 {
        // the whole polynomial is the single factor
        let top = q
            .coeffs()
            .iter()
            .filter_map(|c| c.max_exponent())
            .max()
            .unwrap_or(0);
        let exact = q.precision() == Precision::Exact;
        let len = if exact { top + 1 } else { n.min(top + 1) };
        fs[0] = (0..len.max(1)).map(|i| digit(q, i)).collect();
        return (fs, exact);
    }
    // s_j · Π_{k≠j} g_k ≡ 1 mod g_j
    let cofactors: Vec<QPoly> = (0..r)
        .map(|j| {
            let others = (0..r)
                .filter(|&k| k != j)
                .fold(QPoly::one(), |acc, k| &acc * &residues[k]);
            others
                .inv_mod(&residues[j])
                .expect("coprime residue factors")
        })
        .collect();
    let q_exact = q.precision() == Precision::Exact;
    let q_top = q
        .coeffs()
        .iter()
        .filter_map(|c| c.max_exponent())
        .max()
        .unwrap_or(0);
    // partial[k] = digits of F_0 ⋯ F_k
    let mut partial: Vec<Vec<QPoly>> = vec![vec![]; r];
    let recompute = |fs: &Vec<Vec<QPoly>>, partial: &mut Vec<Vec<QPoly>>, i: usize| {
        for k in 0..r {
            let d = if k == 0 {
                fs[0].get(i).cloned().unwrap_or_else(QPoly::zero)
            } else {
                product_digit(&partial[k - 1], &fs[k], i)
            };
            if partial[k].len() <= i {
                partial[k].push(d);
            } else {
                partial[k][i] = d;
            }
        }
    };
    recompute(&fs, &mut partial, 0);
    let mut checks = 0;
    for i in 1..n.max(1) as usize {
        for f in fs.iter_mut() {
            f.push(QPoly::zero());
        }
        recompute(&fs, &mut partial, i);
        let e = &digit(q, i as i64) - &partial[r - 1][i];
        if e.is_zero() {
            if q_exact && i as i64 > q_top && checks < 4 {
                checks += 1;
                let prod = fs
                    .iter()
                    .skip(1)
                    .fold(fs[0].clone(), |acc, f| mul_digits(&acc, f));
                let target: Vec<QPoly> = (0..=q_top).map(|k| digit(q, k)).collect();
                if trim_digits(prod) == trim_digits(target) {
                    for f in fs.iter_mut() {
                        let t = trim_digits(std::mem::take(f));
                        *f = t;
                    }
                    return (fs, true);
                }
            }
            continue;
        }
        for j in 0..r {
            fs[j][i] = (&e * &cofactors[j]).rem(&residues[j]);
        }
        // only the terms through fs[k][i] and partial[k - 1][i] moved
        let mut delta = fs[0][i].clone();
        partial[0][i] = &partial[0][i] + &delta;
        for k in 1..r {
            delta = &(&partial[k - 1][0] * &fs[k][i]) + &(&delta * &fs[k][0]);
            partial[k][i] = &partial[k][i] + &delta;
        }
    }
    (fs, false)
}

fn mul_digits(a: &[QPoly], b: &[QPoly]) -> Vec<QPoly> {
    (0..a.len() + b.len() - 1)
        .map(|i| product_digit(a, b, i))
        .collect()
}

fn trim_digits(mut ds: Vec<QPoly>) -> Vec<QPoly> {
    while ds.len() > 1 && ds.last().is_some_and(|d| d.is_zero()) {
        ds.pop();
    }
    ds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use num_traits::Zero;

    fn series(cs: &[(i64, Rational)]) -> LaurentSeries<Rational> {
        LaurentSeries::exact(cs.iter().cloned())
    }

    /// y^d - (1 + t)
    fn root_of_one_plus_t(d: usize) -> PolyK<Rational> {
        let mut cs = vec![LaurentSeries::zero(); d + 1];
        cs[0] = series(&[(0, int(-1)), (1, int(-1))]);
        cs[d] = LaurentSeries::one();
        PolyK::new(cs)
    }

    #[test]
    fn square_root_of_one_plus_t() {
        let y = hensel_lift(&root_of_one_plus_t(2), &int(1), 4).unwrap();
        assert_eq!(
            y.to_string_in("t"),
            "1 + 1/2*t - 1/8*t^2 + 1/16*t^3 + O(t^4)"
        );
    }

    #[test]
    fn cube_root_of_one_plus_t() {
        let y = hensel_lift(&root_of_one_plus_t(3), &int(1), 3).unwrap();
        assert_eq!(y.coeff(1), rat(1, 3));
        assert_eq!(y.coeff(2), rat(-1, 9));
        assert_eq!(y.precision(), Precision::At(3));
    }

    #[test]
    fn double_root_is_rejected() {
        let f = PolyK::new(vec![
            series(&[(2, int(-1))]),
            LaurentSeries::zero(),
            LaurentSeries::one(),
        ]);
        assert_eq!(
            hensel_lift(&f, &int(0), 4),
            Err(HenselError::NotASimpleRoot)
        );
        assert_eq!(hensel_lift(&f, &int(1), 4), Err(HenselError::NotARoot));
    }

    #[test]
    fn exact_root_stays_exact() {
        let f = PolyK::new(vec![
            series(&[(0, int(-1)), (1, int(-1))]),
            LaurentSeries::one(),
        ]);
        let y = hensel_lift(&f, &int(1), 10).unwrap();
        assert!(y.is_exact());
        assert_eq!(y.to_string_in("t"), "1 + t");
    }

    #[test]
    fn decomposition_of_square_root() {
        let h = hensel_decompose(&root_of_one_plus_t(2), 8).unwrap();
        assert_eq!(h.factors.len(), 2);
        let roots: Vec<_> = h
            .factors
            .iter()
            .map(|f| f.residue_root.rational_value().unwrap())
            .collect();
        assert_eq!(roots, vec![int(1), int(-1)]);
        let diff = h.product().sub(&root_of_one_plus_t(2));
        assert!(diff.coeffs().iter().all(|c| c.has_no_terms()));
        // the factor at w = 1 is y - (1 + t/2 - ...)
        assert_eq!(h.factors[0].factor.coeff(0).coeff(1), rat(-1, 2));
    }

    #[test]
    fn exact_split_without_t() {
        let p = PolyK::from_upoly(&QPoly::from_rationals(&[int(2), int(-3), int(1)]));
        let h = hensel_decompose(&p, 8).unwrap();
        assert_eq!(h.precision, Precision::Exact);
        let fs: Vec<_> = h.factors.iter().map(|f| f.factor.to_string()).collect();
        assert_eq!(fs, vec!["y - 1", "y - 2"]);
    }

    #[test]
    fn weierstrass_factor_is_whole_polynomial() {
        let p = PolyK::new(vec![
            series(&[(1, int(-1))]),
            LaurentSeries::zero(),
            LaurentSeries::one(),
        ]);
        let h = hensel_decompose(&p, 8).unwrap();
        assert_eq!(h.factors.len(), 1);
        assert_eq!(h.factors[0].multiplicity, 2);
        assert!(h.factors[0].residue_root.is_zero());
        assert_eq!(h.factors[0].factor, p);
    }

    #[test]
    fn vanishing_leading_coefficient() {
        let p = PolyK::new(vec![LaurentSeries::one(), series(&[(1, int(1))])]);
        assert_eq!(
            hensel_decompose(&p, 8),
            Err(HenselError::LeadingCoefficientVanishes)
        );
    }
}
