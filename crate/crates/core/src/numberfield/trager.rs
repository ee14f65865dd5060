//! Factorization over `Q(α)` by Trager's norm method, and adjunction of a root
//! of an irreducible factor through a primitive element of the compositum.

use std::sync::Arc;

use num_traits::One;

use super::{factor_rationals, nf_poly_from_q, NfElement, NfError, NfPoly, NumberField};
use crate::scalar::{Rational, Scalar};
use crate::upoly::{resultant, QPoly, UPoly};

/// `Res_z(m(z), g(z, X))`: the product of the conjugates of `g` over `Q`.
pub fn norm(field: &Arc<NumberField>, g: &NfPoly) -> QPoly {
    let m = field.min_poly();
    let n = field.degree();
    let d = g.degree().expect("nonzero polynomial");
    let coord_polys: Vec<QPoly> = g
        .coeffs()
        .iter()
        .map(|c| {
            c.in_field(field)
                .expect("coefficients in the field")
                .as_poly()
        })
        .collect();
    let points: Vec<Rational> = (0..=(n * d) as i64).map(crate::scalar::int).collect();
    let values: Vec<Rational> = points
        .iter()
        .map(|x| {
            let gx = coord_polys
                .iter()
                .rev()
                .fold(QPoly::zero(), |acc, c| &acc.scale(x) + c);
            resultant(m, &gx)
        })
        .collect();
    interpolate(&points, &values)
}

/// Newton interpolation through `(x_i, y_i)`.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> QPoly {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    let mut out = QPoly::zero();
    for i in (0..n).rev() {
        out = &(&out * &QPoly::linear_root(xs[i].clone())) + &QPoly::constant(dd[i].clone());
    }
    out
}

fn is_squarefree_q(p: &QPoly) -> bool {
    p.gcd(&p.derivative()).degree() == Some(0)
}

/// Shifts `0, 1, -1, 2, -2, ...` tried for a squarefree norm.
fn shifts() -> impl Iterator<Item = i64> {
    (0..).map(|i: i64| if i % 2 == 1 { (i + 1) / 2 } else { -i / 2 })
}

fn shift_poly(g: &NfPoly, by: &NfElement) -> NfPoly {
    g.compose(&UPoly::new(vec![by.clone(), NfElement::one()]))
}

/// Monic irreducible factors of `p` over `field` (over `Q` when `None`) with
/// multiplicities, sorted canonically.
pub fn factor_over(
    field: Option<&Arc<NumberField>>,
    p: &NfPoly,
    cap: usize,
) -> Result<Vec<(NfPoly, u32)>, NfError> {
    let Some(field) = field else {
        let qp = p.map(|c| c.rational_value().expect("rational coefficients"));
        return Ok(factor_rationals(&qp, cap)?
            .into_iter()
            .map(|(f, m)| (nf_poly_from_q(&f), m))
            .collect());
    };
    let deg = p.degree().ok_or(NfError::ZeroPolynomial)?;
    if deg * field.degree() > cap {
        return Err(NfError::DegreeCapExceeded {
            degree: deg * field.degree(),
            cap,
        });
    }
    let alpha = field.generator();
    let mut out = Vec::new();
    for (f, mult) in p.squarefree_decomposition() {
        if f.degree() == Some(1) {
            out.push((f, mult));
            continue;
        }
        for k in shifts() {
            let ka = alpha.clone() * NfElement::from_i64(k);
            let g = shift_poly(&f, &(-ka.clone()));
            let nrm = norm(field, &g);
            if !is_squarefree_q(&nrm) {
                continue;
            }
            for (ni, _) in factor_rationals(&nrm, cap)? {
                let h = g.gcd(&nf_poly_from_q(&ni));
                out.push((shift_poly(&h, &ka), mult));
            }
            break;
        }
    }
    out.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    Ok(out)
}

/// The field obtained by adjoining a root `θ` of an irreducible polynomial to
/// a base field, with the images of the old generator and of `θ`.
#[derive(Debug, Clone)]
pub struct Extension {
    pub field: Option<Arc<NumberField>>,
    /// Image of the base field's generator; `None` when the base is `Q`.
    pub old_generator: Option<NfElement>,
    pub root: NfElement,
}

impl Extension {
    /// Image of a base field element in the extension.
    pub fn embed(&self, x: &NfElement) -> NfElement {
        if let Some(q) = x.rational_value() {
            return NfElement::rational(q);
        }
        let img = self
            .old_generator
            .as_ref()
            .expect("irrational element needs a base field");
        nf_poly_from_q(&x.as_poly()).eval(img)
    }

    pub fn embed_poly(&self, p: &NfPoly) -> NfPoly {
        p.map(|c| self.embed(c))
    }
}

/// Adjoins a root of `h`, irreducible over `base`, returning the compositum as
/// a simple extension `Q(β)` with `β = θ + kα` for the first suitable `k`.
pub fn adjoin_root(
    base: Option<&Arc<NumberField>>,
    h: &NfPoly,
    cap: usize,
) -> Result<Extension, NfError> {
    let e = h.degree().ok_or(NfError::ZeroPolynomial)?;
    let h = h.monic();
    let old_generator = base.map(|f| f.generator());
    if e == 1 {
        return Ok(Extension {
            field: base.cloned(),
            old_generator,
            root: -h.coeff(0),
        });
    }
    if let Some(field) = base {
        return adjoin_general(field, &h, e, cap);
    }
    if e > cap {
        return Err(NfError::DegreeCapExceeded { degree: e, cap });
    }
    let qh = h.map(|c| c.rational_value().expect("rational coefficients over Q"));
    let k = NumberField::new(&qh, cap)?;
    Ok(Extension {
        field: Some(k.clone()),
        old_generator: None,
        root: k.generator(),
    })
}

fn adjoin_general(
    field: &Arc<NumberField>,
    h: &NfPoly,
    e: usize,
    cap: usize,
) -> Result<Extension, NfError> {
    let n = field.degree();
    if n * e > cap {
        return Err(NfError::DegreeCapExceeded { degree: n * e, cap });
    }
    let alpha = field.generator();
    for k in shifts() {
        let ka = alpha.clone() * NfElement::from_i64(k);
        let g = shift_poly(h, &(-ka));
        let nrm = norm(field, &g);
        if !is_squarefree_q(&nrm) {
            continue;
        }
        let big = NumberField::new(&nrm, cap)?;
        let beta = big.generator();
        // α is the common root of m(z) and h_z(β - k z), where h_z replaces α
        // by z in the coefficients of h.
        let lin = UPoly::new(vec![beta.clone(), NfElement::from_i64(-k)]);
        let hz = h.coeffs().iter().rev().fold(NfPoly::zero(), |acc, c| {
            let cz = nf_poly_from_q(&c.in_field(field).expect("in field").as_poly());
            &(&acc * &lin) + &cz
        });
        let mz = nf_poly_from_q(field.min_poly());
        let common = mz.gcd(&hz);
        debug_assert_eq!(common.degree(), Some(1));
        let alpha_img = -common.coeff(0);
        let root = beta - alpha_img.clone() * NfElement::from_i64(k);
        return Ok(Extension {
            field: Some(big),
            old_generator: Some(alpha_img),
            root,
        });
    }
    unreachable!("only finitely many shifts give a non-squarefree norm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn q(cs: &[i64]) -> QPoly {
        QPoly::new(cs.iter().map(|&c| int(c)).collect())
    }

    #[test]
    fn norm_of_x_minus_sqrt2() {
        let k = NumberField::new(&q(&[-2, 0, 1]), 16).unwrap();
        let g = UPoly::linear_root(k.generator());
        assert_eq!(norm(&k, &g), q(&[-2, 0, 1]));
    }

    #[test]
    fn x2_minus_2_splits_over_sqrt2() {
        let k = NumberField::new(&q(&[-2, 0, 1]), 16).unwrap();
        let fs = factor_over(Some(&k), &nf_poly_from_q(&q(&[-2, 0, 1])), 16).unwrap();
        assert_eq!(fs.len(), 2);
        // x^2 - 3 stays irreducible
        let fs = factor_over(Some(&k), &nf_poly_from_q(&q(&[-3, 0, 1])), 16).unwrap();
        assert_eq!(fs.len(), 1);
        // x^4 + 1 splits into two quadratics over Q(sqrt 2)
        let fs = factor_over(Some(&k), &nf_poly_from_q(&q(&[1, 0, 0, 0, 1])), 16).unwrap();
        assert_eq!(
            fs.iter().map(|(f, _)| f.degree()).collect::<Vec<_>>(),
            vec![Some(2), Some(2)]
        );
    }

    #[test]
    fn adjoin_sqrt3_to_sqrt2() {
        let k = NumberField::new(&q(&[-2, 0, 1]), 16).unwrap();
        let h = nf_poly_from_q(&q(&[-3, 0, 1]));
        let ext = adjoin_root(Some(&k), &h, 16).unwrap();
        let big = ext.field.clone().unwrap();
        assert_eq!(big.degree(), 4);
        let a = ext.embed(&k.generator());
        let r = ext.root.clone();
        assert_eq!(a.clone() * a, NfElement::from_i64(2));
        assert_eq!(r.clone() * r, NfElement::from_i64(3));
    }

    #[test]
    fn adjoin_over_rationals() {
        let h = nf_poly_from_q(&q(&[-2, 0, 1]));
        let ext = adjoin_root(None, &h, 16).unwrap();
        assert_eq!(ext.root.clone() * ext.root.clone(), NfElement::from_i64(2));
        let lin = nf_poly_from_q(&q(&[-5, 2]));
        let ext = adjoin_root(None, &lin, 16).unwrap();
        assert_eq!(ext.root, NfElement::rational(crate::scalar::rat(5, 2)));
    }
}
