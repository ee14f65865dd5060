//! Factorization of univariate polynomials over `Q`.
//!
//! Squarefree decomposition, a rational-root pass, then Zassenhaus: factor
//! modulo a small prime, Hensel-lift to `p^k` above a Mignotte-type bound and
//! recombine subsets of the lifted factors by trial division.
//!
//! Coefficient bound: every integer factor `g` of a primitive `A` of degree
//! `n` satisfies `|g_i| <= 2^n · ||A||_2` and we lift until
//! `p^k > 2 · |lc(A)| · 2^n · (n + 1) · max|A_i|`, which dominates it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::modp::{Fp, PolyP};
use super::NfError;
use crate::scalar::{denominator_lcm, Rational};
use crate::upoly::QPoly;

pub const DEFAULT_DEGREE_CAP: usize = 16;

type ZPoly = Vec<BigInt>;

/// Factors `p` into monic irreducibles over `Q` with multiplicities, sorted
/// by degree and then canonically. Constants yield an empty list.
pub fn factor_rationals(p: &QPoly, cap: usize) -> Result<Vec<(QPoly, u32)>, NfError> {
    let deg = p.degree().ok_or(NfError::ZeroPolynomial)?;
    if deg > cap {
        return Err(NfError::DegreeCapExceeded { degree: deg, cap });
    }
    let mut out = Vec::new();
    for (sqf, mult) in p.squarefree_decomposition() {
        for f in factor_squarefree(&sqf) {
            out.push((f, mult));
        }
    }
    out.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    Ok(out)
}

/// True when `p` has positive degree and no proper factorization over `Q`.
pub fn is_irreducible(p: &QPoly, cap: usize) -> Result<bool, NfError> {
    let fs = factor_rationals(p, cap)?;
    Ok(fs.len() == 1 && fs[0].1 == 1)
}

fn factor_squarefree(f: &QPoly) -> Vec<QPoly> {
    let mut a = to_primitive(f);
    let mut out = Vec::new();
    for r in rational_roots(&a) {
        let lin: ZPoly = vec![-r.numer().clone(), r.denom().clone()];
        a = zdiv_exact(&a, &lin).expect("root gives a factor");
        out.push(lin);
    }
    if a.len() > 1 {
        out.extend(zassenhaus(&a));
    }
    out.into_iter().map(|g| to_monic_q(&g)).collect()
}

fn to_primitive(f: &QPoly) -> ZPoly {
    let l = Rational::from_integer(denominator_lcm(f.coeffs()));
    let mut z: ZPoly = f.coeffs().iter().map(|c| (c * &l).to_integer()).collect();
    let g = z.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    for c in z.iter_mut() {
        *c /= &g;
    }
    if z.last().is_some_and(|c| c.is_negative()) {
        for c in z.iter_mut() {
            *c = -c.clone();
        }
    }
    z
}

fn to_monic_q(g: &ZPoly) -> QPoly {
    QPoly::new(
        g.iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect(),
    )
    .monic()
}

fn primitive_part(mut g: ZPoly) -> ZPoly {
    let c = g.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !c.is_zero() {
        for x in g.iter_mut() {
            *x /= &c;
        }
    }
    if g.last().is_some_and(|c| c.is_negative()) {
        for x in g.iter_mut() {
            *x = -x.clone();
        }
    }
    g
}

fn ztrim(mut g: ZPoly) -> ZPoly {
    while g.last().is_some_and(|c| c.is_zero()) {
        g.pop();
    }
    g
}

fn zmul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ztrim(out)
}

/// Exact division over `Z`; `None` if `b` does not divide `a` in `Z[x]`.
fn zdiv_exact(a: &ZPoly, b: &ZPoly) -> Option<ZPoly> {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return a.is_empty().then(Vec::new);
    }
    let mut rem = a.clone();
    let mut quot = vec![BigInt::zero(); a.len() - db];
    let lc = &b[db];
    for i in (0..quot.len()).rev() {
        let (q, r) = rem[i + db].div_rem(lc);
        if !r.is_zero() {
            return None;
        }
        if q.is_zero() {
            continue;
        }
        for (j, d) in b.iter().enumerate() {
            rem[i + j] -= &q * d;
        }
        quot[i] = q;
    }
    rem.iter().all(|c| c.is_zero()).then(|| ztrim(quot))
}

fn zeval(a: &ZPoly, x: &Rational) -> Rational {
    a.iter().rev().fold(Rational::zero(), |acc, c| {
        acc * x + Rational::from_integer(c.clone())
    })
}

const DIVISOR_LIMIT: u64 = 1_000_000;

/// Rational roots `r/s` with `r | a_0` and `s | lc`, found by enumeration when
/// both are small; larger inputs are left to Zassenhaus.
fn rational_roots(a: &ZPoly) -> Vec<Rational> {
    let mut roots = Vec::new();
    let mut a = a.clone();
    while a.len() > 1 && a[0].is_zero() {
        roots.push(Rational::zero());
        a.remove(0);
    }
    if a.len() < 2 {
        return roots;
    }
    let (Some(c0), Some(lc)) = (a[0].abs().to_u64(), a.last().and_then(|c| c.abs().to_u64()))
    else {
        return roots;
    };
    if c0 > DIVISOR_LIMIT || lc > DIVISOR_LIMIT {
        return roots;
    }
    let mut cands: Vec<Rational> = Vec::new();
    for r in divisors(c0) {
        for s in divisors(lc) {
            for sign in [1i64, -1] {
                cands.push(Rational::new(
                    BigInt::from(sign) * BigInt::from(r),
                    BigInt::from(s),
                ));
            }
        }
    }
    cands.sort();
    cands.dedup();
    for c in cands {
        if zeval(&a, &c).is_zero() {
            roots.push(c);
        }
    }
    roots
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

fn to_modp(fp: &Fp, a: &[BigInt]) -> PolyP {
    let p = BigInt::from(fp.p);
    fp.trim(
        a.iter()
            .map(|c| c.mod_floor(&p).to_u64().expect("reduced"))
            .collect(),
    )
}

fn small_primes() -> impl Iterator<Item = u64> {
    (3u64..).filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
}

/// Factors a primitive squarefree integer polynomial of degree >= 1 with
/// positive leading coefficient.
fn zassenhaus(a: &ZPoly) -> Vec<ZPoly> {
    let n = a.len() - 1;
    if n == 1 {
        return vec![a.clone()];
    }
    let lc = a[n].clone();
    let mut best: Option<(Fp, Vec<PolyP>)> = None;
    let mut tried = 0;
    let mut seed = 0x5EED_u64;
    for p in small_primes() {
        if tried == 5 {
            break;
        }
        if (&lc % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = Fp::new(p);
        let ap = to_modp(&fp, a);
        if fp.gcd(&ap, &fp.derivative(&ap)).len() != 1 {
            continue;
        }
        tried += 1;
        let fs = fp.factor_squarefree(&fp.monic(&ap), &mut seed);
        if best.as_ref().is_none_or(|(_, b)| fs.len() < b.len()) {
            best = Some((fp, fs));
        }
        if best.as_ref().is_some_and(|(_, b)| b.len() == 1) {
            break;
        }
    }
    let (fp, local) = best.expect("some prime is good for a squarefree polynomial");
    if local.len() == 1 {
        return vec![a.clone()];
    }
    let max_abs = a.iter().map(|c| c.abs()).max().expect("nonempty");
    let bound = BigInt::from(2u8) * lc.abs() * (BigInt::one() << n) * BigInt::from(n + 1) * max_abs;
    let p = BigInt::from(fp.p);
    let mut modulus = p.clone();
    let mut k = 1u32;
    while modulus <= bound {
        modulus *= &p;
        k += 1;
    }
    let lifted = hensel_lift(a, &fp, &local, k);
    recombine(a, lifted, &modulus)
}

/// Linear multifactor Hensel lifting of `A = lc · Π f_i (mod p)` to
/// `mod p^k`, keeping the `f_i` monic.
fn hensel_lift(a: &ZPoly, fp: &Fp, local: &[PolyP], k: u32) -> Vec<ZPoly> {
    let lc = a.last().expect("nonempty").clone();
    let lcp = to_modp(fp, &[lc.clone()]);
    let r = local.len();
    let cofactors: Vec<PolyP> = (0..r)
        .map(|i| {
            (0..r)
                .filter(|&j| j != i)
                .fold(lcp.clone(), |acc, j| fp.mul(&acc, &local[j]))
        })
        .collect();
    let inverses: Vec<PolyP> = (0..r)
        .map(|i| {
            let (g, s, _) = fp.ext_gcd(&fp.rem(&cofactors[i], &local[i]), &local[i]);
            debug_assert_eq!(g, vec![1]);
            s
        })
        .collect();
    let p = BigInt::from(fp.p);
    let mut fs: Vec<ZPoly> = local
        .iter()
        .map(|f| f.iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let mut pj = p.clone();
    for _ in 1..k {
        let prod = fs.iter().fold(vec![lc.clone()], |acc, f| zmul(&acc, f));
        let n = a.len().max(prod.len());
        let e: ZPoly = (0..n)
            .map(|i| {
                let d = a.get(i).cloned().unwrap_or_default()
                    - prod.get(i).cloned().unwrap_or_default();
                debug_assert!((&d % &pj).is_zero());
                d / &pj
            })
            .collect();
        let ep = to_modp(fp, &e);
        for i in 0..r {
            let delta = fp.rem(&fp.mul(&ep, &inverses[i]), &local[i]);
            for (idx, c) in delta.iter().enumerate() {
                fs[i][idx] += &pj * BigInt::from(*c);
            }
        }
        pj *= &p;
    }
    fs
}

fn symmetric_mod(g: &ZPoly, m: &BigInt) -> ZPoly {
    let half = m / 2;
    ztrim(
        g.iter()
            .map(|c| {
                let r = c.mod_floor(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

fn recombine(a: &ZPoly, mut lifted: Vec<ZPoly>, m: &BigInt) -> Vec<ZPoly> {
    let mut out = Vec::new();
    let mut rest = a.clone();
    let mut size = 1;
    while 2 * size <= lifted.len() {
        let mut found = None;
        let lc = rest.last().expect("nonempty").clone();
        for subset in combinations(lifted.len(), size) {
            let g = subset.iter().fold(vec![lc.clone()], |acc, &i| {
                symmetric_mod(&zmul(&acc, &lifted[i]), m)
            });
            let g = primitive_part(g);
            if let Some(q) = zdiv_exact(&rest, &g) {
                found = Some((subset, g, q));
                break;
            }
        }
        match found {
            Some((subset, g, q)) => {
                out.push(g);
                rest = q;
                for i in subset.into_iter().rev() {
                    lifted.remove(i);
                }
            }
            None => size += 1,
        }
    }
    if rest.len() > 1 {
        out.push(primitive_part(rest));
    }
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
