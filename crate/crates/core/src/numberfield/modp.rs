//! Polynomial arithmetic over small prime fields `F_p`, used by the
//! Zassenhaus factorization. Coefficients are reduced `u64` below `p < 2^32`.

use num_bigint::BigUint;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Fp {
    pub p: u64,
}

pub(crate) type PolyP = Vec<u64>;

impl Fp {
    pub fn new(p: u64) -> Self {
        assert!(p > 2 && p < (1 << 32));
        Fp { p }
    }

    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn addm(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    fn subm(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero mod p");
        self.powm(a, self.p - 2)
    }

    fn powm(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mulm(acc, a);
            }
            a = self.mulm(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn trim(&self, mut f: PolyP) -> PolyP {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn sub(&self, a: &PolyP, b: &PolyP) -> PolyP {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| self.subm(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        self.trim(out)
    }

    pub fn mul(&self, a: &PolyP, b: &PolyP) -> PolyP {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.addm(out[i + j], self.mulm(x, y));
            }
        }
        self.trim(out)
    }

    pub fn scale(&self, a: &PolyP, c: u64) -> PolyP {
        self.trim(a.iter().map(|&x| self.mulm(x, c)).collect())
    }

    pub fn monic(&self, a: &PolyP) -> PolyP {
        match a.last() {
            Some(&lc) => self.scale(a, self.inv(lc)),
            None => Vec::new(),
        }
    }

    pub fn div_rem(&self, a: &PolyP, b: &PolyP) -> (PolyP, PolyP) {
        assert!(!b.is_empty(), "division by zero polynomial mod p");
        let db = b.len() - 1;
        if a.len() <= db {
            return (Vec::new(), a.clone());
        }
        let lc_inv = self.inv(b[db]);
        let mut rem = a.clone();
        let mut quot = vec![0u64; a.len() - db];
        for i in (0..quot.len()).rev() {
            let c = self.mulm(rem[i + db], lc_inv);
            if c == 0 {
                continue;
            }
            for (j, &d) in b.iter().enumerate() {
                rem[i + j] = self.subm(rem[i + j], self.mulm(c, d));
            }
            quot[i] = c;
        }
        rem.truncate(db);
        (self.trim(quot), self.trim(rem))
    }

    pub fn rem(&self, a: &PolyP, b: &PolyP) -> PolyP {
        self.div_rem(a, b).1
    }

    pub fn gcd(&self, a: &PolyP, b: &PolyP) -> PolyP {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    /// `(g, s, t)` with `s·a + t·b = g` monic.
    pub fn ext_gcd(&self, a: &PolyP, b: &PolyP) -> (PolyP, PolyP, PolyP) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (vec![1u64], Vec::new());
        let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
        while !r1.is_empty() {
            let (q, r) = self.div_rem(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = self.sub(&s0, &self.mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = self.sub(&t0, &self.mul(&q, &t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        let inv = self.inv(*r0.last().expect("nonzero gcd"));
        (
            self.scale(&r0, inv),
            self.scale(&s0, inv),
            self.scale(&t0, inv),
        )
    }

    pub fn derivative(&self, a: &PolyP) -> PolyP {
        self.trim(
            a.iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| self.mulm(c, i as u64 % self.p))
                .collect(),
        )
    }

    pub fn powmod(&self, base: &PolyP, exp: &BigUint, modulus: &PolyP) -> PolyP {
        let mut acc = vec![1u64];
        let base = self.rem(base, modulus);
        for i in (0..exp.bits()).rev() {
            acc = self.rem(&self.mul(&acc, &acc), modulus);
            if exp.bit(i) {
                acc = self.rem(&self.mul(&acc, &base), modulus);
            }
        }
        self.rem(&acc, modulus)
    }

    /// Factors a monic squarefree polynomial into monic irreducibles.
    pub fn factor_squarefree(&self, f: &PolyP, seed: &mut u64) -> Vec<PolyP> {
        let mut out = Vec::new();
        for (g, d) in self.distinct_degree(f) {
            self.equal_degree(&g, d, seed, &mut out);
        }
        out.sort();
        out
    }

    fn distinct_degree(&self, f: &PolyP) -> Vec<(PolyP, usize)> {
        let mut out = Vec::new();
        let mut f = f.clone();
        let x = vec![0u64, 1];
        let mut h = x.clone();
        let p = BigUint::from(self.p);
        let mut d = 0;
        while f.len() > 1 {
            d += 1;
            if 2 * d > f.len() - 1 {
                out.push((f.clone(), f.len() - 1));
                break;
            }
            h = self.powmod(&h, &p, &f);
            let g = self.gcd(&self.sub(&h, &x), &f);
            if g.len() > 1 {
                out.push((g.clone(), d));
                f = self.div_rem(&f, &g).0;
                h = self.rem(&h, &f);
            }
        }
        out
    }

    fn equal_degree(&self, f: &PolyP, d: usize, seed: &mut u64, out: &mut Vec<PolyP>) {
        let n = f.len() - 1;
        if n == d {
            out.push(f.clone());
            return;
        }
        let e = (BigUint::from(self.p).pow(d as u32) - 1u32) / 2u32;
        loop {
            let a: PolyP = self.trim((0..n).map(|_| next_rand(seed) % self.p).collect());
            if a.len() < 2 {
                continue;
            }
            let g0 = self.gcd(&a, f);
            let g = if g0.len() > 1 {
                g0
            } else {
                let b = self.powmod(&a, &e, f);
                self.gcd(&self.sub(&b, &vec![1]), f)
            };
            if g.len() > 1 && g.len() < f.len() {
                let h = self.div_rem(f, &g).0;
                self.equal_degree(&g, d, seed, out);
                self.equal_degree(&self.monic(&h), d, seed, out);
                return;
            }
        }
    }
}

/// SplitMix64 step; deterministic splitting keeps factorization output
/// reproducible.
fn next_rand(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
