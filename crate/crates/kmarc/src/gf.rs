//! Exact arithmetic in GF(p^n) for q = p^n up to a small ceiling.
//!
//! Elements are polynomials over GF(p) reduced by a fixed monic irreducible modulus,
//! encoded as the integer sum of c_i * p^i where c_i is the coefficient of x^i. The
//! modulus is the lexicographically least monic irreducible of degree n, comparing
//! coefficient vectors highest degree first.

use std::fmt;
use thiserror::Error;

/// Default ceiling on the field order.
pub const MAX_ORDER: u64 = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("field order {0} exceeds ceiling {1}")]
    OrderTooLarge(u64, u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{0} does not encode an element of GF({1})")]
    BadEncoding(u32, u32),
    #[error("GF({0}) is not a subfield of GF({1})")]
    NotSubfield(u32, u32),
}

/// Element of a fixed [`FieldCtx`], canonical integer encoding in [0, q).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(pub u32);

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(m: u32) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits q into (p, n) with q = p^n, p prime. None if q is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut rest = q;
            let mut n = 0;
            while rest % p == 0 {
                rest /= p;
                n += 1;
            }
            return (rest == 1).then_some((p as u32, n));
        }
        p += 1;
    }
    Some((q as u32, 1))
}

// Polynomials over GF(p), coefficients ascending by degree, for modulus selection.
mod poly {
    fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    fn deg(v: &[u32]) -> usize {
        debug_assert!(v.last() != Some(&0));
        v.len().saturating_sub(1)
    }

    fn inv_mod_p(a: u32, p: u32) -> u32 {
        // p is a small prime; Fermat.
        let mut acc = 1u64;
        let mut base = a as u64 % p as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        acc as u32
    }

    /// Remainder of num / den over GF(p). den must be nonzero.
    pub fn rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
        let mut r: Vec<u32> = num.to_vec();
        trim(&mut r);
        let mut d = den.to_vec();
        trim(&mut d);
        assert!(!d.is_empty());
        let lead_inv = inv_mod_p(*d.last().unwrap(), p);
        while !r.is_empty() && deg(&r) >= deg(&d) {
            let shift = deg(&r) - deg(&d);
            let scale = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
            for (i, &c) in d.iter().enumerate() {
                let sub = (scale as u64 * c as u64 % p as u64) as u32;
                let cur = r[i + shift];
                r[i + shift] = (cur + p - sub) % p;
            }
            trim(&mut r);
        }
        r
    }

    /// Trial division against every monic polynomial of degree 1..=deg/2.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = deg(f);
        if n == 0 {
            return false;
        }
        for d in 1..=n / 2 {
            let count = (p as u64).pow(d as u32);
            for k in 0..count {
                let mut g = vec![0u32; d + 1];
                let mut rest = k;
                for c in g.iter_mut().take(d) {
                    *c = (rest % p as u64) as u32;
                    rest /= p as u64;
                }
                g[d] = 1;
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// Arithmetic context for GF(p^n): modulus plus dense operation tables.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    n: u32,
    q: u32,
    /// Monic modulus, coefficients ascending by degree, length n+1.
    modulus: Vec<u32>,
    mul_table: Vec<u32>,
    inv_table: Vec<u32>,
    /// Least generator of the multiplicative group.
    generator: Fe,
    /// exp[i] = generator^i for i in [0, q-1).
    exp: Vec<u32>,
    /// log[e] = i with exp[i] = e, for e in [1, q). log[0] unused.
    log: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n
    }
}
impl Eq for FieldCtx {}

impl FieldCtx {
    pub fn new(p: u32, n: u32) -> Result<FieldCtx, GfError> {
        FieldCtx::with_ceiling(p, n, MAX_ORDER)
    }

    /// Builds GF(q) for q given as an integer, factoring the prime power.
    pub fn of_order(q: u64) -> Result<FieldCtx, GfError> {
        let (p, n) = prime_power(q).ok_or(GfError::NotPrime(q as u32))?;
        FieldCtx::new(p, n)
    }

    pub fn with_ceiling(p: u32, n: u32, ceiling: u64) -> Result<FieldCtx, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if n == 0 {
            return Err(GfError::BadDegree);
        }
        let q64 = (p as u64).checked_pow(n).ok_or(GfError::OrderTooLarge(u64::MAX, ceiling))?;
        if q64 > ceiling {
            return Err(GfError::OrderTooLarge(q64, ceiling));
        }
        let q = q64 as u32;

        // Least monic irreducible of degree n, coefficient vectors compared
        // highest degree first: digit i of the counter is the x^i coefficient.
        let mut modulus = None;
        for k in 0..q64 {
            let mut f = vec![0u32; n as usize + 1];
            let mut rest = k;
            for c in f.iter_mut().take(n as usize) {
                *c = (rest % p as u64) as u32;
                rest /= p as u64;
            }
            f[n as usize] = 1;
            if poly::is_irreducible(&f, p) {
                modulus = Some(f);
                break;
            }
        }
        let modulus = modulus.expect("an irreducible of every degree exists");

        let digits = |e: u32| -> Vec<u32> {
            let mut v = vec![0u32; n as usize];
            let mut rest = e;
            for d in v.iter_mut() {
                *d = rest % p;
                rest /= p;
            }
            v
        };
        let encode = |v: &[u32]| -> u32 {
            let mut e = 0u32;
            for &c in v.iter().rev() {
                e = e * p + c;
            }
            e
        };

        let mut mul_table = vec![0u32; (q as usize) * (q as usize)];
        for a in 0..q {
            let da = digits(a);
            for b in a..q {
                let db = digits(b);
                // Schoolbook product then long-division by the modulus.
                let mut prod = vec![0u32; 2 * n as usize - 1];
                for (i, &ca) in da.iter().enumerate() {
                    if ca == 0 {
                        continue;
                    }
                    for (j, &cb) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + ca * cb) % p;
                    }
                }
                let r = poly::rem(&prod, &modulus, p);
                let mut full = vec![0u32; n as usize];
                full[..r.len()].copy_from_slice(&r);
                let e = encode(&full);
                mul_table[a as usize * q as usize + b as usize] = e;
                mul_table[b as usize * q as usize + a as usize] = e;
            }
        }

        let mut inv_table = vec![0u32; q as usize];
        for a in 1..q {
            let mut found = 0;
            for b in 1..q {
                if mul_table[a as usize * q as usize + b as usize] == 1 {
                    found = b;
                    break;
                }
            }
            assert!(found != 0, "every nonzero element is invertible");
            inv_table[a as usize] = found;
        }

        // Least element of multiplicative order q-1.
        let mut generator = Fe(1);
        let mut exp = vec![1u32];
        if q > 2 {
            'outer: for g in 2..q {
                let mut seen = vec![1u32];
                let mut cur = g;
                while cur != 1 {
                    seen.push(cur);
                    cur = mul_table[cur as usize * q as usize + g as usize];
                }
                if seen.len() as u32 == q - 1 {
                    generator = Fe(g);
                    exp = seen;
                    break 'outer;
                }
            }
            assert_eq!(exp.len() as u32, q - 1, "multiplicative group is cyclic");
        }
        let mut log = vec![0u32; q as usize];
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }

        Ok(FieldCtx { p, n, q, modulus, mul_table, inv_table, generator, exp, log })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.n
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }
    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Canonical image of an integer, i.e. (c mod p) as a constant polynomial.
    pub fn from_int(&self, c: u64) -> Fe {
        Fe((c % self.p as u64) as u32)
    }

    pub fn element(&self, e: u32) -> Result<Fe, GfError> {
        (e < self.q).then_some(Fe(e)).ok_or(GfError::BadEncoding(e, self.q))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.q).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        let (mut ea, mut eb, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..self.n {
            out += (ea % self.p + eb % self.p) % self.p * place;
            ea /= self.p;
            eb /= self.p;
            place *= self.p;
        }
        Fe(out)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let (mut ea, mut out, mut place) = (a.0, 0u32, 1u32);
        for _ in 0..self.n {
            out += (self.p - ea % self.p) % self.p * place;
            ea /= self.p;
            place *= self.p;
        }
        Fe(out)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        Fe(self.mul_table[a.0 as usize * self.q as usize + b.0 as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(Fe(self.inv_table[a.0 as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if a.0 == 0 {
            return if e == 0 { Fe(1) } else { Fe(0) };
        }
        let h = self.q as u64 - 1;
        let l = self.log[a.0 as usize] as u64;
        Fe(self.exp[(l * (e % h) % h) as usize])
    }

    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.p as u64)
    }

    /// Multiplicative order; 0 has none.
    pub fn mult_order(&self, a: Fe) -> Result<u32, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        if self.q == 2 {
            return Ok(1);
        }
        let l = self.log[a.0 as usize];
        Ok((self.q - 1) / gcd(l, self.q - 1))
    }

    /// Embedding table of `sub` into this field: image of the subfield generator's
    /// power basis under the least root of the sub-modulus. The image is verified
    /// to be the fixed field of x -> x^|sub|.
    pub fn embed_subfield(&self, sub: &FieldCtx) -> Result<SubfieldMap, GfError> {
        if sub.p != self.p || self.n % sub.n != 0 {
            return Err(GfError::NotSubfield(sub.q, self.q));
        }
        // Least root of the sub-modulus inside this field.
        let mut root = None;
        for cand in self.elements() {
            let mut acc = Fe(0);
            for &c in sub.modulus.iter().rev() {
                acc = self.add(self.mul(acc, cand), Fe(c % self.p));
            }
            if acc == Fe(0) {
                root = Some(cand);
                break;
            }
        }
        let root = root.ok_or(GfError::NotSubfield(sub.q, self.q))?;

        let mut table = vec![Fe(0); sub.q as usize];
        for e in 0..sub.q {
            let mut rest = e;
            let mut acc = Fe(0);
            let mut pw = Fe(1);
            for _ in 0..sub.n {
                acc = self.add(acc, self.mul(Fe(rest % self.p), pw));
                rest /= self.p;
                pw = self.mul(pw, root);
            }
            table[e as usize] = acc;
        }

        let mut back = vec![None; self.q as usize];
        for (e, &img) in table.iter().enumerate() {
            back[img.0 as usize] = Some(Fe(e as u32));
        }

        let map = SubfieldMap { sub_q: sub.q, big_q: self.q, table, back };
        // Field homomorphism and fixed-field checks.
        for a in 0..sub.q {
            for b in 0..sub.q {
                let (fa, fb) = (Fe(a), Fe(b));
                assert_eq!(map.fwd(sub.add(fa, fb)), self.add(map.fwd(fa), map.fwd(fb)));
                assert_eq!(map.fwd(sub.mul(fa, fb)), self.mul(map.fwd(fa), map.fwd(fb)));
            }
        }
        let fixed = self
            .elements()
            .filter(|&x| self.pow(x, sub.q as u64) == x)
            .collect::<Vec<_>>();
        assert_eq!(fixed.len() as u32, sub.q);
        assert!(fixed.iter().all(|x| map.back[x.0 as usize].is_some()));
        Ok(map)
    }

    /// Relative trace onto the subfield described by `map`: x + x^q0 + ... where
    /// q0 = |sub|. Returns the result as an element of the subfield.
    pub fn trace_onto(&self, map: &SubfieldMap, x: Fe) -> Fe {
        assert_eq!(map.big_q, self.q);
        let m = {
            // [big : sub] = n / n0 where q0 = p^n0.
            let mut k = 0;
            let mut t = 1u64;
            while t != map.sub_q as u64 {
                t *= self.p as u64;
                k += 1;
            }
            self.n / k
        };
        let mut acc = Fe(0);
        let mut cur = x;
        for _ in 0..m {
            acc = self.add(acc, cur);
            cur = self.pow(cur, map.sub_q as u64);
        }
        map.back[acc.0 as usize].expect("trace lands in the subfield")
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cached embedding GF(q0) -> GF(q), both directions.
#[derive(Clone, Debug)]
pub struct SubfieldMap {
    pub sub_q: u32,
    pub big_q: u32,
    table: Vec<Fe>,
    back: Vec<Option<Fe>>,
}

impl SubfieldMap {
    /// Image of a subfield element in the big field.
    pub fn fwd(&self, e: Fe) -> Fe {
        self.table[e.0 as usize]
    }

    /// Preimage of a big-field element, if it lies in the embedded subfield.
    pub fn pre(&self, e: Fe) -> Option<Fe> {
        self.back[e.0 as usize]
    }

    pub fn contains(&self, e: Fe) -> bool {
        self.back[e.0 as usize].is_some()
    }
}
