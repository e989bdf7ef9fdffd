//! Finite fields GF(p^k) with q = p^k <= 4096, just enough arithmetic to
//! evaluate affine maps `x -> a*x + b`.
//!
//! Element encoding: an element of GF(p^k) is a polynomial
//! `c_0 + c_1 x + ... + c_{k-1} x^{k-1}` over GF(p), stored as the integer
//! `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`. Prime fields therefore use the
//! residues `0..p` directly.
//!
//! The reducing polynomial is the least monic irreducible polynomial of
//! degree k, where `x^k + c_{k-1} x^{k-1} + ... + c_0` is ranked by the
//! integer encoding of its lower coefficients. For GF(4) that is
//! `x^2 + x + 1`, for GF(8) `x^3 + x + 1`, for GF(16) `x^4 + x + 1`.

use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const MAX_FIELD_ORDER: usize = 4096;

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: usize,
    k: usize,
    q: usize,
    // lower coefficients c_0..c_{k-1} of the monic modulus
    modulus: Vec<usize>,
    exp: Vec<usize>,
    log: Vec<usize>,
}

/// Returns `(p, k)` with `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

// Dense polynomials over GF(p), lowest coefficient first, no trailing zeros.
fn trim(mut v: Vec<usize>) -> Vec<usize> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_rem(num: &[usize], den: &[usize], p: usize) -> Vec<usize> {
    let den = trim(den.to_vec());
    let mut rem = trim(num.to_vec());
    let dl = den.len();
    let lead_inv = mod_inverse(den[dl - 1], p);
    while rem.len() >= dl {
        let shift = rem.len() - dl;
        let factor = rem[rem.len() - 1] * lead_inv % p;
        for (i, &d) in den.iter().enumerate() {
            let sub = factor * d % p;
            rem[shift + i] = (rem[shift + i] + p - sub) % p;
        }
        rem = trim(rem);
    }
    rem
}

fn mod_inverse(a: usize, p: usize) -> usize {
    (1..p)
        .find(|&x| a * x % p == 1)
        .expect("nonzero residue mod prime")
}

fn digits(mut v: usize, p: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let d = v % p;
            v /= p;
            d
        })
        .collect()
}

fn is_irreducible(poly: &[usize], p: usize) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut divisor = digits(low, p, d);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn least_irreducible(p: usize, k: usize) -> Vec<usize> {
    (0..p.pow(k as u32))
        .map(|low| {
            let mut poly = digits(low, p, k);
            poly.push(1);
            poly
        })
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial exists in every degree")
}

impl FiniteField {
    /// Builds GF(q). Fails with "not a prime power" for composite non-prime-power `q`.
    pub fn new(q: usize) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if q > MAX_FIELD_ORDER {
            return Err(Error::FieldOrderOutOfRange(q));
        }
        let modulus = if k == 1 {
            vec![0]
        } else {
            let mut m = least_irreducible(p, k);
            m.pop();
            m
        };
        let mut field = FiniteField {
            p,
            k,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
        };
        field.build_log_tables();
        Ok(field)
    }

    fn build_log_tables(&mut self) {
        let q = self.q;
        let generator = (1..q)
            .find(|&g| self.multiplicative_order(g) == q - 1)
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = Vec::with_capacity(q - 1);
        let mut log = vec![0; q];
        let mut cur = 1;
        for i in 0..q - 1 {
            exp.push(cur);
            log[cur] = i;
            cur = self.mul_slow(cur, generator);
        }
        self.exp = exp;
        self.log = log;
    }

    fn multiplicative_order(&self, g: usize) -> usize {
        let mut cur = g;
        let mut order = 1;
        while cur != 1 {
            cur = self.mul_slow(cur, g);
            order += 1;
            if order > self.q {
                return 0;
            }
        }
        order
    }

    // Schoolbook multiplication modulo the reducing polynomial.
    fn mul_slow(&self, a: usize, b: usize) -> usize {
        let (p, k) = (self.p, self.k);
        if k == 1 {
            return a * b % p;
        }
        let da = digits(a, p, k);
        let db = digits(b, p, k);
        let mut prod = vec![0; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let mut modulus = self.modulus.clone();
        modulus.push(1);
        let rem = poly_rem(&prod, &modulus, p);
        self.encode(&rem)
    }

    fn encode(&self, coeffs: &[usize]) -> usize {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// Coefficients of the reducing polynomial, lowest first, leading 1 included.
    pub fn modulus(&self) -> Vec<usize> {
        if self.k == 1 {
            return vec![0, 1];
        }
        let mut m = self.modulus.clone();
        m.push(1);
        m
    }

    /// The smallest-index generator of the multiplicative group.
    pub fn primitive_element(&self) -> usize {
        self.exp.get(1).copied().unwrap_or(1)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg(&self, a: usize) -> usize {
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
    }

    pub fn inv(&self, a: usize) -> Result<usize> {
        if a == 0 {
            return Err(Error::NotInvertible);
        }
        Ok(self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)])
    }

    pub fn div(&self, a: usize, b: usize) -> Result<usize> {
        Ok(self.mul(a, self.inv(b)?))
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.q {
            Err(Error::FieldElementOutOfRange(x))
        } else {
            Ok(())
        }
    }

    /// The permutation `x -> a*x + b` of the field, indexed by the encoding above.
    pub fn affine_permutation(&self, a: usize, b: usize) -> Result<Permutation> {
        self.check(a)?;
        self.check(b)?;
        if a == 0 {
            return Err(Error::NotInvertible);
        }
        let images = (0..self.q).map(|x| self.add(self.mul(a, x), b)).collect();
        Ok(Permutation::from_images_unchecked(images))
    }
}
