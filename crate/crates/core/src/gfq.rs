//! Arithmetic in GF(p^h) with explicit prime-field coordinates.
//!
//! An element is identified with its integer code `a_0 + a_1 p + ... + a_{h-1} p^{h-1}`,
//! where `(a_0, ..., a_{h-1})` are the coefficients of its polynomial representative
//! modulo a fixed irreducible polynomial. All operations go through precomputed
//! tables, so a `Field` is immutable and can be shared freely between threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest extension degree accepted.
pub const MAX_DEGREE: u32 = 4;
/// Largest field order accepted.
pub const MAX_ORDER: u32 = 1024;

/// Irreducible moduli used when none is supplied, lowest coefficient first.
const MODULUS_TABLE: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 0, 1]),
];

/// An element of GF(p^h), stored by its integer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The finite field GF(p^h) defined by a fixed irreducible modulus.
#[derive(Debug, Clone)]
pub struct Field {
    p: u32,
    h: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.h == other.h && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes `q = p^h` as `(p, h)` when `q` is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut h = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        h += 1;
    }
    (rest == 1).then_some((p, h))
}

/// Remainder of `a` modulo the monic polynomial `m` over F_p (lowest coefficient first).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Irreducibility by trial division with all monic polynomials of degree up to deg/2.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let deg = modulus.len() - 1;
    if deg == 0 || modulus[deg].is_multiple_of(p) {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = (p as usize).pow(d as u32);
        for code in 0..count {
            let mut f: Vec<u32> = (0..d).map(|i| ((code / (p as usize).pow(i as u32)) % p as usize) as u32).collect();
            f.push(1);
            if poly_rem(modulus, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds GF(p^h) using the shipped modulus table.
    pub fn new(p: u32, h: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if h == 1 {
            return Field::with_modulus(p, &[0, 1]);
        }
        let entry = MODULUS_TABLE.iter().find(|(mp, mh, _)| *mp == p && *mh == h).ok_or(Error::NoModulusKnown(p, h))?;
        Field::with_modulus(p, entry.2)
    }

    /// Builds GF(p^h) for an explicit monic modulus of degree h (lowest coefficient first).
    pub fn with_modulus(p: u32, modulus: &[u32]) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if modulus.len() < 2 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::UnsupportedField(format!("modulus {modulus:?} is not a polynomial over F_{p}")));
        }
        let h = (modulus.len() - 1) as u32;
        if modulus[h as usize] != 1 {
            return Err(Error::UnsupportedField("modulus must be monic".into()));
        }
        if h > MAX_DEGREE {
            return Err(Error::UnsupportedField(format!("degree {h} > {MAX_DEGREE}")));
        }
        let q = p
            .checked_pow(h)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::UnsupportedField(format!("order {p}^{h} too large")))?;
        if !is_irreducible(modulus, p) {
            return Err(Error::ReducibleModulus(modulus.to_vec()));
        }
        let mut field = Field {
            p,
            h,
            q,
            modulus: modulus.to_vec(),
            add: vec![0; (q * q) as usize],
            mul: vec![0; (q * q) as usize],
            neg: vec![0; q as usize],
            inv: vec![0; q as usize],
        };
        field.fill_tables();
        Ok(field)
    }

    fn fill_tables(&mut self) {
        let (p, h, q) = (self.p, self.h as usize, self.q);
        let coeffs = |x: u32| -> Vec<u32> { (0..h).map(|i| (x / p.pow(i as u32)) % p).collect() };
        let encode = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &d| acc * p + d) };
        for a in 0..q {
            let ca = coeffs(a);
            for b in 0..q {
                let cb = coeffs(b);
                let sum: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                self.add[(a * q + b) as usize] = encode(&sum);
                let mut prod = vec![0u32; 2 * h - 1];
                for (i, x) in ca.iter().enumerate() {
                    for (j, y) in cb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut rem = poly_rem(&prod, &self.modulus, p);
                rem.resize(h, 0);
                self.mul[(a * q + b) as usize] = encode(&rem);
            }
        }
        for a in 0..q {
            self.neg[a as usize] = (0..q).find(|&b| self.add[(a * q + b) as usize] == 0).unwrap();
            if a != 0 {
                self.inv[a as usize] = (1..q).find(|&b| self.mul[(a * q + b) as usize] == 1).unwrap();
            }
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.h == 1
    }

    /// All elements in canonical (integer code) order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    pub fn element(&self, code: u32) -> Result<FieldElement> {
        if code < self.q {
            Ok(FieldElement(code))
        } else {
            Err(Error::DimensionMismatch(format!("code {code} outside GF({})", self.q)))
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add[(a.0 * self.q + b.0) as usize])
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul[(a.0 * self.q + b.0) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(FieldElement(self.inv[a.0 as usize]))
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn arith(&self, a: FieldElement, b: FieldElement, op: ArithOp) -> Result<FieldElement> {
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    pub fn pow(&self, a: FieldElement, mut exp: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `x -> x^(p^e)`.
    pub fn frobenius_power(&self, x: FieldElement, e: u32) -> FieldElement {
        let mut y = x;
        for _ in 0..(e % self.h.max(1)) {
            y = self.pow(y, self.p as u64);
        }
        y
    }

    /// Coordinates with respect to the basis `1, w, ..., w^(h-1)`.
    pub fn to_prime_vector(&self, x: FieldElement) -> Vec<u32> {
        (0..self.h).map(|i| (x.0 / self.p.pow(i)) % self.p).collect()
    }

    pub fn from_prime_vector(&self, v: &[u32]) -> Result<FieldElement> {
        if v.len() != self.h as usize || v.iter().any(|&c| c >= self.p) {
            return Err(Error::DimensionMismatch(format!("expected {} coordinates below {}", self.h, self.p)));
        }
        Ok(FieldElement(v.iter().rev().fold(0, |acc, &d| acc * self.p + d)))
    }

    /// The subfield GF(p^d), as the fixed points of `x -> x^(p^d)`, in code order.
    pub fn subfield(&self, d: u32) -> Result<Vec<FieldElement>> {
        if d == 0 || !self.h.is_multiple_of(d) {
            return Err(Error::UnsupportedField(format!("GF({}^{d}) is not a subfield of GF({})", self.p, self.q)));
        }
        Ok(self.elements().filter(|&x| self.frobenius_power(x, d) == x).collect())
    }

    /// Short identifier `p,h,modulus` used for cache keys.
    pub fn cache_key(&self) -> String {
        let m: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        format!("p{}_h{}_m{}", self.p, self.h, m.join("-"))
    }
}
