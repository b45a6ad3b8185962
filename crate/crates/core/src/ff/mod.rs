//! Finite-field arithmetic on index-encoded elements.
//!
//! Every field is either a prime field `F_p` or a simple extension
//! `base[z]/(f)` of another field. An element is stored as a single integer
//! index: the coefficient vector `(c_0, ..., c_{d-1})` over the base maps to
//! `c_0 + c_1·|base| + ... + c_{d-1}·|base|^{d-1}`. Unrolling that down to the
//! prime field, the index is the base-`p` number formed by the flattened
//! `F_p` coordinates, so
//!
//! * addition is digit-wise mod `p` (plain XOR in characteristic 2), and
//! * a base-field element keeps its index when embedded in an extension.
//!
//! The second property is what lets `F_q ⊂ F_{q^2} ⊂ F_{q^4}` and
//! `F_q ⊂ F_{q^3}` share element values without any conversion.
//!
//! Fields of order at most [`TABLE_LIMIT`] carry log/antilog tables, so
//! multiplication, inversion and powering are table lookups. Larger fields
//! fall back to schoolbook multiplication reduced by the modulus.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod linalg;
pub mod poly;
mod tower;

pub use tower::{FieldTower, NormalBasis, FQ4_MAX_Q, MAX_Q};

/// Fields up to this order get log/antilog tables.
pub const TABLE_LIMIT: u64 = 1 << 20;

/// Odd-characteristic fields up to this order get a full addition table.
const ADD_TABLE_LIMIT: u32 = 1 << 10;

/// Largest field order representable by a `u32` index.
const MAX_ORDER: u64 = u32::MAX as u64;

/// A field element, encoded as its index in the owning [`Field`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub const fn from_raw(index: u32) -> Self {
        Elem(index)
    }

    #[inline]
    pub const fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub struct Field {
    p: u32,
    order: u32,
    base: Option<Arc<Field>>,
    /// Monic modulus over `base`, lowest coefficient first (leading 1 included).
    modulus: Vec<Elem>,
    log: Vec<u32>,
    exp: Vec<u32>,
    neg_table: Vec<u32>,
    add_table: Vec<u16>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("order", &self.order)
            .field("degree", &self.degree())
            .field("modulus", &self.modulus)
            .finish()
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Field {
    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Arc<Field>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p as u64 > TABLE_LIMIT {
            return Err(Error::FieldTooLarge { order: p as u64, cap: TABLE_LIMIT });
        }
        let mut field = Field {
            p,
            order: p,
            base: None,
            modulus: Vec::new(),
            log: Vec::new(),
            exp: Vec::new(),
            neg_table: Vec::new(),
            add_table: Vec::new(),
        };
        field.build_tables();
        Ok(Arc::new(field))
    }

    /// The extension `base[z]/(f)` where `f` is the least monic irreducible
    /// polynomial of the given degree. Candidates are ordered by the index
    /// `c_0 + c_1·|base| + ...` of their non-leading coefficients, i.e.
    /// lexicographically with the highest non-leading coefficient most
    /// significant.
    pub fn extension(base: &Arc<Field>, degree: u32) -> Result<Arc<Field>> {
        assert!(degree >= 1, "extension degree must be positive");
        let base_order = base.order as u64;
        let order = base_order
            .checked_pow(degree)
            .filter(|&o| o <= MAX_ORDER)
            .ok_or(Error::FieldTooLarge {
                order: base_order.saturating_pow(degree),
                cap: MAX_ORDER,
            })?;
        let modulus = (0..base_order.pow(degree))
            .map(|idx| {
                let mut coeffs = digits_of(idx, base_order, degree as usize)
                    .into_iter()
                    .map(|d| Elem(d as u32))
                    .collect::<Vec<_>>();
                coeffs.push(Elem::ONE);
                coeffs
            })
            .find(|f| poly::is_irreducible(base, f))
            .ok_or(Error::NoIrreducible { degree, base_order: base.order })?;
        let mut field = Field {
            p: base.p,
            order: order as u32,
            base: Some(Arc::clone(base)),
            modulus,
            log: Vec::new(),
            exp: Vec::new(),
            neg_table: Vec::new(),
            add_table: Vec::new(),
        };
        field.build_tables();
        Ok(Arc::new(field))
    }

    fn build_tables(&mut self) {
        let n = self.order as u64;
        if self.p != 2 && self.order <= ADD_TABLE_LIMIT {
            let mut t = vec![0u16; (n * n) as usize];
            for a in 0..self.order {
                for b in 0..self.order {
                    t[(a * self.order + b) as usize] = self.add_slow(Elem(a), Elem(b)).0 as u16;
                }
            }
            self.add_table = t;
        }
        if n > TABLE_LIMIT {
            return;
        }
        if self.p != 2 {
            self.neg_table = (0..self.order).map(|a| self.neg_slow(Elem(a)).0).collect();
        }
        let group = n - 1;
        let factors = prime_factors(group);
        let generator = (1..self.order)
            .map(Elem)
            .find(|&g| factors.iter().all(|&l| self.pow_slow(g, group / l) != Elem::ONE))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = Vec::with_capacity(2 * group as usize);
        let mut log = vec![u32::MAX; n as usize];
        let mut acc = Elem::ONE;
        for i in 0..group {
            exp.push(acc.0);
            log[acc.index()] = i as u32;
            acc = self.mul_slow(acc, generator);
        }
        debug_assert_eq!(acc, Elem::ONE);
        for i in 0..group as usize {
            exp.push(exp[i]);
        }
        self.log = log;
        self.exp = exp;
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Degree over the immediate base (1 for a prime field).
    pub fn degree_over_base(&self) -> u32 {
        if self.base.is_some() {
            (self.modulus.len() - 1) as u32
        } else {
            1
        }
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        match &self.base {
            Some(b) => b.degree() * self.degree_over_base(),
            None => 1,
        }
    }

    pub fn base(&self) -> Option<&Arc<Field>> {
        self.base.as_ref()
    }

    pub fn modulus(&self) -> &[Elem] {
        &self.modulus
    }

    pub fn has_tables(&self) -> bool {
        !self.exp.is_empty()
    }

    #[inline]
    pub fn contains(&self, a: Elem) -> bool {
        a.0 < self.order
    }

    pub fn check(&self, a: Elem) -> Result<Elem> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(Error::ForeignElement { index: a.0, order: self.order })
        }
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order).map(Elem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.order).map(Elem)
    }

    /// The image of the integer `n` under `Z -> F_p ⊂ F`.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    /// Coefficients over the immediate base, lowest first.
    pub fn coeffs(&self, a: Elem) -> Vec<Elem> {
        match &self.base {
            Some(base) => digits_of(a.0 as u64, base.order as u64, self.degree_over_base() as usize)
                .into_iter()
                .map(|d| Elem(d as u32))
                .collect(),
            None => vec![a],
        }
    }

    pub fn from_coeffs(&self, coeffs: &[Elem]) -> Elem {
        match &self.base {
            Some(base) => {
                let mut idx = 0u64;
                for c in coeffs.iter().rev() {
                    idx = idx * base.order as u64 + c.0 as u64;
                }
                Elem(idx as u32)
            }
            None => coeffs[0],
        }
    }

    /// Flattened `F_p` coordinates, least significant first.
    pub fn digits(&self, a: Elem) -> Vec<u32> {
        digits_of(a.0 as u64, self.p as u64, self.degree() as usize)
            .into_iter()
            .map(|d| d as u32)
            .collect()
    }

    /// Base-`p` digit string, most significant first. Digits are separated
    /// by `.` when `p > 10`.
    pub fn digit_string(&self, a: Elem) -> String {
        let digits = self.digits(a);
        let sep = if self.p > 10 { "." } else { "" };
        digits.iter().rev().map(|d| d.to_string()).collect::<Vec<_>>().join(sep)
    }

    pub fn parse_digit_string(&self, s: &str) -> Result<Elem> {
        let bad = || Error::Precondition(format!("malformed element digit string {s:?}"));
        let digits: Vec<u64> = if self.p > 10 {
            s.split('.').map(|d| d.parse::<u64>().map_err(|_| bad())).collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(u64::from).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        if digits.len() != self.degree() as usize || digits.iter().any(|&d| d >= self.p as u64) {
            return Err(bad());
        }
        let idx = digits.iter().fold(0u64, |acc, &d| acc * self.p as u64 + d);
        Ok(Elem(idx as u32))
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        if !self.add_table.is_empty() {
            return Elem(self.add_table[(a.0 * self.order + b.0) as usize] as u32);
        }
        self.add_slow(a, b)
    }

    fn add_slow(&self, a: Elem, b: Elem) -> Elem {
        match &self.base {
            None => Elem(((a.0 as u64 + b.0 as u64) % self.p as u64) as u32),
            Some(base) => self.digitwise(a, b, |x, y| base.add(x, y)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        if !self.neg_table.is_empty() {
            return Elem(self.neg_table[a.index()]);
        }
        self.neg_slow(a)
    }

    fn neg_slow(&self, a: Elem) -> Elem {
        match &self.base {
            None => Elem((self.p - a.0) % self.p),
            Some(base) => self.digitwise(a, Elem::ZERO, |x, _| base.neg(x)),
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    fn digitwise(&self, a: Elem, b: Elem, op: impl Fn(Elem, Elem) -> Elem) -> Elem {
        let base_order = self.base.as_ref().expect("extension field").order as u64;
        let (mut x, mut y) = (a.0 as u64, b.0 as u64);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.degree_over_base() {
            let d = op(Elem((x % base_order) as u32), Elem((y % base_order) as u32));
            out += d.0 as u64 * place;
            place *= base_order;
            x /= base_order;
            y /= base_order;
        }
        Elem(out as u32)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        if !self.exp.is_empty() {
            return Elem(self.exp[(self.log[a.index()] + self.log[b.index()]) as usize]);
        }
        self.mul_slow(a, b)
    }

    #[inline]
    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    /// `n·a` for an integer `n`.
    pub fn scale(&self, n: i64, a: Elem) -> Elem {
        self.mul(self.from_int(n), a)
    }

    fn mul_slow(&self, a: Elem, b: Elem) -> Elem {
        let base = match &self.base {
            None => return Elem(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32),
            Some(base) => base,
        };
        let d = self.degree_over_base() as usize;
        let ca = self.coeffs(a);
        let cb = self.coeffs(b);
        let mut prod = vec![Elem::ZERO; 2 * d - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = base.add(prod[i + j], base.mul(x, y));
            }
        }
        // z^d = -(f_0 + f_1 z + ... + f_{d-1} z^{d-1})
        for k in (d..2 * d - 1).rev() {
            let c = prod[k];
            if c.is_zero() {
                continue;
            }
            prod[k] = Elem::ZERO;
            for i in 0..d {
                let t = base.mul(c, self.modulus[i]);
                prod[k - d + i] = base.sub(prod[k - d + i], t);
            }
        }
        self.from_coeffs(&prod[..d])
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        if !self.exp.is_empty() {
            let group = (self.order - 1) as u64;
            let l = (self.log[a.index()] as u64 * (e % group)) % group;
            return Elem(self.exp[l as usize]);
        }
        self.pow_slow(a, e)
    }

    fn pow_slow(&self, a: Elem, mut e: u64) -> Elem {
        let mut result = Elem::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_slow(result, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        result
    }

    pub fn checked_inv(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            return None;
        }
        if !self.exp.is_empty() {
            let group = self.order - 1;
            let l = (group - self.log[a.index()]) % group;
            return Some(Elem(self.exp[l as usize]));
        }
        Some(self.pow_slow(a, self.order as u64 - 2))
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.checked_inv(a).expect("inverse of zero")
    }

    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    /// Discrete log with respect to the table generator, if tables exist.
    #[inline]
    pub fn log(&self, a: Elem) -> Option<u32> {
        if a.is_zero() || self.exp.is_empty() {
            None
        } else {
            Some(self.log[a.index()])
        }
    }

    /// Square-class test in odd characteristic (Euler's criterion).
    pub fn is_square(&self, a: Elem) -> bool {
        if a.is_zero() || self.p == 2 {
            return true;
        }
        self.pow(a, (self.order as u64 - 1) / 2) == Elem::ONE
    }
}

fn digits_of(mut n: u64, radix: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(n % radix);
        n /= radix;
    }
    out
}
