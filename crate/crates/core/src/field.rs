//! Prime-field arithmetic over F_q.
//!
//! Residues are stored canonically in `[0, q)`. The centered representative
//! is computed on demand. Every product goes through a 128-bit intermediate,
//! which is why `q` is capped below 2^62.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("q must be prime (got {0})")]
    NotPrime(u64),
    #[error("q must satisfy 2 < q < 2^62 (got {0})")]
    ModulusOutOfRange(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    ContextMismatch,
    #[error("zero has no multiplicative order")]
    ZeroHasNoOrder,
    #[error("x^{n} - {a} is reducible over F_{q}")]
    ReducibleBinomial { n: usize, a: u64, q: u64 },
    #[error("extension degree must be at least 1")]
    InvalidDegree,
}

/// An odd prime modulus `2 < q < 2^62`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus {
    q: u64,
}

impl TryFrom<u64> for PrimeModulus {
    type Error = FieldError;
    fn try_from(q: u64) -> Result<Self, Self::Error> {
        PrimeModulus::new(q)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(m: PrimeModulus) -> u64 {
        m.q
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

impl PrimeModulus {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q <= 2 || q >= MAX_MODULUS {
            return Err(FieldError::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    /// Always 1 or 3.
    #[inline]
    pub fn q_mod4(&self) -> u64 {
        self.q % 4
    }

    /// `+1` when `q ≡ 1 (mod 4)`, `-1` when `q ≡ 3 (mod 4)`. This is the sign
    /// in every `1/2 ± 1/(2q)` expression.
    #[inline]
    pub fn pm_sign(&self) -> f64 {
        if self.q_mod4() == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Exact probability that a uniform residue falls in `[-q/4, q/4)`:
    /// `1/2 ± 1/(2q)`.
    pub fn uniform_quarter_rate(&self) -> f64 {
        0.5 + self.pm_sign() / (2.0 * self.q as f64)
    }

    #[inline]
    pub fn elem(&self, v: u64) -> FieldElement {
        FieldElement {
            value: v % self.q,
            modulus: *self,
        }
    }

    #[inline]
    pub fn from_i64(&self, v: i64) -> FieldElement {
        self.elem(self.reduce_i64(v))
    }

    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn reduce_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.q as i128) as u64
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        let s = x + y;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        if x >= y {
            x - y
        } else {
            x + self.q - y
        }
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        if x == 0 {
            0
        } else {
            self.q - x
        }
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.q as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: u64) -> Result<u64, FieldError> {
        let x = x % self.q;
        if x == 0 {
            return Err(FieldError::DivisionByZero);
        }
        // extended Euclid on signed 128-bit values
        let (mut r0, mut r1) = (self.q as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        Ok(self.reduce_i128(t0))
    }

    /// Unique `c ≡ x (mod q)` with `|c| ≤ (q-1)/2`.
    #[inline]
    pub fn centered(&self, x: u64) -> i64 {
        let x = x % self.q;
        if x > self.q / 2 {
            x as i64 - self.q as i64
        } else {
            x as i64
        }
    }

    /// Whether the centered representative lies in `[-q/4, q/4)`, tested as
    /// the integer inequality `-q ≤ 4c < q`.
    #[inline]
    pub fn in_quarter_interval(&self, x: u64) -> bool {
        let c = self.centered(x) as i128;
        let q = self.q as i128;
        -q <= 4 * c && 4 * c < q
    }

    /// Multiplicative order of a nonzero residue.
    pub fn mult_order(&self, x: u64) -> Result<u64, FieldError> {
        let x = x % self.q;
        if x == 0 {
            return Err(FieldError::ZeroHasNoOrder);
        }
        let mut order = self.q - 1;
        for (p, _) in factor(self.q - 1) {
            while order % p == 0 && self.pow(x, order / p) == 1 {
                order /= p;
            }
        }
        Ok(order)
    }
}

/// A residue modulo a [`PrimeModulus`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus.q)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus != other.modulus {
            Err(FieldError::ContextMismatch)
        } else {
            Ok(())
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self, FieldError> {
        self.check(&rhs)?;
        Ok(self.modulus.elem(self.modulus.add(self.value, rhs.value)))
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self, FieldError> {
        self.check(&rhs)?;
        Ok(self.modulus.elem(self.modulus.sub(self.value, rhs.value)))
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self, FieldError> {
        self.check(&rhs)?;
        Ok(self.modulus.elem(self.modulus.mul(self.value, rhs.value)))
    }

    pub fn try_div(self, rhs: Self) -> Result<Self, FieldError> {
        self.check(&rhs)?;
        self.try_mul(rhs.inv()?)
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        Ok(self.modulus.elem(self.modulus.inv(self.value)?))
    }

    pub fn pow(self, exp: u64) -> Self {
        self.modulus.elem(self.modulus.pow(self.value, exp))
    }

    pub fn centered(&self) -> i64 {
        self.modulus.centered(self.value)
    }

    pub fn in_quarter_interval(&self) -> bool {
        self.modulus.in_quarter_interval(self.value)
    }

    pub fn mult_order(&self) -> Result<u64, FieldError> {
        self.modulus.mult_order(self.value)
    }
}

// The operator forms panic on mismatched moduli; use the `try_*` methods
// where operands may come from different fields.
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("operands must share a modulus")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("operands must share a modulus")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("operands must share a modulus")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        self.modulus.elem(self.modulus.neg(self.value))
    }
}

/// Decides whether `x^n - a` is irreducible over F_q.
///
/// Classical criterion: every prime `p | n` divides `ord(a)` and does not
/// divide `(q-1)/ord(a)`; additionally `q ≡ 1 (mod 4)` whenever `4 | n`.
pub fn is_irreducible_binomial(n: usize, a: FieldElement) -> bool {
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    if a.is_zero() {
        return false;
    }
    let q = a.modulus();
    let order = q.mult_order(a.value()).expect("nonzero");
    let cofactor = (q.value() - 1) / order;
    for (p, _) in factor(n as u64) {
        if order % p != 0 || cofactor % p == 0 {
            return false;
        }
    }
    !(n % 4 == 0 && q.q_mod4() != 1)
}

/// Prime factorisation by trial division.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
