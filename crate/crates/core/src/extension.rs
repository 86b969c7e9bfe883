//! The binomial extension F_{q^n} = F_q[y]/(y^n - a).
//!
//! Elements hold `n` canonical residues, coordinate `i` being the coefficient
//! of `y^i`. The class of `y` is written α throughout.

use std::fmt;
use std::sync::Arc;

use crate::field::{is_irreducible_binomial, FieldElement, FieldError, PrimeModulus};

/// Context for one extension field. Cheap to clone (shared).
#[derive(Clone, PartialEq, Eq)]
pub struct ExtFieldCtx {
    inner: Arc<CtxInner>,
}

#[derive(PartialEq, Eq)]
struct CtxInner {
    n: usize,
    a: u64,
    modulus: PrimeModulus,
}

impl fmt::Debug for ExtFieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F_{}[y]/(y^{} - {})",
            self.inner.modulus, self.inner.n, self.inner.a
        )
    }
}

impl ExtFieldCtx {
    /// Fails unless `y^n - a` is irreducible. `n = 1` gives F_q itself, with
    /// α = a.
    pub fn new(modulus: PrimeModulus, n: usize, a: u64) -> Result<Self, FieldError> {
        if n == 0 {
            return Err(FieldError::InvalidDegree);
        }
        let a = a % modulus.value();
        if n >= 2 && !is_irreducible_binomial(n, modulus.elem(a)) {
            return Err(FieldError::ReducibleBinomial {
                n,
                a,
                q: modulus.value(),
            });
        }
        Ok(Self {
            inner: Arc::new(CtxInner { n, a, modulus }),
        })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.inner.n
    }

    #[inline]
    pub fn a(&self) -> FieldElement {
        self.inner.modulus.elem(self.inner.a)
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.inner.modulus
    }

    pub fn zero(&self) -> ExtFieldElement {
        ExtFieldElement {
            coeffs: vec![0; self.inner.n],
            ctx: self.clone(),
        }
    }

    pub fn one(&self) -> ExtFieldElement {
        self.constant(1)
    }

    pub fn constant(&self, c: u64) -> ExtFieldElement {
        let mut e = self.zero();
        e.coeffs[0] = c % self.inner.modulus.value();
        e
    }

    /// The class of `y`. For `n = 1` this is the residue `a`.
    pub fn alpha(&self) -> ExtFieldElement {
        if self.inner.n == 1 {
            return self.constant(self.inner.a);
        }
        let mut e = self.zero();
        e.coeffs[1] = 1;
        e
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<ExtFieldElement, FieldError> {
        if coeffs.len() != self.inner.n {
            return Err(FieldError::ContextMismatch);
        }
        let q = self.inner.modulus.value();
        Ok(ExtFieldElement {
            coeffs: coeffs.iter().map(|c| c % q).collect(),
            ctx: self.clone(),
        })
    }

    /// α^i as (power of a, coordinate): α^i = a^{⌊i/n⌋} y^{i mod n}.
    pub fn alpha_pow(&self, i: u64) -> ExtFieldElement {
        let n = self.inner.n as u64;
        if n == 1 {
            return self.constant(self.inner.modulus.pow(self.inner.a, i));
        }
        let mut e = self.zero();
        e.coeffs[(i % n) as usize] = self.inner.modulus.pow(self.inner.a, i / n);
        e
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ExtFieldElement {
    coeffs: Vec<u64>,
    ctx: ExtFieldCtx,
}

impl fmt::Debug for ExtFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} in {:?}", self.coeffs, self.ctx)
    }
}

impl ExtFieldElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn ctx(&self) -> &ExtFieldCtx {
        &self.ctx
    }

    /// True iff coordinates `1..n` vanish.
    pub fn is_in_base_field(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Constant coordinate as a base-field element.
    pub fn base_part(&self) -> FieldElement {
        self.ctx.modulus().elem(self.coeffs[0])
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.ctx != other.ctx {
            Err(FieldError::ContextMismatch)
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        let m = self.ctx.modulus();
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&x, &y)| m.add(x, y))
                .collect(),
            ctx: self.ctx.clone(),
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        let m = self.ctx.modulus();
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&x, &y)| m.sub(x, y))
                .collect(),
            ctx: self.ctx.clone(),
        })
    }

    pub fn neg(&self) -> Self {
        let m = self.ctx.modulus();
        Self {
            coeffs: self.coeffs.iter().map(|&x| m.neg(x)).collect(),
            ctx: self.ctx.clone(),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        let m = self.ctx.modulus();
        Self {
            coeffs: self.coeffs.iter().map(|&x| m.mul(x, c)).collect(),
            ctx: self.ctx.clone(),
        }
    }

    /// Schoolbook product with the reduction y^n -> a.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        let m = self.ctx.modulus();
        let n = self.coeffs.len();
        let a = self.ctx.a().value();
        let mut out = vec![0u64; n];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in rhs.coeffs.iter().enumerate() {
                let t = m.mul(x, y);
                let k = i + j;
                if k < n {
                    out[k] = m.add(out[k], t);
                } else {
                    out[k - n] = m.add(out[k - n], m.mul(t, a));
                }
            }
        }
        Ok(Self {
            coeffs: out,
            ctx: self.ctx.clone(),
        })
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut acc = self.ctx.one();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.try_mul(&base).expect("same ctx");
            }
            base = base.try_mul(&base).expect("same ctx");
            exp >>= 1;
        }
        acc
    }

    /// β^q.
    pub fn frobenius(&self) -> Self {
        self.pow(self.ctx.modulus().value())
    }

    /// The conjugates β, β^q, ..., β^{q^{n-1}}.
    pub fn conjugates(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let mut cur = self.clone();
        for _ in 0..self.coeffs.len() {
            let next = cur.frobenius();
            out.push(cur);
            cur = next;
        }
        out
    }

    /// Product of all conjugates.
    pub fn norm(&self) -> FieldElement {
        let prod = self
            .conjugates()
            .iter()
            .fold(self.ctx.one(), |acc, c| acc.try_mul(c).expect("same ctx"));
        debug_assert!(prod.is_in_base_field());
        prod.base_part()
    }

    /// β^{-1} = (β^q ... β^{q^{n-1}}) / N(β).
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let conj = self.conjugates();
        let partial = conj[1..]
            .iter()
            .fold(self.ctx.one(), |acc, c| acc.try_mul(c).expect("same ctx"));
        let norm = partial.try_mul(self)?.base_part();
        Ok(partial.scale(norm.inv()?.value()))
    }

    /// Tr(β). Since Tr(y^i) = 0 for 0 < i < n and Tr(1) = n, this is n·β_0.
    pub fn trace(&self) -> FieldElement {
        let m = self.ctx.modulus();
        m.elem(m.mul(self.coeffs.len() as u64 % m.value(), self.coeffs[0]))
    }

    /// Tr(β) as the literal sum of conjugates. Slow; kept as a cross-check.
    pub fn trace_frobenius(&self) -> Self {
        self.conjugates()
            .iter()
            .fold(self.ctx.zero(), |acc, c| acc.try_add(c).expect("same ctx"))
    }
}
