//! The quotient ring R_q = F_q[x]/(f(x)) with `f` monic of degree N.
//!
//! Also: evaluation at F_q and extension roots, root and binomial-divisor
//! discovery, and the R_{q,0} membership test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::{ExtFieldCtx, ExtFieldElement};
use crate::field::{is_irreducible_binomial, FieldError, PrimeModulus};
use crate::univariate;

/// Above this bound root search switches from exhaustive scan to gcd with
/// x^q - x.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("f must have degree at least 1")]
    DegreeTooSmall,
    #[error("f must be monic (leading coefficient {0} is not 1 mod q)")]
    NotMonic(i64),
    #[error("declared N = {declared} but f has {coeffs} coefficients")]
    DegreeMismatch { declared: usize, coeffs: usize },
    #[error("polynomial has {got} coefficients, ring needs {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The on-disk description of a ring: `{"N": .., "f": [c0, .., cN], "q": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub f: Vec<i64>,
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RqContext {
    f_int: Vec<i64>,
    f: Vec<u64>,
    modulus: PrimeModulus,
}

/// N residues, index = degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RingPoly {
    pub coeffs: Vec<u64>,
}

impl RingPoly {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl RqContext {
    pub fn new(f: Vec<i64>, modulus: PrimeModulus) -> Result<Self, RingError> {
        if f.len() < 2 {
            return Err(RingError::DegreeTooSmall);
        }
        let lead = *f.last().unwrap();
        if modulus.reduce_i64(lead) != 1 {
            return Err(RingError::NotMonic(lead));
        }
        let reduced = f.iter().map(|&c| modulus.reduce_i64(c)).collect();
        Ok(Self {
            f_int: f,
            f: reduced,
            modulus,
        })
    }

    pub fn from_file(pf: &PolyFile) -> Result<Self, RingError> {
        if pf.f.len() != pf.n + 1 {
            return Err(RingError::DegreeMismatch {
                declared: pf.n,
                coeffs: pf.f.len(),
            });
        }
        Self::new(pf.f.clone(), PrimeModulus::new(pf.q)?)
    }

    pub fn to_file(&self) -> PolyFile {
        PolyFile {
            n: self.degree(),
            f: self.f_int.clone(),
            q: self.modulus.value(),
        }
    }

    /// N.
    pub fn degree(&self) -> usize {
        self.f.len() - 1
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// Reduced coefficients of f, length N + 1.
    pub fn f(&self) -> &[u64] {
        &self.f
    }

    pub fn f_int(&self) -> &[i64] {
        &self.f_int
    }

    pub fn zero(&self) -> RingPoly {
        RingPoly {
            coeffs: vec![0; self.degree()],
        }
    }

    pub fn one(&self) -> RingPoly {
        let mut p = self.zero();
        p.coeffs[0] = 1;
        p
    }

    pub fn poly(&self, coeffs: &[u64]) -> Result<RingPoly, RingError> {
        self.check_len(coeffs.len())?;
        Ok(RingPoly {
            coeffs: coeffs.iter().map(|&c| c % self.modulus.value()).collect(),
        })
    }

    pub fn poly_from_i64(&self, coeffs: &[i64]) -> Result<RingPoly, RingError> {
        self.check_len(coeffs.len())?;
        Ok(RingPoly {
            coeffs: coeffs.iter().map(|&c| self.modulus.reduce_i64(c)).collect(),
        })
    }

    fn check_len(&self, got: usize) -> Result<(), RingError> {
        if got != self.degree() {
            Err(RingError::LengthMismatch {
                got,
                want: self.degree(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, x: &RingPoly, y: &RingPoly) -> Result<RingPoly, RingError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let m = self.modulus;
        Ok(RingPoly {
            coeffs: x.coeffs.iter().zip(&y.coeffs).map(|(&a, &b)| m.add(a, b)).collect(),
        })
    }

    pub fn sub(&self, x: &RingPoly, y: &RingPoly) -> Result<RingPoly, RingError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let m = self.modulus;
        Ok(RingPoly {
            coeffs: x.coeffs.iter().zip(&y.coeffs).map(|(&a, &b)| m.sub(a, b)).collect(),
        })
    }

    /// Schoolbook product followed by long division by the monic f.
    pub fn mul(&self, x: &RingPoly, y: &RingPoly) -> Result<RingPoly, RingError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let m = self.modulus;
        let q = m.value();
        let n = self.degree();
        let mut prod = vec![0u64; 2 * n - 1];
        if q < (1 << 32) {
            // products fit in u64, so a u128 accumulator never overflows
            let mut acc = vec![0u128; 2 * n - 1];
            for (i, &a) in x.coeffs.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in y.coeffs.iter().enumerate() {
                    acc[i + j] += (a * b) as u128;
                }
            }
            for (p, s) in prod.iter_mut().zip(acc) {
                *p = (s % q as u128) as u64;
            }
        } else {
            for (i, &a) in x.coeffs.iter().enumerate() {
                for (j, &b) in y.coeffs.iter().enumerate() {
                    prod[i + j] = m.add(prod[i + j], m.mul(a, b));
                }
            }
        }
        // x^N = -(f_0 + ... + f_{N-1} x^{N-1})
        for i in (n..2 * n - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..n {
                prod[i - n + j] = m.sub(prod[i - n + j], m.mul(c, self.f[j]));
            }
        }
        prod.truncate(n);
        Ok(RingPoly { coeffs: prod })
    }

    /// Horner evaluation at a base-field point.
    pub fn eval_fq(&self, p: &RingPoly, x: u64) -> u64 {
        let m = self.modulus;
        p.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| m.add(m.mul(acc, x), c))
    }

    /// Horner evaluation at an arbitrary extension element.
    pub fn eval(&self, p: &RingPoly, beta: &ExtFieldElement) -> ExtFieldElement {
        let ctx = beta.ctx();
        p.coeffs.iter().rev().fold(ctx.zero(), |acc, &c| {
            acc.try_mul(beta)
                .expect("same ctx")
                .try_add(&ctx.constant(c))
                .expect("same ctx")
        })
    }

    /// f(x) evaluated at `x`, as a check that `x` is a root.
    pub fn f_at(&self, x: u64) -> u64 {
        let m = self.modulus;
        self.f.iter().rev().fold(0u64, |acc, &c| m.add(m.mul(acc, x), c))
    }

    /// Roots of f in F_q with their multiplicative orders (0 for the root 0),
    /// sorted by value. `r_max > 0` keeps only roots of order at most `r_max`.
    pub fn find_fq_roots(&self, r_max: u64) -> Vec<(u64, u64)> {
        let m = self.modulus;
        let q = m.value();
        let roots: Vec<u64> = if q < EXHAUSTIVE_LIMIT {
            (0..q).into_par_iter().filter(|&x| self.f_at(x) == 0).collect()
        } else {
            let mut r: Vec<u64> = univariate::factors_of_degree(m, &self.f, 1)
                .into_iter()
                .map(|lin| m.neg(lin[0]))
                .collect();
            r.sort_unstable();
            r
        };
        roots
            .into_iter()
            .map(|x| (x, if x == 0 { 0 } else { m.mult_order(x).unwrap() }))
            .filter(|&(_, ord)| r_max == 0 || ord <= r_max)
            .collect()
    }

    /// Remainder of f on division by x^n - a: coordinate k is
    /// Σ_j a^j f_{nj+k}.
    pub fn rem_binomial(&self, n: usize, a: u64) -> Vec<u64> {
        fold_blocks(self.modulus, &self.f, n, a)
    }

    /// Every `(n, a, ord(a))` with x^n - a irreducible and dividing f mod q.
    pub fn find_binomial_factors(&self, n: usize) -> Vec<BinomialFactor> {
        let m = self.modulus;
        let q = m.value();
        if n < 2 || n > self.degree() {
            return Vec::new();
        }
        let candidates: Vec<u64> = if q < EXHAUSTIVE_LIMIT {
            (1..q)
                .into_par_iter()
                .filter(|&a| self.rem_binomial(n, a).iter().all(|&c| c == 0))
                .collect()
        } else {
            let mut v: Vec<u64> = univariate::factors_of_degree(m, &self.f, n)
                .into_iter()
                .filter(|g| g[1..n].iter().all(|&c| c == 0) && g[0] != 0)
                .map(|g| m.neg(g[0]))
                .collect();
            v.sort_unstable();
            v
        };
        candidates
            .into_iter()
            .filter(|&a| is_irreducible_binomial(n, m.elem(a)))
            .map(|a| BinomialFactor {
                n,
                a,
                order: m.mult_order(a).unwrap(),
            })
            .collect()
    }

    pub fn root_report(&self, r_max: u64, n_max: usize) -> RootReport {
        RootReport {
            fq_roots: self.find_fq_roots(r_max),
            binomial_factors: (2..=n_max)
                .flat_map(|n| self.find_binomial_factors(n))
                .collect(),
        }
    }

    /// Whether `ext` is the residue field of an irreducible factor of f,
    /// i.e. f(α) = 0 in F_{q^n}.
    pub fn has_root(&self, ext: &ExtFieldCtx) -> bool {
        if ext.modulus() != self.modulus {
            return false;
        }
        if ext.degree() == 1 {
            return self.f_at(ext.a().value()) == 0;
        }
        self.rem_binomial(ext.degree(), ext.a().value())
            .iter()
            .all(|&c| c == 0)
    }

    /// p(α) where α is the class of y in `ext`, computed blockwise:
    /// coordinate k is Σ_j a^j p_{nj+k}.
    pub fn eval_alpha(&self, p: &RingPoly, ext: &ExtFieldCtx) -> ExtFieldElement {
        if ext.degree() == 1 {
            return ext.constant(self.eval_fq(p, ext.a().value()));
        }
        let coords = fold_blocks(self.modulus, &p.coeffs, ext.degree(), ext.a().value());
        ext.from_coeffs(&coords).expect("n coordinates")
    }

    /// Membership in R_{q,0}: the n-1 sums Σ_j a^j p_{nj+k}, k = 1..n-1,
    /// must all vanish.
    pub fn rq0_membership(&self, p: &RingPoly, ext: &ExtFieldCtx) -> Rq0Membership {
        let witness_sums = if ext.degree() == 1 {
            Vec::new()
        } else {
            fold_blocks(self.modulus, &p.coeffs, ext.degree(), ext.a().value())[1..].to_vec()
        };
        Rq0Membership {
            is_member: witness_sums.iter().all(|&c| c == 0),
            witness_sums,
        }
    }
}

/// Σ_j a^j c_{nj+k} for k = 0..n-1 over all indices present.
fn fold_blocks(m: PrimeModulus, c: &[u64], n: usize, a: u64) -> Vec<u64> {
    let mut out = vec![0u64; n];
    let mut apow = 1u64;
    for block in c.chunks(n) {
        for (k, &v) in block.iter().enumerate() {
            out[k] = m.add(out[k], m.mul(apow, v));
        }
        apow = m.mul(apow, a);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialFactor {
    pub n: usize,
    pub a: u64,
    pub order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootReport {
    /// (α, ord(α)); order 0 marks the root 0.
    pub fq_roots: Vec<(u64, u64)>,
    pub binomial_factors: Vec<BinomialFactor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rq0Membership {
    pub is_member: bool,
    pub witness_sums: Vec<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fq(q: u64) -> PrimeModulus {
        PrimeModulus::new(q).unwrap()
    }

    pub(crate) fn instance1() -> RqContext {
        // x^23 - 2018x^20 + x^13 - 2018x^10 + 2017x^3 + 1
        let mut f = vec![0i64; 24];
        f[23] = 1;
        f[20] = -2018;
        f[13] = 1;
        f[10] = -2018;
        f[3] = 2017;
        f[0] = 1;
        RqContext::new(f, fq(4099)).unwrap()
    }

    #[test]
    fn rejects_non_monic() {
        assert_eq!(
            RqContext::new(vec![1, 2], fq(5)),
            Err(RingError::NotMonic(2))
        );
        assert_eq!(RqContext::new(vec![1], fq(5)), Err(RingError::DegreeTooSmall));
    }

    #[test]
    fn mul_examples() {
        let ctx = RqContext::new(vec![1, 0, 1], fq(5)).unwrap();
        let x = ctx.poly(&[0, 1]).unwrap();
        assert_eq!(ctx.mul(&x, &x).unwrap().coeffs, vec![4, 0]);
        let p = ctx.poly(&[3, 2]).unwrap();
        assert_eq!(ctx.mul(&p, &ctx.one()).unwrap(), p);
        assert_eq!(ctx.mul(&p, &ctx.zero()).unwrap(), ctx.zero());
    }

    #[test]
    fn mul_large_modulus_path_matches_small_path() {
        // same ring, modulus above 2^32 uses the slow accumulator
        let q = 4_294_967_311; // prime > 2^32
        let ctx = RqContext::new(vec![3, 0, 5, 1], fq(q)).unwrap();
        let a = ctx.poly(&[q - 1, 2, 7]).unwrap();
        let b = ctx.poly(&[4, q - 3, 1]).unwrap();
        let got = ctx.mul(&a, &b).unwrap();
        // oracle via univariate remainder
        let m = ctx.modulus();
        let prod = univariate::mul(m, &a.coeffs, &b.coeffs);
        let mut r = univariate::rem(m, &prod, ctx.f());
        r.resize(3, 0);
        assert_eq!(got.coeffs, r);
    }

    #[test]
    fn eval_examples() {
        let ctx = instance1();
        let ext = ExtFieldCtx::new(ctx.modulus(), 3, 2018).unwrap();
        let x = {
            let mut p = ctx.zero();
            p.coeffs[1] = 1;
            p
        };
        assert_eq!(ctx.eval(&x, &ext.alpha()), ext.alpha());
        let mut c = ctx.zero();
        c.coeffs[0] = 9;
        assert_eq!(ctx.eval(&c, &ext.alpha()), ext.constant(9));
        // x^3 - 2017 vanishes at a cube root of 2017
        let ctx3 = RqContext::new(vec![0, -2017, 0, 0, 1], fq(4099)).unwrap();
        let ext2 = ExtFieldCtx::new(ctx3.modulus(), 3, 2017).unwrap();
        let p = ctx3.poly_from_i64(&[-2017, 0, 0, 1]).unwrap();
        assert!(ctx3.eval(&p, &ext2.alpha()).is_zero());
    }

    #[test]
    fn eval_alpha_matches_horner() {
        let ctx = instance1();
        let ext = ExtFieldCtx::new(ctx.modulus(), 3, 2018).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = ctx
                .poly(&(0..23).map(|_| rng.random_range(0..4099)).collect::<Vec<_>>())
                .unwrap();
            assert_eq!(ctx.eval_alpha(&p, &ext), ctx.eval(&p, &ext.alpha()));
        }
    }

    #[test]
    fn eval_is_homomorphism() {
        for (ctx, ext) in [
            {
                let c = instance1();
                let e = ExtFieldCtx::new(c.modulus(), 3, 2018).unwrap();
                (c, e)
            },
            {
                // x^16 + 2x + 1 has the root -1
                let mut f = vec![0i64; 17];
                f[16] = 1;
                f[1] = 2;
                f[0] = 1;
                let c = RqContext::new(f, fq(4099)).unwrap();
                let e = ExtFieldCtx::new(c.modulus(), 1, 4098).unwrap();
                (c, e)
            },
        ] {
            assert!(ctx.has_root(&ext));
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let n = ctx.degree();
            for _ in 0..1000 {
                let p = ctx.poly(&(0..n).map(|_| rng.random_range(0..4099)).collect::<Vec<_>>()).unwrap();
                let s = ctx.poly(&(0..n).map(|_| rng.random_range(0..4099)).collect::<Vec<_>>()).unwrap();
                let lhs = ctx.eval_alpha(&ctx.mul(&p, &s).unwrap(), &ext);
                let rhs = ctx
                    .eval_alpha(&p, &ext)
                    .try_mul(&ctx.eval_alpha(&s, &ext))
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn roots_examples() {
        let ctx = RqContext::new(vec![1, 0, 1], fq(5)).unwrap();
        assert_eq!(ctx.find_fq_roots(0), vec![(2, 4), (3, 4)]);
        // x^2 + x + 1 over F_5 is irreducible
        let ctx = RqContext::new(vec![1, 1, 1], fq(5)).unwrap();
        assert!(ctx.find_fq_roots(0).is_empty());
        // x^256 + 2x + 1 has the root -1 mod 3677
        let mut f = vec![0i64; 257];
        f[256] = 1;
        f[1] = 2;
        f[0] = 1;
        let ctx = RqContext::new(f, fq(3677)).unwrap();
        assert!(ctx.find_fq_roots(2).contains(&(3676, 2)));
    }

    #[test]
    fn roots_agree_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [5u64, 13, 101, 4099] {
            for _ in 0..5 {
                let mut f: Vec<i64> = (0..6).map(|_| rng.random_range(0..q as i64)).collect();
                f.push(1);
                let ctx = RqContext::new(f, fq(q)).unwrap();
                let brute: Vec<u64> = (0..q).filter(|&x| ctx.f_at(x) == 0).collect();
                let found: Vec<u64> = ctx.find_fq_roots(0).into_iter().map(|r| r.0).collect();
                assert_eq!(found, brute);
                // gcd path gives the same roots (for squarefree parts)
                let mut via_gcd: Vec<u64> = univariate::factors_of_degree(ctx.modulus(), ctx.f(), 1)
                    .into_iter()
                    .map(|l| ctx.modulus().neg(l[0]))
                    .collect();
                via_gcd.sort_unstable();
                assert_eq!(via_gcd, brute);
            }
        }
    }

    #[test]
    fn binomial_factor_examples() {
        let ctx = instance1();
        let found = ctx.find_binomial_factors(3);
        assert!(found.contains(&BinomialFactor { n: 3, a: 2018, order: 6 }));
        for b in &found {
            assert!(ctx.rem_binomial(b.n, b.a).iter().all(|&c| c == 0));
            assert!(is_irreducible_binomial(b.n, ctx.modulus().elem(b.a)));
        }
        let ctx = RqContext::new(vec![-2, 0, 1], fq(3)).unwrap();
        assert_eq!(
            ctx.find_binomial_factors(2),
            vec![BinomialFactor { n: 2, a: 2, order: 2 }]
        );
        assert!(ctx.find_binomial_factors(3).is_empty());
    }

    #[test]
    fn large_modulus_binomial_path() {
        // (x^2 - 3)(x + 1) over a prime above the exhaustive limit
        let q = 8_388_619u64; // prime, = 3 mod 4
        let m = fq(q);
        assert!(is_irreducible_binomial(2, m.elem(3)) || is_irreducible_binomial(2, m.elem(q - 3)));
        let a = if is_irreducible_binomial(2, m.elem(3)) { 3 } else { 5 };
        let f: Vec<i64> = vec![-(a as i64), -(a as i64), 1, 1];
        let ctx = RqContext::new(f, m).unwrap();
        let found = ctx.find_binomial_factors(2);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].a, a);
        assert_eq!(ctx.find_fq_roots(0), vec![(q - 1, 2)]);
    }

    #[test]
    fn rq0_examples() {
        let ctx = RqContext::new(vec![1, 0, 0, 0, 1], fq(3)).unwrap();
        let ext = ExtFieldCtx::new(ctx.modulus(), 2, 2).unwrap();
        assert!(ctx.rq0_membership(&ctx.one(), &ext).is_member);
        let x = ctx.poly(&[0, 1, 0, 0]).unwrap();
        let m = ctx.rq0_membership(&x, &ext);
        assert!(!m.is_member);
        assert_eq!(m.witness_sums, vec![1]);
    }

    #[test]
    fn rq0_exhaustive_count_and_eval_oracle() {
        let ctx = RqContext::new(vec![1, 0, 0, 0, 1], fq(3)).unwrap();
        let ext = ExtFieldCtx::new(ctx.modulus(), 2, 2).unwrap();
        let mut members = 0;
        for idx in 0..81u64 {
            let c: Vec<u64> = (0..4).map(|i| (idx / 3u64.pow(i)) % 3).collect();
            let p = ctx.poly(&c).unwrap();
            let mem = ctx.rq0_membership(&p, &ext).is_member;
            let oracle = ctx.eval(&p, &ext.alpha()).is_in_base_field();
            assert_eq!(mem, oracle);
            members += mem as usize;
        }
        assert_eq!(members, 27);
    }

    #[test]
    fn poly_file_roundtrip() {
        let ctx = instance1();
        let pf = ctx.to_file();
        let json = serde_json::to_string(&pf).unwrap();
        assert!(json.contains("\"N\":23"));
        let back: PolyFile = serde_json::from_str(&json).unwrap();
        assert_eq!(RqContext::from_file(&back).unwrap(), ctx);
        let bad = PolyFile { n: 5, f: vec![1, 1], q: 7 };
        assert!(matches!(
            RqContext::from_file(&bad),
            Err(RingError::DegreeMismatch { .. })
        ));
    }
}
