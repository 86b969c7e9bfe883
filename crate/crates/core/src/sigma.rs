//! Look-up tables Σ of plausible evaluated (or traced) error values.
//!
//! Σ = { Σ_{j<r} x_j w^j mod q : |x_j| ≤ ⌊2√(blocklen)·σ⌋ }, where `w` is the
//! F_q root or the binomial constant `a`, and `r` its order. Stored as a
//! residue bitmap; built by iterated sumsets, so cost is O(q·B·r) no matter
//! how large the tuple space is.

use serde::Serialize;
use thiserror::Error;

use crate::field::PrimeModulus;

pub const DEFAULT_TABLE_CAP: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigmaError {
    #[error("tuple space (2·{bound}+1)^{r} = {size:.3e} exceeds the cap {cap:.3e}")]
    TableTooLarge { bound: i64, r: u64, size: f64, cap: f64 },
    #[error("block length must be at least 1")]
    EmptyBlock,
    #[error("order r must be at least 1")]
    ZeroOrder,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaTable {
    #[serde(skip)]
    bits: Vec<u64>,
    q: u64,
    len: usize,
    pub w: u64,
    /// Number of weights w^0..w^{r-1}: the order, or the term count if smaller.
    pub r: u64,
    pub blocklen: usize,
    /// 2·√(blocklen)·σ, the real per-block width.
    pub block_sigma: f64,
    /// ⌊block_sigma⌋, the integer range actually enumerated.
    pub coeff_bound: i64,
    /// (4·√(blocklen)·σ + 1)^r.
    pub analytic_bound: f64,
}

impl SigmaTable {
    pub fn build(
        modulus: PrimeModulus,
        w: u64,
        r: u64,
        blocklen: usize,
        sigma: f64,
        cap: f64,
    ) -> Result<Self, SigmaError> {
        if r == 0 {
            return Err(SigmaError::ZeroOrder);
        }
        if blocklen == 0 {
            return Err(SigmaError::EmptyBlock);
        }
        let block_sigma = 2.0 * (blocklen as f64).sqrt() * sigma;
        let coeff_bound = block_sigma.floor() as i64;
        let size = ((2 * coeff_bound + 1) as f64).powf(r as f64);
        if size > cap {
            return Err(SigmaError::TableTooLarge {
                bound: coeff_bound,
                r,
                size,
                cap,
            });
        }
        let q = modulus.value();
        let words = (q as usize).div_ceil(64);
        let mut cur = vec![0u64; words];
        set(&mut cur, 0);
        let mut wj = 1u64;
        for _ in 0..r {
            let steps: Vec<u64> = (-coeff_bound..=coeff_bound)
                .map(|x| modulus.mul(modulus.reduce_i64(x), wj))
                .collect();
            let mut next = vec![0u64; words];
            for v in iter_bits(&cur, q) {
                for &s in &steps {
                    set(&mut next, modulus.add(v, s));
                }
            }
            cur = next;
            wj = modulus.mul(wj, w);
        }
        let len = cur.iter().map(|w| w.count_ones() as usize).sum();
        Ok(Self {
            bits: cur,
            q,
            len,
            w: w % q,
            r,
            blocklen,
            block_sigma,
            coeff_bound,
            analytic_bound: (2.0 * block_sigma + 1.0).powf(r as f64),
        })
    }

    /// Table for an F_q root α of order r: blocks of ⌊N/r⌋ coefficients.
    /// When r > N every coefficient gets its own weight.
    pub fn for_fq_root(
        modulus: PrimeModulus,
        alpha: u64,
        r: u64,
        n_ring: usize,
        sigma: f64,
        cap: f64,
    ) -> Result<Self, SigmaError> {
        let (count, blocklen) = blocks(r, n_ring);
        Self::build(modulus, alpha, count, blocklen, sigma, cap)
    }

    /// Table for the trace attack through x^n - a, with ord(a) = r:
    /// N' = ⌊N/n⌋ traced terms grouped into N'' = max(1, ⌊N'/r⌋)-sized blocks.
    pub fn for_trace(
        modulus: PrimeModulus,
        a: u64,
        r: u64,
        n_ring: usize,
        n_ext: usize,
        sigma: f64,
        cap: f64,
    ) -> Result<Self, SigmaError> {
        let (n1, n2) = trace_block_lengths(n_ring, n_ext, r);
        if r as usize > n1 {
            let (count, blocklen) = blocks(r, n1);
            return Self::build(modulus, a, count, blocklen, sigma, cap);
        }
        Self::build(modulus, a, r, n2, sigma, cap)
    }

    #[inline]
    pub fn contains(&self, v: u64) -> bool {
        let v = v % self.q;
        (self.bits[(v / 64) as usize] >> (v % 64)) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn values(&self) -> impl Iterator<Item = u64> + '_ {
        iter_bits(&self.bits, self.q)
    }

    /// Size of the enumerated integer tuple space, (2B+1)^r.
    pub fn tuple_space(&self) -> f64 {
        ((2 * self.coeff_bound + 1) as f64).powf(self.r as f64)
    }
}

/// (N', N'') for the trace setting.
pub fn trace_block_lengths(n_ring: usize, n_ext: usize, r: u64) -> (usize, usize) {
    let n1 = n_ring / n_ext;
    let n2 = (n1 / r as usize).max(1);
    (n1, n2)
}

/// (number of weights, block length) for `terms` coefficients and order r.
fn blocks(r: u64, terms: usize) -> (u64, usize) {
    let terms = terms.max(1);
    if r as usize > terms {
        (terms as u64, 1)
    } else {
        (r, terms / r as usize)
    }
}

#[inline]
fn set(bits: &mut [u64], v: u64) {
    bits[(v / 64) as usize] |= 1 << (v % 64);
}

fn iter_bits(bits: &[u64], q: u64) -> impl Iterator<Item = u64> + '_ {
    bits.iter().enumerate().flat_map(move |(i, &word)| {
        (0..64u64)
            .filter(move |b| (word >> b) & 1 == 1)
            .map(move |b| i as u64 * 64 + b)
            .filter(move |&v| v < q)
    })
}
