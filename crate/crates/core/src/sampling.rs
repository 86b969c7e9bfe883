//! Error distributions, the two sample oracles and the R_{q,0} samplers.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::ExtFieldCtx;
use crate::ring::{RingPoly, RqContext};

/// Mass of a centered Gaussian inside [-2σ, 2σ], rounded as in the
/// literature. Used for every untruncated bound.
pub const P0_UNTRUNCATED: f64 = 0.954500;

/// Default invocation cap for the rejection sampler.
pub const DEFAULT_RQ0_CAP: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("sigma must be a positive finite number (got {0})")]
    BadSigma(f64),
    #[error("no member of R_q0 after {cap} oracle invocations")]
    BudgetExhausted { cap: u64 },
    #[error("sample file line {line}: {msg}")]
    BadLine { line: usize, msg: String },
    #[error("sample file is empty")]
    EmptyFile,
    #[error("i/o: {0}")]
    Io(String),
}

/// Independent 64-bit seed for stream `index` under `master` (splitmix64
/// finaliser over both words).
pub fn sub_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    sigma: f64,
    truncated: bool,
}

impl GaussianSpec {
    pub fn new(sigma: f64, truncated: bool) -> Result<Self, SamplerError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(SamplerError::BadSigma(sigma));
        }
        Ok(Self { sigma, truncated })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn p0(&self) -> f64 {
        if self.truncated {
            1.0
        } else {
            P0_UNTRUNCATED
        }
    }

    /// ⌊2σ⌋, the largest magnitude a truncated draw can take.
    pub fn truncation_bound(&self) -> i64 {
        (2.0 * self.sigma).floor() as i64
    }
}

/// Rounded N(0, σ²). Truncated specs reject the continuous draw unless
/// |x| ≤ 2σ; the extra check on the rounded value only matters when the
/// fractional part of 2σ is at least 1/2.
pub fn draw_gaussian<R: Rng + ?Sized>(spec: &GaussianSpec, rng: &mut R) -> i64 {
    let normal = Normal::new(0.0, spec.sigma).expect("sigma validated");
    if !spec.truncated {
        return normal.sample(rng).round() as i64;
    }
    let width = 2.0 * spec.sigma;
    let bound = spec.truncation_bound();
    loop {
        let x: f64 = normal.sample(rng);
        if x.abs() <= width {
            let e = x.round() as i64;
            if e.abs() <= bound {
                return e;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sample {
    pub a: RingPoly,
    pub b: RingPoly,
}

/// A sample whose `a` lies in R_{q,0}, with the number of oracle calls spent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rq0Draw {
    pub sample: Sample,
    pub count: u64,
}

pub fn uniform_poly<R: Rng + ?Sized>(ctx: &RqContext, rng: &mut R) -> RingPoly {
    let q = ctx.modulus().value();
    RingPoly {
        coeffs: (0..ctx.degree()).map(|_| rng.random_range(0..q)).collect(),
    }
}

pub fn gaussian_vec<R: Rng + ?Sized>(spec: &GaussianSpec, len: usize, rng: &mut R) -> Vec<i64> {
    (0..len).map(|_| draw_gaussian(spec, rng)).collect()
}

pub fn uniform_oracle<R: Rng + ?Sized>(ctx: &RqContext, rng: &mut R) -> Sample {
    Sample {
        a: uniform_poly(ctx, rng),
        b: uniform_poly(ctx, rng),
    }
}

/// The public instance plus its hidden secret.
#[derive(Clone, Debug)]
pub struct PlweInstance {
    ctx: RqContext,
    gauss: GaussianSpec,
    secret: RingPoly,
}

impl PlweInstance {
    /// Secret drawn uniformly from R_q.
    pub fn new<R: Rng + ?Sized>(ctx: RqContext, gauss: GaussianSpec, rng: &mut R) -> Self {
        let secret = uniform_poly(&ctx, rng);
        Self { ctx, gauss, secret }
    }

    /// Injects a known secret. Fails on a length mismatch.
    pub fn with_secret(
        ctx: RqContext,
        gauss: GaussianSpec,
        secret: RingPoly,
    ) -> Result<Self, crate::ring::RingError> {
        let secret = ctx.poly(&secret.coeffs)?;
        Ok(Self { ctx, gauss, secret })
    }

    pub fn ctx(&self) -> &RqContext {
        &self.ctx
    }

    pub fn gauss(&self) -> &GaussianSpec {
        &self.gauss
    }

    /// For verifying attack output only; an attacker never sees this.
    pub fn reveal_secret(&self) -> &RingPoly {
        &self.secret
    }

    /// `(a, a·s + e)` for a given `a` and signed error vector.
    pub fn sample_from_parts(&self, a: RingPoly, e: &[i64]) -> Sample {
        let e = self.ctx.poly_from_i64(e).expect("error has length N");
        let prod = self.ctx.mul(&a, &self.secret).expect("same ring");
        let b = self.ctx.add(&prod, &e).expect("same ring");
        Sample { a, b }
    }

    /// PLWE sample with the given `a`; returns the raw error too.
    pub fn sample_with_a<R: Rng + ?Sized>(&self, a: RingPoly, rng: &mut R) -> (Sample, Vec<i64>) {
        let e = gaussian_vec(&self.gauss, self.ctx.degree(), rng);
        (self.sample_from_parts(a, &e), e)
    }

    pub fn plwe_oracle<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        let a = uniform_poly(&self.ctx, rng);
        self.sample_with_a(a, rng).0
    }
}

pub fn plwe_oracle<R: Rng + ?Sized>(inst: &PlweInstance, rng: &mut R) -> Sample {
    inst.plwe_oracle(rng)
}

/// Either oracle, so callers can stay agnostic of the ground truth.
#[derive(Clone, Copy, Debug)]
pub enum Oracle<'a> {
    Uniform(&'a RqContext),
    Plwe(&'a PlweInstance),
}

impl Oracle<'_> {
    pub fn ctx(&self) -> &RqContext {
        match self {
            Oracle::Uniform(c) => c,
            Oracle::Plwe(i) => i.ctx(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Sample {
        match self {
            Oracle::Uniform(c) => uniform_oracle(c, rng),
            Oracle::Plwe(i) => i.plwe_oracle(rng),
        }
    }

    /// Same distribution as [`Oracle::sample`] conditioned on the given `a`.
    pub fn sample_with_a<R: Rng + ?Sized>(&self, a: RingPoly, rng: &mut R) -> Sample {
        match self {
            Oracle::Uniform(c) => Sample {
                a,
                b: uniform_poly(c, rng),
            },
            Oracle::Plwe(i) => i.sample_with_a(a, rng).0,
        }
    }

    /// Rejection sampling into R_{q,0}.
    pub fn sample_rq0<R: Rng + ?Sized>(
        &self,
        ext: &ExtFieldCtx,
        rng: &mut R,
        cap: u64,
    ) -> Result<Rq0Draw, SamplerError> {
        sample_rq0(|r: &mut R| self.sample(r), self.ctx(), ext, rng, cap)
    }

    /// Direct construction: `a` uniform over R_{q,0}, then the oracle's `b`.
    /// Counts as one invocation.
    pub fn sample_rq0_direct<R: Rng + ?Sized>(&self, ext: &ExtFieldCtx, rng: &mut R) -> Rq0Draw {
        let a = uniform_rq0(self.ctx(), ext, rng);
        Rq0Draw {
            sample: self.sample_with_a(a, rng),
            count: 1,
        }
    }
}

/// Draws from `source` until `a` lands in R_{q,0}. `count` includes the
/// accepted draw, so its mean is q^{n-1}.
pub fn sample_rq0<R, F>(
    mut source: F,
    ctx: &RqContext,
    ext: &ExtFieldCtx,
    rng: &mut R,
    cap: u64,
) -> Result<Rq0Draw, SamplerError>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Sample,
{
    for count in 1..=cap {
        let sample = source(rng);
        if ctx.rq0_membership(&sample.a, ext).is_member {
            return Ok(Rq0Draw { sample, count });
        }
    }
    Err(SamplerError::BudgetExhausted { cap })
}

/// Uniform element of R_{q,0}: draw everything, then solve the n-1 linear
/// conditions for p_1..p_{n-1}, i.e. p_k = -Σ_{j≥1} a^j p_{nj+k}.
pub fn uniform_rq0<R: Rng + ?Sized>(ctx: &RqContext, ext: &ExtFieldCtx, rng: &mut R) -> RingPoly {
    let mut p = uniform_poly(ctx, rng);
    let n = ext.degree();
    if n == 1 {
        return p;
    }
    let m = ctx.modulus();
    let a = ext.a().value();
    let len = p.coeffs.len();
    for k in 1..n.min(len) {
        let mut s = 0u64;
        let mut apow = a;
        let mut idx = n + k;
        while idx < len {
            s = m.add(s, m.mul(apow, p.coeffs[idx]));
            apow = m.mul(apow, a);
            idx += n;
        }
        p.coeffs[k] = m.neg(s);
    }
    p
}

pub fn write_samples<W: Write>(mut w: W, samples: &[Sample]) -> Result<(), SamplerError> {
    for s in samples {
        let line = serde_json::to_string(s).map_err(|e| SamplerError::Io(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| SamplerError::Io(e.to_string()))?;
    }
    Ok(())
}

/// One JSON sample per line; blank lines are skipped. Lengths are checked
/// against the ring.
pub fn read_samples<B: BufRead>(reader: B, ctx: &RqContext) -> Result<Vec<Sample>, SamplerError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SamplerError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Sample = serde_json::from_str(&line).map_err(|e| SamplerError::BadLine {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let a = ctx.poly(&s.a.coeffs);
        let b = ctx.poly(&s.b.coeffs);
        match (a, b) {
            (Ok(a), Ok(b)) => out.push(Sample { a, b }),
            (Err(e), _) | (_, Err(e)) => {
                return Err(SamplerError::BadLine {
                    line: i + 1,
                    msg: e.to_string(),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(SamplerError::EmptyFile);
    }
    Ok(out)
}
