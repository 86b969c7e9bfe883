//! The distinguishing attacks.
//!
//! Every attack reduces a sample (a, b) to a pair (A, B) of residues such
//! that the tentative error for a guess g is B - A·g:
//!
//! * F_q root α: A = a(α), B = b(α), and g guesses s(α).
//! * extension root α with α^n = a: A = n^{-1}a(α), B = n^{-1}Tr(b(α)), and
//!   g guesses Tr(s(α)). Needs a(α) ∈ F_q, i.e. a ∈ R_{q,0}.
//!
//! The loop over g ∈ F_q runs in parallel; results are collected in order,
//! so they match the sequential loop exactly.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{extended_threshold, usva_threshold};
use crate::extension::ExtFieldCtx;
use crate::field::PrimeModulus;
use crate::ring::{RingPoly, RqContext};
use crate::sampling::Sample;
use crate::sigma::SigmaTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("no samples supplied")]
    NoSamples,
    #[error("sample {index}: a(x) is not in R_q0")]
    NonMemberSample { index: usize },
    #[error("chunk size M0 = {m0} exceeds the {available} samples available")]
    InsufficientSamples { m0: usize, available: usize },
    #[error("chunk size M0 must be at least 1")]
    ZeroChunkSize,
    #[error("sample {index} has the wrong length for this ring")]
    LengthMismatch { index: usize },
    #[error("root belongs to a different field than the ring")]
    ContextMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum AttackVerdict {
    Guess(u64),
    NotPlwe,
    NotEnoughSamples(Vec<u64>),
}

impl AttackVerdict {
    fn from_survivors(mut g: Vec<u64>) -> Self {
        match g.len() {
            0 => AttackVerdict::NotPlwe,
            1 => AttackVerdict::Guess(g.pop().unwrap()),
            _ => AttackVerdict::NotEnoughSamples(g),
        }
    }

    pub fn is_not_plwe(&self) -> bool {
        matches!(self, AttackVerdict::NotPlwe)
    }

    pub fn survivors(&self) -> Vec<u64> {
        match self {
            AttackVerdict::Guess(g) => vec![*g],
            AttackVerdict::NotPlwe => Vec::new(),
            AttackVerdict::NotEnoughSamples(v) => v.clone(),
        }
    }

    pub fn contains(&self, g: u64) -> bool {
        match self {
            AttackVerdict::Guess(x) => *x == g,
            AttackVerdict::NotPlwe => false,
            AttackVerdict::NotEnoughSamples(v) => v.binary_search(&g).is_ok(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    Plwe,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub kind: DecisionKind,
    pub votes: i64,
    pub threshold: i64,
}

impl Decision {
    fn new(votes: i64, threshold: i64) -> Self {
        Self {
            kind: if votes >= threshold {
                DecisionKind::Plwe
            } else {
                DecisionKind::Uniform
            },
            votes,
            threshold,
        }
    }
}

/// Where the samples are evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Fq { alpha: u64 },
    Trace(ExtFieldCtx),
}

impl EvalMode {
    fn check(&self, ctx: &RqContext) -> Result<(), AttackError> {
        match self {
            EvalMode::Trace(ext) if ext.modulus() != ctx.modulus() => Err(AttackError::ContextMismatch),
            _ => Ok(()),
        }
    }

    /// Image of an error polynomial in the test space: e(α), or
    /// n^{-1}Tr(e(α)).
    pub fn error_image(&self, ctx: &RqContext, e: &RingPoly) -> u64 {
        let m = ctx.modulus();
        match self {
            EvalMode::Fq { alpha } => ctx.eval_fq(e, *alpha),
            EvalMode::Trace(ext) => {
                let n_inv = m.inv(ext.degree() as u64).expect("n < q");
                m.mul(n_inv, ctx.eval_alpha(e, ext).trace().value())
            }
        }
    }

    /// The (A, B) pair of every sample.
    pub fn prepare(&self, ctx: &RqContext, samples: &[Sample]) -> Result<Vec<(u64, u64)>, AttackError> {
        self.check(ctx)?;
        if samples.is_empty() {
            return Err(AttackError::NoSamples);
        }
        let m = ctx.modulus();
        let n_ring = ctx.degree();
        samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if s.a.len() != n_ring || s.b.len() != n_ring {
                    return Err(AttackError::LengthMismatch { index: i });
                }
                match self {
                    EvalMode::Fq { alpha } => Ok((ctx.eval_fq(&s.a, *alpha), ctx.eval_fq(&s.b, *alpha))),
                    EvalMode::Trace(ext) => {
                        let a_val = ctx.eval_alpha(&s.a, ext);
                        if !a_val.is_in_base_field() {
                            return Err(AttackError::NonMemberSample { index: i });
                        }
                        let n_inv = m.inv(ext.degree() as u64).expect("n < q");
                        let tr_b = ctx.eval_alpha(&s.b, ext).trace().value();
                        Ok((m.mul(n_inv, a_val.base_part().value()), m.mul(n_inv, tr_b)))
                    }
                }
            })
            .collect()
    }
}

/// All g with `test(B_i - A_i·g)` true for every sample, ascending.
fn survivors<F>(m: PrimeModulus, pairs: &[(u64, u64)], test: F) -> Vec<u64>
where
    F: Fn(u64) -> bool + Sync,
{
    (0..m.value())
        .into_par_iter()
        .filter(|&g| pairs.iter().all(|&(a, b)| test(m.sub(b, m.mul(a, g)))))
        .collect()
}

pub fn small_set_attack(
    ctx: &RqContext,
    samples: &[Sample],
    sigma: &SigmaTable,
    alpha: u64,
) -> Result<AttackVerdict, AttackError> {
    let pairs = EvalMode::Fq { alpha }.prepare(ctx, samples)?;
    Ok(AttackVerdict::from_survivors(survivors(ctx.modulus(), &pairs, |v| {
        sigma.contains(v)
    })))
}

/// g guesses Tr(s(α)); the tested value is n^{-1}(Tr(b(α)) - a(α)·g).
pub fn small_set_attack_trace(
    ctx: &RqContext,
    samples: &[Sample],
    sigma: &SigmaTable,
    ext: &ExtFieldCtx,
) -> Result<AttackVerdict, AttackError> {
    let pairs = EvalMode::Trace(ext.clone()).prepare(ctx, samples)?;
    Ok(AttackVerdict::from_survivors(survivors(ctx.modulus(), &pairs, |v| {
        sigma.contains(v)
    })))
}

pub fn small_values_attack(ctx: &RqContext, samples: &[Sample], alpha: u64) -> Result<AttackVerdict, AttackError> {
    let m = ctx.modulus();
    let pairs = EvalMode::Fq { alpha }.prepare(ctx, samples)?;
    Ok(AttackVerdict::from_survivors(survivors(m, &pairs, |v| {
        m.in_quarter_interval(v)
    })))
}

pub fn small_values_attack_trace(
    ctx: &RqContext,
    samples: &[Sample],
    ext: &ExtFieldCtx,
) -> Result<AttackVerdict, AttackError> {
    let m = ctx.modulus();
    let pairs = EvalMode::Trace(ext.clone()).prepare(ctx, samples)?;
    Ok(AttackVerdict::from_survivors(survivors(m, &pairs, |v| {
        m.in_quarter_interval(v)
    })))
}

/// One of the four three-way attacks, as used inside the voting driver.
#[derive(Clone, Debug)]
pub enum BasicAttack<'a> {
    SmallSet { alpha: u64, sigma: &'a SigmaTable },
    SmallValues { alpha: u64 },
    SmallSetTrace { ext: ExtFieldCtx, sigma: &'a SigmaTable },
    SmallValuesTrace { ext: ExtFieldCtx },
}

impl BasicAttack<'_> {
    pub fn run(&self, ctx: &RqContext, samples: &[Sample]) -> Result<AttackVerdict, AttackError> {
        match self {
            BasicAttack::SmallSet { alpha, sigma } => small_set_attack(ctx, samples, sigma, *alpha),
            BasicAttack::SmallValues { alpha } => small_values_attack(ctx, samples, *alpha),
            BasicAttack::SmallSetTrace { ext, sigma } => small_set_attack_trace(ctx, samples, sigma, ext),
            BasicAttack::SmallValuesTrace { ext } => small_values_attack_trace(ctx, samples, ext),
        }
    }

    /// r for the small-set family, 1 for small values.
    pub fn r_eff(&self) -> u64 {
        match self {
            BasicAttack::SmallSet { sigma, .. } | BasicAttack::SmallSetTrace { sigma, .. } => sigma.r,
            _ => 1,
        }
    }
}

/// Outcome of the voting driver, with each chunk's verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedOutcome {
    pub decision: Decision,
    pub chunks: usize,
    pub chunk_verdicts: Vec<bool>,
}

/// Splits `samples` into ⌊|S|/M0⌋ consecutive chunks (remainder dropped),
/// counts the chunks whose verdict is not NOT PLWE, and compares against
/// T = ⌈c·p0^{M0·r_eff}⌉.
pub fn extended_attack(
    ctx: &RqContext,
    samples: &[Sample],
    m0: usize,
    sub: &BasicAttack<'_>,
    r_eff: u64,
    p0: f64,
) -> Result<ExtendedOutcome, AttackError> {
    if m0 == 0 {
        return Err(AttackError::ZeroChunkSize);
    }
    if samples.is_empty() {
        return Err(AttackError::NoSamples);
    }
    if m0 > samples.len() {
        return Err(AttackError::InsufficientSamples {
            m0,
            available: samples.len(),
        });
    }
    let c = samples.len() / m0;
    let verdicts: Vec<bool> = samples[..c * m0]
        .par_chunks(m0)
        .map(|chunk| sub.run(ctx, chunk).map(|v| !v.is_not_plwe()))
        .collect::<Result<_, _>>()?;
    let votes = verdicts.iter().filter(|&&v| v).count() as i64;
    let threshold = extended_threshold(c as u64, m0 as u64, r_eff, p0);
    Ok(ExtendedOutcome {
        decision: Decision::new(votes, threshold),
        chunks: c,
        chunk_verdicts: verdicts,
    })
}

/// Counts the (g, i) pairs whose tentative error lands in [-q/4, q/4) and
/// compares with T = ⌈½(ℓq + 2ℓδ ± ℓ(1 - 1/q))⌉. δ is always supplied by
/// the caller.
pub fn unbounded_small_values_attack(
    ctx: &RqContext,
    samples: &[Sample],
    delta: f64,
    mode: &EvalMode,
) -> Result<Decision, AttackError> {
    let m = ctx.modulus();
    let pairs = mode.prepare(ctx, samples)?;
    let votes: u64 = (0..m.value())
        .into_par_iter()
        .map(|g| {
            pairs
                .iter()
                .filter(|&&(a, b)| m.in_quarter_interval(m.sub(b, m.mul(a, g))))
                .count() as u64
        })
        .sum();
    let threshold = usva_threshold(samples.len() as u64, m, delta);
    Ok(Decision::new(votes as i64, threshold))
}

/// Flat JSON shape shared by every attack.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackReport {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survivors: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub votes: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<i64>,
    pub wall_time_ms: f64,
    pub samples_used: usize,
}

impl AttackReport {
    pub fn from_verdict(v: &AttackVerdict, samples_used: usize, wall_time_ms: f64) -> Self {
        let (verdict, guess, survivors) = match v {
            AttackVerdict::Guess(g) => ("guess", Some(*g), None),
            AttackVerdict::NotPlwe => ("not_plwe", None, None),
            AttackVerdict::NotEnoughSamples(s) => ("not_enough_samples", None, Some(s.clone())),
        };
        Self {
            verdict: verdict.into(),
            guess,
            survivors,
            votes: None,
            threshold: None,
            wall_time_ms,
            samples_used,
        }
    }

    pub fn from_decision(d: &Decision, samples_used: usize, wall_time_ms: f64) -> Self {
        Self {
            verdict: match d.kind {
                DecisionKind::Plwe => "plwe",
                DecisionKind::Uniform => "uniform",
            }
            .into(),
            guess: None,
            survivors: None,
            votes: Some(d.votes),
            threshold: Some(d.threshold),
            wall_time_ms,
            samples_used,
        }
    }
}
