//! Vulnerability scanner: finds every F_q root and irreducible binomial
//! divisor of f, and says which attacks apply, citing the inequality that
//! decides it with both sides evaluated.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    delta_probability, extended_applicability, min_samples_for_posterior, BoundFamily, ExtendedApplicability,
    ProbabilityReport, VarianceCase, DEFAULT_SERIES_TOL,
};
use crate::ring::RqContext;
use crate::sampling::GaussianSpec;
use crate::sigma::{trace_block_lengths, SigmaError, SigmaTable, DEFAULT_TABLE_CAP};

pub const DEFAULT_N_MAX: usize = 4;

/// Posterior target used for the "samples needed" column.
pub const SCAN_TARGET: f64 = 0.99;

#[derive(Clone, Debug, Serialize)]
pub struct VulnReport {
    pub q: u64,
    #[serde(rename = "N")]
    pub n_ring: usize,
    pub sigma: f64,
    pub truncated: bool,
    pub p0: f64,
    pub n_max: usize,
    pub entries: Vec<RootEntry>,
}

impl VulnReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn applicable(&self) -> impl Iterator<Item = (&RootEntry, &AttackAssessment)> {
        self.entries
            .iter()
            .flat_map(|e| e.attacks.iter().map(move |a| (e, a)))
            .filter(|(_, a)| a.applicable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum RootKind {
    FqRoot { alpha: u64, order: u64 },
    Binomial { n: usize, a: u64, order: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct RootEntry {
    pub root: RootKind,
    pub case: VarianceCase,
    pub sigma_bar: f64,
    /// (N', N'') in the trace setting.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_blocks: Option<(usize, usize)>,
    pub attacks: Vec<AttackAssessment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackFamily {
    SmallSet,
    SmallValues,
    UnboundedSmallValues,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaInfo {
    pub size: usize,
    pub analytic_bound: f64,
    pub tuple_space: f64,
    pub coeff_bound: i64,
    pub blocklen: usize,
    pub weights: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackAssessment {
    pub attack: AttackFamily,
    pub applicable: bool,
    /// The deciding inequality, both sides evaluated.
    pub precondition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_table: Option<SigmaInfo>,
    /// Least M for which the posterior bound reaches SCAN_TARGET.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<ProbabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extended: Option<ExtendedApplicability>,
}

pub fn scan_instance(ctx: &RqContext, gauss: &GaussianSpec, n_max: usize) -> VulnReport {
    scan_with_cap(ctx, gauss, n_max, DEFAULT_TABLE_CAP)
}

pub fn scan_with_cap(ctx: &RqContext, gauss: &GaussianSpec, n_max: usize, cap: f64) -> VulnReport {
    let m = ctx.modulus();
    let n_ring = ctx.degree();
    let sigma = gauss.sigma();
    let mut entries = Vec::new();

    // the root 0 has no multiplicative order and is skipped
    for (alpha, order) in ctx.find_fq_roots(0).into_iter().filter(|&(_, o)| o > 0) {
        let case = VarianceCase::fq_root(m, alpha, n_ring);
        let table = SigmaTable::for_fq_root(m, alpha, order, n_ring, sigma, cap);
        entries.push(assess(ctx, gauss, RootKind::FqRoot { alpha, order }, case, None, table));
    }
    for n in 2..=n_max {
        for bf in ctx.find_binomial_factors(n) {
            let case = VarianceCase::trace(m, bf.a, n, n_ring);
            let blocks = trace_block_lengths(n_ring, n, bf.order);
            let table = SigmaTable::for_trace(m, bf.a, bf.order, n_ring, n, sigma, cap);
            let root = RootKind::Binomial {
                n,
                a: bf.a,
                order: bf.order,
            };
            entries.push(assess(ctx, gauss, root, case, Some(blocks), table));
        }
    }
    VulnReport {
        q: m.value(),
        n_ring,
        sigma,
        truncated: gauss.truncated(),
        p0: gauss.p0(),
        n_max,
        entries,
    }
}

fn assess(
    ctx: &RqContext,
    gauss: &GaussianSpec,
    root: RootKind,
    case: VarianceCase,
    trace_blocks: Option<(usize, usize)>,
    table: Result<SigmaTable, SigmaError>,
) -> RootEntry {
    let m = ctx.modulus();
    let qf = m.value() as f64;
    let p0 = gauss.p0();
    let sigma_bar = case.sigma_bar(gauss.sigma());
    let mut attacks = Vec::new();

    attacks.push(match table {
        Ok(t) => {
            let rhs = qf * p0.powf(t.r as f64);
            let size = t.len() as f64;
            let applicable = size < rhs;
            let family = BoundFamily::SmallSet {
                sigma_size: size,
                r: t.r,
            };
            AttackAssessment {
                attack: AttackFamily::SmallSet,
                applicable,
                precondition: format!(
                    "|Sigma| = {} (analytic bound {:.3}) {} q*p0^r = {rhs:.3}",
                    t.len(),
                    t.analytic_bound,
                    if applicable { "<" } else { ">=" }
                ),
                infeasible: None,
                min_samples: applicable
                    .then(|| min_samples_for_posterior(family, m, gauss, SCAN_TARGET))
                    .flatten(),
                extended: (applicable && !gauss.truncated()).then(|| {
                    let probe = extended_applicability(m, size / qf, t.r, p0, 1);
                    extended_applicability(m, size / qf, t.r, p0, probe.min_m0.unwrap_or(1))
                }),
                sigma_table: Some(SigmaInfo {
                    size: t.len(),
                    analytic_bound: t.analytic_bound,
                    tuple_space: t.tuple_space(),
                    coeff_bound: t.coeff_bound,
                    blocklen: t.blocklen,
                    weights: t.r,
                }),
                probability: None,
            }
        }
        Err(e) => AttackAssessment {
            attack: AttackFamily::SmallSet,
            applicable: false,
            precondition: "Sigma table not built".into(),
            infeasible: Some(format!("{e} (order too large)")),
            sigma_table: None,
            min_samples: None,
            probability: None,
            extended: None,
        },
    });

    let family = BoundFamily::SmallValues { sigma_bar };
    let quarter = qf / 4.0;
    let bounded = 2.0 * sigma_bar <= quarter;
    attacks.push(AttackAssessment {
        attack: AttackFamily::SmallValues,
        applicable: bounded,
        precondition: format!(
            "2*sigma_bar = {:.3} {} q/4 = {quarter:.3}",
            2.0 * sigma_bar,
            if bounded { "<=" } else { ">" }
        ),
        infeasible: None,
        sigma_table: None,
        min_samples: bounded
            .then(|| min_samples_for_posterior(family, m, gauss, SCAN_TARGET))
            .flatten(),
        probability: None,
        extended: None,
    });

    let prob = delta_probability(m, sigma_bar, DEFAULT_SERIES_TOL);
    let offset = m.pm_sign() / (2.0 * qf);
    let positive = prob.big_delta > 0.0;
    attacks.push(AttackAssessment {
        attack: AttackFamily::UnboundedSmallValues,
        applicable: positive,
        precondition: format!(
            "delta = {:.6e} {} +-1/(2q) = {offset:.6e} (Delta = {:.6e})",
            prob.delta,
            if positive { ">" } else { "<=" },
            prob.big_delta
        ),
        infeasible: None,
        sigma_table: None,
        min_samples: None,
        probability: Some(prob),
        extended: None,
    });

    RootEntry {
        root,
        case,
        sigma_bar,
        trace_blocks,
        attacks,
    }
}
