//! `analyze`: δ, Δ, the distribution ratio and minimal-M tables for each
//! root, optionally checked against a Monte Carlo run on real error
//! polynomials and against values printed with the instance.

use serde::Serialize;

use crate::analysis::{
    delta_probability, mc_event_rate, min_samples_for_posterior, BoundFamily, ProbabilityReport, VarianceCase,
    DEFAULT_SERIES_TOL,
};
use crate::attacks::EvalMode;
use crate::extension::ExtFieldCtx;
use crate::sampling::sub_seed;
use crate::scan::{scan_instance, RootKind};
use crate::sigma::{SigmaTable, DEFAULT_TABLE_CAP};

use super::campaign::RootSummary;
use super::config::{ReferenceValues, ResolvedRoot, Validated};

pub const DEFAULT_TARGETS: [f64; 3] = [0.9, 0.99, 0.999];

#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyzeOptions {
    /// Extra posterior target for the minimal-M table.
    pub min_m_target: Option<f64>,
    /// Monte Carlo draws of real error polynomials; 0 skips the check.
    pub mc_draws: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinMRow {
    /// small_set_analytic, small_set_exact or small_values.
    pub bound: String,
    pub target: f64,
    pub m: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct McCheck {
    pub draws: u64,
    pub p_event: f64,
    pub std_error: f64,
    /// |closed form - Monte Carlo| within 5 standard errors (or 1e-3).
    pub agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceCheck {
    pub listed: ReferenceValues,
    pub reproduced: bool,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeEntry {
    pub root: RootSummary,
    pub case: VarianceCase,
    pub sigma_bar: f64,
    pub probability: ProbabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub min_m: Vec<MinMRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<McCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub q: u64,
    #[serde(rename = "N")]
    pub n_ring: usize,
    pub sigma: f64,
    pub truncated: bool,
    pub p0: f64,
    pub entries: Vec<AnalyzeEntry>,
}

/// The configured root, or every root the scanner finds.
fn roots(v: &Validated) -> Vec<ResolvedRoot> {
    if let Some(p) = &v.plan {
        return vec![p.root.clone()];
    }
    let m = v.ctx.modulus();
    scan_instance(&v.ctx, &v.gauss, v.n_max)
        .entries
        .into_iter()
        .map(|e| match e.root {
            RootKind::FqRoot { alpha, order } => ResolvedRoot::Fq { alpha, order },
            RootKind::Binomial { n, a, order } => ResolvedRoot::Trace {
                ext: ExtFieldCtx::new(m, n, a).expect("scanner checked irreducibility"),
                order,
            },
        })
        .collect()
}

pub fn analyze(v: &Validated, opts: &AnalyzeOptions) -> AnalyzeReport {
    let ctx = &v.ctx;
    let m = ctx.modulus();
    let qf = m.value() as f64;
    let gauss = &v.gauss;
    let sigma = gauss.sigma();
    let n_ring = ctx.degree();
    let mut targets: Vec<f64> = DEFAULT_TARGETS.to_vec();
    if let Some(t) = opts.min_m_target {
        if !targets.contains(&t) {
            targets.push(t);
        }
    }

    let entries = roots(v)
        .into_iter()
        .enumerate()
        .map(|(idx, root)| {
            let (case, table, mode) = match &root {
                ResolvedRoot::Fq { alpha, order } => (
                    VarianceCase::fq_root(m, *alpha, n_ring),
                    SigmaTable::for_fq_root(m, *alpha, *order, n_ring, sigma, DEFAULT_TABLE_CAP).ok(),
                    EvalMode::Fq { alpha: *alpha },
                ),
                ResolvedRoot::Trace { ext, order } => (
                    VarianceCase::trace(m, ext.a().value(), ext.degree(), n_ring),
                    SigmaTable::for_trace(m, ext.a().value(), *order, n_ring, ext.degree(), sigma, DEFAULT_TABLE_CAP)
                        .ok(),
                    EvalMode::Trace(ext.clone()),
                ),
            };
            let sigma_bar = case.sigma_bar(sigma);
            let probability = delta_probability(m, sigma_bar, DEFAULT_SERIES_TOL);
            let warning = (probability.ratio > 4.0 * 2f64.sqrt()).then(|| {
                format!(
                    "distribution ratio {:.3} exceeds 4*sqrt(2): 2*sigma_bar = {:.3} < q/4 = {:.3}, \
                     the bounded small-values attack applies instead",
                    probability.ratio,
                    2.0 * sigma_bar,
                    qf / 4.0
                )
            });

            let mut min_m = Vec::new();
            let mut push = |bound: &str, family: BoundFamily| {
                for &t in &targets {
                    min_m.push(MinMRow {
                        bound: bound.into(),
                        target: t,
                        m: min_samples_for_posterior(family, m, gauss, t),
                    });
                }
            };
            if let Some(t) = &table {
                push(
                    "small_set_analytic",
                    BoundFamily::SmallSet {
                        sigma_size: t.analytic_bound,
                        r: t.r,
                    },
                );
                push(
                    "small_set_exact",
                    BoundFamily::SmallSet {
                        sigma_size: t.len() as f64,
                        r: t.r,
                    },
                );
            }
            if 2.0 * sigma_bar <= qf / 4.0 {
                push("small_values", BoundFamily::SmallValues { sigma_bar });
            }

            let monte_carlo = (opts.mc_draws > 0).then(|| {
                let p = mc_event_rate(ctx, gauss, &mode, opts.mc_draws, sub_seed(v.seed, idx as u64));
                let se = (p * (1.0 - p) / opts.mc_draws as f64).sqrt();
                McCheck {
                    draws: opts.mc_draws,
                    p_event: p,
                    std_error: se,
                    agrees: (p - probability.p_event).abs() <= (5.0 * se).max(1e-3),
                }
            });

            let reference = v.reference.as_ref().map(|r| {
                let p_ok = r.p_event.is_none_or(|p| (p - probability.p_event).abs() <= 1e-3);
                let d_ok = r
                    .big_delta
                    .is_none_or(|d| (d - probability.big_delta).abs() <= (0.05 * d.abs()).max(2e-5));
                let reproduced = p_ok && d_ok;
                let note = if reproduced {
                    "listed values reproduced by the closed form".to_string()
                } else {
                    format!(
                        "listed values NOT reproduced: closed form gives p_event = {:.7}, Delta = {:.7}",
                        probability.p_event, probability.big_delta
                    )
                };
                ReferenceCheck {
                    listed: r.clone(),
                    reproduced,
                    note,
                }
            });

            AnalyzeEntry {
                root: RootSummary::from(&root),
                case,
                sigma_bar,
                probability,
                warning,
                min_m,
                monte_carlo,
                reference,
            }
        })
        .collect();

    AnalyzeReport {
        q: m.value(),
        n_ring,
        sigma,
        truncated: gauss.truncated(),
        p0: gauss.p0(),
        entries,
    }
}
