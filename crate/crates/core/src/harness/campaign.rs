//! Seeded campaigns. Each trial draws its own secret, ground truth and
//! sample stream from `sub_seed(seed, trial)`, so the report depends only on
//! (config, seed), never on the thread count.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    cumulative_binomial, extended_applicability, extended_threshold, mc_event_rate, posterior_bounds,
    usva_prediction, BoundFamily, ExtendedApplicability, PosteriorBounds, UsvaPrediction, VarianceCase,
};
use crate::attacks::{
    extended_attack, unbounded_small_values_attack, AttackError, AttackReport, AttackVerdict, BasicAttack, Decision,
    DecisionKind, EvalMode, ExtendedOutcome,
};
use crate::field::PrimeModulus;
use crate::ring::RqContext;
use crate::sampling::{sub_seed, write_samples, Oracle, PlweInstance, Sample, SamplerError};
use crate::scan::AttackFamily;
use crate::sigma::{SigmaTable, DEFAULT_TABLE_CAP};

use super::config::{ConfigError, ResolvedRoot, Validated};

/// Uniform-side bound the automatic M0 choice aims for.
pub const M0_TARGET: f64 = 0.99;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("precondition refused: {inequality}")]
    Refused { inequality: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("attack failed: {0}")]
    Attack(#[from] AttackError),
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Plwe,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    pub order: u64,
}

impl From<&ResolvedRoot> for RootSummary {
    fn from(r: &ResolvedRoot) -> Self {
        match r {
            ResolvedRoot::Fq { alpha, order } => Self {
                alpha: Some(*alpha),
                n: None,
                a: None,
                order: *order,
            },
            ResolvedRoot::Trace { ext, order } => Self {
                alpha: None,
                n: Some(ext.degree()),
                a: Some(ext.a().value()),
                order: *order,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendedPrediction {
    pub m0: usize,
    pub chunks: usize,
    pub threshold: i64,
    pub applicability: ExtendedApplicability,
    /// 1 - F(T-1, c, p0^{M0·r}).
    pub p_correct_plwe_bound: f64,
    /// F(T-1, c, min(1, q·x^{M0})).
    pub p_correct_uniform_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub big_delta: f64,
    /// "config" or "monte_carlo".
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Predicted {
    /// The satisfied precondition, both sides evaluated.
    pub precondition: String,
    pub sigma_bar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior: Option<PosteriorBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extended: Option<ExtendedPrediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub usva: Option<UsvaPrediction>,
}

/// Everything fixed before the first trial: tables, M0, δ and the checked
/// precondition.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub family: AttackFamily,
    pub root: ResolvedRoot,
    pub m: usize,
    pub p0: f64,
    pub table: Option<SigmaTable>,
    pub m0: Option<usize>,
    pub delta: Option<f64>,
    pub predicted: Predicted,
}

impl Prepared {
    pub fn mode(&self) -> EvalMode {
        match &self.root {
            ResolvedRoot::Fq { alpha, .. } => EvalMode::Fq { alpha: *alpha },
            ResolvedRoot::Trace { ext, .. } => EvalMode::Trace(ext.clone()),
        }
    }

    fn basic(&self) -> BasicAttack<'_> {
        match (&self.root, self.family) {
            (ResolvedRoot::Fq { alpha, .. }, AttackFamily::SmallSet) => BasicAttack::SmallSet {
                alpha: *alpha,
                sigma: self.table.as_ref().expect("table built"),
            },
            (ResolvedRoot::Trace { ext, .. }, AttackFamily::SmallSet) => BasicAttack::SmallSetTrace {
                ext: ext.clone(),
                sigma: self.table.as_ref().expect("table built"),
            },
            (ResolvedRoot::Fq { alpha, .. }, _) => BasicAttack::SmallValues { alpha: *alpha },
            (ResolvedRoot::Trace { ext, .. }, _) => BasicAttack::SmallValuesTrace { ext: ext.clone() },
        }
    }
}

fn refuse(inequality: String) -> CampaignError {
    CampaignError::Refused { inequality }
}

/// Checks the attack's precondition and fixes every derived parameter.
pub fn prepare(v: &Validated) -> Result<Prepared, CampaignError> {
    let plan = v
        .plan
        .as_ref()
        .ok_or_else(|| ConfigError::field("attack", "missing attack block"))?;
    let ctx = &v.ctx;
    let m = ctx.modulus();
    let qf = m.value() as f64;
    let gauss = &v.gauss;
    let p0 = gauss.p0();
    let n_ring = ctx.degree();
    let sigma = gauss.sigma();

    let case = match &plan.root {
        ResolvedRoot::Fq { alpha, .. } => VarianceCase::fq_root(m, *alpha, n_ring),
        ResolvedRoot::Trace { ext, .. } => VarianceCase::trace(m, ext.a().value(), ext.degree(), n_ring),
    };
    let sigma_bar = case.sigma_bar(sigma);
    let mut predicted = Predicted {
        precondition: String::new(),
        sigma_bar,
        sigma_size: None,
        analytic_bound: None,
        posterior: None,
        extended: None,
        delta: None,
        usva: None,
    };
    let mut table = None;
    let mut m0 = None;
    let mut delta = None;

    match plan.family {
        AttackFamily::SmallSet | AttackFamily::SmallValues => {
            let (family, x, r_eff) = if plan.family == AttackFamily::SmallSet {
                let order = plan.root.order();
                let t = match &plan.root {
                    ResolvedRoot::Fq { alpha, .. } => {
                        SigmaTable::for_fq_root(m, *alpha, order, n_ring, sigma, DEFAULT_TABLE_CAP)
                    }
                    ResolvedRoot::Trace { ext, .. } => SigmaTable::for_trace(
                        m,
                        ext.a().value(),
                        order,
                        n_ring,
                        ext.degree(),
                        sigma,
                        DEFAULT_TABLE_CAP,
                    ),
                }
                .map_err(|e| refuse(e.to_string()))?;
                predicted.sigma_size = Some(t.len());
                predicted.analytic_bound = Some(t.analytic_bound);
                let family = BoundFamily::SmallSet {
                    sigma_size: t.len() as f64,
                    r: t.r,
                };
                let out = (family, t.len() as f64 / qf, t.r);
                table = Some(t);
                out
            } else {
                (BoundFamily::SmallValues { sigma_bar }, m.uniform_quarter_rate(), 1)
            };
            let post = posterior_bounds(family, m, plan.m as u64, gauss);
            if !post.precondition_holds {
                return Err(refuse(negate(&post.precondition)));
            }
            predicted.precondition = post.precondition.clone();
            if plan.extended {
                let ext = choose_m0(m, x, r_eff, p0, plan.m, plan.m0)?;
                predicted.precondition = format!(
                    "{}; q*x^M0 = {:.4e} < p0^(M0*r) = {:.4e} at M0 = {}",
                    post.precondition, ext.applicability.separation_lhs, ext.applicability.rhs, ext.m0
                );
                m0 = Some(ext.m0);
                predicted.extended = Some(ext);
            } else {
                predicted.posterior = Some(post);
            }
        }
        AttackFamily::UnboundedSmallValues => {
            let est = match plan.delta {
                Some(d) => DeltaEstimate {
                    delta: d,
                    big_delta: d - m.pm_sign() / (2.0 * qf),
                    source: "config".into(),
                    draws: None,
                    std_error: None,
                },
                None => {
                    let mode = match &plan.root {
                        ResolvedRoot::Fq { alpha, .. } => EvalMode::Fq { alpha: *alpha },
                        ResolvedRoot::Trace { ext, .. } => EvalMode::Trace(ext.clone()),
                    };
                    let rate = mc_event_rate(ctx, gauss, &mode, plan.delta_draws, sub_seed(v.seed, u64::MAX));
                    let d = rate - 0.5;
                    DeltaEstimate {
                        delta: d,
                        big_delta: d - m.pm_sign() / (2.0 * qf),
                        source: "monte_carlo".into(),
                        draws: Some(plan.delta_draws),
                        std_error: Some((rate * (1.0 - rate) / plan.delta_draws as f64).sqrt()),
                    }
                }
            };
            let offset = m.pm_sign() / (2.0 * qf);
            if est.big_delta <= 0.0 {
                return Err(refuse(format!(
                    "delta = {:.6e} <= +-1/(2q) = {offset:.6e}",
                    est.delta
                )));
            }
            predicted.precondition = format!("delta = {:.6e} > +-1/(2q) = {offset:.6e}", est.delta);
            predicted.usva = Some(usva_prediction(plan.m as u64, m, est.delta));
            delta = Some(est.delta);
            predicted.delta = Some(est);
        }
    }

    Ok(Prepared {
        family: plan.family,
        root: plan.root.clone(),
        m: plan.m,
        p0,
        table,
        m0,
        delta,
        predicted,
    })
}

fn negate(precondition: &str) -> String {
    format!("not satisfied: {precondition}")
}

/// Picks M0 for the voting attack: the smallest chunk size that separates
/// the two hypotheses and whose uniform-side bound reaches M0_TARGET,
/// falling back to the best bound seen.
pub fn choose_m0(
    q: PrimeModulus,
    x: f64,
    r_eff: u64,
    p0: f64,
    m: usize,
    explicit: Option<usize>,
) -> Result<ExtendedPrediction, CampaignError> {
    let predict = |m0: usize| {
        let app = extended_applicability(q, x, r_eff, p0, m0 as u64);
        let c = m / m0;
        let t = extended_threshold(c as u64, m0 as u64, r_eff, p0);
        let pu = app.separation_lhs.min(1.0);
        ExtendedPrediction {
            m0,
            chunks: c,
            threshold: t,
            p_correct_plwe_bound: 1.0 - cumulative_binomial(t - 1, c as u64, app.rhs),
            p_correct_uniform_bound: cumulative_binomial(t - 1, c as u64, pu),
            applicability: app,
        }
    };
    let fail = |p: &ExtendedPrediction| {
        refuse(format!(
            "q*x^M0 = {:.4e} >= p0^(M0*r) = {:.4e} at M0 = {}",
            p.applicability.separation_lhs, p.applicability.rhs, p.m0
        ))
    };
    if let Some(m0) = explicit {
        let p = predict(m0);
        return if p.applicability.separation { Ok(p) } else { Err(fail(&p)) };
    }
    let mut best: Option<ExtendedPrediction> = None;
    for m0 in 1..=m {
        let p = predict(m0);
        if !p.applicability.separation {
            continue;
        }
        if p.p_correct_uniform_bound >= M0_TARGET {
            return Ok(p);
        }
        if best
            .as_ref()
            .is_none_or(|b| p.p_correct_uniform_bound > b.p_correct_uniform_bound)
        {
            best = Some(p);
        }
    }
    best.ok_or_else(|| fail(&predict(m)))
}

/// Result of running the configured attack once.
#[derive(Clone, Debug, PartialEq)]
pub enum Execution {
    Basic(AttackVerdict),
    Extended(ExtendedOutcome),
    Unbounded(Decision),
}

impl Execution {
    pub fn decision(&self) -> Truth {
        let kind = match self {
            Execution::Basic(v) => {
                if v.is_not_plwe() {
                    DecisionKind::Uniform
                } else {
                    DecisionKind::Plwe
                }
            }
            Execution::Extended(o) => o.decision.kind,
            Execution::Unbounded(d) => d.kind,
        };
        match kind {
            DecisionKind::Plwe => Truth::Plwe,
            DecisionKind::Uniform => Truth::Uniform,
        }
    }

    pub fn report(&self, samples_used: usize, wall_time_ms: f64) -> AttackReport {
        match self {
            Execution::Basic(v) => AttackReport::from_verdict(v, samples_used, wall_time_ms),
            Execution::Extended(o) => AttackReport::from_decision(&o.decision, samples_used, wall_time_ms),
            Execution::Unbounded(d) => AttackReport::from_decision(d, samples_used, wall_time_ms),
        }
    }
}

/// Runs the prepared attack on one batch of samples.
pub fn execute(p: &Prepared, ctx: &RqContext, samples: &[Sample]) -> Result<Execution, AttackError> {
    match p.family {
        AttackFamily::UnboundedSmallValues => Ok(Execution::Unbounded(unbounded_small_values_attack(
            ctx,
            samples,
            p.delta.expect("delta fixed in prepare"),
            &p.mode(),
        )?)),
        _ => {
            let sub = p.basic();
            match p.m0 {
                Some(m0) => Ok(Execution::Extended(extended_attack(
                    ctx,
                    samples,
                    m0,
                    &sub,
                    sub.r_eff(),
                    p.p0,
                )?)),
                None => Ok(Execution::Basic(sub.run(ctx, samples)?)),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub sub_seed: u64,
    pub truth: Truth,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Truth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub survivors: Option<usize>,
    /// PLWE trials of the basic attacks: whether s(α) (or Tr s(α)) survived.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_survived: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub votes: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<i64>,
    pub samples_used: usize,
    pub oracle_invocations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub completed: usize,
    pub failures: usize,
    pub plwe_trials: usize,
    pub uniform_trials: usize,
    pub correct_on_plwe: usize,
    pub correct_on_uniform: usize,
    pub rate_plwe: Option<f64>,
    pub rate_uniform: Option<f64>,
    pub accuracy: Option<f64>,
    pub accuracy_std_error: Option<f64>,
    /// Trials decided PLWE (for the basic attacks: verdict other than NOT PLWE).
    pub flagged: usize,
    /// Empirical P(PLWE | flagged); None when nothing was flagged.
    pub plwe_given_flagged: Option<f64>,
    /// PLWE trials in which the true evaluation survived (basic attacks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_survived: Option<usize>,
    pub oracle_invocations: u64,
    pub mean_invocations_per_sample: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: usize,
    pub family: AttackFamily,
    pub root: RootSummary,
    pub samples_per_trial: usize,
    #[serde(rename = "M0", skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    pub honest_sampling: bool,
    pub predicted: Predicted,
    pub aggregate: Aggregate,
    pub wall_time_ms: f64,
    pub per_trial: Vec<TrialRecord>,
}

impl CampaignReport {
    /// JSON with the wall-clock field zeroed; identical for identical
    /// (config, seed).
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.wall_time_ms = 0.0;
        serde_json::to_string_pretty(&c).expect("serializable")
    }

    pub fn to_csv(&self) -> Result<String, CampaignError> {
        #[derive(Serialize)]
        struct Row<'a> {
            trial: usize,
            sub_seed: u64,
            truth: &'a str,
            verdict: Option<&'a str>,
            decision: Option<&'a str>,
            correct: Option<bool>,
            guess: Option<u64>,
            survivors: Option<usize>,
            target_survived: Option<bool>,
            votes: Option<i64>,
            threshold: Option<i64>,
            samples_used: usize,
            oracle_invocations: u64,
            failure: Option<&'a str>,
        }
        let name = |t: Truth| match t {
            Truth::Plwe => "plwe",
            Truth::Uniform => "uniform",
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.per_trial {
            w.serialize(Row {
                trial: t.trial,
                sub_seed: t.sub_seed,
                truth: name(t.truth),
                verdict: t.verdict.as_deref(),
                decision: t.decision.map(name),
                correct: t.correct,
                guess: t.guess,
                survivors: t.survivors,
                target_survived: t.target_survived,
                votes: t.votes,
                threshold: t.threshold,
                samples_used: t.samples_used,
                oracle_invocations: t.oracle_invocations,
                failure: t.failure.as_deref(),
            })
            .map_err(|e| CampaignError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CampaignError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Runs every trial. With `record`, trial i's samples are written to
/// `record/trial_{i:05}.jsonl` for later replay.
pub fn run_campaign(
    v: &Validated,
    p: &Prepared,
    trials: usize,
    record: Option<&Path>,
) -> Result<CampaignReport, CampaignError> {
    let start = Instant::now();
    if let Some(dir) = record {
        std::fs::create_dir_all(dir).map_err(|e| CampaignError::Io(format!("{}: {e}", dir.display())))?;
    }
    let per_trial: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(v, p, i, record))
        .collect::<Result<_, _>>()?;
    let aggregate = aggregate(&per_trial, p);
    Ok(CampaignReport {
        seed: v.seed,
        trials,
        family: p.family,
        root: RootSummary::from(&p.root),
        samples_per_trial: p.m,
        m0: p.m0,
        honest_sampling: v.honest_sampling,
        predicted: p.predicted.clone(),
        aggregate,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        per_trial,
    })
}

/// The trial's samples, its ground truth and the true evaluation of the
/// secret. Exposed so tests and replay can regenerate a trial's input.
pub fn trial_input(
    v: &Validated,
    p: &Prepared,
    trial: usize,
) -> (u64, Truth, Result<(Vec<Sample>, u64), SamplerError>, u64) {
    let ctx = &v.ctx;
    let seed = sub_seed(v.seed, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = if rng.random_bool(0.5) { Truth::Plwe } else { Truth::Uniform };
    let inst = PlweInstance::new(ctx.clone(), v.gauss, &mut rng);
    let oracle = match truth {
        Truth::Plwe => Oracle::Plwe(&inst),
        Truth::Uniform => Oracle::Uniform(ctx),
    };
    let target = match &p.root {
        ResolvedRoot::Fq { alpha, .. } => ctx.eval_fq(inst.reveal_secret(), *alpha),
        ResolvedRoot::Trace { ext, .. } => ctx.eval_alpha(inst.reveal_secret(), ext).trace().value(),
    };
    let cap = v.plan.as_ref().map_or(1, |pl| pl.rq0_cap);
    let drawn = draw_samples(&oracle, &p.root, p.m, v.honest_sampling, cap, &mut rng);
    (seed, truth, drawn, target)
}

fn draw_samples<R: Rng>(
    oracle: &Oracle<'_>,
    root: &ResolvedRoot,
    m: usize,
    honest: bool,
    cap: u64,
    rng: &mut R,
) -> Result<(Vec<Sample>, u64), SamplerError> {
    let mut samples = Vec::with_capacity(m);
    let mut invocations = 0u64;
    for _ in 0..m {
        match root {
            ResolvedRoot::Fq { .. } => {
                samples.push(oracle.sample(rng));
                invocations += 1;
            }
            ResolvedRoot::Trace { ext, .. } => {
                let d = if honest {
                    oracle.sample_rq0(ext, rng, cap)?
                } else {
                    oracle.sample_rq0_direct(ext, rng)
                };
                invocations += d.count;
                samples.push(d.sample);
            }
        }
    }
    Ok((samples, invocations))
}

fn run_trial(v: &Validated, p: &Prepared, trial: usize, record: Option<&Path>) -> Result<TrialRecord, CampaignError> {
    let (seed, truth, drawn, target) = trial_input(v, p, trial);
    let mut rec = TrialRecord {
        trial,
        sub_seed: seed,
        truth,
        verdict: None,
        decision: None,
        correct: None,
        guess: None,
        survivors: None,
        target_survived: None,
        votes: None,
        threshold: None,
        samples_used: 0,
        oracle_invocations: 0,
        failure: None,
    };
    let (samples, invocations) = match drawn {
        Ok(x) => x,
        Err(e) => {
            rec.failure = Some(e.to_string());
            return Ok(rec);
        }
    };
    rec.samples_used = samples.len();
    rec.oracle_invocations = invocations;
    if let Some(dir) = record {
        let path = dir.join(format!("trial_{trial:05}.jsonl"));
        let file = std::fs::File::create(&path).map_err(|e| CampaignError::Io(format!("{}: {e}", path.display())))?;
        write_samples(std::io::BufWriter::new(file), &samples).map_err(|e| CampaignError::Io(e.to_string()))?;
    }
    let exec = match execute(p, &v.ctx, &samples) {
        Ok(x) => x,
        Err(e) => {
            rec.failure = Some(e.to_string());
            return Ok(rec);
        }
    };
    let report = exec.report(samples.len(), 0.0);
    rec.verdict = Some(report.verdict);
    rec.guess = report.guess;
    rec.votes = report.votes;
    rec.threshold = report.threshold;
    let decision = exec.decision();
    rec.decision = Some(decision);
    rec.correct = Some(decision == truth);
    if let Execution::Basic(verdict) = &exec {
        rec.survivors = Some(verdict.survivors().len());
        if truth == Truth::Plwe {
            rec.target_survived = Some(verdict.contains(target));
        }
    }
    Ok(rec)
}

fn aggregate(trials: &[TrialRecord], p: &Prepared) -> Aggregate {
    let done: Vec<&TrialRecord> = trials.iter().filter(|t| t.failure.is_none()).collect();
    let count = |truth: Truth| done.iter().filter(|t| t.truth == truth).count();
    let correct = |truth: Truth| done.iter().filter(|t| t.truth == truth && t.correct == Some(true)).count();
    let rate = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let (np, nu) = (count(Truth::Plwe), count(Truth::Uniform));
    let (cp, cu) = (correct(Truth::Plwe), correct(Truth::Uniform));
    let accuracy = rate(cp + cu, done.len());
    let flagged: Vec<&&TrialRecord> = done.iter().filter(|t| t.decision == Some(Truth::Plwe)).collect();
    let flagged_plwe = flagged.iter().filter(|t| t.truth == Truth::Plwe).count();
    let invocations: u64 = trials.iter().map(|t| t.oracle_invocations).sum();
    let samples: usize = trials.iter().map(|t| t.samples_used).sum();
    Aggregate {
        completed: done.len(),
        failures: trials.len() - done.len(),
        plwe_trials: np,
        uniform_trials: nu,
        correct_on_plwe: cp,
        correct_on_uniform: cu,
        rate_plwe: rate(cp, np),
        rate_uniform: rate(cu, nu),
        accuracy,
        accuracy_std_error: accuracy.map(|a| (a * (1.0 - a) / done.len() as f64).sqrt()),
        flagged: flagged.len(),
        plwe_given_flagged: rate(flagged_plwe, flagged.len()),
        target_survived: (p.m0.is_none() && p.family != AttackFamily::UnboundedSmallValues)
            .then(|| done.iter().filter(|t| t.target_survived == Some(true)).count()),
        oracle_invocations: invocations,
        mean_invocations_per_sample: if samples > 0 {
            invocations as f64 / samples as f64
        } else {
            0.0
        },
    }
}

/// Deterministic re-execution of the configured attack on recorded samples.
pub fn replay(p: &Prepared, ctx: &RqContext, samples: &[Sample]) -> Result<AttackReport, CampaignError> {
    let start = Instant::now();
    let exec = execute(p, ctx, samples)?;
    Ok(exec.report(samples.len(), start.elapsed().as_secs_f64() * 1e3))
}
