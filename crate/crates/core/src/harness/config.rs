//! Experiment configuration: one JSON document, validated into ready-to-use
//! objects. Every error names the offending field.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::ExtFieldCtx;
use crate::field::PrimeModulus;
use crate::ring::RqContext;
use crate::sampling::{GaussianSpec, DEFAULT_RQ0_CAP};
use crate::scan::{AttackFamily, DEFAULT_N_MAX};

pub const DEFAULT_DELTA_DRAWS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{field}: {msg}")]
    Field { field: String, msg: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

impl ConfigError {
    pub fn field(field: &str, msg: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub honest_sampling: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Values printed alongside the instance, for `analyze` to compare with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceValues>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceValues {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_event: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_delta: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(rename = "N")]
    pub n_ring: usize,
    /// Coefficients f_0..f_N, lowest degree first.
    pub f: Vec<i64>,
    pub q: u64,
    pub sigma: f64,
    #[serde(default)]
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub family: AttackFamily,
    pub root: RootConfig,
    /// Samples per trial.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Chunk size for the voting attack; implies `extended`.
    #[serde(rename = "M0", default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    /// Voting attack with M0 picked automatically.
    #[serde(default)]
    pub extended: bool,
    /// Samples per trial for the unbounded attack (defaults to M).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// δ for the unbounded attack; estimated by Monte Carlo when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_delta_draws")]
    pub delta_draws: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_rq0_cap")]
    pub rq0_cap: u64,
}

fn default_delta_draws() -> u64 {
    DEFAULT_DELTA_DRAWS
}

fn default_trials() -> usize {
    1
}

fn default_rq0_cap() -> u64 {
    DEFAULT_RQ0_CAP
}

/// Either `{"alpha": α}` for an F_q root or `{"n": n, "a": a}` for the
/// binomial x^n - a.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            ConfigError::Field {
                field,
                msg: e.into_inner().to_string(),
            }
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<Validated, ConfigError> {
        let inst = &self.instance;
        let modulus = PrimeModulus::new(inst.q).map_err(|e| match e {
            crate::field::FieldError::NotPrime(_) => ConfigError::field("instance.q", "q must be prime"),
            other => ConfigError::field("instance.q", other.to_string()),
        })?;
        if inst.f.len() != inst.n_ring + 1 {
            return Err(ConfigError::field(
                "instance.f",
                format!("expected N + 1 = {} coefficients, got {}", inst.n_ring + 1, inst.f.len()),
            ));
        }
        let ctx = RqContext::new(inst.f.clone(), modulus).map_err(|e| ConfigError::field("instance.f", e.to_string()))?;
        let gauss =
            GaussianSpec::new(inst.sigma, inst.truncated).map_err(|e| ConfigError::field("instance.sigma", e.to_string()))?;
        let n_max = self.n_max.unwrap_or(DEFAULT_N_MAX);
        if n_max < 1 {
            return Err(ConfigError::field("n_max", "must be at least 1"));
        }
        let plan = match &self.attack {
            Some(a) => Some(validate_attack(a, &ctx)?),
            None => None,
        };
        Ok(Validated {
            ctx,
            gauss,
            plan,
            seed: self.seed,
            honest_sampling: self.honest_sampling,
            n_max,
            output: self.output.clone().unwrap_or_default(),
            reference: self.reference.clone(),
        })
    }
}

/// Where the attack evaluates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolvedRoot {
    Fq { alpha: u64, order: u64 },
    Trace { ext: ExtFieldCtx, order: u64 },
}

impl ResolvedRoot {
    pub fn order(&self) -> u64 {
        match self {
            ResolvedRoot::Fq { order, .. } | ResolvedRoot::Trace { order, .. } => *order,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AttackPlan {
    pub family: AttackFamily,
    pub root: ResolvedRoot,
    /// Samples per trial (ℓ for the unbounded attack).
    pub m: usize,
    pub extended: bool,
    pub m0: Option<usize>,
    pub delta: Option<f64>,
    pub delta_draws: u64,
    pub trials: usize,
    pub rq0_cap: u64,
}

/// A config with every field checked.
#[derive(Clone, Debug)]
pub struct Validated {
    pub ctx: RqContext,
    pub gauss: GaussianSpec,
    pub plan: Option<AttackPlan>,
    pub seed: u64,
    pub honest_sampling: bool,
    pub n_max: usize,
    pub output: OutputConfig,
    pub reference: Option<ReferenceValues>,
}

fn validate_attack(a: &AttackConfig, ctx: &RqContext) -> Result<AttackPlan, ConfigError> {
    let m = ctx.modulus();
    let root = match (a.root.alpha, a.root.n, a.root.a) {
        (Some(alpha), None, None) | (None, Some(1), Some(alpha)) => {
            let alpha = alpha % m.value();
            if alpha == 0 {
                return Err(ConfigError::field("attack.root.alpha", "the root 0 is not supported"));
            }
            if ctx.f_at(alpha) != 0 {
                return Err(ConfigError::field("attack.root.alpha", format!("f({alpha}) != 0 mod q")));
            }
            ResolvedRoot::Fq {
                alpha,
                order: m.mult_order(alpha).expect("nonzero"),
            }
        }
        (None, Some(n), Some(av)) => {
            let av = av % m.value();
            let found = ctx.find_binomial_factors(n).into_iter().find(|bf| bf.a == av).ok_or_else(|| {
                ConfigError::field(
                    "attack.root",
                    format!("x^{n} - {av} is not an irreducible divisor of f mod q"),
                )
            })?;
            let ext = ExtFieldCtx::new(m, n, av).map_err(|e| ConfigError::field("attack.root", e.to_string()))?;
            ResolvedRoot::Trace {
                ext,
                order: found.order,
            }
        }
        _ => {
            return Err(ConfigError::field(
                "attack.root",
                "give either {\"alpha\": ...} or {\"n\": ..., \"a\": ...}",
            ))
        }
    };
    let samples = match a.family {
        AttackFamily::UnboundedSmallValues => a.ell.or(a.m),
        _ => a.m,
    };
    let field = if a.family == AttackFamily::UnboundedSmallValues { "attack.ell" } else { "attack.M" };
    let samples = samples.ok_or_else(|| ConfigError::field(field, "missing sample count"))?;
    if samples == 0 {
        return Err(ConfigError::field(field, "must be at least 1"));
    }
    if a.trials == 0 {
        return Err(ConfigError::field("attack.trials", "must be at least 1"));
    }
    if let Some(m0) = a.m0 {
        if m0 == 0 || m0 > samples {
            return Err(ConfigError::field("attack.M0", format!("need 1 <= M0 <= M = {samples}")));
        }
        if a.family == AttackFamily::UnboundedSmallValues {
            return Err(ConfigError::field("attack.M0", "the unbounded attack does not vote over chunks"));
        }
    }
    if let Some(d) = a.delta {
        if !(d.is_finite() && (-0.5..=0.5).contains(&d)) {
            return Err(ConfigError::field("attack.delta", "must lie in [-1/2, 1/2]"));
        }
    }
    if a.delta_draws == 0 {
        return Err(ConfigError::field("attack.delta_draws", "must be at least 1"));
    }
    if a.rq0_cap == 0 {
        return Err(ConfigError::field("attack.rq0_cap", "must be at least 1"));
    }
    Ok(AttackPlan {
        family: a.family,
        root,
        m: samples,
        extended: a.extended || a.m0.is_some(),
        m0: a.m0,
        delta: a.delta,
        delta_draws: a.delta_draws,
        trials: a.trials,
        rq0_cap: a.rq0_cap,
    })
}
