//! Posterior inference over causal programs and per-individual latent values.
//!
//! Data arrive as [`ConditionSpec`]s, one per experimental condition. Each condition names an
//! intervention that is applied to the observational program before scoring, so the same
//! [`GlobalTheta`] explains observational and experimental records alike.
//!
//! [`smc_infer`] is the main entry point; [`is_oracle`] is a brute-force importance sampler for
//! checking it on small problems.

mod mh;
mod model;
mod oracle;
mod smc;
mod summary;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::Program;
use crate::interpreter::{log_joint_with_latents, InterpError, Observation};
use crate::interventions::{apply_intervention, Intervention, InterventionError};
use crate::prior::{log_prior, render_program, GlobalTheta, PARAM_NAMES};

pub use mh::{AcceptanceStats, Rejuvenator};
pub use oracle::{is_oracle, OracleSummary};
pub use smc::{ess, smc_infer, smc_run, systematic_resample, SmcRun};
pub use summary::{posterior_summary, write_posterior_csv, PosteriorSummary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Intervention(#[from] InterventionError),
    #[error("condition `{condition}`: {reason}")]
    InvalidCondition { condition: String, reason: String },
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("all particle weights vanished at {at}; the data are impossible under the model")]
    DegenerateWeights { at: String },
    #[error("no particles to summarize")]
    EmptyPosterior,
}

impl InferenceError {
    pub fn kind(&self) -> &'static str {
        match self {
            InferenceError::Interp(_) => "interpreter_error",
            InferenceError::Intervention(_) => "intervention_error",
            InferenceError::InvalidCondition { .. } => "invalid_condition",
            InferenceError::InvalidConfig { .. } => "invalid_config",
            InferenceError::DegenerateWeights { .. } => "degenerate_weights",
            InferenceError::EmptyPosterior => "empty_posterior",
        }
    }
}

/// Records gathered under one experimental condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSpec {
    #[serde(rename = "condition")]
    pub name: String,
    pub intervention: Option<Intervention>,
    #[serde(rename = "observed")]
    pub observed_vars: BTreeSet<String>,
    pub records: Vec<Observation>,
}

impl ConditionSpec {
    pub fn new(
        name: impl Into<String>,
        intervention: Option<Intervention>,
        observed_vars: impl IntoIterator<Item = impl Into<String>>,
        records: Vec<Observation>,
    ) -> Self {
        ConditionSpec {
            name: name.into(),
            intervention,
            observed_vars: observed_vars.into_iter().map(Into::into).collect(),
            records,
        }
    }

    fn invalid(&self, reason: impl Into<String>) -> InferenceError {
        InferenceError::InvalidCondition { condition: self.name.clone(), reason: reason.into() }
    }

    /// Checks the observed variables and records against the condition's program.
    pub fn validate_against(&self, program: &Program) -> Result<(), InferenceError> {
        let defined: BTreeSet<&str> = program.defined_vars().collect();
        if let Some(v) = self.observed_vars.iter().find(|v| !defined.contains(v.as_str())) {
            return Err(self.invalid(format!("observed variable `{v}` is not defined by the program")));
        }
        for (i, record) in self.records.iter().enumerate() {
            let keys: BTreeSet<&String> = record.values.keys().collect();
            if keys != self.observed_vars.iter().collect() {
                return Err(self.invalid(format!("record {i} does not bind exactly the observed variables")));
            }
            if let Some((k, v)) = record.values.iter().find(|(_, v)| !v.is_finite()) {
                return Err(self.invalid(format!("record {i} has non-finite value {v} for `{k}`")));
            }
        }
        Ok(())
    }
}

pub const DEFAULT_STEP_SIZE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmcConfig {
    pub n_particles: usize,
    pub ess_threshold: f64,
    pub rejuvenation_sweeps: usize,
    /// Random-walk standard deviations keyed by parameter or latent variable name; missing keys
    /// fall back to [`DEFAULT_STEP_SIZE`].
    #[serde(default)]
    pub rw_step_sizes: BTreeMap<String, f64>,
    pub seed: u64,
}

impl Default for SmcConfig {
    fn default() -> Self {
        let rw_step_sizes =
            PARAM_NAMES.iter().chain(["s", "b"].iter()).map(|n| (n.to_string(), DEFAULT_STEP_SIZE)).collect();
        SmcConfig { n_particles: 2000, ess_threshold: 0.5, rejuvenation_sweeps: 5, rw_step_sizes, seed: 0 }
    }
}

impl SmcConfig {
    pub fn with_particles(mut self, n: usize) -> Self {
        self.n_particles = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn step_size(&self, name: &str) -> f64 {
        self.rw_step_sizes.get(name).copied().unwrap_or(DEFAULT_STEP_SIZE)
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let bad = |reason: String| Err(InferenceError::InvalidConfig { reason });
        if self.n_particles == 0 {
            return bad("n_particles must be positive".into());
        }
        if !(self.ess_threshold > 0.0 && self.ess_threshold <= 1.0) {
            return bad(format!("ess_threshold must lie in (0, 1], got {}", self.ess_threshold));
        }
        if let Some((k, v)) = self.rw_step_sizes.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return bad(format!("step size for `{k}` must be positive, got {v}"));
        }
        Ok(())
    }
}

/// Latent values of every record, keyed by (condition index, record index).
#[derive(Clone, Debug, PartialEq)]
pub struct Latents {
    layout: Arc<model::LatentLayout>,
    values: Vec<f64>,
}

impl Latents {
    pub fn record(&self, condition: usize, record: usize) -> Option<BTreeMap<String, f64>> {
        let range = self.layout.range(condition, record)?;
        let names = &self.layout.names[condition];
        Some(names.iter().cloned().zip(self.values[range].iter().copied()).collect())
    }

    pub fn get(&self, condition: usize, record: usize, name: &str) -> Option<f64> {
        let range = self.layout.range(condition, record)?;
        let j = self.layout.names[condition].iter().position(|n| n == name)?;
        Some(self.values[range][j])
    }

    /// All (condition, record) keys, in data order.
    pub fn keys(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layout.counts.iter().enumerate().flat_map(|(c, &n)| (0..n).map(move |r| (c, r)))
    }

    pub fn to_map(&self) -> BTreeMap<(usize, usize), BTreeMap<String, f64>> {
        self.keys().filter_map(|(c, r)| Some(((c, r), self.record(c, r)?))).collect()
    }
}

/// One weighted hypothesis: parameters, the latent values of every record, and a log-weight.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub theta: GlobalTheta,
    pub latents: Latents,
    pub log_weight: f64,
}

impl ParticleState {
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// The observational program for `theta`, edited by the condition's intervention if it has one.
pub fn condition_program(theta: &GlobalTheta, cond: &ConditionSpec) -> Result<Program, InterventionError> {
    let program = render_program(theta);
    match &cond.intervention {
        Some(i) => apply_intervention(&program, i),
        None => Ok(program),
    }
}

/// `log_prior(theta)` plus the joint log-density of every record with its latents, each scored
/// under its condition's program.
pub fn particle_log_joint(p: &ParticleState, conds: &[ConditionSpec]) -> Result<f64, InferenceError> {
    let mut total = log_prior(&p.theta);
    if total == f64::NEG_INFINITY {
        return Ok(total);
    }
    for (c, cond) in conds.iter().enumerate() {
        let program = condition_program(&p.theta, cond)?;
        for (r, record) in cond.records.iter().enumerate() {
            let latents = p.latents.record(c, r).unwrap_or_default();
            total += log_joint_with_latents(&program, record, &latents)?;
        }
    }
    Ok(total)
}
