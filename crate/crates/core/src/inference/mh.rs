//! Metropolis-Hastings rejuvenation moves.
//!
//! One sweep proposes, in order: a Gaussian random walk on each continuous parameter (reflected
//! into (0, 1) for the uniform-prior ones), a deterministic flip of `edge`, and a Gaussian random
//! walk on every latent value of every incorporated record. All proposals are symmetric, so each
//! acceptance ratio is a ratio of targets.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::model::{Model, Progress};
use super::{ConditionSpec, InferenceError, ParticleState, SmcConfig};
use crate::prior::{log_prior, GlobalTheta, PARAM_NAMES};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AcceptanceStats {
    pub param_proposed: [u64; 5],
    pub param_accepted: [u64; 5],
    pub edge_proposed: u64,
    pub edge_accepted: u64,
    pub latent_proposed: u64,
    pub latent_accepted: u64,
}

impl AcceptanceStats {
    pub fn merge(&mut self, other: &AcceptanceStats) {
        for i in 0..5 {
            self.param_proposed[i] += other.param_proposed[i];
            self.param_accepted[i] += other.param_accepted[i];
        }
        self.edge_proposed += other.edge_proposed;
        self.edge_accepted += other.edge_accepted;
        self.latent_proposed += other.latent_proposed;
        self.latent_accepted += other.latent_accepted;
    }

    pub fn edge_rate(&self) -> f64 {
        self.edge_accepted as f64 / self.edge_proposed.max(1) as f64
    }

    pub fn latent_rate(&self) -> f64 {
        self.latent_accepted as f64 / self.latent_proposed.max(1) as f64
    }

    pub fn param_rate(&self, index: usize) -> f64 {
        self.param_accepted[index] as f64 / self.param_proposed[index].max(1) as f64
    }
}

/// Reflects `x` into [0, 1]; symmetric as a proposal transformation.
pub(crate) fn reflect_unit(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y > 1.0 {
        2.0 - y
    } else {
        y
    }
}

fn accept(log_ratio: f64, rng: &mut impl Rng) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    log_ratio >= 0.0 || rng.gen::<f64>().ln() < log_ratio
}

/// The rejuvenation kernel for a fixed dataset.
pub struct Rejuvenator {
    pub(crate) model: Model,
    param_steps: [f64; 5],
    latent_steps: Vec<Vec<f64>>,
}

/// Mutable view of one particle during a sweep. `log_joint` caches the data term
/// `Model::log_joint(progress, theta, latents)`.
pub(crate) struct Chain<'a> {
    pub theta: &'a mut GlobalTheta,
    pub latents: &'a mut [f64],
    pub log_joint: &'a mut f64,
}

impl Rejuvenator {
    pub fn new(conds: &[ConditionSpec], cfg: &SmcConfig) -> Result<Self, InferenceError> {
        cfg.validate()?;
        Ok(Self::from_model(Model::new(conds)?, cfg))
    }

    pub(crate) fn from_model(model: Model, cfg: &SmcConfig) -> Self {
        let mut param_steps = [0.0; 5];
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            param_steps[i] = cfg.step_size(name);
        }
        let latent_steps = (0..model.conds.len())
            .map(|c| (0..model.n_latents(c)).map(|j| cfg.step_size(model.latent_name(c, j))).collect())
            .collect();
        Rejuvenator { model, param_steps, latent_steps }
    }

    /// MH log-acceptance ratio of flipping `edge` with all records of the dataset incorporated.
    /// The prior is symmetric in `edge`, so this is the change in data log-likelihood.
    pub fn edge_flip_log_acceptance(&self, state: &ParticleState) -> Result<f64, InferenceError> {
        let mut scratch = Vec::new();
        let progress = &self.model.layout.counts;
        let current = self.model.log_joint(progress, &state.theta, &state.latents.values, &mut scratch)?;
        let mut flipped = state.theta;
        flipped.edge = !flipped.edge;
        let proposed = self.model.log_joint(progress, &flipped, &state.latents.values, &mut scratch)?;
        Ok(proposed - current)
    }

    /// One sweep over a particle whose latents cover every record of the dataset.
    pub fn sweep(&self, state: &mut ParticleState, rng: &mut impl Rng) -> Result<AcceptanceStats, InferenceError> {
        let mut scratch = Vec::new();
        let progress = self.model.layout.counts.clone();
        let mut log_joint = self.model.log_joint(&progress, &state.theta, &state.latents.values, &mut scratch)?;
        let mut chain =
            Chain { theta: &mut state.theta, latents: &mut state.latents.values, log_joint: &mut log_joint };
        self.sweep_chain(&mut chain, &progress, rng, &mut scratch)
    }

    pub(crate) fn sweep_chain(
        &self,
        chain: &mut Chain<'_>,
        progress: &Progress,
        rng: &mut impl Rng,
        scratch: &mut Vec<f64>,
    ) -> Result<AcceptanceStats, InferenceError> {
        let model = &self.model;
        let mut stats = AcceptanceStats::default();

        for i in 0..5 {
            let mut proposal = *chain.theta;
            let z: f64 = rng.sample(StandardNormal);
            let mut value = proposal.param(i) + self.param_steps[i] * z;
            if GlobalTheta::is_unit_interval(i) {
                value = reflect_unit(value);
            }
            proposal.set_param(i, value);
            stats.param_proposed[i] += 1;
            let prior_new = log_prior(&proposal);
            if prior_new == f64::NEG_INFINITY {
                continue;
            }
            let joint_new = model.log_joint(progress, &proposal, chain.latents, scratch)?;
            let log_ratio = prior_new + joint_new - log_prior(chain.theta) - *chain.log_joint;
            if accept(log_ratio, rng) {
                *chain.theta = proposal;
                *chain.log_joint = joint_new;
                stats.param_accepted[i] += 1;
            }
        }

        let mut flipped = *chain.theta;
        flipped.edge = !flipped.edge;
        let joint_new = model.log_joint(progress, &flipped, chain.latents, scratch)?;
        stats.edge_proposed += 1;
        if accept(joint_new - *chain.log_joint, rng) {
            *chain.theta = flipped;
            *chain.log_joint = joint_new;
            stats.edge_accepted += 1;
        }

        for (c, &n) in progress.iter().enumerate() {
            for r in 0..n {
                let range = model.latent_range(c, r);
                for (j, index) in range.enumerate() {
                    let old_value = chain.latents[index];
                    let old = model.record_log_joint(c, r, chain.theta, chain.latents, scratch)?;
                    let z: f64 = rng.sample(StandardNormal);
                    chain.latents[index] = old_value + self.latent_steps[c][j] * z;
                    let new = model.record_log_joint(c, r, chain.theta, chain.latents, scratch)?;
                    stats.latent_proposed += 1;
                    if accept(new - old, rng) {
                        stats.latent_accepted += 1;
                    } else {
                        chain.latents[index] = old_value;
                    }
                }
            }
        }

        if stats.latent_proposed > 0 {
            *chain.log_joint = model.log_joint(progress, chain.theta, chain.latents, scratch)?;
        }
        Ok(stats)
    }
}
