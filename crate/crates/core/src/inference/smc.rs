//! Sequential Monte Carlo over records.
//!
//! Particles start as prior draws. Records are added one at a time (conditions in input order,
//! records in order); each particle draws the new record's latents from their conditional given
//! its parameters and the observed values, and its weight is multiplied by the likelihood of the
//! observed values. When the effective sample size falls below `ess_threshold * n_particles` the
//! population is resampled systematically and rejuvenated with MH sweeps.

use rand::Rng;
use rayon::prelude::*;

use super::mh::{AcceptanceStats, Chain, Rejuvenator};
use super::model::Model;
use super::{ConditionSpec, InferenceError, ParticleState, SmcConfig};
use crate::prior::{sample_theta, GlobalTheta};
use crate::rng::stream;

const TAG_INIT: u64 = 1;
const TAG_EXTEND: u64 = 2;
const TAG_RESAMPLE: u64 = 3;
const TAG_MOVE: u64 = 4;

/// Result of a run, with diagnostics.
#[derive(Clone, Debug)]
pub struct SmcRun {
    /// Final particles; weights are normalized to sum to one.
    pub particles: Vec<ParticleState>,
    /// Effective sample size after each record was incorporated.
    pub ess_history: Vec<f64>,
    /// Indices (into `ess_history`) of the steps after which the population was resampled.
    pub resample_steps: Vec<usize>,
    pub acceptance: AcceptanceStats,
    /// Estimate of the log marginal likelihood of all records.
    pub log_evidence: f64,
}

#[derive(Clone, Debug)]
struct Particle {
    theta: GlobalTheta,
    latents: Vec<f64>,
    log_joint: f64,
    log_weight: f64,
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Normalized weights from log-weights; `None` if every weight is zero.
pub(crate) fn normalize(log_weights: &[f64]) -> Option<Vec<f64>> {
    let total = log_sum_exp(log_weights.iter().copied());
    if total == f64::NEG_INFINITY || total.is_nan() {
        return None;
    }
    Some(log_weights.iter().map(|w| (w - total).exp()).collect())
}

/// `(sum w)^2 / sum w^2`.
pub fn ess(weights: &[f64]) -> f64 {
    let sum: f64 = weights.iter().sum();
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    sum * sum / sq
}

/// Systematic resampling: `n` ancestor indices for normalized `weights`, using one uniform.
pub fn systematic_resample(weights: &[f64], n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let u0: f64 = rng.gen::<f64>() / n as f64;
    let mut out = Vec::with_capacity(n);
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1);
    let mut cumulative = weights[0];
    let mut j = 0;
    for i in 0..n {
        let target = u0 + i as f64 / n as f64;
        while cumulative <= target && j < last {
            j += 1;
            cumulative += weights[j];
        }
        out.push(j);
    }
    out
}

/// Runs SMC and returns the weighted particles.
pub fn smc_infer(conds: &[ConditionSpec], cfg: &SmcConfig) -> Result<Vec<ParticleState>, InferenceError> {
    Ok(smc_run(conds, cfg)?.particles)
}

pub fn smc_run(conds: &[ConditionSpec], cfg: &SmcConfig) -> Result<SmcRun, InferenceError> {
    cfg.validate()?;
    let kernel = Rejuvenator::from_model(Model::new(conds)?, cfg);
    let model = &kernel.model;
    let n = cfg.n_particles;
    let seed = cfg.seed;

    let template = model.empty_latents();
    let mut particles: Vec<Particle> = (0..n)
        .map(|i| Particle {
            theta: sample_theta(&mut stream(seed, &[TAG_INIT, i as u64])),
            latents: template.values.clone(),
            log_joint: 0.0,
            log_weight: 0.0,
        })
        .collect();

    let mut progress = vec![0usize; model.conds.len()];
    let mut ess_history = Vec::new();
    let mut resample_steps = Vec::new();
    let mut acceptance = AcceptanceStats::default();
    let mut log_evidence = 0.0;
    let mut step = 0u64;

    for c in 0..model.conds.len() {
        for r in 0..model.layout.counts[c] {
            let before = log_sum_exp(particles.iter().map(|p| p.log_weight));
            particles.par_iter_mut().enumerate().try_for_each(|(i, p)| {
                let mut rng = stream(seed, &[TAG_EXTEND, step, i as u64]);
                let (log_lik, joint) = model.extend(c, r, &p.theta, &mut p.latents, &mut rng)?;
                p.log_weight += log_lik;
                p.log_joint += joint;
                Ok::<_, InferenceError>(())
            })?;
            progress[c] = r + 1;

            let log_weights: Vec<f64> = particles.iter().map(|p| p.log_weight).collect();
            let weights = normalize(&log_weights).ok_or_else(|| InferenceError::DegenerateWeights {
                at: format!("condition `{}` record {r}", model.conds[c].name),
            })?;
            log_evidence += log_sum_exp(log_weights.iter().copied()) - before;
            let current_ess = ess(&weights);
            ess_history.push(current_ess);

            if current_ess < cfg.ess_threshold * n as f64 {
                let ancestors = systematic_resample(&weights, n, &mut stream(seed, &[TAG_RESAMPLE, step]));
                let mut next: Vec<Particle> = ancestors.iter().map(|&a| particles[a].clone()).collect();
                for p in &mut next {
                    p.log_weight = 0.0;
                }
                particles = next;
                resample_steps.push(ess_history.len() - 1);

                if cfg.rejuvenation_sweeps > 0 {
                    let stats = particles
                        .par_iter_mut()
                        .enumerate()
                        .map(|(i, p)| {
                            let mut rng = stream(seed, &[TAG_MOVE, step, i as u64]);
                            let mut scratch = Vec::new();
                            let mut stats = AcceptanceStats::default();
                            let mut chain =
                                Chain { theta: &mut p.theta, latents: &mut p.latents, log_joint: &mut p.log_joint };
                            for _ in 0..cfg.rejuvenation_sweeps {
                                stats.merge(&kernel.sweep_chain(&mut chain, &progress, &mut rng, &mut scratch)?);
                            }
                            Ok(stats)
                        })
                        .collect::<Result<Vec<_>, InferenceError>>()?;
                    for s in &stats {
                        acceptance.merge(s);
                    }
                }
            }
            step += 1;
        }
    }

    let log_weights: Vec<f64> = particles.iter().map(|p| p.log_weight).collect();
    let total = log_sum_exp(log_weights.iter().copied());
    let particles = particles
        .into_iter()
        .map(|p| ParticleState {
            theta: p.theta,
            latents: super::Latents { layout: template.layout.clone(), values: p.latents },
            log_weight: p.log_weight - total,
        })
        .collect();
    Ok(SmcRun { particles, ess_history, resample_steps, acceptance, log_evidence })
}
