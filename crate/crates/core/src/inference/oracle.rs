//! Importance sampling from the prior, for validating SMC on small datasets.
//!
//! Each sample draws `theta` from the prior, renders and intervenes the literal program for every
//! condition, and draws each record's latents from their conditionals given the observed values.
//! The weight is the likelihood of the observed values. Nothing here shares code with the SMC
//! path beyond the interpreter.

use serde::Serialize;

use super::smc::log_sum_exp;
use super::{condition_program, ConditionSpec, InferenceError};
use crate::interpreter::CompiledProgram;
use crate::prior::sample_theta;
use crate::rng::stream;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub p_edge: f64,
    /// Posterior mean of `lambda_bo` over all samples.
    pub lambda_bo_mean: f64,
    /// Posterior mean of `lambda_bo` among edge = true samples; `None` if they carry no weight.
    pub lambda_bo_mean_given_edge: Option<f64>,
    pub log_marginal_likelihood: f64,
    pub effective_sample_size: f64,
    pub n_samples: usize,
}

pub fn is_oracle(conds: &[ConditionSpec], n_samples: usize, seed: u64) -> Result<OracleSummary, InferenceError> {
    if n_samples == 0 {
        return Err(InferenceError::InvalidConfig { reason: "n_samples must be positive".into() });
    }
    let mut log_weights = Vec::with_capacity(n_samples);
    let mut thetas = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let mut rng = stream(seed, &[i as u64]);
        let theta = sample_theta(&mut rng);
        let mut log_w = 0.0;
        for cond in conds {
            let program = condition_program(&theta, cond)?;
            cond.validate_against(&program)?;
            let compiled = CompiledProgram::compile(&program)?;
            let observed: Vec<bool> = compiled.names().iter().map(|n| cond.observed_vars.contains(n)).collect();
            for record in &cond.records {
                let mut slots: Vec<f64> =
                    compiled.names().iter().map(|n| record.values.get(n).copied().unwrap_or(0.0)).collect();
                log_w += compiled.sample_unobserved(&[], &mut slots, &observed, &mut rng)?.log_likelihood;
            }
        }
        log_weights.push(log_w);
        thetas.push(theta);
    }

    let total = log_sum_exp(log_weights.iter().copied());
    if total == f64::NEG_INFINITY || total.is_nan() {
        return Err(InferenceError::DegenerateWeights { at: "importance sampling oracle".into() });
    }
    let weights: Vec<f64> = log_weights.iter().map(|w| (w - total).exp()).collect();
    let p_edge: f64 = weights.iter().zip(&thetas).filter(|(_, t)| t.edge).map(|(w, _)| w).sum();
    let lambda_bo_mean = weights.iter().zip(&thetas).map(|(w, t)| w * t.lambda_bo).sum();
    let lambda_bo_mean_given_edge = (p_edge > 0.0).then(|| {
        weights.iter().zip(&thetas).filter(|(_, t)| t.edge).map(|(w, t)| w * t.lambda_bo).sum::<f64>() / p_edge
    });
    Ok(OracleSummary {
        p_edge,
        lambda_bo_mean,
        lambda_bo_mean_given_edge,
        log_marginal_likelihood: total - (n_samples as f64).ln(),
        effective_sample_size: super::ess(&weights),
        n_samples,
    })
}
