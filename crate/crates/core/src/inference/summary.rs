//! Posterior summaries and their flat-file forms.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{InferenceError, ParticleState};
use crate::prior::PARAM_NAMES;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub p_edge: f64,
    /// `(lambda_bo, weight)` of edge = true particles, weights renormalized among them.
    pub lambda_bo_samples: Vec<(f64, f64)>,
    /// Set when no edge = true particle carries weight, so `lambda_bo_samples` is empty.
    pub lambda_bo_empty: bool,
    /// Weighted means of every parameter, plus `edge` as 0/1.
    pub theta_means: BTreeMap<String, f64>,
}

impl PosteriorSummary {
    pub fn lambda_bo_mean(&self) -> Option<f64> {
        (!self.lambda_bo_empty).then(|| self.lambda_bo_samples.iter().map(|(v, w)| v * w).sum())
    }

    pub fn lambda_bo_sd(&self) -> Option<f64> {
        let mean = self.lambda_bo_mean()?;
        let var: f64 = self.lambda_bo_samples.iter().map(|(v, w)| w * (v - mean).powi(2)).sum();
        Some(var.max(0.0).sqrt())
    }
}

pub fn posterior_summary(particles: &[ParticleState]) -> Result<PosteriorSummary, InferenceError> {
    if particles.is_empty() {
        return Err(InferenceError::EmptyPosterior);
    }
    let weights: Vec<f64> = particles.iter().map(ParticleState::weight).collect();
    let total: f64 = weights.iter().sum();
    let p_edge = particles.iter().zip(&weights).filter(|(p, _)| p.theta.edge).map(|(_, w)| w).sum::<f64>() / total;

    let lambda_bo_samples: Vec<(f64, f64)> = if p_edge > 0.0 {
        particles
            .iter()
            .zip(&weights)
            .filter(|(p, w)| p.theta.edge && **w > 0.0)
            .map(|(p, w)| (p.theta.lambda_bo, w / (p_edge * total)))
            .collect()
    } else {
        Vec::new()
    };

    let mut theta_means = BTreeMap::new();
    for (i, name) in PARAM_NAMES.iter().enumerate() {
        let mean = particles.iter().zip(&weights).map(|(p, w)| w * p.theta.param(i)).sum::<f64>() / total;
        theta_means.insert(name.to_string(), mean);
    }
    theta_means.insert("edge".to_string(), p_edge);

    Ok(PosteriorSummary { lambda_bo_empty: lambda_bo_samples.is_empty(), p_edge, lambda_bo_samples, theta_means })
}

#[derive(Serialize)]
struct Row {
    particle_id: usize,
    weight: f64,
    mu_s: f64,
    sigma_s: f64,
    sigma_b: f64,
    lambda_so: f64,
    lambda_bo: f64,
    edge: bool,
}

/// One row per particle: `particle_id, weight, mu_s, sigma_s, sigma_b, lambda_so, lambda_bo, edge`.
pub fn write_posterior_csv(particles: &[ParticleState], out: impl Write) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for (particle_id, p) in particles.iter().enumerate() {
        let t = &p.theta;
        writer.serialize(Row {
            particle_id,
            weight: p.weight(),
            mu_s: t.mu_s,
            sigma_s: t.sigma_s,
            sigma_b: t.sigma_b,
            lambda_so: t.lambda_so,
            lambda_bo: t.lambda_bo,
            edge: t.edge,
        })?;
    }
    writer.flush()?;
    Ok(())
}
