//! Compiled view of a dataset: one parametric program per (condition, edge) and slot-vectors for
//! every record.
//!
//! Scoring a condition's program rendered with literals from `theta` is the same as scoring its
//! symbolic template with `theta` supplied as parameters, because interventions only edit
//! syntax. Working from the template avoids re-rendering a program per proposal.

use std::sync::Arc;

use rand::Rng;

use super::{ConditionSpec, InferenceError, Latents};
use crate::interpreter::CompiledProgram;
use crate::interventions::apply_intervention;
use crate::prior::{template_program, GlobalTheta, PARAM_NAMES};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LatentLayout {
    pub names: Vec<Vec<String>>,
    pub counts: Vec<usize>,
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl LatentLayout {
    pub fn range(&self, condition: usize, record: usize) -> Option<std::ops::Range<usize>> {
        if condition >= self.counts.len() || record >= self.counts[condition] {
            return None;
        }
        let k = self.names[condition].len();
        let start = self.offsets[condition] + record * k;
        Some(start..start + k)
    }
}

pub(crate) struct CondModel {
    pub name: String,
    programs: [CompiledProgram; 2],
    observed: Vec<bool>,
    latent_slots: Vec<usize>,
    records: Vec<Vec<f64>>,
}

/// How many records of each condition are currently part of the target.
pub(crate) type Progress = [usize];

pub(crate) struct Model {
    pub conds: Vec<CondModel>,
    pub layout: Arc<LatentLayout>,
}

impl Model {
    pub fn new(specs: &[ConditionSpec]) -> Result<Self, InferenceError> {
        let mut conds = Vec::with_capacity(specs.len());
        let mut names = Vec::with_capacity(specs.len());
        for spec in specs {
            let compile = |edge: bool| -> Result<_, InferenceError> {
                let mut program = template_program(edge);
                if let Some(i) = &spec.intervention {
                    program = apply_intervention(&program, i)?;
                }
                spec.validate_against(&program)?;
                Ok(CompiledProgram::compile_with_params(&program, &PARAM_NAMES)?)
            };
            let programs = [compile(false)?, compile(true)?];
            let slots = programs[0].names();
            if slots != programs[1].names()
                || (0..slots.len()).any(|i| programs[0].is_sample(i) != programs[1].is_sample(i))
            {
                return Err(spec.invalid("edge and no-edge programs define different variables"));
            }
            let observed: Vec<bool> = slots.iter().map(|n| spec.observed_vars.contains(n)).collect();
            let latent_slots: Vec<usize> =
                (0..slots.len()).filter(|&i| programs[0].is_sample(i) && !observed[i]).collect();
            let records = spec
                .records
                .iter()
                .map(|rec| slots.iter().map(|n| rec.values.get(n).copied().unwrap_or(0.0)).collect())
                .collect();
            names.push(latent_slots.iter().map(|&i| slots[i].clone()).collect::<Vec<_>>());
            conds.push(CondModel { name: spec.name.clone(), programs, observed, latent_slots, records });
        }
        let counts: Vec<usize> = conds.iter().map(|c| c.records.len()).collect();
        let mut offsets = Vec::with_capacity(conds.len());
        let mut total = 0;
        for (c, n) in counts.iter().enumerate() {
            offsets.push(total);
            total += n * names[c].len();
        }
        Ok(Model { conds, layout: Arc::new(LatentLayout { names, counts, offsets, total }) })
    }

    pub fn empty_latents(&self) -> Latents {
        Latents { layout: self.layout.clone(), values: vec![f64::NAN; self.layout.total] }
    }

    pub fn n_latents(&self, c: usize) -> usize {
        self.conds[c].latent_slots.len()
    }

    pub fn latent_name(&self, c: usize, j: usize) -> &str {
        &self.layout.names[c][j]
    }

    fn fill(&self, c: usize, r: usize, latents: &[f64], scratch: &mut Vec<f64>) {
        let cond = &self.conds[c];
        scratch.clear();
        scratch.extend_from_slice(&cond.records[r]);
        let start = self.layout.offsets[c] + r * cond.latent_slots.len();
        for (j, &slot) in cond.latent_slots.iter().enumerate() {
            scratch[slot] = latents[start + j];
        }
    }

    /// Joint log-density of record `r` of condition `c` with its latents.
    pub fn record_log_joint(
        &self,
        c: usize,
        r: usize,
        theta: &GlobalTheta,
        latents: &[f64],
        scratch: &mut Vec<f64>,
    ) -> Result<f64, InferenceError> {
        self.fill(c, r, latents, scratch);
        let program = &self.conds[c].programs[theta.edge as usize];
        Ok(program.log_density_slots(&theta.params(), scratch)?)
    }

    /// Sum of [`Model::record_log_joint`] over the records in `progress`.
    pub fn log_joint(
        &self,
        progress: &Progress,
        theta: &GlobalTheta,
        latents: &[f64],
        scratch: &mut Vec<f64>,
    ) -> Result<f64, InferenceError> {
        let mut total = 0.0;
        for (c, &n) in progress.iter().enumerate() {
            for r in 0..n {
                total += self.record_log_joint(c, r, theta, latents, scratch)?;
            }
        }
        Ok(total)
    }

    /// Draws the latents of record `r` of condition `c` from their conditionals given `theta` and
    /// the observed values, writing them into `latents`. Returns (log-likelihood of the observed
    /// values, joint log-density of the record).
    pub fn extend(
        &self,
        c: usize,
        r: usize,
        theta: &GlobalTheta,
        latents: &mut [f64],
        rng: &mut impl Rng,
    ) -> Result<(f64, f64), InferenceError> {
        let cond = &self.conds[c];
        let mut slots = cond.records[r].clone();
        let program = &cond.programs[theta.edge as usize];
        let w = program.sample_unobserved(&theta.params(), &mut slots, &cond.observed, rng)?;
        let start = self.layout.offsets[c] + r * cond.latent_slots.len();
        for (j, &slot) in cond.latent_slots.iter().enumerate() {
            latents[start + j] = slots[slot];
        }
        Ok((w.log_likelihood, w.log_likelihood + w.log_proposal))
    }

    pub fn latent_range(&self, c: usize, r: usize) -> std::ops::Range<usize> {
        self.layout.range(c, r).expect("record in range")
    }
}
