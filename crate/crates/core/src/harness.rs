//! End-to-end experiments: simulate data for a set of experimental conditions from a known
//! `theta`, then infer the posterior under a sequence of growing evidence sets.
//!
//! Everything written by [`run_ladder`] and [`replicate`] is a pure function of the plan and the
//! seed.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{
    condition_program, posterior_summary, smc_run, write_posterior_csv, ConditionSpec, InferenceError, ParticleState,
    SmcConfig,
};
use crate::interpreter::simulate;
use crate::interventions::Intervention;
use crate::prior::GlobalTheta;
use crate::rng::stream;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {reason}")]
    InvalidPlan { reason: String },
    #[error("no data for condition `{name}`")]
    MissingCondition { name: String },
    #[error("ladder entry `{entry}`: {source}")]
    Ladder {
        entry: String,
        #[source]
        source: InferenceError,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::InvalidPlan { .. } => "invalid_plan",
            HarnessError::MissingCondition { .. } => "missing_condition",
            HarnessError::Ladder { source, .. } => source.kind(),
            HarnessError::Io { .. } => "io_error",
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io { path: path.to_path_buf(), message: e.to_string() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionPlan {
    pub name: String,
    pub intervention: Option<Intervention>,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub theta_true: GlobalTheta,
    pub conditions: Vec<ConditionPlan>,
    pub observed_vars: BTreeSet<String>,
    /// Condition-name sets to run inference on, each containing the previous one.
    pub evidence_ladder: Vec<Vec<String>>,
    pub smc: SmcConfig,
}

pub const OBSERVATIONAL: &str = "observational";
pub const BELIEF_PILL: &str = "belief_pill";
pub const ENCOURAGEMENT: &str = "encouragement";
pub const ASSESSMENT: &str = "assessment";

/// Ten individuals under each of four conditions, simulated from fixed ground-truth parameters
/// with `edge = true`; skill is latent.
pub fn default_plan() -> ExperimentPlan {
    let condition = |name: &str, intervention| ConditionPlan { name: name.into(), intervention, n: 10 };
    let names = [OBSERVATIONAL, BELIEF_PILL, ENCOURAGEMENT, ASSESSMENT];
    ExperimentPlan {
        theta_true: GlobalTheta {
            mu_s: -0.013,
            sigma_s: 0.776,
            sigma_b: 0.646,
            lambda_so: 0.734,
            lambda_bo: 0.717,
            edge: true,
        },
        conditions: vec![
            condition(OBSERVATIONAL, None),
            condition(BELIEF_PILL, Some(Intervention::do_("b", 5.0))),
            condition(ENCOURAGEMENT, Some(Intervention::shift("b", 3.0))),
            condition(
                ASSESSMENT,
                Some(Intervention::shift("s", 2.0).then(Intervention::variance_scale("b", 1.0 / 100.0))),
            ),
        ],
        observed_vars: ["b", "o"].iter().map(|s| s.to_string()).collect(),
        evidence_ladder: (1..=names.len()).map(|k| names[..k].iter().map(|s| s.to_string()).collect()).collect(),
        smc: SmcConfig::default(),
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |reason: String| Err(HarnessError::InvalidPlan { reason });
        let names: BTreeSet<&str> = self.conditions.iter().map(|c| c.name.as_str()).collect();
        if names.len() != self.conditions.len() {
            return invalid("condition names must be unique".into());
        }
        if let Some(c) = self.conditions.iter().find(|c| c.n == 0) {
            return invalid(format!("condition `{}` needs N > 0", c.name));
        }
        if !self.theta_true.in_support() {
            return invalid("theta_true lies outside the prior support".into());
        }
        let mut previous: BTreeSet<&str> = BTreeSet::new();
        for (k, entry) in self.evidence_ladder.iter().enumerate() {
            let set: BTreeSet<&str> = entry.iter().map(String::as_str).collect();
            if let Some(unknown) = set.iter().find(|n| !names.contains(*n)) {
                return invalid(format!("ladder entry {k} names unknown condition `{unknown}`"));
            }
            if !previous.is_subset(&set) {
                return invalid(format!("ladder entry {k} drops conditions from entry {}", k.saturating_sub(1)));
            }
            previous = set;
        }
        self.smc.validate().map_err(|e| HarnessError::InvalidPlan { reason: e.to_string() })
    }

    /// Label of a ladder entry, used in file names.
    pub fn entry_label(&self, k: usize) -> String {
        let entry = &self.evidence_ladder[k];
        let mut names: Vec<&str> =
            self.conditions.iter().map(|c| c.name.as_str()).filter(|n| entry.iter().any(|e| e == n)).collect();
        if names.is_empty() {
            names.push("prior");
        }
        names
            .join("+")
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '+' || c == '-' { c } else { '_' })
            .collect()
    }
}

const TAG_DATA: u64 = 0xDA7A;

/// Simulates `N` individuals per condition from `theta_true` and keeps the observed variables.
pub fn generate_data(plan: &ExperimentPlan, seed: u64) -> crate::Result<Vec<ConditionSpec>> {
    plan.validate()?;
    plan.conditions
        .iter()
        .enumerate()
        .map(|(c, cp)| {
            let mut spec =
                ConditionSpec::new(cp.name.clone(), cp.intervention.clone(), plan.observed_vars.iter(), vec![]);
            let program = condition_program(&plan.theta_true, &spec)?;
            for i in 0..cp.n {
                let trace = simulate(&program, &mut stream(seed, &[TAG_DATA, c as u64, i as u64]))?;
                let record = trace.project(plan.observed_vars.iter().map(String::as_str)).ok_or_else(|| {
                    HarnessError::InvalidPlan {
                        reason: format!("condition `{}` does not define every observed variable", cp.name),
                    }
                })?;
                spec.records.push(record);
            }
            Ok(spec)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderEntryReport {
    pub entry: String,
    pub conditions: Vec<String>,
    pub n_records: usize,
    pub p_edge: f64,
    /// Posterior mean and standard deviation of `lambda_bo` among edge = true particles.
    pub lambda_bo_mean: Option<f64>,
    pub lambda_bo_sd: Option<f64>,
    pub log_evidence: f64,
    pub resamples: usize,
}

#[derive(Clone, Debug)]
pub struct LadderResult {
    pub report: LadderEntryReport,
    pub particles: Vec<ParticleState>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderReport {
    pub entries: Vec<LadderEntryReport>,
}

/// Runs inference for every ladder entry without touching the filesystem.
pub fn infer_ladder(plan: &ExperimentPlan, data: &[ConditionSpec]) -> crate::Result<Vec<LadderResult>> {
    plan.validate()?;
    for cp in &plan.conditions {
        if !data.iter().any(|d| d.name == cp.name) {
            return Err(HarnessError::MissingCondition { name: cp.name.clone() }.into());
        }
    }
    let mut results = Vec::with_capacity(plan.evidence_ladder.len());
    for (k, entry) in plan.evidence_ladder.iter().enumerate() {
        let label = plan.entry_label(k);
        let included: Vec<ConditionSpec> = plan
            .conditions
            .iter()
            .filter(|cp| entry.contains(&cp.name))
            .filter_map(|cp| data.iter().find(|d| d.name == cp.name).cloned())
            .collect();
        let ladder_error = |source| HarnessError::Ladder { entry: label.clone(), source };
        let run = smc_run(&included, &plan.smc).map_err(ladder_error)?;
        let summary = posterior_summary(&run.particles).map_err(ladder_error)?;
        results.push(LadderResult {
            report: LadderEntryReport {
                entry: label.clone(),
                conditions: included.iter().map(|c| c.name.clone()).collect(),
                n_records: included.iter().map(|c| c.records.len()).sum(),
                p_edge: summary.p_edge,
                lambda_bo_mean: summary.lambda_bo_mean(),
                lambda_bo_sd: summary.lambda_bo_sd(),
                log_evidence: run.log_evidence,
                resamples: run.resample_steps.len(),
            },
            particles: run.particles,
        });
    }
    Ok(results)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable value");
    bytes.push(b'\n');
    bytes
}

/// Runs the ladder and writes `summary.json`, `posterior_<entry>.csv` and `lambda_bo_<entry>.csv`
/// into `out_dir`.
pub fn run_ladder(plan: &ExperimentPlan, data: &[ConditionSpec], out_dir: &Path) -> crate::Result<LadderReport> {
    let results = infer_ladder(plan, data)?;
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    for result in &results {
        let entry = &result.report.entry;

        let mut posterior = Vec::new();
        write_posterior_csv(&result.particles, &mut posterior).map_err(|e| io_error(out_dir, e))?;
        write_file(&out_dir.join(format!("posterior_{entry}.csv")), &posterior)?;

        let path = out_dir.join(format!("lambda_bo_{entry}.csv"));
        let summary = posterior_summary(&result.particles)
            .map_err(|source| HarnessError::Ladder { entry: entry.clone(), source })?;
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["entry", "lambda_bo", "weight"]).map_err(|e| io_error(&path, e))?;
        for (value, weight) in &summary.lambda_bo_samples {
            writer
                .write_record([entry.clone(), value.to_string(), weight.to_string()])
                .map_err(|e| io_error(&path, e))?;
        }
        let bytes = writer.into_inner().map_err(|e| io_error(&path, e))?;
        write_file(&path, &bytes)?;
    }
    let report = LadderReport { entries: results.into_iter().map(|r| r.report).collect() };
    write_file(&out_dir.join("summary.json"), &to_json(&report))?;
    Ok(report)
}

/// Generates data from `plan` with `seed`, then runs the ladder with the SMC seed set to `seed`.
/// Also writes the effective `plan.json` and the simulated `data.json`.
pub fn replicate(plan: &ExperimentPlan, seed: u64, out_dir: &Path) -> crate::Result<LadderReport> {
    let mut plan = plan.clone();
    plan.smc.seed = seed;
    let data = generate_data(&plan, seed)?;
    fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    write_file(&out_dir.join("plan.json"), &to_json(&plan))?;
    write_file(&out_dir.join("data.json"), &to_json(&data))?;
    run_ladder(&plan, &data, out_dir)
}
