//! Interventions as source-code edits.
//!
//! Each intervention rewrites the single statement that defines its target variable and leaves
//! every other statement untouched, so the edited program is the causal model of the experiment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Dist, Expr, Program, Stmt};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterventionError {
    #[error("no statement defines `{var}`")]
    NoSuchVariable { var: String },
    #[error("cannot intervene on `{var}`: {reason}")]
    Unsupported { var: String, reason: String },
    #[error("variance-scaling factor must be positive and finite, got {factor}")]
    InvalidFactor { factor: f64 },
    #[error("intervention value for `{var}` must be finite, got {value}")]
    InvalidValue { var: String, value: f64 },
}

/// Serializable description of an intervention, e.g. `{"kind":"do","var":"b","value":5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Intervention {
    /// Clamp `var` to a constant.
    Do { var: String, value: f64 },
    /// Translate the location of `var` by `delta`.
    Shift { var: String, delta: f64 },
    /// Multiply the standard-deviation argument of a normal by `factor`, written as a divisor.
    VarianceScale { var: String, factor: f64 },
    /// `first`, then `then`.
    Compose { first: Box<Intervention>, then: Box<Intervention> },
}

impl Intervention {
    pub fn do_(var: impl Into<String>, value: f64) -> Self {
        Intervention::Do { var: var.into(), value }
    }

    pub fn shift(var: impl Into<String>, delta: f64) -> Self {
        Intervention::Shift { var: var.into(), delta }
    }

    pub fn variance_scale(var: impl Into<String>, factor: f64) -> Self {
        Intervention::VarianceScale { var: var.into(), factor }
    }

    pub fn then(self, next: Intervention) -> Self {
        Intervention::Compose { first: Box::new(self), then: Box::new(next) }
    }
}

/// What to do when an intervention targets a variable the program does not define.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Report [`InterventionError::NoSuchVariable`].
    #[default]
    Strict,
    /// Return the program unchanged.
    Lenient,
}

fn rewrite(
    p: &Program,
    var: &str,
    mode: Mode,
    edit: impl FnOnce(&Stmt) -> Result<Stmt, InterventionError>,
) -> Result<Program, InterventionError> {
    let Some(index) = p.definition_of(var) else {
        return match mode {
            Mode::Strict => Err(InterventionError::NoSuchVariable { var: var.to_string() }),
            Mode::Lenient => Ok(p.clone()),
        };
    };
    let mut stmts = p.stmts.clone();
    stmts[index] = edit(&p.stmts[index])?;
    Ok(Program::new(stmts))
}

fn check_finite(var: &str, value: f64) -> Result<(), InterventionError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(InterventionError::InvalidValue { var: var.to_string(), value })
    }
}

/// Replaces the statement defining `var` with `var = value`.
pub fn apply_do(p: &Program, var: &str, value: f64) -> Result<Program, InterventionError> {
    apply_do_with(p, var, value, Mode::Strict)
}

pub fn apply_do_with(p: &Program, var: &str, value: f64, mode: Mode) -> Result<Program, InterventionError> {
    check_finite(var, value)?;
    rewrite(p, var, mode, |_| Ok(Stmt::assign(var, Expr::num(value))))
}

/// Adds `delta` to a normal's mean, to both uniform bounds, or to an assigned value.
pub fn apply_shift(p: &Program, var: &str, delta: f64) -> Result<Program, InterventionError> {
    apply_shift_with(p, var, delta, Mode::Strict)
}

pub fn apply_shift_with(p: &Program, var: &str, delta: f64, mode: Mode) -> Result<Program, InterventionError> {
    check_finite(var, delta)?;
    let plus = |e: &Expr| Expr::add(e.clone(), Expr::num(delta));
    rewrite(p, var, mode, |stmt| match stmt {
        Stmt::Sample { dist: Dist::Normal(mean, std), .. } => {
            Ok(Stmt::sample(var, Dist::Normal(plus(mean), std.clone())))
        }
        Stmt::Sample { dist: Dist::Uniform(lo, hi), .. } => Ok(Stmt::sample(var, Dist::Uniform(plus(lo), plus(hi)))),
        Stmt::Assign { value, .. } => Ok(Stmt::assign(var, plus(value))),
        Stmt::Sample { dist: Dist::Bernoulli(_), .. } => {
            Err(InterventionError::Unsupported { var: var.to_string(), reason: "shift on bernoulli".into() })
        }
    })
}

/// Rewrites `var ~ normal(m, s)` to `var ~ normal(m, s / d)` with `d = 1 / factor`, so a factor of
/// `1/100` produces `s / 100`.
pub fn apply_variance_scale(p: &Program, var: &str, factor: f64) -> Result<Program, InterventionError> {
    apply_variance_scale_with(p, var, factor, Mode::Strict)
}

pub fn apply_variance_scale_with(
    p: &Program,
    var: &str,
    factor: f64,
    mode: Mode,
) -> Result<Program, InterventionError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(InterventionError::InvalidFactor { factor });
    }
    let divisor = 1.0 / factor;
    rewrite(p, var, mode, |stmt| match stmt {
        Stmt::Sample { dist: Dist::Normal(mean, std), .. } => {
            Ok(Stmt::sample(var, Dist::Normal(mean.clone(), Expr::div(std.clone(), Expr::num(divisor)))))
        }
        other => Err(InterventionError::Unsupported {
            var: var.to_string(),
            reason: match other {
                Stmt::Assign { .. } => "variance scaling on a deterministic assignment".into(),
                Stmt::Sample { dist, .. } => format!("variance scaling on {}", dist.name()),
            },
        }),
    })
}

pub fn apply_intervention(p: &Program, i: &Intervention) -> Result<Program, InterventionError> {
    apply_intervention_with(p, i, Mode::Strict)
}

pub fn apply_intervention_with(p: &Program, i: &Intervention, mode: Mode) -> Result<Program, InterventionError> {
    match i {
        Intervention::Do { var, value } => apply_do_with(p, var, *value, mode),
        Intervention::Shift { var, delta } => apply_shift_with(p, var, *delta, mode),
        Intervention::VarianceScale { var, factor } => apply_variance_scale_with(p, var, *factor, mode),
        Intervention::Compose { first, then } => {
            apply_intervention_with(&apply_intervention_with(p, first, mode)?, then, mode)
        }
    }
}
