//! Bayesian causal structure and parameter learning with MiniStan programs.
//!
//! Causal models are straight-line probabilistic programs. The prior is a generator of such
//! programs ([`prior`]), experiments are rewrites of their source ([`interventions`]), data
//! likelihoods come from running or scoring the rewritten programs ([`interpreter`]), and the
//! posterior over programs is approximated by sequential Monte Carlo with Metropolis-Hastings
//! rejuvenation ([`inference`]). [`harness`] ties these together into reproducible experiments.
//!
//! ```
//! use ministan::dsl::{parse_program_with_params, print_program};
//! use ministan::interventions::{apply_intervention, Intervention};
//!
//! let model = parse_program_with_params(
//!     "s ~ normal(mu_s, sigma_s)\nb ~ normal(s, sigma_b)",
//!     &["mu_s", "sigma_s", "sigma_b"],
//! )
//! .unwrap();
//! let pill = apply_intervention(&model, &Intervention::do_("b", 5.0)).unwrap();
//! assert_eq!(print_program(&pill), "s ~ normal(mu_s, sigma_s)\nb = 5");
//! ```

pub mod dsl;
pub mod harness;
pub mod inference;
pub mod interpreter;
pub mod interventions;
pub mod prior;
pub mod rng;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dsl(#[from] dsl::DslError),
    #[error(transparent)]
    Interp(#[from] interpreter::InterpError),
    #[error(transparent)]
    Intervention(#[from] interventions::InterventionError),
    #[error(transparent)]
    Inference(#[from] inference::InferenceError),
    #[error(transparent)]
    Harness(#[from] harness::HarnessError),
}

impl Error {
    /// Short machine-readable category, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dsl(dsl::DslError::Syntax { .. }) => "syntax_error",
            Error::Dsl(dsl::DslError::Scope { .. }) => "scope_error",
            Error::Dsl(dsl::DslError::Redefinition { .. }) => "redefinition_error",
            Error::Dsl(dsl::DslError::EmptyProgram) => "empty_program",
            Error::Interp(interpreter::InterpError::UnboundVariable { .. }) => "unbound_variable",
            Error::Interp(interpreter::InterpError::InvalidParameter { .. }) => "invalid_parameter",
            Error::Interp(interpreter::InterpError::MissingVariable { .. }) => "missing_variable",
            Error::Interp(interpreter::InterpError::OverlappingAssignment { .. }) => "overlapping_assignment",
            Error::Intervention(interventions::InterventionError::NoSuchVariable { .. }) => "no_such_variable",
            Error::Intervention(interventions::InterventionError::Unsupported { .. }) => "unsupported_intervention",
            Error::Intervention(interventions::InterventionError::InvalidFactor { .. }) => "invalid_factor",
            Error::Intervention(interventions::InterventionError::InvalidValue { .. }) => "invalid_value",
            Error::Inference(e) => e.kind(),
            Error::Harness(e) => e.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
