//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use ministan::dsl::{parse_program_with_params, print_program, Program};
use ministan::harness::{
    default_plan, generate_data, ConditionPlan, ExperimentPlan, BELIEF_PILL, ENCOURAGEMENT, OBSERVATIONAL,
};
use ministan::inference::ConditionSpec;
use ministan::interventions::Intervention;
use ministan::prior::PARAM_NAMES;
use statrs::distribution::{Bernoulli, Continuous, Discrete, Normal, Uniform};

pub const EDGE_MODEL: &str = "
  s ~ normal(mu_s, sigma_s)
  b ~ normal(s, sigma_b)
  logit_o = s * lambda_so + b * lambda_bo
  o ~ bernoulli(1/(1+exp(-logit_o)))";

pub const NO_EDGE_MODEL: &str = "
  s ~ normal(mu_s, sigma_s)
  b ~ normal(s, sigma_b)
  logit_o = s * lambda_so
  o ~ bernoulli(1/(1+exp(-logit_o)))";

/// (name, edge, intervention, expected listing) for the belief-pill, encouragement and
/// assessment experiments on both models.
pub fn golden_interventions() -> Vec<(&'static str, bool, Intervention, &'static str)> {
    let assessment = || Intervention::shift("s", 2.0).then(Intervention::variance_scale("b", 1.0 / 100.0));
    vec![
        (
            "belief pill, edge",
            true,
            Intervention::do_("b", 5.0),
            "
  s ~ normal(mu_s, sigma_s)
  b = 5
  logit_o = s * lambda_so + b * lambda_bo
  o ~ bernoulli(1/(1+exp(-logit_o)))",
        ),
        (
            "belief pill, no edge",
            false,
            Intervention::do_("b", 5.0),
            "
  s ~ normal(mu_s, sigma_s)
  b = 5
  logit_o = s * lambda_so
  o ~ bernoulli(1/(1+exp(-logit_o)))",
        ),
        (
            "encouragement, edge",
            true,
            Intervention::shift("b", 3.0),
            "
  s ~ normal(mu_s, sigma_s)
  b ~ normal(s + 3, sigma_b)
  logit_o = s * lambda_so + b * lambda_bo
  o ~ bernoulli(1/(1+exp(-logit_o)))",
        ),
        (
            "encouragement, no edge",
            false,
            Intervention::shift("b", 3.0),
            "
  s ~ normal(mu_s, sigma_s)
  b ~ normal(s + 3, sigma_b)
  logit_o = s * lambda_so
  o ~ bernoulli(1/(1+exp(-logit_o)))",
        ),
        (
            "assessment, edge",
            true,
            assessment(),
            "
  s ~ normal(mu_s + 2, sigma_s)
  b ~ normal(s, sigma_b / 100)
  logit_o = s * lambda_so + b * lambda_bo
  o ~ bernoulli(1/(1+exp(-logit_o)))",
        ),
        (
            "assessment, no edge",
            false,
            assessment(),
            "
  s ~ normal(mu_s + 2, sigma_s)
  b ~ normal(s, sigma_b / 100)
  logit_o = s * lambda_so
  o ~ bernoulli(1/(1+exp(-logit_o)))",
        ),
    ]
}

pub fn parse_template(text: &str) -> Program {
    parse_program_with_params(text, &PARAM_NAMES).unwrap()
}

pub fn strip_whitespace(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Canonical form of a listing: parsed and printed again.
pub fn canonical(text: &str) -> String {
    print_program(&parse_template(text))
}

#[derive(Clone, Copy, Debug)]
pub enum Term {
    Normal { x: f64, mean: f64, std: f64 },
    Uniform { x: f64, lo: f64, hi: f64 },
    Bernoulli { x: u64, p: f64 },
}

impl Term {
    pub fn closed_form(self) -> f64 {
        match self {
            Term::Normal { x, mean, std } => Normal::new(mean, std).unwrap().ln_pdf(x),
            Term::Uniform { x, lo, hi } => Uniform::new(lo, hi).unwrap().ln_pdf(x),
            Term::Bernoulli { x, p } => Bernoulli::new(p).unwrap().ln_pmf(x),
        }
    }
}

pub struct DensityCase {
    pub program: String,
    pub trace: Vec<(&'static str, f64)>,
    /// Distribution parameters worked out by hand from the program text.
    pub terms: Vec<Term>,
}

fn case(program: &str, trace: &[(&'static str, f64)], terms: &[Term]) -> DensityCase {
    DensityCase { program: program.to_string(), trace: trace.to_vec(), terms: terms.to_vec() }
}

/// Fifty programs with traces and their per-statement density terms.
pub fn density_table() -> Vec<DensityCase> {
    use Term::*;
    let cases = vec![
        case("x ~ normal(0, 1)", &[("x", 0.0)], &[Normal { x: 0.0, mean: 0.0, std: 1.0 }]),
        case("x ~ normal(0, 1)", &[("x", 1.5)], &[Normal { x: 1.5, mean: 0.0, std: 1.0 }]),
        case("x ~ normal(0, 1)", &[("x", -3.25)], &[Normal { x: -3.25, mean: 0.0, std: 1.0 }]),
        case("x ~ normal(2, 0.5)", &[("x", 2.7)], &[Normal { x: 2.7, mean: 2.0, std: 0.5 }]),
        case("x ~ normal(-1, 3)", &[("x", 4.0)], &[Normal { x: 4.0, mean: -1.0, std: 3.0 }]),
        case("x ~ normal(10, 0.01)", &[("x", 10.003)], &[Normal { x: 10.003, mean: 10.0, std: 0.01 }]),
        case("x ~ normal(0, 100)", &[("x", -250.0)], &[Normal { x: -250.0, mean: 0.0, std: 100.0 }]),
        case("x ~ normal(1 + 2, 2 * 0.5)", &[("x", 3.5)], &[Normal { x: 3.5, mean: 3.0, std: 1.0 }]),
        case("x ~ normal(6 / 4, 1 - 0.25)", &[("x", 0.0)], &[Normal { x: 0.0, mean: 1.5, std: 0.75 }]),
        case("x ~ normal(-(2), exp(0))", &[("x", -2.5)], &[Normal { x: -2.5, mean: -2.0, std: 1.0 }]),
        case("x ~ normal(exp(1), exp(-1))", &[("x", 3.0)], &[Normal { x: 3.0, mean: std::f64::consts::E, std: (-1f64).exp() }]),
        case("x ~ uniform(0, 1)", &[("x", 0.3)], &[Uniform { x: 0.3, lo: 0.0, hi: 1.0 }]),
        case("x ~ uniform(0, 1)", &[("x", 0.0)], &[Uniform { x: 0.0, lo: 0.0, hi: 1.0 }]),
        case("x ~ uniform(0, 1)", &[("x", 1.0)], &[Uniform { x: 1.0, lo: 0.0, hi: 1.0 }]),
        case("x ~ uniform(-2, 6)", &[("x", 5.9)], &[Uniform { x: 5.9, lo: -2.0, hi: 6.0 }]),
        case("x ~ uniform(0.25, 0.5)", &[("x", 0.3)], &[Uniform { x: 0.3, lo: 0.25, hi: 0.5 }]),
        case("x ~ uniform(1 + 1, 2 * 5)", &[("x", 7.0)], &[Uniform { x: 7.0, lo: 2.0, hi: 10.0 }]),
        case("x ~ uniform(-100, 100)", &[("x", -99.5)], &[Uniform { x: -99.5, lo: -100.0, hi: 100.0 }]),
        case("x ~ bernoulli(0.5)", &[("x", 1.0)], &[Bernoulli { x: 1, p: 0.5 }]),
        case("x ~ bernoulli(0.5)", &[("x", 0.0)], &[Bernoulli { x: 0, p: 0.5 }]),
        case("x ~ bernoulli(0.3)", &[("x", 1.0)], &[Bernoulli { x: 1, p: 0.3 }]),
        case("x ~ bernoulli(0.3)", &[("x", 0.0)], &[Bernoulli { x: 0, p: 0.3 }]),
        case("x ~ bernoulli(0.999)", &[("x", 0.0)], &[Bernoulli { x: 0, p: 0.999 }]),
        case("x ~ bernoulli(1e-6)", &[("x", 0.0)], &[Bernoulli { x: 0, p: 1e-6 }]),
        case("x ~ bernoulli(1 / (1 + exp(-0)))", &[("x", 1.0)], &[Bernoulli { x: 1, p: 0.5 }]),
        case("x ~ bernoulli(1 / (1 + exp(-2)))", &[("x", 0.0)], &[Bernoulli { x: 0, p: 1.0 / (1.0 + (-2f64).exp()) }]),
        case(
            "a ~ normal(0, 1)\nb ~ normal(a, 0.5)",
            &[("a", 0.4), ("b", 1.0)],
            &[Normal { x: 0.4, mean: 0.0, std: 1.0 }, Normal { x: 1.0, mean: 0.4, std: 0.5 }],
        ),
        case(
            "a ~ normal(1, 2)\nb ~ normal(2 * a, a * a)",
            &[("a", -1.5), ("b", 0.0)],
            &[Normal { x: -1.5, mean: 1.0, std: 2.0 }, Normal { x: 0.0, mean: -3.0, std: 2.25 }],
        ),
        case(
            "u ~ uniform(0, 1)\nx ~ normal(u, u)",
            &[("u", 0.2), ("x", 0.5)],
            &[Uniform { x: 0.2, lo: 0.0, hi: 1.0 }, Normal { x: 0.5, mean: 0.2, std: 0.2 }],
        ),
        case(
            "u ~ uniform(0, 1)\nx ~ bernoulli(u)",
            &[("u", 0.8), ("x", 1.0)],
            &[Uniform { x: 0.8, lo: 0.0, hi: 1.0 }, Bernoulli { x: 1, p: 0.8 }],
        ),
        case(
            "u ~ uniform(0, 1)\nx ~ bernoulli(1 - u)",
            &[("u", 0.8), ("x", 1.0)],
            &[Uniform { x: 0.8, lo: 0.0, hi: 1.0 }, Bernoulli { x: 1, p: 0.2 }],
        ),
        case(
            "m = 2 * 3\nx ~ normal(m - 1, 0.5)",
            &[("x", 4.2)],
            &[Normal { x: 4.2, mean: 5.0, std: 0.5 }],
        ),
        case(
            "lo ~ uniform(0, 1)\nhi = lo + 2\nx ~ uniform(lo, hi)",
            &[("lo", 0.5), ("x", 2.0)],
            &[Uniform { x: 0.5, lo: 0.0, hi: 1.0 }, Uniform { x: 2.0, lo: 0.5, hi: 2.5 }],
        ),
        case(
            "s ~ normal(0, 1)\nb ~ normal(s, 0.5)\nlogit_o = s * 0.7 + b * 0.3\no ~ bernoulli(1 / (1 + exp(-logit_o)))",
            &[("s", 0.5), ("b", 1.0), ("o", 1.0)],
            &[
                Normal { x: 0.5, mean: 0.0, std: 1.0 },
                Normal { x: 1.0, mean: 0.5, std: 0.5 },
                Bernoulli { x: 1, p: 1.0 / (1.0 + (-0.65f64).exp()) },
            ],
        ),
        case(
            "s ~ normal(-0.013, 0.776)\nb ~ normal(s, 0.646)\nlogit_o = s * 0.734 + b * 0.717\no ~ bernoulli(1 / (1 + exp(-logit_o)))",
            &[("s", 0.2), ("b", -0.4), ("o", 0.0)],
            &[
                Normal { x: 0.2, mean: -0.013, std: 0.776 },
                Normal { x: -0.4, mean: 0.2, std: 0.646 },
                Bernoulli { x: 0, p: 1.0 / (1.0 + (-(0.2 * 0.734 - 0.4 * 0.717f64)).exp()) },
            ],
        ),
        case(
            "s ~ normal(1.987, 0.776)\nb ~ normal(s, 0.646 / 100)\nlogit_o = s * 0.734\no ~ bernoulli(1 / (1 + exp(-logit_o)))",
            &[("s", 2.1), ("b", 2.105), ("o", 1.0)],
            &[
                Normal { x: 2.1, mean: 1.987, std: 0.776 },
                Normal { x: 2.105, mean: 2.1, std: 0.00646 },
                Bernoulli { x: 1, p: 1.0 / (1.0 + (-(2.1 * 0.734f64)).exp()) },
            ],
        ),
        case(
            "s ~ normal(0, 1)\nb = 5\nlogit_o = s * 0.5 + b * 0.1\no ~ bernoulli(1 / (1 + exp(-logit_o)))",
            &[("s", -1.0), ("o", 1.0)],
            &[Normal { x: -1.0, mean: 0.0, std: 1.0 }, Bernoulli { x: 1, p: 1.0 / (1.0 + (-0.0f64).exp()) }],
        ),
        case(
            "s ~ normal(0, 1)\nb ~ normal(s + 3, 0.5)",
            &[("s", 0.1), ("b", 3.3)],
            &[Normal { x: 0.1, mean: 0.0, std: 1.0 }, Normal { x: 3.3, mean: 3.1, std: 0.5 }],
        ),
        case(
            "x ~ normal(0, 1); y ~ normal(x / 2, 2)",
            &[("x", 1.0), ("y", -1.0)],
            &[Normal { x: 1.0, mean: 0.0, std: 1.0 }, Normal { x: -1.0, mean: 0.5, std: 2.0 }],
        ),
        case(
            "x ~ normal(0, 1)\ny ~ normal(-x, exp(x))",
            &[("x", 0.5), ("y", 0.0)],
            &[Normal { x: 0.5, mean: 0.0, std: 1.0 }, Normal { x: 0.0, mean: -0.5, std: 0.5f64.exp() }],
        ),
        case(
            "p ~ uniform(0.1, 0.9)\nk ~ bernoulli(p)\nz ~ normal(k, p)",
            &[("p", 0.4), ("k", 0.0), ("z", 0.1)],
            &[Uniform { x: 0.4, lo: 0.1, hi: 0.9 }, Bernoulli { x: 0, p: 0.4 }, Normal { x: 0.1, mean: 0.0, std: 0.4 }],
        ),
        case(
            "k ~ bernoulli(0.25)\nz ~ normal(10 * k, 1 + k)",
            &[("k", 1.0), ("z", 9.0)],
            &[Bernoulli { x: 1, p: 0.25 }, Normal { x: 9.0, mean: 10.0, std: 2.0 }],
        ),
        case(
            "a ~ uniform(-1, 1)\nb ~ uniform(a, a + 0.5)",
            &[("a", -0.5), ("b", -0.25)],
            &[Uniform { x: -0.5, lo: -1.0, hi: 1.0 }, Uniform { x: -0.25, lo: -0.5, hi: 0.0 }],
        ),
        case(
            "c = 1 - 2 - 3\nx ~ normal(c, 1)",
            &[("x", -4.0)],
            &[Normal { x: -4.0, mean: -4.0, std: 1.0 }],
        ),
        case(
            "c = 8 / 4 / 2\nx ~ normal(0, c)",
            &[("x", 0.5)],
            &[Normal { x: 0.5, mean: 0.0, std: 1.0 }],
        ),
        case(
            "c = 2 + 3 * 4\nx ~ uniform(0, c)",
            &[("x", 13.0)],
            &[Uniform { x: 13.0, lo: 0.0, hi: 14.0 }],
        ),
        case(
            "c = (2 + 3) * 4\nx ~ uniform(0, c)",
            &[("x", 19.0)],
            &[Uniform { x: 19.0, lo: 0.0, hi: 20.0 }],
        ),
        case(
            "x ~ normal(0, 1)\nx2 = x * x\ny ~ normal(x2, 0.1)",
            &[("x", -2.0), ("y", 4.05)],
            &[Normal { x: -2.0, mean: 0.0, std: 1.0 }, Normal { x: 4.05, mean: 4.0, std: 0.1 }],
        ),
        case(
            "x ~ normal(1e-3, 2e-3)",
            &[("x", 0.0)],
            &[Normal { x: 0.0, mean: 1e-3, std: 2e-3 }],
        ),
        case(
            "x ~ normal(0, 1)\ny ~ normal(0, 1)\nz ~ normal(x + y, 1)",
            &[("x", 0.3), ("y", -0.6), ("z", 0.0)],
            &[
                Normal { x: 0.3, mean: 0.0, std: 1.0 },
                Normal { x: -0.6, mean: 0.0, std: 1.0 },
                Normal { x: 0.0, mean: 0.3 - 0.6, std: 1.0 },
            ],
        ),
    ];
    assert_eq!(cases.len(), 50);
    cases
}

/// Small dataset from the built-in ground truth: two observational records for even seeds;
/// two observational, two belief-pill and one encouragement record for odd seeds.
pub fn tiny_dataset(seed: u64) -> Vec<ConditionSpec> {
    let base = default_plan();
    let pick =
        |name: &str, n: usize| ConditionPlan { n, ..base.conditions.iter().find(|c| c.name == name).unwrap().clone() };
    let conditions = if seed.is_multiple_of(2) {
        vec![pick(OBSERVATIONAL, 2)]
    } else {
        vec![pick(OBSERVATIONAL, 2), pick(BELIEF_PILL, 2), pick(ENCOURAGEMENT, 1)]
    };
    let plan = ExperimentPlan { conditions, evidence_ladder: vec![], ..base };
    generate_data(&plan, seed).unwrap()
}
