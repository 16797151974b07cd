//! The program-generating prior over skill/belief/outcome causal models.
//!
//! A [`GlobalTheta`] fixes every free choice; [`render_program`] turns it into MiniStan source.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dsl::{Dist, Expr, Program, Stmt};
use crate::interpreter::normal_logpdf;

/// Names of the continuous parameters, in the order used by [`GlobalTheta::params`].
pub const PARAM_NAMES: [&str; 5] = ["mu_s", "sigma_s", "sigma_b", "lambda_so", "lambda_bo"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalTheta {
    pub mu_s: f64,
    pub sigma_s: f64,
    pub sigma_b: f64,
    pub lambda_so: f64,
    pub lambda_bo: f64,
    /// Whether belief influences outcome. `lambda_bo` is kept either way.
    pub edge: bool,
}

impl GlobalTheta {
    pub fn params(&self) -> [f64; 5] {
        [self.mu_s, self.sigma_s, self.sigma_b, self.lambda_so, self.lambda_bo]
    }

    pub fn param(&self, index: usize) -> f64 {
        self.params()[index]
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        match index {
            0 => self.mu_s = value,
            1 => self.sigma_s = value,
            2 => self.sigma_b = value,
            3 => self.lambda_so = value,
            4 => self.lambda_bo = value,
            _ => panic!("parameter index {index} out of range"),
        }
    }

    /// Whether parameter `index` has a Uniform(0, 1) prior.
    pub fn is_unit_interval(index: usize) -> bool {
        index > 0
    }

    pub fn in_support(&self) -> bool {
        self.mu_s.is_finite() && self.params()[1..].iter().all(|&v| v > 0.0 && v < 1.0)
    }

    fn param_map(&self) -> BTreeMap<String, f64> {
        PARAM_NAMES.iter().map(|n| n.to_string()).zip(self.params()).collect()
    }
}

fn open_unit(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// `mu_s ~ Normal(0, 1)`, the four scale/weight parameters `~ Uniform(0, 1)` (zero redrawn),
/// `edge ~ Bernoulli(0.5)`.
pub fn sample_theta(rng: &mut impl Rng) -> GlobalTheta {
    let mu_s: f64 = rng.sample(StandardNormal);
    GlobalTheta {
        mu_s,
        sigma_s: open_unit(rng),
        sigma_b: open_unit(rng),
        lambda_so: open_unit(rng),
        lambda_bo: open_unit(rng),
        edge: rng.gen::<f64>() < 0.5,
    }
}

pub fn log_prior(theta: &GlobalTheta) -> f64 {
    if !theta.in_support() {
        return f64::NEG_INFINITY;
    }
    normal_logpdf(theta.mu_s, 0.0, 1.0) + 0.5f64.ln()
}

/// The symbolic model, with the parameters of [`PARAM_NAMES`] left as free variables.
pub fn template_program(edge: bool) -> Program {
    let v = Expr::var;
    let skill_term = Expr::mul(v("s"), v("lambda_so"));
    let logit = if edge { Expr::add(skill_term, Expr::mul(v("b"), v("lambda_bo"))) } else { skill_term };
    let sigmoid = Expr::div(Expr::num(1.0), Expr::add(Expr::num(1.0), Expr::exp(Expr::neg(v("logit_o")))));
    Program::new(vec![
        Stmt::sample("s", Dist::Normal(v("mu_s"), v("sigma_s"))),
        Stmt::sample("b", Dist::Normal(v("s"), v("sigma_b"))),
        Stmt::assign("logit_o", logit),
        Stmt::sample("o", Dist::Bernoulli(sigmoid)),
    ])
}

/// The observational model for `theta`, with its values baked in as literals.
pub fn render_program(theta: &GlobalTheta) -> Program {
    let mut values = theta.param_map();
    if !theta.edge {
        values.remove("lambda_bo");
    }
    template_program(theta.edge).substitute(&values)
}
