//! Run a program forward, score traces, and split a joint density into likelihood and proposal
//! parts the way inference does.
//!
//! ```bash
//! cargo run --example simulate_and_score
//! ```

use std::collections::BTreeMap;

use ministan::dsl::parse_program;
use ministan::interpreter::{log_density, simulate, CompiledProgram};
use ministan::rng::stream;

const MODEL: &str = "s ~ normal(0, 1)
b ~ normal(s, 0.5)
logit_o = s * 0.7 + b * 0.3
o ~ bernoulli(1 / (1 + exp(-logit_o)))";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(MODEL)?;
    let mut rng = stream(42, &[]);
    for _ in 0..3 {
        let trace = simulate(&program, &mut rng)?;
        let score = log_density(&program, &trace.bindings)?;
        println!("{}  log p = {score:.4}", serde_json::to_string(&trace)?);
        assert!((score - trace.log_density()).abs() < 1e-12);
    }

    let impossible = BTreeMap::from([("s".to_string(), 0.0), ("b".to_string(), 0.0), ("o".to_string(), 0.5)]);
    println!("o = 0.5 scores {}", log_density(&program, &impossible)?);

    // observe b and o, draw s from its prior: the weight is the likelihood of the observations
    let compiled = CompiledProgram::compile(&program)?;
    let observed: Vec<bool> = compiled.names().iter().map(|n| n == "b" || n == "o").collect();
    let mut slots = vec![0.0, 1.2, 0.0, 1.0];
    let w = compiled.sample_unobserved(&[], &mut slots, &observed, &mut rng)?;
    println!("drew s = {:.4}; log likelihood {:.4}, log proposal {:.4}", slots[0], w.log_likelihood, w.log_proposal);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
