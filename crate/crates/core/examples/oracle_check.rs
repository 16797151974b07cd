//! Check SMC against brute-force importance sampling from the prior on a two-record dataset.
//!
//! ```bash
//! cargo run --release --example oracle_check
//! ```

use ministan::inference::{is_oracle, posterior_summary, smc_infer, ConditionSpec, SmcConfig};
use ministan::interpreter::Observation;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = [ConditionSpec::new(
        "observational",
        None,
        ["b", "o"],
        vec![Observation::new([("b", 1.4), ("o", 1.0)]), Observation::new([("b", -0.3), ("o", 0.0)])],
    )];

    let smc = posterior_summary(&smc_infer(&data, &SmcConfig::default().with_particles(2000).with_seed(3))?)?;
    let oracle = is_oracle(&data, 20_000, 3)?;
    println!("P(edge): smc {:.3}, importance sampling {:.3}", smc.p_edge, oracle.p_edge);
    println!(
        "oracle log marginal likelihood {:.4}, ESS {:.0}",
        oracle.log_marginal_likelihood, oracle.effective_sample_size
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
