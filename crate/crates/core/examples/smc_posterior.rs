//! Simulate the four experiments from known parameters and compare the posterior from
//! observational data alone with the posterior from all data.
//!
//! ```bash
//! cargo run --release --example smc_posterior
//! ```

use ministan::harness::{default_plan, generate_data};
use ministan::inference::{posterior_summary, smc_run, SmcConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let plan = default_plan();
    let data = generate_data(&plan, 1)?;
    let cfg = SmcConfig::default().with_particles(1000).with_seed(1);

    for (label, conds) in [("observational only", &data[..1]), ("all four conditions", &data[..])] {
        let run = smc_run(conds, &cfg)?;
        let summary = posterior_summary(&run.particles)?;
        println!("{label}:");
        println!("  P(edge) = {:.3}", summary.p_edge);
        if let (Some(mean), Some(sd)) = (summary.lambda_bo_mean(), summary.lambda_bo_sd()) {
            println!("  lambda_bo | edge = {mean:.3} +/- {sd:.3} (true {})", plan.theta_true.lambda_bo);
        }
        println!(
            "  {} resampling steps, edge-flip acceptance {:.3}, log evidence {:.2}",
            run.resample_steps.len(),
            run.acceptance.edge_rate(),
            run.log_evidence
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
