//! Run the evidence ladder end to end and write its tables, like `ministan replicate`.
//!
//! ```bash
//! cargo run --release --example replicate_ladder -- out_dir
//! ```

use std::path::PathBuf;

use ministan::harness::{default_plan, replicate};

pub fn run_example_in(out_dir: PathBuf, particles: usize) -> Result<(), Box<dyn std::error::Error>> {
    let mut plan = default_plan();
    plan.smc.n_particles = particles;
    let report = replicate(&plan, 7, &out_dir)?;
    for entry in &report.entries {
        println!(
            "{:<52} records {:>2}  P(edge) {:.3}  lambda_bo {}",
            entry.entry,
            entry.n_records,
            entry.p_edge,
            entry.lambda_bo_mean.map_or("-".to_string(), |m| format!("{m:.3}"))
        );
    }
    println!("tables written to {}", out_dir.display());
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("ministan_replicate_example");
    run_example_in(dir, 200)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    match std::env::args().nth(1) {
        Some(dir) => run_example_in(PathBuf::from(dir), 2000),
        None => run_example(),
    }
}
