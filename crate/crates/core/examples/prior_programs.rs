//! Draw causal models from the program-generating prior.
//!
//! ```bash
//! cargo run --example prior_programs
//! ```

use ministan::dsl::print_program;
use ministan::prior::{log_prior, render_program, sample_theta};
use ministan::rng::stream;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = stream(2024, &[]);
    for _ in 0..3 {
        let theta = sample_theta(&mut rng);
        println!("{}", serde_json::to_string(&theta)?);
        println!("log prior {:.4}\n{}\n", log_prior(&theta), print_program(&render_program(&theta)));
    }

    let n = 10_000;
    let with_edge = (0..n).filter(|_| sample_theta(&mut rng).edge).count();
    println!("{with_edge} of {n} draws include the belief -> outcome edge");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
