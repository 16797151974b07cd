//! Parse MiniStan source, print it canonically, and inspect parse errors.
//!
//! ```bash
//! cargo run --example parse_and_print
//! ```

use ministan::dsl::{free_check, parse_program, parse_program_with_params, print_program};

const SOURCE: &str = "
s ~ normal(0.5,   1)
b ~ normal(s, 0.25)
logit_o = s*0.7 + b*0.3;  o ~ bernoulli(1/(1+exp(-logit_o)))
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_program(SOURCE)?;
    let canonical = print_program(&program);
    println!("canonical form:\n{canonical}\n");
    assert_eq!(parse_program(&canonical)?, program);

    // templates may leave parameters free
    let template = parse_program_with_params(
        "s ~ normal(mu_s, sigma_s)\nb ~ normal(s, sigma_b)",
        &["mu_s", "sigma_s", "sigma_b"],
    )?;
    println!("free variables of the template: {:?}", free_check(&template));

    for bad in ["x ~ normal(0, 1)\ny = (x + 1", "x ~ poisson(3)", "y = x + 1", "x = 1\nx = 2"] {
        println!("{bad:?} -> {}", parse_program(bad).unwrap_err());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
