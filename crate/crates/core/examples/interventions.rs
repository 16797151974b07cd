//! Experiments as source edits: belief pill, encouragement and assessment on the two causal
//! models, plus the JSON form of an intervention.
//!
//! ```bash
//! cargo run --example interventions
//! ```

use ministan::dsl::print_program;
use ministan::interventions::{apply_intervention, apply_intervention_with, Intervention, Mode};
use ministan::prior::template_program;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let experiments = [
        ("belief pill", Intervention::do_("b", 5.0)),
        ("encouragement", Intervention::shift("b", 3.0)),
        ("assessment", Intervention::shift("s", 2.0).then(Intervention::variance_scale("b", 1.0 / 100.0))),
    ];
    for edge in [true, false] {
        let model = template_program(edge);
        println!(
            "== {} ==\n{}\n",
            if edge { "belief and skill matter" } else { "only skill matters" },
            print_program(&model)
        );
        for (name, intervention) in &experiments {
            println!("-- {name}\n{}\n", print_program(&apply_intervention(&model, intervention)?));
        }
    }

    let json = serde_json::to_string(&experiments[2].1)?;
    println!("assessment as JSON: {json}");
    let parsed: Intervention = serde_json::from_str(&json)?;
    assert_eq!(parsed, experiments[2].1);

    let missing = Intervention::do_("z", 1.0);
    println!("strict: {}", apply_intervention(&template_program(true), &missing).unwrap_err());
    let unchanged = apply_intervention_with(&template_program(true), &missing, Mode::Lenient)?;
    assert_eq!(unchanged, template_program(true));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
