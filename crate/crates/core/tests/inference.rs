mod common;

use std::collections::BTreeMap;

use common::tiny_dataset;
use ministan::dsl::print_program;
use ministan::inference::{
    condition_program, is_oracle, particle_log_joint, posterior_summary, smc_run, write_posterior_csv, ConditionSpec,
    InferenceError, ParticleState, Rejuvenator, SmcConfig,
};
use ministan::interpreter::{log_density, normal_logpdf, Observation};
use ministan::interventions::Intervention;
use ministan::prior::{log_prior, render_program, GlobalTheta};
use ministan::rng::stream;

const TRUE_THETA: GlobalTheta =
    GlobalTheta { mu_s: -0.013, sigma_s: 0.776, sigma_b: 0.646, lambda_so: 0.734, lambda_bo: 0.717, edge: true };

fn observational(records: &[(f64, f64)]) -> ConditionSpec {
    ConditionSpec::new(
        "observational",
        None,
        ["b", "o"],
        records.iter().map(|&(b, o)| Observation::new([("b", b), ("o", o)])).collect(),
    )
}

fn cfg(n: usize, seed: u64) -> SmcConfig {
    SmcConfig::default().with_particles(n).with_seed(seed)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn condition_programs() {
    let pill = ConditionSpec::new("belief_pill", Some(Intervention::do_("b", 5.0)), ["b", "o"], vec![]);
    assert!(print_program(&condition_program(&TRUE_THETA, &pill).unwrap()).contains("\nb = 5\n"));
    let obs = observational(&[]);
    assert_eq!(condition_program(&TRUE_THETA, &obs).unwrap(), render_program(&TRUE_THETA));
    let assess = ConditionSpec::new(
        "assessment",
        Some(Intervention::shift("s", 2.0).then(Intervention::variance_scale("b", 0.01))),
        ["b", "o"],
        vec![],
    );
    let text = print_program(&condition_program(&TRUE_THETA, &assess).unwrap());
    assert!(text.contains("s ~ normal(-0.013 + 2, 0.776)"), "{text}");
    assert!(text.contains("b ~ normal(s, 0.646 / 100)"), "{text}");
}

/// One particle with the given theta and the latents drawn for `conds`.
fn particle_for(conds: &[ConditionSpec], theta: GlobalTheta) -> ParticleState {
    let mut p = smc_run(conds, &cfg(1, 3)).unwrap().particles.remove(0);
    p.theta = theta;
    p
}

#[test]
fn particle_log_joint_sums_prior_and_records() {
    let empty = particle_for(&[], TRUE_THETA);
    assert_eq!(particle_log_joint(&empty, &[]).unwrap(), log_prior(&TRUE_THETA));

    // fully observed: no latents
    let full = ConditionSpec::new(
        "observational",
        None,
        ["s", "b", "o"],
        vec![Observation::new([("s", 0.5), ("b", 1.0), ("o", 1.0)])],
    );
    let p = particle_for(std::slice::from_ref(&full), TRUE_THETA);
    let trace = BTreeMap::from([("s".to_string(), 0.5), ("b".to_string(), 1.0), ("o".to_string(), 1.0)]);
    let expected = log_prior(&TRUE_THETA) + log_density(&render_program(&TRUE_THETA), &trace).unwrap();
    assert!((particle_log_joint(&p, &[full]).unwrap() - expected).abs() < 1e-12);

    // s latent: three closed-form terms
    let conds = [observational(&[(1.0, 1.0)])];
    let p = particle_for(&conds, TRUE_THETA);
    let s = p.latents.get(0, 0, "s").unwrap();
    let t = TRUE_THETA;
    let p_o = sigmoid(s * t.lambda_so + 1.0 * t.lambda_bo);
    let expected = log_prior(&t) + normal_logpdf(s, t.mu_s, t.sigma_s) + normal_logpdf(1.0, s, t.sigma_b) + p_o.ln();
    assert!((particle_log_joint(&p, &conds).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn latents_cover_the_unobserved_samples() {
    let pill = ConditionSpec::new(
        "belief_pill",
        Some(Intervention::do_("b", 5.0)),
        ["b", "o"],
        vec![Observation::new([("b", 5.0), ("o", 1.0)])],
    );
    let conds = [observational(&[(0.2, 0.0), (1.0, 1.0)]), pill];
    let p = smc_run(&conds, &cfg(4, 1)).unwrap().particles.remove(0);
    assert_eq!(p.latents.keys().collect::<Vec<_>>(), vec![(0, 0), (0, 1), (1, 0)]);
    for (c, r) in p.latents.keys() {
        let names: Vec<String> = p.latents.record(c, r).unwrap().into_keys().collect();
        assert_eq!(names, vec!["s".to_string()]);
    }
    let hidden_b = ConditionSpec::new("observational", None, ["o"], vec![Observation::new([("o", 1.0)])]);
    let p = smc_run(&[hidden_b], &cfg(4, 1)).unwrap().particles.remove(0);
    assert_eq!(p.latents.record(0, 0).unwrap().len(), 2);
}

#[test]
fn single_particle_without_data_is_a_prior_draw() {
    let run = smc_run(&[], &cfg(1, 5)).unwrap();
    assert_eq!(run.particles.len(), 1);
    assert_eq!(run.particles[0].weight(), 1.0);
    assert!(run.particles[0].theta.in_support());
    assert_ne!(smc_run(&[], &cfg(1, 6)).unwrap().particles[0].theta, run.particles[0].theta);
}

#[test]
fn weights_stay_normalized() {
    let data = tiny_dataset(1);
    let run = smc_run(&data, &cfg(500, 2)).unwrap();
    let total: f64 = run.particles.iter().map(ParticleState::weight).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(run.ess_history.len(), 5);
    assert!(run.ess_history.iter().all(|&e| (1.0 - 1e-9..=500.0 + 1e-9).contains(&e)));
    assert!(run.log_evidence.is_finite() && run.log_evidence < 0.0);
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let data = tiny_dataset(3);
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| smc_run(&data, &cfg(300, 9)).unwrap())
    };
    let a = run_with(1);
    let b = run_with(3);
    assert_eq!(a.particles, b.particles);
    assert_eq!(a.ess_history, b.ess_history);
    assert_ne!(smc_run(&data, &cfg(300, 10)).unwrap().particles, a.particles);
}

#[test]
fn impossible_data_is_degenerate() {
    let conds = [observational(&[(0.0, 2.0)])];
    let err = smc_run(&conds, &cfg(50, 0)).unwrap_err();
    assert!(matches!(&err, InferenceError::DegenerateWeights { at } if at.contains("observational")), "{err}");
    assert!(matches!(is_oracle(&conds, 100, 0), Err(InferenceError::DegenerateWeights { .. })));
}

#[test]
fn invalid_conditions_are_rejected() {
    let unknown = ConditionSpec::new("obs", None, ["z"], vec![Observation::new([("z", 1.0)])]);
    assert!(matches!(smc_run(&[unknown], &cfg(10, 0)), Err(InferenceError::InvalidCondition { .. })));
    let partial = ConditionSpec::new("obs", None, ["b", "o"], vec![Observation::new([("b", 1.0)])]);
    assert!(matches!(smc_run(&[partial], &cfg(10, 0)), Err(InferenceError::InvalidCondition { .. })));
    let bad = SmcConfig { ess_threshold: 0.0, ..SmcConfig::default() };
    assert!(matches!(smc_run(&[], &bad), Err(InferenceError::InvalidConfig { .. })));
}

#[test]
fn condition_json_shape() {
    let cond = ConditionSpec::new(
        "belief_pill",
        Some(Intervention::do_("b", 5.0)),
        ["o", "b"],
        vec![Observation::new([("b", 5.0), ("o", 1.0)])],
    );
    let value = serde_json::to_value(&cond).unwrap();
    assert_eq!(
        value,
        serde_json::json!({
            "condition": "belief_pill",
            "intervention": {"kind": "do", "var": "b", "value": 5.0},
            "observed": ["b", "o"],
            "records": [{"b": 5.0, "o": 1.0}]
        })
    );
    assert_eq!(serde_json::from_value::<ConditionSpec>(value).unwrap(), cond);
}

fn moments(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let xs: Vec<f64> = xs.collect();
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var, n)
}

#[test]
fn rejuvenation_preserves_the_prior() {
    // one record with nothing observed: the posterior is the prior over theta and latents
    let blank = ConditionSpec::new(
        "observational",
        None,
        Vec::<String>::new(),
        vec![Observation::new(Vec::<(String, f64)>::new())],
    );
    let conds = [blank];
    let config = cfg(10_000, 17);
    let mut particles = smc_run(&conds, &config).unwrap().particles;
    let kernel = Rejuvenator::new(&conds, &config).unwrap();
    let mut edge_flips = 0;
    for (i, p) in particles.iter_mut().enumerate() {
        let mut rng = stream(18, &[i as u64]);
        for _ in 0..5 {
            edge_flips += kernel.sweep(p, &mut rng).unwrap().edge_accepted;
        }
    }
    assert!(edge_flips > 10_000, "edge flips should mix freely without data");

    let check = |name: &str, values: &dyn Fn(&ParticleState) -> f64, mean: f64, var: f64| {
        let (m, v, n) = moments(particles.iter().map(values));
        let se = (var / n as f64).sqrt();
        assert!((m - mean).abs() < 4.0 * se, "{name}: mean {m} vs {mean}");
        // var of the sample variance is below 3 var^2 / n for these light-tailed marginals
        assert!((v - var).abs() < 4.0 * (3.0 * var * var / n as f64).sqrt(), "{name}: var {v} vs {var}");
    };
    check("mu_s", &|p| p.theta.mu_s, 0.0, 1.0);
    check("sigma_s", &|p| p.theta.sigma_s, 0.5, 1.0 / 12.0);
    check("sigma_b", &|p| p.theta.sigma_b, 0.5, 1.0 / 12.0);
    check("lambda_so", &|p| p.theta.lambda_so, 0.5, 1.0 / 12.0);
    check("lambda_bo", &|p| p.theta.lambda_bo, 0.5, 1.0 / 12.0);
    check("edge", &|p| p.theta.edge as u8 as f64, 0.5, 0.25);
    // s ~ normal(mu_s, sigma_s): E[s] = 0, Var[s] = Var[mu_s] + E[sigma_s^2] = 1 + 1/3
    check("s", &|p| p.latents.get(0, 0, "s").unwrap(), 0.0, 4.0 / 3.0);
}

#[test]
fn edge_flip_acceptance_is_the_likelihood_ratio() {
    let data = tiny_dataset(5);
    let run = smc_run(&data, &cfg(200, 4)).unwrap();
    let kernel = Rejuvenator::new(&data, &cfg(200, 4)).unwrap();
    for p in &run.particles {
        let mut flipped = p.clone();
        flipped.theta.edge = !flipped.theta.edge;
        assert_eq!(log_prior(&flipped.theta), log_prior(&p.theta));
        let expected = particle_log_joint(&flipped, &data).unwrap() - particle_log_joint(p, &data).unwrap();
        let got = kernel.edge_flip_log_acceptance(p).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }
}

#[test]
fn posterior_summary_examples() {
    let mut particles = smc_run(&[], &cfg(2, 0)).unwrap().particles;
    particles[0].theta.edge = false;
    particles[0].log_weight = 0.25f64.ln();
    particles[1].theta.edge = true;
    particles[1].theta.lambda_bo = 0.6;
    particles[1].log_weight = 0.75f64.ln();
    let summary = posterior_summary(&particles).unwrap();
    assert!((summary.p_edge - 0.75).abs() < 1e-12);
    assert_eq!(summary.lambda_bo_samples.len(), 1);
    assert!((summary.lambda_bo_samples[0].1 - 1.0).abs() < 1e-12);
    assert!((summary.lambda_bo_mean().unwrap() - 0.6).abs() < 1e-12);

    for p in &mut particles {
        p.theta.edge = true;
        p.log_weight = 0.5f64.ln();
    }
    assert!((posterior_summary(&particles).unwrap().p_edge - 1.0).abs() < 1e-12);

    for p in &mut particles {
        p.theta.edge = false;
    }
    let none = posterior_summary(&particles).unwrap();
    assert!(none.lambda_bo_empty && none.lambda_bo_samples.is_empty() && none.lambda_bo_mean().is_none());
    assert!(matches!(posterior_summary(&[]), Err(InferenceError::EmptyPosterior)));
}

#[test]
fn posterior_csv_layout() {
    let particles = smc_run(&[], &cfg(3, 0)).unwrap().particles;
    let mut bytes = Vec::new();
    write_posterior_csv(&particles, &mut bytes).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "particle_id,weight,mu_s,sigma_s,sigma_b,lambda_so,lambda_bo,edge");
    assert_eq!(lines.count(), 3);
}

#[test]
fn oracle_without_data_recovers_the_prior() {
    let n = 20_000;
    let summary = is_oracle(&[], n, 1).unwrap();
    assert!((summary.p_edge - 0.5).abs() < 3.0 / (n as f64).sqrt());
    assert_eq!(summary.log_marginal_likelihood, 0.0);
    let blank = ConditionSpec::new(
        "observational",
        None,
        Vec::<String>::new(),
        vec![Observation::new(Vec::<(String, f64)>::new())],
    );
    assert_eq!(is_oracle(&[blank], 1000, 1).unwrap().log_marginal_likelihood, 0.0);
}

#[test]
fn oracle_is_self_consistent() {
    let conds = [ConditionSpec::new("observational", None, ["o"], vec![Observation::new([("o", 1.0)])])];
    let a = is_oracle(&conds, 20_000, 1).unwrap();
    let b = is_oracle(&conds, 20_000, 2).unwrap();
    let se = |s: &ministan::inference::OracleSummary| (s.p_edge * (1.0 - s.p_edge) / s.effective_sample_size).sqrt();
    assert!((a.p_edge - b.p_edge).abs() < 3.0 * (se(&a).powi(2) + se(&b).powi(2)).sqrt());
    // the prior logit is symmetric about zero, so P(o = 1) = 1/2
    assert!((a.log_marginal_likelihood - 0.5f64.ln()).abs() < 0.02, "{}", a.log_marginal_likelihood);
}

#[test]
fn smc_tracks_the_oracle_on_a_tiny_dataset() {
    let data = tiny_dataset(2);
    let smc = posterior_summary(&smc_run(&data, &cfg(4000, 2)).unwrap().particles).unwrap();
    let oracle = is_oracle(&data, 40_000, 2).unwrap();
    assert!((smc.p_edge - oracle.p_edge).abs() < 0.08, "{} vs {}", smc.p_edge, oracle.p_edge);
}
