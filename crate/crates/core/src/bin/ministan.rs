use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use ministan::dsl::{parse_program, print_program, Program};
use ministan::harness::{default_plan, replicate, ExperimentPlan};
use ministan::inference::{is_oracle, ConditionSpec};
use ministan::interpreter::{log_density, simulate};
use ministan::interventions::{apply_intervention_with, Intervention, Mode};
use ministan::rng::stream;

#[derive(Parser)]
#[command(name = "ministan", version, about = "Causal inference over MiniStan programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw traces from a program and print them as JSON lines.
    Simulate {
        program: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply an intervention and print the rewritten program.
    Intervene {
        program: PathBuf,
        /// Intervention JSON, inline or a file path.
        #[arg(long)]
        spec: String,
        /// Skip interventions that do not apply instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Print the joint log-density of a full trace.
    Score {
        program: PathBuf,
        /// Trace JSON object, inline or a file path.
        #[arg(long)]
        trace: String,
    },
    /// Generate data from an experiment plan and run the evidence ladder.
    Replicate {
        /// Plan JSON; the built-in plan is used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "ministan_out")]
        out: PathBuf,
        /// Seed for data generation and inference; defaults to the plan's SMC seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Additional variables to observe, e.g. `--observe s`.
        #[arg(long)]
        observe: Vec<String>,
        #[arg(long)]
        particles: Option<usize>,
    },
    /// Prior importance sampling on a small dataset.
    Oracle {
        /// Dataset JSON: a condition object or a list of them.
        data: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    kind: String,
    message: String,
}

impl From<ministan::Error> for Failure {
    fn from(e: ministan::Error) -> Self {
        Failure { kind: e.kind().into(), message: e.to_string() }
    }
}

fn failure(kind: &str, message: impl std::fmt::Display) -> Failure {
    Failure { kind: kind.into(), message: message.to_string() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| failure("io_error", format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?).map_err(|e| ministan::Error::from(e).into())
}

/// Parses `arg` as JSON, reading it from a file first unless it looks like inline JSON.
fn inline_or_file<T: DeserializeOwned>(arg: &str) -> Result<T, Failure> {
    let trimmed = arg.trim_start();
    let text =
        if trimmed.starts_with('{') || trimmed.starts_with('[') { arg.to_string() } else { read(Path::new(arg))? };
    serde_json::from_str(&text).map_err(|e| failure("invalid_json", e))
}

fn format_score(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let io_fail = |e: io::Error| failure("io_error", e);
    match command {
        Command::Simulate { program, n, seed } => {
            let program = load_program(&program)?;
            for i in 0..n {
                let trace = simulate(&program, &mut stream(seed, &[i as u64])).map_err(ministan::Error::from)?;
                serde_json::to_writer(&mut out, &trace).map_err(|e| failure("io_error", e))?;
                writeln!(out).map_err(io_fail)?;
            }
        }
        Command::Intervene { program, spec, lenient } => {
            let program = load_program(&program)?;
            let intervention: Intervention = inline_or_file(&spec)?;
            let mode = if lenient { Mode::Lenient } else { Mode::Strict };
            let edited = apply_intervention_with(&program, &intervention, mode).map_err(ministan::Error::from)?;
            writeln!(out, "{}", print_program(&edited)).map_err(io_fail)?;
        }
        Command::Score { program, trace } => {
            let program = load_program(&program)?;
            let trace: BTreeMap<String, f64> = inline_or_file(&trace)?;
            let score = log_density(&program, &trace).map_err(ministan::Error::from)?;
            writeln!(out, "{}", format_score(score)).map_err(io_fail)?;
        }
        Command::Replicate { config, out: dir, seed, observe, particles } => {
            let mut plan: ExperimentPlan = match config {
                Some(path) => serde_json::from_str(&read(&path)?).map_err(|e| failure("invalid_json", e))?,
                None => default_plan(),
            };
            plan.observed_vars.extend(observe);
            if let Some(n) = particles {
                plan.smc.n_particles = n;
            }
            let seed = seed.unwrap_or(plan.smc.seed);
            let report = replicate(&plan, seed, &dir)?;
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| failure("io_error", e))?;
            writeln!(out).map_err(io_fail)?;
        }
        Command::Oracle { data, n, seed } => {
            let value: serde_json::Value =
                serde_json::from_str(&read(&data)?).map_err(|e| failure("invalid_json", e))?;
            let conds: Vec<ConditionSpec> = if value.is_array() {
                serde_json::from_value(value)
            } else {
                serde_json::from_value(value).map(|c| vec![c])
            }
            .map_err(|e| failure("invalid_json", e))?;
            let summary = is_oracle(&conds, n, seed).map_err(ministan::Error::from)?;
            serde_json::to_writer_pretty(&mut out, &summary).map_err(|e| failure("io_error", e))?;
            writeln!(out).map_err(io_fail)?;
        }
    }
    out.flush().map_err(io_fail)
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("usage_error", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f.kind, &f.message);
            ExitCode::from(1)
        }
    }
}
