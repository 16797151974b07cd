//! Forward simulation and scoring of MiniStan programs.
//!
//! A program is compiled once into a slot-indexed form (statement `i` defines slot `i`), which is
//! what both semantics run on. External parameters let a symbolic template such as
//! `s ~ normal(mu_s, sigma_s)` be evaluated without re-rendering it for every parameter value.

use std::collections::{BTreeMap, HashMap};

use indexmap::IndexMap;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{BinOp, Dist, Expr, Program, Stmt};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("unbound variable `{name}`")]
    UnboundVariable { name: String },
    #[error("statement {stmt} (`{var}`): {reason}")]
    InvalidParameter { stmt: usize, var: String, reason: String },
    #[error("no value supplied for sampled variable `{name}`")]
    MissingVariable { name: String },
    #[error("`{name}` is bound by both the observation and the latents")]
    OverlappingAssignment { name: String },
}

/// Name lookup used by [`eval_expr`] and [`log_density`].
pub trait Env {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Env for BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Env for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Env for IndexMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

/// Values of one execution, in program order, plus the log-density of each sampled variable.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Trace {
    pub bindings: IndexMap<String, f64>,
    pub logp_by_var: IndexMap<String, f64>,
}

impl Trace {
    pub fn log_density(&self) -> f64 {
        self.logp_by_var.values().sum()
    }

    /// Values of the given variables only.
    pub fn project<'a>(&self, vars: impl IntoIterator<Item = &'a str>) -> Option<Observation> {
        let mut values = BTreeMap::new();
        for v in vars {
            values.insert(v.to_string(), *self.bindings.get(v)?);
        }
        Some(Observation { values })
    }
}

impl Serialize for Trace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.bindings.serialize(serializer)
    }
}

/// The observed subset of a trace.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation {
    pub values: BTreeMap<String, f64>,
}

impl Observation {
    pub fn new(values: impl IntoIterator<Item = (impl Into<String>, f64)>) -> Self {
        Observation { values: values.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }
}

impl Env for Observation {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

pub fn eval_expr(e: &Expr, env: &impl Env) -> Result<f64, InterpError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Var(name) => env.lookup(name).ok_or_else(|| InterpError::UnboundVariable { name: name.clone() })?,
        Expr::Bin(op, lhs, rhs) => op.apply(eval_expr(lhs, env)?, eval_expr(rhs, env)?),
        Expr::Neg(inner) => -eval_expr(inner, env)?,
        Expr::Exp(inner) => eval_expr(inner, env)?.exp(),
    })
}

pub fn normal_logpdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -HALF_LN_2PI - std.ln() - 0.5 * z * z
}

pub fn uniform_logpdf(x: f64, lo: f64, hi: f64) -> f64 {
    if (lo..=hi).contains(&x) {
        -(hi - lo).ln()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn bernoulli_logpmf(x: f64, p: f64) -> f64 {
    if x == 1.0 {
        p.ln()
    } else if x == 0.0 {
        (-p).ln_1p()
    } else {
        f64::NEG_INFINITY
    }
}

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Slot(usize),
    Param(usize),
    Bin(BinOp, Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Exp(Box<Node>),
}

impl Node {
    #[inline]
    fn eval(&self, params: &[f64], slots: &[f64]) -> f64 {
        match self {
            Node::Const(v) => *v,
            Node::Slot(i) => slots[*i],
            Node::Param(i) => params[*i],
            Node::Bin(op, lhs, rhs) => op.apply(lhs.eval(params, slots), rhs.eval(params, slots)),
            Node::Neg(inner) => -inner.eval(params, slots),
            Node::Exp(inner) => inner.eval(params, slots).exp(),
        }
    }
}

#[derive(Clone, Debug)]
enum Op {
    Assign(Node),
    Normal(Node, Node),
    Uniform(Node, Node),
    Bernoulli(Node),
}

/// Distribution of one sample statement with its parameters evaluated and checked.
#[derive(Clone, Copy, Debug)]
enum Evaluated {
    Normal { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
    Bernoulli { p: f64 },
}

impl Evaluated {
    fn log_density(self, x: f64) -> f64 {
        match self {
            Evaluated::Normal { mean, std } => normal_logpdf(x, mean, std),
            Evaluated::Uniform { lo, hi } => uniform_logpdf(x, lo, hi),
            Evaluated::Bernoulli { p } => bernoulli_logpmf(x, p),
        }
    }

    fn draw(self, rng: &mut impl Rng) -> f64 {
        match self {
            Evaluated::Normal { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
            Evaluated::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            Evaluated::Bernoulli { p } => {
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Log-weights produced by [`CompiledProgram::sample_unobserved`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weighting {
    /// Log-density of the observed sampled variables given everything before them.
    pub log_likelihood: f64,
    /// Log-density of the freshly drawn latent values under their conditional distributions.
    pub log_proposal: f64,
}

/// A program compiled to slot-indexed form.
#[derive(Clone, Debug)]
pub struct CompiledProgram {
    names: Vec<String>,
    params: Vec<String>,
    ops: Vec<Op>,
}

impl CompiledProgram {
    pub fn compile(p: &Program) -> Result<Self, InterpError> {
        Self::compile_with_params(p, &[])
    }

    /// Compiles a program whose free variables are the named external parameters, supplied
    /// positionally at evaluation time.
    pub fn compile_with_params(p: &Program, params: &[&str]) -> Result<Self, InterpError> {
        let mut names: Vec<String> = Vec::with_capacity(p.len());
        let mut ops = Vec::with_capacity(p.len());
        for stmt in &p.stmts {
            let lower = |e: &Expr| lower_expr(e, &names, params);
            let op = match stmt {
                Stmt::Assign { value, .. } => Op::Assign(lower(value)?),
                Stmt::Sample { dist: Dist::Normal(m, s), .. } => Op::Normal(lower(m)?, lower(s)?),
                Stmt::Sample { dist: Dist::Uniform(a, b), .. } => Op::Uniform(lower(a)?, lower(b)?),
                Stmt::Sample { dist: Dist::Bernoulli(q), .. } => Op::Bernoulli(lower(q)?),
            };
            ops.push(op);
            names.push(stmt.var().to_string());
        }
        Ok(CompiledProgram { names, params: params.iter().map(|s| s.to_string()).collect(), ops })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Variable defined by each slot, in program order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_sample(&self, slot: usize) -> bool {
        !matches!(self.ops[slot], Op::Assign(_))
    }

    fn evaluate(&self, i: usize, params: &[f64], slots: &[f64]) -> Result<Option<Evaluated>, InterpError> {
        let invalid = |reason: String| InterpError::InvalidParameter { stmt: i, var: self.names[i].clone(), reason };
        Ok(Some(match &self.ops[i] {
            Op::Assign(_) => return Ok(None),
            Op::Normal(m, s) => {
                let (mean, std) = (m.eval(params, slots), s.eval(params, slots));
                if !mean.is_finite() || !std.is_finite() || std <= 0.0 {
                    return Err(invalid(format!("normal needs finite mean and std > 0, got ({mean}, {std})")));
                }
                Evaluated::Normal { mean, std }
            }
            Op::Uniform(a, b) => {
                let (lo, hi) = (a.eval(params, slots), b.eval(params, slots));
                if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                    return Err(invalid(format!("uniform needs finite bounds with lo < hi, got ({lo}, {hi})")));
                }
                Evaluated::Uniform { lo, hi }
            }
            Op::Bernoulli(q) => {
                let p = q.eval(params, slots);
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("bernoulli probability must lie in [0, 1], got {p}")));
                }
                Evaluated::Bernoulli { p }
            }
        }))
    }

    fn assign(&self, i: usize, params: &[f64], slots: &mut [f64]) -> bool {
        if let Op::Assign(e) = &self.ops[i] {
            slots[i] = e.eval(params, slots);
            true
        } else {
            false
        }
    }

    /// Joint log-density of the sampled slots. Assign slots are overwritten with recomputed values.
    pub fn log_density_slots(&self, params: &[f64], slots: &mut [f64]) -> Result<f64, InterpError> {
        let mut total = 0.0;
        for i in 0..self.ops.len() {
            if !self.assign(i, params, slots) {
                let dist = self.evaluate(i, params, slots)?.expect("sample statement");
                total += dist.log_density(slots[i]);
            }
        }
        Ok(total)
    }

    /// Runs the program forward, writing every slot. `logp`, if given, receives each sampled
    /// slot's log-density (zero for assignments). Returns the total.
    pub fn simulate_slots(
        &self,
        params: &[f64],
        slots: &mut [f64],
        mut logp: Option<&mut [f64]>,
        rng: &mut impl Rng,
    ) -> Result<f64, InterpError> {
        let mut total = 0.0;
        for i in 0..self.ops.len() {
            let lp = if self.assign(i, params, slots) {
                0.0
            } else {
                let dist = self.evaluate(i, params, slots)?.expect("sample statement");
                slots[i] = dist.draw(rng);
                dist.log_density(slots[i])
            };
            total += lp;
            if let Some(out) = logp.as_deref_mut() {
                out[i] = lp;
            }
        }
        Ok(total)
    }

    /// Draws every unobserved sampled slot from its conditional given the slots before it,
    /// keeping observed slots fixed (likelihood weighting).
    pub fn sample_unobserved(
        &self,
        params: &[f64],
        slots: &mut [f64],
        observed: &[bool],
        rng: &mut impl Rng,
    ) -> Result<Weighting, InterpError> {
        let mut w = Weighting { log_likelihood: 0.0, log_proposal: 0.0 };
        for i in 0..self.ops.len() {
            if self.assign(i, params, slots) {
                continue;
            }
            let dist = self.evaluate(i, params, slots)?.expect("sample statement");
            if observed[i] {
                w.log_likelihood += dist.log_density(slots[i]);
            } else {
                slots[i] = dist.draw(rng);
                w.log_proposal += dist.log_density(slots[i]);
            }
        }
        Ok(w)
    }
}

fn lower_expr(e: &Expr, defined: &[String], params: &[&str]) -> Result<Node, InterpError> {
    Ok(match e {
        Expr::Num(v) => Node::Const(*v),
        Expr::Var(name) => {
            if let Some(i) = defined.iter().rposition(|d| d == name) {
                Node::Slot(i)
            } else if let Some(i) = params.iter().position(|p| p == name) {
                Node::Param(i)
            } else {
                return Err(InterpError::UnboundVariable { name: name.clone() });
            }
        }
        Expr::Bin(op, lhs, rhs) => {
            Node::Bin(*op, Box::new(lower_expr(lhs, defined, params)?), Box::new(lower_expr(rhs, defined, params)?))
        }
        Expr::Neg(inner) => Node::Neg(Box::new(lower_expr(inner, defined, params)?)),
        Expr::Exp(inner) => Node::Exp(Box::new(lower_expr(inner, defined, params)?)),
    })
}

/// Executes the program forward, drawing every sampled variable. Deterministic given `rng`.
pub fn simulate(p: &Program, rng: &mut impl Rng) -> Result<Trace, InterpError> {
    let compiled = CompiledProgram::compile(p)?;
    let mut slots = vec![0.0; compiled.len()];
    let mut logp = vec![0.0; compiled.len()];
    compiled.simulate_slots(&[], &mut slots, Some(&mut logp), rng)?;
    let mut trace = Trace::default();
    for (i, name) in compiled.names().iter().enumerate() {
        trace.bindings.insert(name.clone(), slots[i]);
        if compiled.is_sample(i) {
            trace.logp_by_var.insert(name.clone(), logp[i]);
        }
    }
    Ok(trace)
}

/// Joint log-density of the sampled variables bound in `full`. Deterministic variables are
/// recomputed from their ancestors; any values supplied for them are ignored.
pub fn log_density(p: &Program, full: &impl Env) -> Result<f64, InterpError> {
    let compiled = CompiledProgram::compile(p)?;
    let mut slots = vec![0.0; compiled.len()];
    for (i, name) in compiled.names().iter().enumerate() {
        if compiled.is_sample(i) {
            slots[i] = full.lookup(name).ok_or_else(|| InterpError::MissingVariable { name: name.clone() })?;
        }
    }
    compiled.log_density_slots(&[], &mut slots)
}

/// `log_density` of the union of an observation and a disjoint latent assignment.
pub fn log_joint_with_latents(
    p: &Program,
    obs: &Observation,
    latents: &BTreeMap<String, f64>,
) -> Result<f64, InterpError> {
    if let Some(name) = latents.keys().find(|k| obs.values.contains_key(*k)) {
        return Err(InterpError::OverlappingAssignment { name: name.clone() });
    }
    let mut full = obs.values.clone();
    full.extend(latents.iter().map(|(k, v)| (k.clone(), *v)));
    log_density(p, &full)
}
