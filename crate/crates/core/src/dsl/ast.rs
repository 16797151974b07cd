//! MiniStan abstract syntax.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; larger binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub fn apply(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            BinOp::Add => lhs + rhs,
            BinOp::Sub => lhs - rhs,
            BinOp::Mul => lhs * rhs,
            BinOp::Div => lhs / rhs,
        }
    }
}

/// Deterministic expressions: literals, variables, arithmetic, unary minus and `exp`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Exp(Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(value: f64) -> Self {
        Expr::Num(value)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn add(lhs: Expr, rhs: Expr) -> Self {
        Expr::bin(BinOp::Add, lhs, rhs)
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Self {
        Expr::bin(BinOp::Sub, lhs, rhs)
    }

    pub fn mul(lhs: Expr, rhs: Expr) -> Self {
        Expr::bin(BinOp::Mul, lhs, rhs)
    }

    pub fn div(lhs: Expr, rhs: Expr) -> Self {
        Expr::bin(BinOp::Div, lhs, rhs)
    }

    pub fn neg(operand: Expr) -> Self {
        Expr::Neg(Box::new(operand))
    }

    pub fn exp(operand: Expr) -> Self {
        Expr::Exp(Box::new(operand))
    }

    /// Variable references in left-to-right order, with repetitions.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(name) => f(name),
            Expr::Bin(_, lhs, rhs) => {
                lhs.visit_vars(f);
                rhs.visit_vars(f);
            }
            Expr::Neg(inner) | Expr::Exp(inner) => inner.visit_vars(f),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == name);
        found
    }

    /// Replaces every reference to a name in `values` with its literal.
    pub fn substitute(&self, values: &BTreeMap<String, f64>) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var(name) => match values.get(name) {
                Some(v) => Expr::Num(*v),
                None => Expr::Var(name.clone()),
            },
            Expr::Bin(op, lhs, rhs) => Expr::bin(*op, lhs.substitute(values), rhs.substitute(values)),
            Expr::Neg(inner) => Expr::neg(inner.substitute(values)),
            Expr::Exp(inner) => Expr::exp(inner.substitute(values)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dist {
    /// `normal(mean, std)`; the second argument is a standard deviation.
    Normal(Expr, Expr),
    Uniform(Expr, Expr),
    Bernoulli(Expr),
}

impl Dist {
    pub fn name(&self) -> &'static str {
        match self {
            Dist::Normal(..) => "normal",
            Dist::Uniform(..) => "uniform",
            Dist::Bernoulli(..) => "bernoulli",
        }
    }

    pub fn args(&self) -> Vec<&Expr> {
        match self {
            Dist::Normal(a, b) | Dist::Uniform(a, b) => vec![a, b],
            Dist::Bernoulli(p) => vec![p],
        }
    }

    fn map(&self, f: impl Fn(&Expr) -> Expr) -> Dist {
        match self {
            Dist::Normal(a, b) => Dist::Normal(f(a), f(b)),
            Dist::Uniform(a, b) => Dist::Uniform(f(a), f(b)),
            Dist::Bernoulli(p) => Dist::Bernoulli(f(p)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    /// `x = E`
    Assign { var: String, value: Expr },
    /// `x ~ D`
    Sample { var: String, dist: Dist },
}

impl Stmt {
    pub fn assign(var: impl Into<String>, value: Expr) -> Self {
        Stmt::Assign { var: var.into(), value }
    }

    pub fn sample(var: impl Into<String>, dist: Dist) -> Self {
        Stmt::Sample { var: var.into(), dist }
    }

    pub fn var(&self) -> &str {
        match self {
            Stmt::Assign { var, .. } | Stmt::Sample { var, .. } => var,
        }
    }

    pub fn is_sample(&self) -> bool {
        matches!(self, Stmt::Sample { .. })
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Stmt::Assign { value, .. } => value.visit_vars(f),
            Stmt::Sample { dist, .. } => {
                for arg in dist.args() {
                    arg.visit_vars(f);
                }
            }
        }
    }

    pub fn substitute(&self, values: &BTreeMap<String, f64>) -> Stmt {
        match self {
            Stmt::Assign { var, value } => Stmt::assign(var.clone(), value.substitute(values)),
            Stmt::Sample { var, dist } => Stmt::sample(var.clone(), dist.map(|e| e.substitute(values))),
        }
    }
}

/// A straight-line MiniStan program.
///
/// The parser guarantees the program is non-empty, defines each variable at most once and (unless
/// parameters were declared) references only previously defined variables. Programs built by hand
/// can be checked with [`Program::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Program {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Program { stmts }
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    /// Index of the statement defining `var`.
    pub fn definition_of(&self, var: &str) -> Option<usize> {
        self.stmts.iter().position(|s| s.var() == var)
    }

    pub fn defined_vars(&self) -> impl Iterator<Item = &str> {
        self.stmts.iter().map(Stmt::var)
    }

    pub fn sample_vars(&self) -> impl Iterator<Item = &str> {
        self.stmts.iter().filter(|s| s.is_sample()).map(Stmt::var)
    }

    pub fn substitute(&self, values: &BTreeMap<String, f64>) -> Program {
        Program::new(self.stmts.iter().map(|s| s.substitute(values)).collect())
    }

    /// Variables referenced before their definition, in first-use order, without repeats.
    pub fn free_vars(&self) -> Vec<String> {
        let mut defined = BTreeSet::new();
        let mut free: Vec<String> = Vec::new();
        for stmt in &self.stmts {
            stmt.visit_vars(&mut |v| {
                if !defined.contains(v) && !free.iter().any(|f| f == v) {
                    free.push(v.to_string());
                }
            });
            defined.insert(stmt.var());
        }
        free
    }

    /// Checks the structural invariants, allowing references to the given external parameters.
    pub fn validate(&self, params: &[&str]) -> Result<(), super::DslError> {
        use super::DslError;
        if self.stmts.is_empty() {
            return Err(DslError::EmptyProgram);
        }
        let mut defined: BTreeSet<&str> = BTreeSet::new();
        for stmt in &self.stmts {
            let mut unbound = None;
            stmt.visit_vars(&mut |v| {
                if unbound.is_none() && !defined.contains(v) && !params.contains(&v) {
                    unbound = Some(v.to_string());
                }
            });
            if let Some(name) = unbound {
                return Err(DslError::Scope { name });
            }
            if !defined.insert(stmt.var()) || params.contains(&stmt.var()) {
                return Err(DslError::Redefinition { name: stmt.var().to_string() });
            }
        }
        Ok(())
    }
}

/// Variables used before definition, in first-use order; empty iff the program is well-scoped.
pub fn free_check(p: &Program) -> Vec<String> {
    p.free_vars()
}
