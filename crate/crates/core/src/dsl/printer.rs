//! Canonical printer: one statement per line, single spaces around `=`, `~` and binary operators,
//! parentheses only where the tree shape requires them.

use std::fmt;

use super::ast::{Dist, Expr, Program, Stmt};

const UNARY_PREC: u8 = 3;
const ATOM_PREC: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Bin(op, ..) => op.precedence(),
        Expr::Neg(_) => UNARY_PREC,
        // A negative literal prints with a leading `-`, so it only survives in unary position.
        Expr::Num(v) if v.is_sign_negative() => UNARY_PREC,
        _ => ATOM_PREC,
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let magnitude = v.abs();
    if magnitude != 0.0 && !(1e-5..1e16).contains(&magnitude) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => f.write_str(&format_number(*v)),
            Expr::Var(name) => f.write_str(name),
            Expr::Bin(op, lhs, rhs) => {
                let p = op.precedence();
                write_child(f, lhs, precedence(lhs) < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, rhs, precedence(rhs) <= p)
            }
            Expr::Neg(inner) => {
                f.write_str("-")?;
                // `-2` would re-parse as a literal, so a negated literal keeps its parentheses.
                let parens = precedence(inner) < UNARY_PREC || matches!(**inner, Expr::Num(v) if !v.is_sign_negative());
                write_child(f, inner, parens)
            }
            Expr::Exp(inner) => write!(f, "exp({inner})"),
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Normal(a, b) | Dist::Uniform(a, b) => write!(f, "{}({a}, {b})", self.name()),
            Dist::Bernoulli(p) => write!(f, "bernoulli({p})"),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign { var, value } => write!(f, "{var} = {value}"),
            Stmt::Sample { var, dist } => write!(f, "{var} ~ {dist}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, stmt) in self.stmts.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{stmt}")?;
        }
        Ok(())
    }
}

/// Canonical text of a program, without a trailing newline.
pub fn print_program(p: &Program) -> String {
    p.to_string()
}
