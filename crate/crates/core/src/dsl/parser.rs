//! Tokenizer and recursive-descent parser for the MiniStan text format.
//!
//! Statements are separated by newlines or semicolons. Expressions use the usual precedence
//! (unary minus, then `*` `/`, then `+` `-`) with left associativity. A minus sign directly in
//! front of a numeric literal in prefix position is folded into a negative literal, which is what
//! lets the printer emit negative constants as `-0.592`.

use super::ast::{BinOp, Dist, Expr, Program, Stmt};
use super::DslError;

const KEYWORDS: [&str; 4] = ["normal", "uniform", "bernoulli", "exp"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Op(char),
    LParen,
    RParen,
    Comma,
    Eq,
    Tilde,
    Sep,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Sep => "end of statement".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> DslError {
    DslError::Syntax { line, col, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |tokens: &mut Vec<Token>, tok| tokens.push(Token { tok, line: start_line, col: start_col });
        match c {
            '\n' => {
                push(&mut tokens, Tok::Sep);
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ';' => push(&mut tokens, Tok::Sep),
            ' ' | '\t' | '\r' => {}
            '+' | '-' | '*' | '/' => push(&mut tokens, Tok::Op(c)),
            '(' => push(&mut tokens, Tok::LParen),
            ')' => push(&mut tokens, Tok::RParen),
            ',' => push(&mut tokens, Tok::Comma),
            '=' => push(&mut tokens, Tok::Eq),
            '~' => push(&mut tokens, Tok::Tilde),
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    } else {
                        return Err(syntax(line, col + (k - i), "malformed exponent in numeric literal"));
                    }
                }
                let literal: String = chars[i..j].iter().collect();
                let value: f64 =
                    literal.parse().map_err(|_| syntax(line, col, format!("malformed numeric literal `{literal}`")))?;
                push(&mut tokens, Tok::Num(value));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                push(&mut tokens, Tok::Ident(name));
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> DslError {
        let t = self.peek();
        syntax(t.line, t.col, format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), DslError> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn skip_separators(&mut self) {
        while self.peek().tok == Tok::Sep {
            self.next();
        }
    }

    fn program(&mut self) -> Result<Program, DslError> {
        let mut stmts = Vec::new();
        self.skip_separators();
        while self.peek().tok != Tok::Eof {
            stmts.push(self.stmt()?);
            match self.peek().tok {
                Tok::Sep => self.skip_separators(),
                Tok::Eof => {}
                _ => return Err(self.error_here("newline or `;` after statement")),
            }
        }
        if stmts.is_empty() {
            let t = self.peek();
            return Err(syntax(t.line, t.col, "empty program"));
        }
        Ok(Program::new(stmts))
    }

    fn identifier(&mut self) -> Result<String, DslError> {
        match self.peek().tok.clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.next();
                Ok(name)
            }
            _ => Err(self.error_here("variable name")),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, DslError> {
        let var = self.identifier()?;
        match self.peek().tok {
            Tok::Eq => {
                self.next();
                Ok(Stmt::assign(var, self.expr()?))
            }
            Tok::Tilde => {
                self.next();
                Ok(Stmt::sample(var, self.dist()?))
            }
            _ => Err(self.error_here("`=` or `~`")),
        }
    }

    fn dist(&mut self) -> Result<Dist, DslError> {
        let name = match self.peek().tok.clone() {
            Tok::Ident(name) => name,
            _ => return Err(self.error_here("distribution name")),
        };
        let arity = match name.as_str() {
            "normal" | "uniform" => 2,
            "bernoulli" => 1,
            _ => return Err(self.error_here("`normal`, `uniform` or `bernoulli`")),
        };
        self.next();
        self.expect(Tok::LParen, "`(`")?;
        let first = self.expr()?;
        let second = if arity == 2 {
            self.expect(Tok::Comma, "`,`")?;
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(match (name.as_str(), second) {
            ("normal", Some(std)) => Dist::Normal(first, std),
            ("uniform", Some(hi)) => Dist::Uniform(first, hi),
            (_, _) => Dist::Bernoulli(first),
        })
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.peek().tok == Tok::Op('-') {
            self.next();
            if let Tok::Num(v) = self.peek().tok {
                self.next();
                return Ok(Expr::Num(-v));
            }
            return Ok(Expr::neg(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        match self.peek().tok.clone() {
            Tok::Num(v) => {
                self.next();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.next();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "exp" => {
                self.next();
                self.expect(Tok::LParen, "`(` after `exp`")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::exp(inner))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.identifier()?)),
            _ => Err(self.error_here("expression")),
        }
    }
}

/// Parses program text without scope checks.
pub(crate) fn parse_unchecked(text: &str) -> Result<Program, DslError> {
    let tokens = tokenize(text)?;
    Parser { tokens, pos: 0 }.program()
}

/// Parses a closed MiniStan program: every variable must be defined before use.
pub fn parse_program(text: &str) -> Result<Program, DslError> {
    parse_program_with_params(text, &[])
}

/// Parses a program that may reference the named external parameters (e.g. `mu_s` in a
/// symbolic model template) without defining them.
pub fn parse_program_with_params(text: &str, params: &[&str]) -> Result<Program, DslError> {
    let program = parse_unchecked(text)?;
    program.validate(params)?;
    Ok(program)
}
