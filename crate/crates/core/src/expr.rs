//! Arithmetic expressions for kernels, sources and exact solutions.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than a leading minus, so
//! `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. The Unicode minus sign
//! `−` is accepted wherever `-` is. There is no implicit multiplication.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::special_functions::{beta_fn, gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Pow,
    Gamma,
    Beta,
    Abs,
}

impl Func {
    const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Pow,
        Func::Gamma,
        Func::Beta,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
            Func::Gamma => "gamma",
            Func::Beta => "beta",
            Func::Abs => "abs",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Beta => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Parsed expression. Equality ignores source offsets.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    /// `slot` indexes the variable list given to [`parse`].
    Var {
        name: String,
        slot: usize,
    },
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call {
        func: Func,
        args: Vec<Expr>,
        offset: usize,
    },
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Num(a), Expr::Num(b)) => a.to_bits() == b.to_bits(),
            (Expr::Var { name: a, .. }, Expr::Var { name: b, .. }) => a == b,
            (Expr::Neg(a), Expr::Neg(b)) => a == b,
            (Expr::Bin(o1, a1, b1), Expr::Bin(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (
                Expr::Call {
                    func: f1, args: a1, ..
                },
                Expr::Call {
                    func: f2, args: a2, ..
                },
            ) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var { name, .. } => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call { func, args, .. } => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {ch:?} at byte {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("expected {expected} at byte {offset}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
        offset: usize,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable `{name}` is not allowed here (byte {offset})")]
    VariableNotAllowed { name: String, offset: usize },
    #[error("`{func}` takes {expected} argument(s), got {got} (byte {offset})")]
    Arity {
        func: &'static str,
        expected: usize,
        got: usize,
        offset: usize,
    },
    #[error("number literal at byte {offset} is not finite")]
    NonFiniteLiteral { offset: usize },
}

impl ParseError {
    /// Byte offset of the error in the source, if it has one.
    pub fn offset(&self) -> Option<usize> {
        match *self {
            ParseError::Empty => None,
            ParseError::UnexpectedChar { offset, .. }
            | ParseError::Unexpected { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::VariableNotAllowed { offset, .. }
            | ParseError::Arity { offset, .. }
            | ParseError::NonFiniteLiteral { offset } => Some(offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("{func}({arg}) is undefined (byte {offset})")]
    Domain {
        func: &'static str,
        arg: f64,
        offset: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let ch = src[i..].chars().next().unwrap_or('\0');
        let start = i;
        if ch.is_whitespace() {
            i += ch.len_utf8();
            continue;
        }
        if ch.is_ascii_digit() || ch == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::Unexpected {
                expected: "a number",
                found: format!("`{text}`"),
                offset: start,
            })?;
            if !v.is_finite() {
                return Err(ParseError::NonFiniteLiteral { offset: start });
            }
            out.push((Tok::Num(v), start));
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let tok = match ch {
            '+' | '*' | '/' | '^' | '-' => Tok::Op(ch),
            '\u{2212}' => Tok::Op('-'),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => return Err(ParseError::UnexpectedChar { ch, offset: start }),
        };
        out.push((tok, start));
        i += ch.len_utf8();
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError::Unexpected {
            expected,
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), Tok::to_string),
            offset: self.offset(),
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Tok::Op(c)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            return Ok(Expr::Bin(
                BinOp::Pow,
                Box::new(base),
                Box::new(self.unary()?),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::lookup(&name)
                        .ok_or(ParseError::UnknownIdentifier { name, offset })?;
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`,` or `)`")?;
                    if args.len() != func.arity() {
                        return Err(ParseError::Arity {
                            func: func.name(),
                            expected: func.arity(),
                            got: args.len(),
                            offset,
                        });
                    }
                    return Ok(Expr::Call { func, args, offset });
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(slot) => Ok(Expr::Var { name, slot }),
                    None if Func::lookup(&name).is_some() || name.len() > 1 => {
                        Err(ParseError::UnknownIdentifier { name, offset })
                    }
                    None => Err(ParseError::VariableNotAllowed { name, offset }),
                }
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }
}

/// Parses `src`, resolving variables against `allowed_vars` (the order fixes
/// the slots used by [`Expr::eval_slots`]).
pub fn parse(src: &str, allowed_vars: &[&str]) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        vars: allowed_vars,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

fn apply(func: Func, args: &[f64], offset: usize) -> Result<f64, EvalError> {
    let domain = |arg| EvalError::Domain {
        func: func.name(),
        arg,
        offset,
    };
    let a = args[0];
    Ok(match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Log if a <= 0.0 => return Err(domain(a)),
        Func::Log => a.ln(),
        Func::Sqrt if a < 0.0 => return Err(domain(a)),
        Func::Sqrt => a.sqrt(),
        Func::Abs => a.abs(),
        Func::Pow => a.powf(args[1]),
        Func::Gamma => gamma(a).map_err(|_| domain(a))?,
        Func::Beta => beta_fn(a, args[1]).map_err(|_| domain(a))?,
    })
}

impl Expr {
    /// Evaluates with values looked up by slot.
    pub fn eval_slots(&self, vals: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var { name, slot } => *vals
                .get(*slot)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(e) => -e.eval_slots(vals)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_slots(vals)?, b.eval_slots(vals)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call { func, args, offset } => {
                let mut v = [0.0; 2];
                for (slot, a) in v.iter_mut().zip(args) {
                    *slot = a.eval_slots(vals)?;
                }
                apply(*func, &v, *offset)?
            }
        })
    }

    /// Evaluates with values looked up by name.
    pub fn eval(&self, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
        let mut names = Vec::new();
        self.collect_vars(&mut names);
        let mut vals = Vec::new();
        for (name, slot) in names {
            let v = *bindings
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.to_string()))?;
            if vals.len() <= slot {
                vals.resize(slot + 1, f64::NAN);
            }
            vals[slot] = v;
        }
        self.eval_slots(&vals)
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<(&'a str, usize)>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var { name, slot } => out.push((name, *slot)),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// Shorthand for evaluating a parsed expression against name bindings.
pub fn eval(ast: &Expr, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
    ast.eval(bindings)
}
