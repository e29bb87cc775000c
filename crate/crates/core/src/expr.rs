//! Holomorphic expressions in one complex variable `z`.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          right-associative
//! atom   := number | 'i' | 'z' | '(' expr ')' | name '(' expr ')'
//! name   := 'exp' | 'log' | 'sin' | 'cos'
//! ```
//!
//! Numbers are decimal with optional fraction and exponent (`2`, `0.5`, `1e-3`). `i` is the
//! imaginary unit. Whitespace is ignored and implicit multiplication (`2z`) is rejected.
//!
//! Sub-expressions that do not involve `z` are folded into a single constant while parsing,
//! so `(1+2*i)*z` becomes `Mul(Const(1+2i), Var)`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::jet::{Jet2, JetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }

    fn apply(self, arg: Jet2) -> Result<Jet2, JetError> {
        match self {
            Func::Exp => Ok(arg.exp()),
            Func::Log => arg.ln(),
            Func::Sin => Ok(arg.sin()),
            Func::Cos => Ok(arg.cos()),
        }
    }
}

/// Parsed holomorphic expression.
#[derive(Debug, Clone, PartialEq)]
pub enum HoloExpr {
    Const(Complex64),
    Var,
    Neg(Box<HoloExpr>),
    Binary(BinOp, Box<HoloExpr>, Box<HoloExpr>),
    Apply(Func, Box<HoloExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        Self { position, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot evaluate `{subexpr}` at z = {at}: {source}")]
pub struct EvalError {
    pub at: Complex64,
    pub subexpr: String,
    #[source]
    pub source: JetError,
}

impl HoloExpr {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        parse(src)
    }

    pub fn var() -> Self {
        HoloExpr::Var
    }

    pub fn constant(c: Complex64) -> Self {
        HoloExpr::Const(c)
    }

    /// Smart constructor that folds constant operands.
    pub fn binary(op: BinOp, lhs: HoloExpr, rhs: HoloExpr) -> Self {
        if let (HoloExpr::Const(a), HoloExpr::Const(b)) = (&lhs, &rhs) {
            let folded = binary_jet(op, Jet2::constant(*a), Jet2::constant(*b))
                .ok()
                .map(|j| j.v)
                .filter(|v| v.is_finite());
            if let Some(v) = folded {
                return HoloExpr::Const(v);
            }
        }
        HoloExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn neg(inner: HoloExpr) -> Self {
        match inner {
            HoloExpr::Const(c) => HoloExpr::Const(-c),
            other => HoloExpr::Neg(Box::new(other)),
        }
    }

    pub fn apply(func: Func, arg: HoloExpr) -> Self {
        if let HoloExpr::Const(c) = &arg {
            if let Some(v) = func.apply(Jet2::constant(*c)).ok().map(|j| j.v).filter(|v| v.is_finite()) {
                return HoloExpr::Const(v);
            }
        }
        HoloExpr::Apply(func, Box::new(arg))
    }

    pub fn contains_var(&self) -> bool {
        match self {
            HoloExpr::Const(_) => false,
            HoloExpr::Var => true,
            HoloExpr::Neg(e) | HoloExpr::Apply(_, e) => e.contains_var(),
            HoloExpr::Binary(_, a, b) => a.contains_var() || b.contains_var(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            HoloExpr::Const(_) | HoloExpr::Var => 1,
            HoloExpr::Neg(e) | HoloExpr::Apply(_, e) => 1 + e.depth(),
            HoloExpr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Value and first two complex derivatives at `z`.
    pub fn eval_jet(&self, z: Complex64) -> Result<Jet2, EvalError> {
        let wrap = |e: &HoloExpr, source| EvalError { at: z, subexpr: e.to_string(), source };
        match self {
            HoloExpr::Const(c) => Ok(Jet2::constant(*c)),
            HoloExpr::Var => Ok(Jet2::variable(z)),
            HoloExpr::Neg(e) => Ok(-e.eval_jet(z)?),
            HoloExpr::Apply(f, e) => f.apply(e.eval_jet(z)?).map_err(|s| wrap(self, s)),
            HoloExpr::Binary(BinOp::Pow, base, exp) => {
                let b = base.eval_jet(z)?;
                match integer_exponent(exp) {
                    Some(n) => b.powi(n),
                    None => b.pow(exp.eval_jet(z)?),
                }
                .map_err(|s| wrap(self, s))
            }
            HoloExpr::Binary(op, a, b) => {
                binary_jet(*op, a.eval_jet(z)?, b.eval_jet(z)?).map_err(|s| wrap(self, s))
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, EvalError> {
        self.eval_jet(z).map(|j| j.v)
    }
}

fn integer_exponent(e: &HoloExpr) -> Option<i32> {
    match e {
        HoloExpr::Const(c) if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= 4096.0 => {
            Some(c.re as i32)
        }
        _ => None,
    }
}

fn binary_jet(op: BinOp, a: Jet2, b: Jet2) -> Result<Jet2, JetError> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div => a.checked_div(b),
        BinOp::Pow => {
            if b.d1 == Complex64::default() && b.d2 == Complex64::default() {
                if let Some(n) = integer_exponent(&HoloExpr::Const(b.v)) {
                    return a.powi(n);
                }
            }
            a.pow(b)
        }
    }
}

// ---------------------------------------------------------------------------
// printing

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &HoloExpr) -> u8 {
    match e {
        HoloExpr::Const(c) if c.im == 0.0 && c.re.is_sign_negative() => PREC_UNARY,
        HoloExpr::Const(_) | HoloExpr::Var | HoloExpr::Apply(..) => PREC_ATOM,
        HoloExpr::Neg(_) => PREC_UNARY,
        HoloExpr::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        HoloExpr::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        HoloExpr::Binary(BinOp::Pow, ..) => PREC_POW,
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // Debug formatting is the shortest representation that parses back exactly.
    write!(f, "{x:?}")
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &HoloExpr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for HoloExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoloExpr::Const(c) if c.im == 0.0 => write_real(f, c.re),
            HoloExpr::Const(c) => {
                f.write_str("(")?;
                write_real(f, c.re)?;
                if c.im.is_sign_negative() {
                    f.write_str("-")?;
                    write_real(f, -c.im)?;
                } else {
                    f.write_str("+")?;
                    write_real(f, c.im)?;
                }
                f.write_str("*i)")
            }
            HoloExpr::Var => f.write_str("z"),
            HoloExpr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, PREC_UNARY)
            }
            HoloExpr::Apply(func, e) => write!(f, "{}({e})", func.name()),
            HoloExpr::Binary(op, a, b) => {
                let (sym, lhs_min, rhs_min) = match op {
                    BinOp::Add => (" + ", PREC_ADD, PREC_MUL),
                    BinOp::Sub => (" - ", PREC_ADD, PREC_MUL),
                    BinOp::Mul => ("*", PREC_MUL, PREC_UNARY),
                    BinOp::Div => ("/", PREC_MUL, PREC_UNARY),
                    BinOp::Pow => ("^", PREC_ATOM, PREC_UNARY),
                };
                write_child(f, a, lhs_min)?;
                f.write_str(sym)?;
                write_child(f, b, rhs_min)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// lexing and parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let ch = chars[pos];
        let start = pos;
        let tok = match ch {
            c if c.is_whitespace() => {
                pos += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while pos < chars.len() && (chars[pos].is_ascii_digit() || chars[pos] == '.') {
                    pos += 1;
                }
                if pos < chars.len() && (chars[pos] == 'e' || chars[pos] == 'E') {
                    let mut look = pos + 1;
                    if look < chars.len() && (chars[look] == '+' || chars[look] == '-') {
                        look += 1;
                    }
                    if look < chars.len() && chars[look].is_ascii_digit() {
                        pos = look;
                        while pos < chars.len() && chars[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let text: String = chars[start..pos].iter().collect();
                let value = text
                    .parse::<f64>()
                    .map_err(|_| ParseError::new(start, format!("malformed number `{text}`")))?;
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while pos < chars.len() && (chars[pos].is_alphanumeric() || chars[pos] == '_') {
                    pos += 1;
                }
                out.push((start, Tok::Ident(chars[start..pos].iter().collect())));
                continue;
            }
            other => return Err(ParseError::new(start, format!("unexpected character `{other}`"))),
        };
        out.push((start, tok));
        pos += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn expr(&mut self) -> Result<HoloExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = HoloExpr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<HoloExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = HoloExpr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<HoloExpr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(HoloExpr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<HoloExpr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let exponent = self.unary()?;
            return Ok(HoloExpr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<HoloExpr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(HoloExpr::Const(Complex64::new(v, 0.0))),
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                self.close_paren(pos)?;
                Ok(inner)
            }
            Some((_, Tok::Ident(name))) => match name.as_str() {
                "z" => Ok(HoloExpr::Var),
                "i" => Ok(HoloExpr::Const(Complex64::new(0.0, 1.0))),
                _ => {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError::new(pos, format!("unknown identifier `{name}`")));
                    };
                    let open = self.pos();
                    if self.bump().map(|(_, t)| t) != Some(Tok::LParen) {
                        return Err(ParseError::new(open, format!("expected `(` after `{name}`")));
                    }
                    let arg = self.expr()?;
                    self.close_paren(open)?;
                    Ok(HoloExpr::apply(func, arg))
                }
            },
            Some((p, Tok::RParen)) => Err(ParseError::new(p, "unbalanced `)`")),
            Some((p, tok)) => Err(ParseError::new(p, format!("unexpected `{}`", tok_text(&tok)))),
            None => Err(ParseError::new(pos, "unexpected end of input")),
        }
    }

    fn close_paren(&mut self, open: usize) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.bump();
                Ok(())
            }
            None => Err(ParseError::new(open, "unbalanced `(`")),
            Some(tok) => {
                Err(ParseError::new(self.pos(), format!("expected `)`, found `{}`", tok_text(tok))))
            }
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(v) => v.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
    }
}

pub fn parse(src: &str) -> Result<HoloExpr, ParseError> {
    let toks = lex(src)?;
    let end = src.chars().count();
    if toks.is_empty() {
        return Err(ParseError::new(0, "empty expression"));
    }
    let mut p = Parser { toks, idx: 0, end };
    let e = p.expr()?;
    match p.bump() {
        None => Ok(e),
        Some((pos, Tok::RParen)) => Err(ParseError::new(pos, "unbalanced `)`")),
        Some((pos, tok)) => Err(ParseError::new(
            pos,
            format!("unexpected `{}` (implicit multiplication is not supported)", tok_text(&tok)),
        )),
    }
}
