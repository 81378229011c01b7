//! Tiny script language over Toeplitz elements.
//!
//! A script is a JSON array of statements:
//!
//! ```json
//! [
//!   {"let": "S", "symbol": {"1": [1, 0]}},
//!   {"let": "P", "expr": "mul(S, adj(S))"},
//!   {"eval": "sub(I, P)"},
//!   {"essentially_unitary": "S"},
//!   {"compress": "S", "probes": ["S", "adj(S)", "P", "I"]},
//!   {"truncate": "P", "n": 3},
//!   {"norm": "sub(I, P)"}
//! ]
//! ```
//!
//! Scalars are JSON numbers (read exactly as decimals) or strings `"p/q"`.
//! Expressions use `mul(a, b, ...)`, `add(a, b, ...)`, `sub(a, b)`, `adj(a)`,
//! `neg(a)`, `scale(r, a)`, `scale(re, im, a)`, `unit(i, j)` and the
//! predefined names `I` and `Zero`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::gaussian::parse_rational;
use super::{compression_counterexample, is_essentially_unitary, GaussianRational, LaurentPoly, ToeplitzElement};
use crate::error::{Error, Result};
use crate::literal;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn scalar_text(v: &Value) -> Result<String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => Err(parse_err(format!("expected a number or \"p/q\" string, got {other}"))),
    }
}

fn gaussian(v: &Value) -> Result<GaussianRational> {
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            GaussianRational::parse(&scalar_text(&pair[0])?, &scalar_text(&pair[1])?)
        }
        other => GaussianRational::parse(&scalar_text(other)?, "0"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(String),
    Open,
    Close,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                    i += 1;
                }
                out.push(Token::Number(chars[start..i].iter().collect()));
            }
            other => return Err(parse_err(format!("unexpected character {other:?} in {src:?}"))),
        }
    }
    Ok(out)
}

#[derive(Debug)]
enum Expr {
    Name(String),
    Number(String),
    Call(String, Vec<Expr>),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Number(n)) => Ok(Expr::Number(n)),
            Some(Token::Ident(name)) => {
                if self.peek() != Some(&Token::Open) {
                    return Ok(Expr::Name(name));
                }
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() == Some(&Token::Close) {
                    self.pos += 1;
                    return Ok(Expr::Call(name, args));
                }
                loop {
                    args.push(self.expr()?);
                    match self.next() {
                        Some(Token::Comma) => continue,
                        Some(Token::Close) => break,
                        other => return Err(parse_err(format!("expected ',' or ')', got {other:?}"))),
                    }
                }
                Ok(Expr::Call(name, args))
            }
            other => Err(parse_err(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { tokens: tokenize(src)?, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(parse_err(format!("trailing input in {src:?}")));
    }
    Ok(e)
}

/// Interpreter state: named bindings.
#[derive(Debug, Clone)]
pub struct Interpreter {
    env: BTreeMap<String, ToeplitzElement>,
}

impl Default for Interpreter {
    fn default() -> Self {
        let mut env = BTreeMap::new();
        env.insert("I".to_string(), ToeplitzElement::identity());
        env.insert("Zero".to_string(), ToeplitzElement::zero());
        Interpreter { env }
    }
}

impl Interpreter {
    pub fn eval_str(&self, src: &str) -> Result<ToeplitzElement> {
        self.eval(&parse_expr(src)?)
    }

    fn number(e: &Expr) -> Result<num_rational::BigRational> {
        match e {
            Expr::Number(n) => parse_rational(n),
            other => Err(parse_err(format!("expected a number, got {other:?}"))),
        }
    }

    fn index(e: &Expr) -> Result<usize> {
        match e {
            Expr::Number(n) => n.parse().map_err(|_| parse_err(format!("bad index {n}"))),
            other => Err(parse_err(format!("expected an index, got {other:?}"))),
        }
    }

    fn eval(&self, e: &Expr) -> Result<ToeplitzElement> {
        match e {
            Expr::Name(n) => self.env.get(n).cloned().ok_or_else(|| parse_err(format!("unbound name {n}"))),
            Expr::Number(n) => Ok(ToeplitzElement::identity().scale(&GaussianRational::parse(n, "0")?)),
            Expr::Call(f, args) => {
                let arity = |k: usize| {
                    if args.len() == k {
                        Ok(())
                    } else {
                        Err(parse_err(format!("{f} expects {k} arguments, got {}", args.len())))
                    }
                };
                match f.as_str() {
                    "mul" | "add" => {
                        if args.is_empty() {
                            return Err(parse_err(format!("{f} needs arguments")));
                        }
                        let mut acc = self.eval(&args[0])?;
                        for a in &args[1..] {
                            let b = self.eval(a)?;
                            acc = if f == "mul" { acc.mul(&b) } else { acc.add(&b) };
                        }
                        Ok(acc)
                    }
                    "sub" => {
                        arity(2)?;
                        Ok(self.eval(&args[0])?.sub(&self.eval(&args[1])?))
                    }
                    "adj" => {
                        arity(1)?;
                        Ok(self.eval(&args[0])?.adj())
                    }
                    "neg" => {
                        arity(1)?;
                        Ok(self.eval(&args[0])?.scale(&-GaussianRational::one()))
                    }
                    "scale" => match args.len() {
                        2 => {
                            let c = GaussianRational::new(Self::number(&args[0])?, num_traits::Zero::zero());
                            Ok(self.eval(&args[1])?.scale(&c))
                        }
                        3 => {
                            let c = GaussianRational::new(Self::number(&args[0])?, Self::number(&args[1])?);
                            Ok(self.eval(&args[2])?.scale(&c))
                        }
                        n => Err(parse_err(format!("scale expects 2 or 3 arguments, got {n}"))),
                    },
                    "unit" => {
                        arity(2)?;
                        Ok(ToeplitzElement::matrix_unit(Self::index(&args[0])?, Self::index(&args[1])?))
                    }
                    other => Err(parse_err(format!("unknown function {other}"))),
                }
            }
        }
    }

    fn expr_field<'a>(stmt: &'a Value, key: &str) -> Result<&'a str> {
        stmt.get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err(format!("statement field {key:?} must be a string")))
    }

    fn literal(stmt: &Value) -> Result<ToeplitzElement> {
        let mut el = ToeplitzElement::zero();
        if let Some(sym) = stmt.get("symbol") {
            let map = sym.as_object().ok_or_else(|| parse_err("symbol must be an object"))?;
            let mut terms = Vec::new();
            for (k, v) in map {
                let deg: i64 = k.trim().parse().map_err(|_| parse_err(format!("bad degree {k:?}")))?;
                terms.push((deg, gaussian(v)?));
            }
            el = el.add(&ToeplitzElement::from_symbol(LaurentPoly::from_terms(terms)));
        }
        if let Some(tail) = stmt.get("tail") {
            let rows = tail.as_array().ok_or_else(|| parse_err("tail must be an array"))?;
            let mut entries = Vec::new();
            for r in rows {
                let (i, j, v) = match r.as_array().map(Vec::as_slice) {
                    Some([i, j, v]) => (i, j, v),
                    _ => return Err(parse_err("tail entries are [i, j, value]")),
                };
                let idx = |x: &Value| {
                    x.as_u64().map(|u| u as usize).ok_or_else(|| parse_err("tail index must be a non-negative integer"))
                };
                entries.push(((idx(i)?, idx(j)?), gaussian(v)?));
            }
            el = el.add(&ToeplitzElement::from_tail(entries));
        }
        Ok(el)
    }

    /// Executes one statement and returns its output record, if any.
    pub fn exec(&mut self, stmt: &Value) -> Result<Option<Value>> {
        if let Some(name) = stmt.get("let") {
            let name = name.as_str().ok_or_else(|| parse_err("let name must be a string"))?.to_string();
            let value = match stmt.get("expr") {
                Some(_) => self.eval_str(Self::expr_field(stmt, "expr")?)?,
                None => Self::literal(stmt)?,
            };
            self.env.insert(name, value);
            return Ok(None);
        }
        if stmt.get("eval").is_some() {
            let src = Self::expr_field(stmt, "eval")?;
            let v = self.eval_str(src)?;
            return Ok(Some(json!({ "eval": src, "value": v.to_json() })));
        }
        if stmt.get("essentially_unitary").is_some() {
            let src = Self::expr_field(stmt, "essentially_unitary")?;
            let r = is_essentially_unitary(&self.eval_str(src)?);
            let witnesses = r
                .witnesses
                .map(|(l, rr)| json!({ "one_minus_adj_a_a": l.to_json(), "one_minus_a_adj_a": rr.to_json() }));
            return Ok(Some(json!({
                "essentially_unitary": src,
                "value": r.essentially_unitary,
                "witnesses": witnesses,
            })));
        }
        if stmt.get("compress").is_some() {
            let src = Self::expr_field(stmt, "compress")?;
            let v = self.eval_str(src)?;
            let probe_src: Vec<&str> = stmt
                .get("probes")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("compress needs a probes array"))?
                .iter()
                .map(|p| p.as_str().ok_or_else(|| parse_err("probes are expression strings")))
                .collect::<Result<_>>()?;
            let probes = probe_src.iter().map(|p| self.eval_str(p)).collect::<Result<Vec<_>>>()?;
            let rep = compression_counterexample(&v, &probes)?;
            let outcomes: Vec<Value> = rep
                .outcomes
                .iter()
                .zip(&probe_src)
                .map(|(o, src)| {
                    json!({
                        "probe": src,
                        "image": o.image.to_json(),
                        "difference": o.difference.to_json(),
                        "agrees": o.agrees,
                        "difference_norms": o.difference_norms,
                    })
                })
                .collect();
            return Ok(Some(json!({
                "compress": src,
                "agrees_on_isometry": rep.agrees_on_isometry,
                "outcomes": outcomes,
            })));
        }
        if stmt.get("truncate").is_some() {
            let src = Self::expr_field(stmt, "truncate")?;
            let n = stmt
                .get("n")
                .and_then(Value::as_u64)
                .filter(|&n| n >= 1)
                .ok_or_else(|| parse_err("truncate needs n >= 1"))? as usize;
            let m = self.eval_str(src)?.truncate(n);
            return Ok(Some(json!({ "truncate": src, "n": n, "matrix": literal::to_json(&m) })));
        }
        if stmt.get("norm").is_some() {
            let src = Self::expr_field(stmt, "norm")?;
            let el = self.eval_str(src)?;
            let norms = el
                .tail_norms()
                .ok_or_else(|| Error::invalid(format!("norm of {src:?}: only pure tails have norms here")))?;
            return Ok(Some(json!({ "norm": src, "value": norms })));
        }
        Err(parse_err(format!("unrecognized statement {stmt}")))
    }

    /// Runs a whole script, collecting output records in order.
    pub fn run(&mut self, script: &Value) -> Result<Vec<Value>> {
        let stmts = script.as_array().ok_or_else(|| parse_err("script must be a JSON array"))?;
        let mut out = Vec::new();
        for s in stmts {
            if let Some(v) = self.exec(s)? {
                out.push(v);
            }
        }
        Ok(out)
    }
}

pub fn run_script(script: &Value) -> Result<Vec<Value>> {
    Interpreter::default().run(script)
}
