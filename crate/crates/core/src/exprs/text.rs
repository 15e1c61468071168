//! Prefix (s-expression) text form of [`ScalarExpr`].
//!
//! ```text
//! expr   := number | name | "(" op expr* ")"
//! name   := x0 | x1 | x2 | x3 | t | pi | <parameter>
//! op     := + | - | * | / | neg | ^ | sin | cos
//! ```
//!
//! `t` is an alias for `x0`. `(- a)` negates, `(- a b c)` subtracts. `/`
//! only accepts a constant divisor. `(^ e n)` takes a non-negative integer
//! exponent. The argument of `sin`/`cos` must be affine in the coordinates,
//! e.g. `(cos (+ (* k x1) (* (neg k) x0)))`. Named parameters are bound by
//! the caller (see [`parse_with`]).

use std::collections::HashMap;
use std::fmt;

use super::{Phase, ScalarExpr};
use crate::error::{Error, Result};
use crate::minkowski::MAX_DIM;

pub fn parse(src: &str) -> Result<ScalarExpr> {
    parse_with(src, &HashMap::new())
}

pub fn parse_with(src: &str, params: &HashMap<String, f64>) -> Result<ScalarExpr> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, params, src_len: src.len() };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::Open));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::Close));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() {
                let c = bytes[i] as char;
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                i += 1;
            }
            out.push((start, Tok::Atom(src[start..i].to_string())));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    params: &'a HashMap<String, f64>,
    src_len: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        let pos = self.tokens.get(self.pos).map_or(self.src_len, |t| t.0);
        Error::Parse { pos, msg: msg.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        match self.next() {
            None => Err(self.err("unexpected end of input")),
            Some(Tok::Close) => {
                self.pos -= 1;
                Err(self.err("unexpected ')'"))
            }
            Some(Tok::Atom(a)) => {
                self.pos -= 1;
                let e = self.atom(&a)?;
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Open) => {
                let op = match self.next() {
                    Some(Tok::Atom(op)) => op,
                    _ => {
                        self.pos -= 1;
                        return Err(self.err("expected operator after '('"));
                    }
                };
                let op_pos = self.pos - 1;
                let mut args = Vec::new();
                loop {
                    match self.tokens.get(self.pos).map(|t| &t.1) {
                        Some(Tok::Close) => {
                            self.pos += 1;
                            break;
                        }
                        None => return Err(self.err("missing ')'")),
                        _ => args.push(self.expr()?),
                    }
                }
                apply(&op, args).map_err(|msg| Error::Parse {
                    pos: self.tokens[op_pos].0,
                    msg,
                })
            }
        }
    }

    fn atom(&self, a: &str) -> Result<ScalarExpr> {
        let starts_numeric = a
            .trim_start_matches(['-', '+'])
            .starts_with(|c: char| c.is_ascii_digit() || c == '.');
        if starts_numeric {
            return a
                .parse::<f64>()
                .map(ScalarExpr::Const)
                .map_err(|_| self.err(format!("invalid number '{a}'")));
        }
        match a {
            "t" => return Ok(ScalarExpr::coord(0)),
            "pi" => return Ok(ScalarExpr::Const(std::f64::consts::PI)),
            _ => {}
        }
        if let Some(idx) = a.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if idx < MAX_DIM {
                return Ok(ScalarExpr::coord(idx));
            }
            return Err(self.err(format!("coordinate '{a}' out of range")));
        }
        self.params
            .get(a)
            .map(|v| ScalarExpr::Const(*v))
            .ok_or_else(|| self.err(format!("unknown name '{a}'")))
    }
}

fn constant_value(e: &ScalarExpr) -> Option<f64> {
    if e.max_axis().is_none() {
        Some(e.eval(&[]))
    } else {
        None
    }
}

fn affine(e: &ScalarExpr) -> std::result::Result<Phase, String> {
    let mut k = [0.0; MAX_DIM];
    let mut phase = 0.0;
    for t in e.expand().terms {
        if t.trig.is_some() {
            return Err("sinusoid argument must be affine in the coordinates".into());
        }
        let degree: u32 = t.powers.iter().sum();
        match degree {
            0 => phase += t.coef,
            1 => {
                let axis = t.powers.iter().position(|p| *p == 1).unwrap();
                k[axis] += t.coef;
            }
            _ => return Err("sinusoid argument must be affine in the coordinates".into()),
        }
    }
    Ok(Phase { k, phase })
}

fn apply(op: &str, mut args: Vec<ScalarExpr>) -> std::result::Result<ScalarExpr, String> {
    let arity = |n: usize, args: &Vec<ScalarExpr>| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("'{op}' takes {n} argument(s), got {}", args.len()))
        }
    };
    match op {
        "+" => {
            if args.is_empty() {
                return Err("'+' needs at least one argument".into());
            }
            Ok(ScalarExpr::sum(args))
        }
        "*" => {
            if args.is_empty() {
                return Err("'*' needs at least one argument".into());
            }
            Ok(ScalarExpr::product(args))
        }
        "neg" => {
            arity(1, &args)?;
            Ok(-args.pop().unwrap())
        }
        "-" => match args.len() {
            0 => Err("'-' needs at least one argument".into()),
            1 => Ok(-args.pop().unwrap()),
            _ => {
                let first = args.remove(0);
                Ok(ScalarExpr::sum(std::iter::once(first).chain(args.into_iter().map(|a| -a))))
            }
        },
        "/" => {
            arity(2, &args)?;
            let d = constant_value(&args[1]).ok_or("'/' requires a constant divisor")?;
            if d == 0.0 {
                return Err("division by zero".into());
            }
            Ok(args.remove(0).scale(1.0 / d))
        }
        "^" => {
            arity(2, &args)?;
            let n = constant_value(&args[1]).ok_or("'^' requires a constant exponent")?;
            if n < 0.0 || n.fract() != 0.0 || n > 16.0 {
                return Err(format!("exponent {n} must be an integer in 0..=16"));
            }
            let n = n as u32;
            let base = args.remove(0);
            if let ScalarExpr::Coord { axis, power: 1 } = base {
                if n <= super::MAX_POWER {
                    return ScalarExpr::coord_pow(axis, n).map_err(|e| e.to_string());
                }
            }
            Ok(ScalarExpr::product(std::iter::repeat_n(base, n as usize)))
        }
        "sin" | "cos" => {
            arity(1, &args)?;
            let p = affine(&args[0])?;
            Ok(if op == "sin" { ScalarExpr::Sin(p) } else { ScalarExpr::Cos(p) })
        }
        _ => Err(format!("unknown operator '{op}'")),
    }
}

fn write_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Debug formatting is the shortest representation that round-trips.
    write!(f, "{v:?}")
}

fn write_phase(p: &Phase, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut parts = Vec::new();
    for (axis, k) in p.k.iter().enumerate() {
        if *k != 0.0 {
            parts.push((Some(axis), *k));
        }
    }
    if p.phase != 0.0 || parts.is_empty() {
        parts.push((None, p.phase));
    }
    let write_part = |(axis, v): (Option<usize>, f64), f: &mut fmt::Formatter<'_>| match axis {
        Some(a) => {
            f.write_str("(* ")?;
            write_num(v, f)?;
            write!(f, " x{a})")
        }
        None => write_num(v, f),
    };
    if parts.len() == 1 {
        return write_part(parts[0], f);
    }
    f.write_str("(+")?;
    for part in parts {
        f.write_str(" ")?;
        write_part(part, f)?;
    }
    f.write_str(")")
}

pub(super) fn write_expr(e: &ScalarExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        ScalarExpr::Const(c) => write_num(*c, f),
        ScalarExpr::Coord { axis, power: 1 } => write!(f, "x{axis}"),
        ScalarExpr::Coord { axis, power } => write!(f, "(^ x{axis} {power})"),
        ScalarExpr::Sin(p) => {
            f.write_str("(sin ")?;
            write_phase(p, f)?;
            f.write_str(")")
        }
        ScalarExpr::Cos(p) => {
            f.write_str("(cos ")?;
            write_phase(p, f)?;
            f.write_str(")")
        }
        ScalarExpr::Sum(items) | ScalarExpr::Prod(items) => {
            f.write_str(if matches!(e, ScalarExpr::Sum(_)) { "(+" } else { "(*" })?;
            for item in items {
                f.write_str(" ")?;
                write_expr(item, f)?;
            }
            f.write_str(")")
        }
    }
}
