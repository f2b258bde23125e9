//! Field-description documents and polynomial expressions.
//!
//! Document format (one assignment or step header per line, `#` comments):
//!
//! ```text
//! p = 3
//! precision = 64
//! [[step]] kind = "laurent"    var = "t"  window = [-32, 32]
//! [[step]] kind = "eisenstein" var = "pi" poly = "X^3 - 3*t"
//! ```
//!
//! Assignments following a `[[step]]` header, on the same or later lines,
//! belong to that step. Unknown or repeated keys are errors.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{Elem, StepSpec, Tower, TowerSpec, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::padic::DEFAULT_PRECISION;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Int(i64),
    Str(String),
    Pair(i64, i64),
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::syntax(self.line, self.col(), msg)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
        if self.peek() == Some('#') {
            self.pos = self.chars.len();
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn eat(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars())
        {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a key"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| {
            Error::syntax(self.line, start + 1, format!("invalid integer `{s}`"))
        })
    }

    fn value(&mut self) -> Result<Value> {
        self.skip_ws();
        match self.peek() {
            Some('"') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c != '"') {
                    self.pos += 1;
                }
                if self.peek() != Some('"') {
                    return Err(self.err("unterminated string"));
                }
                let s = self.chars[start..self.pos].iter().collect();
                self.pos += 1;
                Ok(Value::Str(s))
            }
            Some('[') => {
                self.pos += 1;
                let a = self.int()?;
                self.expect(',')?;
                let b = self.int()?;
                self.expect(']')?;
                Ok(Value::Pair(a, b))
            }
            Some(_) => Ok(Value::Int(self.int()?)),
            None => Err(self.err("expected a value")),
        }
    }
}

struct Entry {
    value: Value,
    line: usize,
    column: usize,
}

/// Parses a field-description document without validating the tower.
pub fn parse_field_document(text: &str) -> Result<TowerSpec> {
    let mut top: BTreeMap<String, Entry> = BTreeMap::new();
    let mut steps: Vec<(usize, BTreeMap<String, Entry>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut cur = Cursor::new(raw, line);
        if cur.at_end() {
            continue;
        }
        if cur.eat("[[step]]") {
            steps.push((line, BTreeMap::new()));
        } else if cur.peek() == Some('[') {
            return Err(cur.err("unknown table header"));
        }
        while !cur.at_end() {
            let column = cur.col();
            let key = cur.ident()?;
            cur.expect('=')?;
            let value = cur.value()?;
            let target = match steps.last_mut() {
                Some((_, m)) => m,
                None => &mut top,
            };
            if target.contains_key(&key) {
                return Err(Error::syntax(line, column, format!("duplicate key `{key}`")));
            }
            target.insert(
                key,
                Entry {
                    value,
                    line,
                    column,
                },
            );
        }
    }

    let mut p = None;
    let mut precision = DEFAULT_PRECISION;
    for (key, e) in &top {
        match (key.as_str(), &e.value) {
            ("p", Value::Int(v)) if *v >= 0 => p = Some(*v as u64),
            ("precision", Value::Int(v)) if *v > 0 && *v <= u32::MAX as i64 => {
                precision = *v as u32
            }
            ("p" | "precision", _) => {
                return Err(Error::syntax(e.line, e.column, format!("invalid value for `{key}`")))
            }
            _ => return Err(Error::syntax(e.line, e.column, format!("unknown key `{key}`"))),
        }
    }
    let p = p.ok_or_else(|| Error::syntax(1, 1, "missing key `p`"))?;

    let mut out = Vec::with_capacity(steps.len());
    for (line, m) in steps {
        let get_str = |k: &str| -> Result<Option<String>> {
            match m.get(k) {
                None => Ok(None),
                Some(Entry {
                    value: Value::Str(s),
                    ..
                }) => Ok(Some(s.clone())),
                Some(e) => Err(Error::syntax(e.line, e.column, format!("`{k}` must be a string"))),
            }
        };
        for (k, e) in &m {
            if !matches!(k.as_str(), "kind" | "var" | "window" | "poly") {
                return Err(Error::syntax(e.line, e.column, format!("unknown key `{k}`")));
            }
        }
        let kind = get_str("kind")?.ok_or_else(|| Error::syntax(line, 1, "step without `kind`"))?;
        let var = get_str("var")?.ok_or_else(|| Error::syntax(line, 1, "step without `var`"))?;
        let poly = get_str("poly")?;
        let window = match m.get("window") {
            None => None,
            Some(Entry {
                value: Value::Pair(a, b),
                ..
            }) => Some((*a, *b)),
            Some(e) => {
                return Err(Error::syntax(e.line, e.column, "`window` must be [lo, hi]"))
            }
        };
        let misplaced = |k: &str| {
            let e = &m[k];
            Error::syntax(e.line, e.column, format!("`{k}` is not valid for a {kind} step"))
        };
        let step = match kind.as_str() {
            "laurent" => {
                if poly.is_some() {
                    return Err(misplaced("poly"));
                }
                StepSpec::Laurent {
                    var,
                    window: window.unwrap_or(DEFAULT_WINDOW),
                }
            }
            "eisenstein" | "unramified" => {
                if window.is_some() {
                    return Err(misplaced("window"));
                }
                let poly = poly
                    .ok_or_else(|| Error::syntax(line, 1, format!("{kind} step without `poly`")))?;
                if kind == "eisenstein" {
                    StepSpec::Eisenstein { var, poly }
                } else {
                    StepSpec::Unramified { var, poly }
                }
            }
            other => {
                let e = &m["kind"];
                return Err(Error::syntax(e.line, e.column, format!("unknown step kind `{other}`")));
            }
        };
        out.push(step);
    }
    Ok(TowerSpec {
        p,
        precision,
        steps: out,
    })
}

/// Polynomial in `X` with coefficients at a fixed level of a tower.
#[derive(Debug, Clone)]
pub struct Poly {
    /// `coeffs[j]` multiplies `X^j`.
    pub coeffs: Vec<Elem>,
}

impl Poly {
    /// Removes leading coefficients that vanish at working precision.
    pub fn trim(&mut self, tower: &Tower, level: usize) {
        while let Some(c) = self.coeffs.last() {
            if tower.valuation(level, c).is_exact() {
                break;
            }
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn constant(c: Elem) -> Self {
        Poly { coeffs: vec![c] }
    }

    fn add(&self, t: &Tower, level: usize, o: &Poly) -> Result<Poly> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(match (self.coeffs.get(i), o.coeffs.get(i)) {
                (Some(a), Some(b)) => t.add(level, a, b)?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Ok(Poly { coeffs })
    }

    fn neg(&self, t: &Tower, level: usize) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| t.neg(level, c)).collect(),
        }
    }

    fn mul(&self, t: &Tower, level: usize, o: &Poly) -> Result<Poly> {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Ok(Poly { coeffs: vec![] });
        }
        let mut coeffs = vec![t.zero(level); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] = t.add(level, &coeffs[i + j], &t.mul(level, a, b)?)?;
            }
        }
        Ok(Poly { coeffs })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else if c == '\u{2212}' {
            out.push((Tok::Op('-'), col));
            i += 1;
        } else {
            return Err(Error::syntax(1, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct ExprParser<'t> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    tower: &'t Tower,
    level: usize,
    end_col: usize,
}

const MAX_EXPONENT: u64 = 4096;

impl ExprParser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let rhs = if op == '-' {
                rhs.neg(self.tower, self.level)
            } else {
                rhs
            };
            acc = acc.add(self.tower, self.level, &rhs)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while self.peek_op() == Some('*') {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = acc.mul(self.tower, self.level, &rhs)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg(self.tower, self.level))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.col();
        let e = match self.toks.get(self.pos) {
            Some((Tok::Int(n), _)) => n.clone(),
            Some((Tok::Op('('), _)) => {
                return Err(Error::syntax(1, col, "exponent must be a nonnegative integer literal"))
            }
            _ => return Err(Error::syntax(1, col, "expected an exponent")),
        };
        self.pos += 1;
        let e: u64 = e
            .try_into()
            .ok()
            .filter(|e| *e <= MAX_EXPONENT)
            .ok_or_else(|| Error::syntax(1, col, "exponent too large"))?;
        let mut acc = Poly::constant(self.tower.one(self.level));
        let mut b = base;
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(self.tower, self.level, &b)?;
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(self.tower, self.level, &b)?;
            }
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Poly> {
        let col = self.col();
        let tok = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some((Tok::Int(n), _)) => Ok(Poly::constant(self.tower.from_int(self.level, &n))),
            Some((Tok::Ident(name), _)) => {
                if name == "X" {
                    return Ok(Poly {
                        coeffs: vec![self.tower.zero(self.level), self.tower.one(self.level)],
                    });
                }
                match self.tower.var_index(&name) {
                    Some(idx) if idx < self.level => {
                        let g = self.tower.generator(idx + 1)?;
                        Ok(Poly::constant(self.tower.lift(idx + 1, self.level, g)))
                    }
                    _ => Err(Error::UnknownIdentifier(name)),
                }
            }
            Some((Tok::Op('('), _)) => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(Error::syntax(1, self.col(), "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some((tok, _)) => Err(Error::syntax(1, col, format!("unexpected token {tok:?}"))),
            None => Err(Error::syntax(1, col, "unexpected end of expression")),
        }
    }
}

/// Parses a polynomial in `X` whose coefficients are expressions in the
/// variables of `tower` (all of them; the result lives at `tower.top()`).
pub fn parse_poly(text: &str, tower: &Tower) -> Result<Poly> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::syntax(1, 1, "empty expression"));
    }
    let mut parser = ExprParser {
        toks,
        pos: 0,
        tower,
        level: tower.top(),
        end_col: text.chars().count() + 1,
    };
    let poly = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(Error::syntax(1, parser.col(), "trailing input"));
    }
    // nothing in an expression divides, so any tail is a truncated product
    if !poly.coeffs.iter().all(Elem::is_exact) {
        return Err(Error::WindowOverflow(format!(
            "`{text}` has terms outside a Laurent window"
        )));
    }
    Ok(poly)
}
