//! Tangle expressions and the relation manifest.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HaagerupError;
use crate::gpa::{Gpa, GpaElement};
use crate::graph::Shading;
use crate::tl::{jones_wenzl, TLDiagram};

/// A word in the tangle generators applied to named inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Input(String),
    Jw(usize),
    Id(usize),
    E(usize, usize),
    Mul(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Cup(usize, Box<Expr>),
    Cap(usize, Box<Expr>),
    Rot(Box<Expr>),
    Adj(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanPart {
    Tl,
    Ann(String),
}

/// Right-hand side of a relation: another expression, or membership in a span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Span(Vec<SpanPart>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    At,
    Open,
    Close,
    Comma,
}

fn tokenize(s: &str) -> Result<Vec<Tok>, HaagerupError> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '@' => {
                out.push(Tok::At);
                i += 1
            }
            '(' => {
                out.push(Tok::Open);
                i += 1
            }
            ')' => {
                out.push(Tok::Close);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '0'..='9' => {
                let j = (i..cs.len()).find(|&j| !cs[j].is_ascii_digit()).unwrap_or(cs.len());
                let v: String = cs[i..j].iter().collect();
                out.push(Tok::Num(v.parse().map_err(|_| HaagerupError::Manifest(format!("bad number {v}")))?));
                i = j;
            }
            c if c.is_alphabetic() || c == '_' => {
                let j = (i..cs.len()).find(|&j| !(cs[j].is_alphanumeric() || cs[j] == '_')).unwrap_or(cs.len());
                out.push(Tok::Ident(cs[i..j].iter().collect()));
                i = j;
            }
            c => return Err(HaagerupError::Manifest(format!("unexpected character {c:?} in {s:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn err(&self, what: &str) -> HaagerupError {
        HaagerupError::Manifest(format!("expected {what} at token {}", self.pos))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), HaagerupError> {
        if self.next() == Some(t) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn num(&mut self) -> Result<usize, HaagerupError> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            _ => Err(self.err("number")),
        }
    }

    fn ident(&mut self) -> Result<String, HaagerupError> {
        match self.next() {
            Some(Tok::Ident(v)) => Ok(v),
            _ => Err(self.err("name")),
        }
    }

    fn args(&mut self, k: usize) -> Result<Vec<Expr>, HaagerupError> {
        self.expect(Tok::Open, "(")?;
        let mut v = Vec::new();
        for j in 0..k {
            if j > 0 {
                self.expect(Tok::Comma, ",")?;
            }
            v.push(self.expr()?);
        }
        self.expect(Tok::Close, ")")?;
        Ok(v)
    }

    fn expr(&mut self) -> Result<Expr, HaagerupError> {
        let name = self.ident()?;
        let b = Box::new;
        Ok(match name.as_str() {
            "cup" | "cap" => {
                self.expect(Tok::At, "@")?;
                let i = self.num()?;
                let x = self.args(1)?.remove(0);
                if name == "cup" {
                    Expr::Cup(i, b(x))
                } else {
                    Expr::Cap(i, b(x))
                }
            }
            "jw" | "id" => {
                self.expect(Tok::Open, "(")?;
                let n = self.num()?;
                self.expect(Tok::Close, ")")?;
                if name == "jw" {
                    Expr::Jw(n)
                } else {
                    Expr::Id(n)
                }
            }
            "e" => {
                self.expect(Tok::Open, "(")?;
                let n = self.num()?;
                self.expect(Tok::Comma, ",")?;
                let i = self.num()?;
                self.expect(Tok::Close, ")")?;
                Expr::E(n, i)
            }
            "mul" | "add" | "sub" => {
                let mut a = self.args(2)?;
                let (y, x) = (a.pop().unwrap(), a.pop().unwrap());
                match name.as_str() {
                    "mul" => Expr::Mul(b(x), b(y)),
                    "add" => Expr::Add(b(x), b(y)),
                    _ => Expr::Sub(b(x), b(y)),
                }
            }
            "neg" | "rot" | "adj" => {
                let x = b(self.args(1)?.remove(0));
                match name.as_str() {
                    "neg" => Expr::Neg(x),
                    "rot" => Expr::Rot(x),
                    _ => Expr::Adj(x),
                }
            }
            _ => Expr::Input(name),
        })
    }

    fn done(&self) -> Result<(), HaagerupError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.err("end of expression"))
        }
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr, HaagerupError> {
        let mut p = Parser { toks: tokenize(s)?, pos: 0 };
        let e = p.expr()?;
        p.done()?;
        Ok(e)
    }

    /// Evaluates in the graph planar algebra. TL constants are `+` shaded.
    pub fn eval(&self, ctx: &Arc<Gpa>, env: &HashMap<String, GpaElement>) -> Result<GpaElement, HaagerupError> {
        let ev = |e: &Expr| e.eval(ctx, env);
        Ok(match self {
            Expr::Input(name) => env.get(name).cloned().ok_or_else(|| HaagerupError::Manifest(format!("unknown input {name}")))?,
            Expr::Jw(n) => ctx.tl_embed_element(&jones_wenzl(*n, ctx.delta())?, Shading::Plus),
            Expr::Id(n) => ctx.unit(*n, Shading::Plus),
            Expr::E(n, i) => {
                if *i == 0 || *i >= *n {
                    return Err(HaagerupError::Manifest(format!("e({n},{i}) out of range")));
                }
                ctx.tl_embed(&TLDiagram::e(*n, *i), Shading::Plus)
            }
            Expr::Mul(x, y) => ev(x)?.multiply(&ev(y)?)?,
            Expr::Add(x, y) => ev(x)?.add(&ev(y)?),
            Expr::Sub(x, y) => ev(x)?.sub(&ev(y)?),
            Expr::Neg(x) => ev(x)?.neg(),
            Expr::Cup(i, x) => ev(x)?.cup(*i)?,
            Expr::Cap(i, x) => ev(x)?.cap(*i)?,
            Expr::Rot(x) => ev(x)?.rotate(),
            Expr::Adj(x) => ev(x)?.adjoint(),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Input(s) => write!(f, "{s}"),
            Expr::Jw(n) => write!(f, "jw({n})"),
            Expr::Id(n) => write!(f, "id({n})"),
            Expr::E(n, i) => write!(f, "e({n},{i})"),
            Expr::Mul(x, y) => write!(f, "mul({x}, {y})"),
            Expr::Add(x, y) => write!(f, "add({x}, {y})"),
            Expr::Sub(x, y) => write!(f, "sub({x}, {y})"),
            Expr::Neg(x) => write!(f, "neg({x})"),
            Expr::Cup(i, x) => write!(f, "cup@{i}({x})"),
            Expr::Cap(i, x) => write!(f, "cap@{i}({x})"),
            Expr::Rot(x) => write!(f, "rot({x})"),
            Expr::Adj(x) => write!(f, "adj({x})"),
        }
    }
}

impl Rhs {
    pub fn parse(s: &str) -> Result<Rhs, HaagerupError> {
        let mut p = Parser { toks: tokenize(s)?, pos: 0 };
        if p.toks.first() != Some(&Tok::Ident("span".into())) {
            return Ok(Rhs::Expr(Expr::parse(s)?));
        }
        p.pos = 1;
        p.expect(Tok::Open, "(")?;
        let mut parts = Vec::new();
        loop {
            match p.ident()?.as_str() {
                "tl" => parts.push(SpanPart::Tl),
                "ann" => {
                    p.expect(Tok::Open, "(")?;
                    parts.push(SpanPart::Ann(p.ident()?));
                    p.expect(Tok::Close, ")")?;
                }
                other => return Err(HaagerupError::Manifest(format!("unknown span part {other}"))),
            }
            match p.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::Close) => break,
                _ => return Err(p.err(", or )")),
            }
        }
        p.done()?;
        Ok(Rhs::Span(parts))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub shading: String,
    /// Rotation eigenvalue; only `1` and `-1` are supported.
    pub eigenvalue: i64,
    /// Expression the square of the generator must equal.
    pub square: String,
    /// `<T, T>` must equal the quantum integer `[normalization]`.
    pub normalization: usize,
    #[serde(default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definition {
    pub name: String,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub id: String,
    pub lhs: String,
    pub rhs: String,
    #[serde(default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub definitions: Vec<Definition>,
    #[serde(default)]
    pub relations: Vec<RelationSpec>,
}

impl Manifest {
    pub fn bundled() -> Manifest {
        Manifest::from_json_str(include_str!("../../data/relations.manifest.json")).expect("bundled manifest parses")
    }

    pub fn from_json_str(s: &str) -> Result<Manifest, HaagerupError> {
        let m: Manifest = serde_json::from_str(s).map_err(|e| HaagerupError::Manifest(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    /// Parses every expression once so malformed manifests fail early.
    pub fn check(&self) -> Result<(), HaagerupError> {
        Expr::parse(&self.generator.square)?;
        if Shading::parse(&self.generator.shading).is_none() {
            return Err(HaagerupError::Manifest(format!("bad shading {}", self.generator.shading)));
        }
        for d in &self.definitions {
            Expr::parse(&d.expr)?;
        }
        for r in &self.relations {
            Expr::parse(&r.lhs)?;
            Rhs::parse(&r.rhs)?;
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["mul(cup@5(T), cup@10(cap@9(cup@10(T))))", "sub(rot(X), X)", "add(jw(4), neg(e(4,2)))", "adj(id(3))"] {
            let e = Expr::parse(s).unwrap();
            assert_eq!(e.to_string(), s);
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(Expr::parse("mul(T)").is_err());
        assert!(Expr::parse("cup(T)").is_err());
        assert!(Expr::parse("T T").is_err());
        assert!(Expr::parse("T#").is_err());
    }

    #[test]
    fn span_rhs() {
        assert_eq!(Rhs::parse("span(tl, ann(T))").unwrap(), Rhs::Span(vec![SpanPart::Tl, SpanPart::Ann("T".into())]));
        assert_eq!(Rhs::parse("jw(4)").unwrap(), Rhs::Expr(Expr::Jw(4)));
        assert!(Rhs::parse("span(tl, foo)").is_err());
    }

    #[test]
    fn bundled_manifest_parses() {
        let m = Manifest::bundled();
        assert_eq!(m.generator.n, 4);
        assert!(!m.relations.is_empty());
    }
}
