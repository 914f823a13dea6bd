//! Specification sidecar files.
//!
//! One clause per line:
//!
//! ```text
//! requires: <formula>
//! ensures: <formula>
//! logic fact(n) = if n <= 0 then 1 else n * fact(n - 1)
//! invariant@1.1.0: <formula>
//! variant@1.1.0: <term>
//! assert@1.0: <formula>
//! ```
//!
//! Formulas use `stack[i]`, `result[i]`, `len(stack)`, `param`,
//! `storage_in`, `storage_out`, the context names, `car`/`cdr`/`size`,
//! logic-function calls, integer arithmetic, comparisons, `&&`, `||`, `!`,
//! `=>`, `if .. then .. else ..` and `forall i in lo..hi: ...`.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::contracts::formula::build;
use crate::contracts::{ArithOp, CmpOp, Formula, LogicError, LogicTable, StackRef, Term};
use crate::syntax::{Node, Path};
use crate::typecheck::TypedProgram;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SidecarError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: {message}")]
    Semantic { line: usize, col: usize, message: String },
}

impl SidecarError {
    pub fn line_col(&self) -> (usize, usize) {
        match self {
            SidecarError::Syntax { line, col, .. } | SidecarError::Semantic { line, col, .. } => (*line, *col),
        }
    }

    pub fn is_syntax(&self) -> bool {
        matches!(self, SidecarError::Syntax { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub formula: Formula,
    pub text: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SpecSidecar {
    pub requires: Vec<Clause>,
    pub ensures: Vec<Clause>,
    pub logic: LogicTable,
    pub invariants: BTreeMap<Path, Clause>,
    pub variants: BTreeMap<Path, Term>,
    pub asserts: BTreeMap<Path, Vec<Clause>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Requires,
    Ensures,
    Invariant,
    Assert,
}

// ---------------------------------------------------------------- lexing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 23] = [
    "<=>", "=>", "&&", "||", "!=", "<=", ">=", "..", "==", "(", ")", "[", "]", ",", ":", "+", "-", "*", "/", "%", "<",
    ">", "=",
];

fn lex(src: &str, line: usize, base_col: usize) -> Result<Vec<(Tok, usize)>, SidecarError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = base_col + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().unwrap()), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if c == '!' && chars.get(i + 1) != Some(&'=') {
            out.push((Tok::Sym("!"), col));
            i += 1;
        } else {
            let rest: String = chars[i..].iter().take(3).collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
                Some(s) => {
                    out.push((Tok::Sym(s), col));
                    i += s.chars().count();
                }
                None => {
                    return Err(SidecarError::Syntax {
                        line,
                        col,
                        message: format!("unexpected character {c:?}"),
                    })
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Expr {
    Int(BigInt),
    Bool(bool),
    Ident(String, usize),
    Call(String, Vec<Expr>, usize),
    Index(String, Box<Expr>, usize),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(&'static str, Box<Expr>, Box<Expr>, usize),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Forall(String, Box<Expr>, Box<Expr>, Box<Expr>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, SidecarError> {
        Err(SidecarError::Syntax {
            line: self.line,
            col: self.col(),
            message: message.into(),
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(x)) if x == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SidecarError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), SidecarError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`"))
        }
    }

    fn ident(&mut self) -> Result<String, SidecarError> {
        match self.peek() {
            Some(Tok::Ident(x)) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => self.err("expected a name"),
        }
    }

    fn finish(&self) -> Result<(), SidecarError> {
        if self.pos < self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, SidecarError> {
        if self.eat_kw("forall") {
            let v = self.ident()?;
            self.expect_kw("in")?;
            let lo = self.additive()?;
            self.expect_sym("..")?;
            let hi = self.additive()?;
            self.expect_sym(":")?;
            let body = self.expr()?;
            return Ok(Expr::Forall(v, Box::new(lo), Box::new(hi), Box::new(body)));
        }
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        self.iff()
    }

    fn iff(&mut self) -> Result<Expr, SidecarError> {
        let a = self.implies()?;
        let col = self.col();
        if self.eat_sym("<=>") {
            let b = self.implies()?;
            return Ok(Expr::Bin("<=>", Box::new(a), Box::new(b), col));
        }
        Ok(a)
    }

    fn implies(&mut self) -> Result<Expr, SidecarError> {
        let a = self.or()?;
        let col = self.col();
        if self.eat_sym("=>") {
            let b = self.implies()?;
            return Ok(Expr::Bin("=>", Box::new(a), Box::new(b), col));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<Expr, SidecarError> {
        let mut a = self.and()?;
        loop {
            let col = self.col();
            if !self.eat_sym("||") {
                return Ok(a);
            }
            a = Expr::Bin("||", Box::new(a), Box::new(self.and()?), col);
        }
    }

    fn and(&mut self) -> Result<Expr, SidecarError> {
        let mut a = self.not()?;
        loop {
            let col = self.col();
            if !self.eat_sym("&&") {
                return Ok(a);
            }
            a = Expr::Bin("&&", Box::new(a), Box::new(self.not()?), col);
        }
    }

    fn not(&mut self) -> Result<Expr, SidecarError> {
        if self.eat_sym("!") || self.eat_kw("not") {
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, SidecarError> {
        let a = self.additive()?;
        let col = self.col();
        for op in ["==", "!=", "<=", ">=", "<", ">", "="] {
            if self.eat_sym(op) {
                let op = if op == "==" { "=" } else { op };
                let op = SYMBOLS.iter().find(|s| **s == op).unwrap();
                let b = self.additive()?;
                return Ok(Expr::Bin(op, Box::new(a), Box::new(b), col));
            }
        }
        Ok(a)
    }

    fn additive(&mut self) -> Result<Expr, SidecarError> {
        let mut a = self.multiplicative()?;
        loop {
            let col = self.col();
            let op = if self.eat_sym("+") {
                "+"
            } else if self.eat_sym("-") {
                "-"
            } else {
                return Ok(a);
            };
            a = Expr::Bin(op, Box::new(a), Box::new(self.multiplicative()?), col);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, SidecarError> {
        let mut a = self.unary()?;
        loop {
            let col = self.col();
            let op = if self.eat_sym("*") {
                "*"
            } else if self.eat_sym("/") {
                "/"
            } else if self.eat_sym("%") {
                "%"
            } else {
                return Ok(a);
            };
            a = Expr::Bin(op, Box::new(a), Box::new(self.unary()?), col);
        }
    }

    fn unary(&mut self) -> Result<Expr, SidecarError> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, SidecarError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(x)) => {
                self.pos += 1;
                match x.as_str() {
                    "true" => return Ok(Expr::Bool(true)),
                    "false" => return Ok(Expr::Bool(false)),
                    _ => {}
                }
                if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.eat_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat_sym(")") {
                                break;
                            }
                            self.expect_sym(",")?;
                        }
                    }
                    Ok(Expr::Call(x, args, col))
                } else if self.eat_sym("[") {
                    let i = self.expr()?;
                    self.expect_sym("]")?;
                    Ok(Expr::Index(x, Box::new(i), col))
                } else {
                    Ok(Expr::Ident(x, col))
                }
            }
            _ => self.err("expected an expression"),
        }
    }
}

fn parse_expr(src: &str, line: usize, col: usize) -> Result<Expr, SidecarError> {
    let toks = lex(src, line, col)?;
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        end_col: col + src.chars().count(),
    };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

// ---------------------------------------------------------------- elaboration

enum Elab {
    Int(Term),
    Val(Term),
    Prop(Formula),
}

const ENV_NAMES: [&str; 11] = [
    "param",
    "storage_in",
    "storage_out",
    "fuel",
    "amount",
    "balance",
    "now",
    "sender",
    "source",
    "chain_id",
    "self",
];

struct Elaborator<'a> {
    line: usize,
    kind: Option<Kind>,
    vars: Vec<String>,
    logic: &'a LogicTable,
    /// Function being declared, with its arity.
    declaring: Option<(String, usize)>,
}

impl Elaborator<'_> {
    fn err<T>(&self, col: usize, message: impl Into<String>) -> Result<T, SidecarError> {
        Err(SidecarError::Semantic {
            line: self.line,
            col,
            message: message.into(),
        })
    }

    fn int(&mut self, e: &Expr, col: usize) -> Result<Term, SidecarError> {
        match self.elab(e)? {
            Elab::Int(t) => Ok(t),
            Elab::Val(t) => Ok(Term::IntOf(Box::new(t))),
            Elab::Prop(_) => self.err(col, "expected an integer, found a formula"),
        }
    }

    fn prop(&mut self, e: &Expr, col: usize) -> Result<Formula, SidecarError> {
        match self.elab(e)? {
            Elab::Prop(f) => Ok(f),
            Elab::Val(t) => Ok(Formula::IsTrue(t)),
            Elab::Int(_) => self.err(col, "expected a formula, found an integer"),
        }
    }

    fn stack_ref(&self, name: &str, col: usize) -> Result<StackRef, SidecarError> {
        match (name, self.kind) {
            ("stack", Some(_)) => Ok(StackRef::S),
            ("result", Some(Kind::Ensures)) => Ok(StackRef::Result),
            ("result", _) => self.err(col, "`result` is only available in ensures clauses"),
            _ => self.err(col, format!("unknown stack {name:?}")),
        }
    }

    fn elab(&mut self, e: &Expr) -> Result<Elab, SidecarError> {
        Ok(match e {
            Expr::Int(n) => Elab::Int(Term::Int(n.clone())),
            Expr::Bool(b) => Elab::Prop(if *b { Formula::True } else { Formula::False }),
            Expr::Ident(x, col) => {
                if self.vars.iter().any(|v| v == x) {
                    Elab::Int(Term::Var(x.clone()))
                } else if x == "fuel" && self.kind.is_some() {
                    Elab::Int(Term::Name(x.clone()))
                } else if ENV_NAMES.contains(&x.as_str()) && self.kind.is_some() {
                    if x == "storage_out" && self.kind != Some(Kind::Ensures) {
                        return self.err(*col, "`storage_out` is only available in ensures clauses");
                    }
                    Elab::Val(Term::Name(x.clone()))
                } else {
                    return self.err(*col, format!("unbound name {x:?}"));
                }
            }
            Expr::Index(x, i, col) => {
                let r = self.stack_ref(x, *col)?;
                let i = self.int(i, *col)?;
                Elab::Val(Term::Slot(r, Box::new(i)))
            }
            Expr::Call(f, args, col) => {
                let unary = |this: &Self| {
                    if args.len() != 1 {
                        this.err(*col, format!("{f} takes one argument"))
                    } else {
                        Ok(&args[0])
                    }
                };
                match f.as_str() {
                    "len" if self.kind.is_some() => match unary(self)? {
                        Expr::Ident(x, c) => Elab::Int(Term::Len(self.stack_ref(x, *c)?)),
                        _ => return self.err(*col, "len takes `stack` or `result`"),
                    },
                    "car" | "cdr" if self.kind.is_some() => {
                        let a = unary(self)?;
                        let t = match self.elab(a)? {
                            Elab::Val(t) => t,
                            _ => return self.err(*col, format!("{f} takes a value")),
                        };
                        Elab::Val(if f == "car" { Term::Car(Box::new(t)) } else { Term::Cdr(Box::new(t)) })
                    }
                    "size" if self.kind.is_some() => {
                        let a = unary(self)?;
                        match self.elab(a)? {
                            Elab::Val(t) => Elab::Int(Term::Size(Box::new(t))),
                            _ => return self.err(*col, "size takes a value"),
                        }
                    }
                    _ => {
                        let arity = match (&self.declaring, self.logic.get(f)) {
                            (Some((name, n)), _) if name == f => *n,
                            (_, Some(lf)) => lf.params.len(),
                            _ => return self.err(*col, format!("unknown function {f:?}")),
                        };
                        if arity != args.len() {
                            return self.err(*col, format!("{f} expects {arity} arguments, found {}", args.len()));
                        }
                        let mut ts = Vec::new();
                        for a in args {
                            ts.push(self.int(a, *col)?);
                        }
                        Elab::Int(Term::Call(f.clone(), ts))
                    }
                }
            }
            Expr::Neg(a) => Elab::Int(Term::Neg(Box::new(self.int(a, 0)?))),
            Expr::Not(a) => Elab::Prop(build::not(self.prop(a, 0)?)),
            Expr::Bin(op, a, b, col) => self.binary(op, a, b, *col)?,
            Expr::If(c, a, b) => {
                let c = self.prop(c, 0)?;
                match (self.elab(a)?, self.elab(b)?) {
                    (Elab::Prop(x), Elab::Prop(y)) => Elab::Prop(Formula::Or(vec![
                        Formula::And(vec![c.clone(), x]),
                        Formula::And(vec![build::not(c), y]),
                    ])),
                    (Elab::Val(x), Elab::Val(y)) => Elab::Val(build::ite(c, x, y)),
                    (Elab::Int(x), Elab::Int(y)) => Elab::Int(build::ite(c, x, y)),
                    (Elab::Int(x), Elab::Val(y)) => Elab::Int(build::ite(c, x, Term::IntOf(Box::new(y)))),
                    (Elab::Val(x), Elab::Int(y)) => Elab::Int(build::ite(c, Term::IntOf(Box::new(x)), y)),
                    _ => return self.err(0, "branches of `if` mix formulas and terms"),
                }
            }
            Expr::Forall(v, lo, hi, body) => {
                let lo = self.int(lo, 0)?;
                let hi = self.int(hi, 0)?;
                self.vars.push(v.clone());
                let body = self.prop(body, 0);
                self.vars.pop();
                Elab::Prop(build::forall(v, lo, hi, body?))
            }
        })
    }

    fn binary(&mut self, op: &str, a: &Expr, b: &Expr, col: usize) -> Result<Elab, SidecarError> {
        let arith = |op| -> Option<ArithOp> {
            Some(match op {
                "+" => ArithOp::Add,
                "-" => ArithOp::Sub,
                "*" => ArithOp::Mul,
                "/" => ArithOp::Div,
                "%" => ArithOp::Mod,
                _ => return None,
            })
        };
        if let Some(k) = arith(op) {
            let (x, y) = (self.int(a, col)?, self.int(b, col)?);
            return Ok(Elab::Int(Term::Arith(k, Box::new(x), Box::new(y))));
        }
        let cmp = match op {
            "<" => Some(CmpOp::Lt),
            "<=" => Some(CmpOp::Le),
            ">" => Some(CmpOp::Gt),
            ">=" => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(c) = cmp {
            let (x, y) = (self.int(a, col)?, self.int(b, col)?);
            return Ok(Elab::Prop(Formula::Cmp(c, x, y)));
        }
        Ok(Elab::Prop(match op {
            "&&" => match (self.prop(a, col)?, self.prop(b, col)?) {
                (Formula::And(mut xs), y) => {
                    xs.push(y);
                    Formula::And(xs)
                }
                (x, y) => build::and(vec![x, y]),
            },
            "||" => match (self.prop(a, col)?, self.prop(b, col)?) {
                (Formula::Or(mut xs), y) => {
                    xs.push(y);
                    Formula::Or(xs)
                }
                (x, y) => build::or(vec![x, y]),
            },
            "=>" => build::implies(self.prop(a, col)?, self.prop(b, col)?),
            "<=>" => Formula::Iff(Box::new(self.prop(a, col)?), Box::new(self.prop(b, col)?)),
            "=" | "!=" => {
                let f = match (self.elab(a)?, self.elab(b)?) {
                    (Elab::Val(x), Elab::Val(y)) => Formula::Cmp(CmpOp::Eq, x, y),
                    (Elab::Prop(x), y) => Formula::Iff(Box::new(x), Box::new(self.as_prop(y, col)?)),
                    (x, Elab::Prop(y)) => Formula::Iff(Box::new(self.as_prop(x, col)?), Box::new(y)),
                    (x, y) => Formula::Cmp(CmpOp::Eq, self.as_int(x, col)?, self.as_int(y, col)?),
                };
                if op == "=" {
                    f
                } else {
                    match f {
                        Formula::Cmp(CmpOp::Eq, x, y) => Formula::Cmp(CmpOp::Ne, x, y),
                        f => build::not(f),
                    }
                }
            }
            _ => unreachable!("operator {op}"),
        }))
    }

    fn as_prop(&self, e: Elab, col: usize) -> Result<Formula, SidecarError> {
        match e {
            Elab::Prop(f) => Ok(f),
            Elab::Val(t) => Ok(Formula::IsTrue(t)),
            Elab::Int(_) => self.err(col, "cannot compare a formula with an integer"),
        }
    }

    fn as_int(&self, e: Elab, col: usize) -> Result<Term, SidecarError> {
        match e {
            Elab::Int(t) => Ok(t),
            Elab::Val(t) => Ok(Term::IntOf(Box::new(t))),
            Elab::Prop(_) => self.err(col, "cannot compare a formula with an integer"),
        }
    }
}

fn logic_error(e: LogicError, line: usize, col: usize) -> SidecarError {
    SidecarError::Semantic {
        line,
        col,
        message: e.to_string(),
    }
}

fn parse_path(s: &str, line: usize, col: usize) -> Result<Path, SidecarError> {
    s.parse().map_err(|message| SidecarError::Syntax { line, col, message })
}

/// Parses a sidecar file. Paths are not checked here; see
/// [`SpecSidecar::check_paths`].
pub fn parse_sidecar(src: &str) -> Result<SpecSidecar, SidecarError> {
    let mut spec = SpecSidecar::default();
    for (ix, raw) in src.lines().enumerate() {
        let line = ix + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len() + 1;
        if let Some(rest) = text.strip_prefix("logic ") {
            let col = indent + 6;
            let Some((head, body)) = rest.split_once('=') else {
                return Err(SidecarError::Syntax {
                    line,
                    col,
                    message: "expected `logic name(params) = body`".into(),
                });
            };
            let head = parse_expr(head, line, col)?;
            let (name, params) = match head {
                Expr::Call(name, args, _) => {
                    let mut ps = Vec::new();
                    for a in args {
                        match a {
                            Expr::Ident(p, _) => ps.push(p),
                            _ => {
                                return Err(SidecarError::Syntax {
                                    line,
                                    col,
                                    message: "logic parameters must be names".into(),
                                })
                            }
                        }
                    }
                    (name, ps)
                }
                _ => {
                    return Err(SidecarError::Syntax {
                        line,
                        col,
                        message: "expected `logic name(params) = body`".into(),
                    })
                }
            };
            let body_col = col + head_len(rest) + 1;
            let body = parse_expr(body, line, body_col)?;
            let mut el = Elaborator {
                line,
                kind: None,
                vars: params.clone(),
                logic: &spec.logic,
                declaring: Some((name.clone(), params.len())),
            };
            let body = el.int(&body, body_col)?;
            spec.logic
                .declare(&name, params, body)
                .map_err(|e| logic_error(e, line, col))?;
            continue;
        }
        let Some((head, body)) = text.split_once(':') else {
            return Err(SidecarError::Syntax {
                line,
                col: indent,
                message: "expected `<kind>: <formula>`".into(),
            });
        };
        let body_col = indent + head.chars().count() + 1;
        let (kw, path) = match head.split_once('@') {
            Some((kw, p)) => (kw.trim(), Some(parse_path(p, line, indent + kw.len() + 1)?)),
            None => (head.trim(), None),
        };
        let kind = match (kw, &path) {
            ("requires", None) => Kind::Requires,
            ("ensures", None) => Kind::Ensures,
            ("invariant", Some(_)) => Kind::Invariant,
            ("assert", Some(_)) => Kind::Assert,
            ("variant", Some(p)) => {
                let e = parse_expr(body, line, body_col)?;
                let mut el = Elaborator {
                    line,
                    kind: Some(Kind::Invariant),
                    vars: Vec::new(),
                    logic: &spec.logic,
                    declaring: None,
                };
                let t = el.int(&e, body_col)?;
                spec.variants.insert(p.clone(), t);
                continue;
            }
            _ => {
                return Err(SidecarError::Syntax {
                    line,
                    col: indent,
                    message: format!("unknown clause kind {head:?}"),
                })
            }
        };
        let e = parse_expr(body, line, body_col)?;
        let mut el = Elaborator {
            line,
            kind: Some(kind),
            vars: Vec::new(),
            logic: &spec.logic,
            declaring: None,
        };
        let formula = el.prop(&e, body_col)?;
        let clause = Clause {
            formula,
            text: body.trim().to_string(),
            line,
        };
        match (kind, path) {
            (Kind::Requires, _) => spec.requires.push(clause),
            (Kind::Ensures, _) => spec.ensures.push(clause),
            (Kind::Invariant, Some(p)) => {
                if spec.invariants.insert(p.clone(), clause).is_some() {
                    return Err(SidecarError::Semantic {
                        line,
                        col: indent,
                        message: format!("second invariant for {p}"),
                    });
                }
            }
            (Kind::Assert, Some(p)) => spec.asserts.entry(p).or_default().push(clause),
            _ => unreachable!(),
        }
    }
    Ok(spec)
}

fn head_len(rest: &str) -> usize {
    rest.split_once('=').map_or(0, |(h, _)| h.chars().count())
}

impl SpecSidecar {
    /// Every annotated path must exist; invariants and variants must sit on
    /// loops.
    pub fn check_paths(&self, tp: &TypedProgram) -> Result<(), SidecarError> {
        let code = tp.code();
        let sem = |line: usize, message: String| SidecarError::Semantic { line, col: 1, message };
        for (p, c) in &self.invariants {
            match code.at(p).map(|i| &i.node) {
                Some(Node::Loop(_) | Node::LoopLeft(_) | Node::Iter(_)) => {}
                Some(n) => return Err(sem(c.line, format!("invariant at {p} is attached to {}, not a loop", n.name()))),
                None => return Err(sem(c.line, format!("no instruction at path {p}"))),
            }
        }
        for p in self.variants.keys() {
            if !matches!(code.at(p).map(|i| &i.node), Some(Node::Loop(_) | Node::LoopLeft(_) | Node::Iter(_))) {
                return Err(sem(0, format!("variant at {p} is not attached to a loop")));
            }
        }
        for (p, cs) in &self.asserts {
            if code.at(p).is_none() {
                return Err(sem(cs[0].line, format!("no instruction at path {p}")));
            }
        }
        Ok(())
    }

    /// Loops without an invariant.
    pub fn missing_invariants(&self, tp: &TypedProgram) -> Vec<Path> {
        tp.code()
            .walk()
            .into_iter()
            .filter(|(p, i)| {
                matches!(i.node, Node::Loop(_) | Node::LoopLeft(_) | Node::Iter(_)) && !self.invariants.contains_key(p)
            })
            .map(|(p, _)| p)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::formula::build::*;

    const FACT: &str = "\
logic fact(n) = if n <= 0 then 1 else n * fact(n - 1)
# loop head: guard, acc, idx, n
invariant@1.1.1.1.1.0: stack[0] = (stack[2] <= stack[3]) && fact(stack[2] - 1) = stack[1] && stack[2] >= 1 && stack[2] <= stack[3] + 1 && stack[3] = param
ensures: storage_out = fact(param)
";

    #[test]
    fn factorial_sidecar() {
        let spec = parse_sidecar(FACT).unwrap();
        assert!(spec.logic.get("fact").unwrap().is_recursive());
        assert_eq!(spec.invariants.len(), 1);
        let inv = &spec.invariants[&"1.1.1.1.1.0".parse().unwrap()].formula;
        let Formula::And(parts) = inv else { panic!("{inv}") };
        assert_eq!(parts.len(), 5);
        assert!(matches!(&parts[0], Formula::Iff(..)));
        assert_eq!(
            spec.ensures[0].formula,
            eq(Term::IntOf(Box::new(name("storage_out"))), Term::Call("fact".into(), vec![num(name("param"))]))
        );
    }

    #[test]
    fn value_equality_stays_on_values() {
        let spec = parse_sidecar("ensures: storage_out = storage_in").unwrap();
        assert_eq!(spec.ensures[0].formula, eq(name("storage_out"), name("storage_in")));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_sidecar("requires: stack[0] = = 1").unwrap_err();
        assert!(e.is_syntax());
        assert_eq!(e.line_col().0, 1);
        let e = parse_sidecar("\nrequires: result[0] = 1").unwrap_err();
        assert!(!e.is_syntax());
        assert_eq!(e.line_col().0, 2);
        let e = parse_sidecar("requires: nope(1) = 1").unwrap_err();
        assert!(e.to_string().contains("unknown function"));
        let e = parse_sidecar("logic f(n) = f(n + 1)").unwrap_err();
        assert!(!e.is_syntax());
        assert!(parse_sidecar("frobnicate: true").unwrap_err().is_syntax());
    }

    #[test]
    fn constant_logic_function() {
        let spec = parse_sidecar("logic c() = 7\nrequires: c() = 7").unwrap();
        assert!(!spec.logic.get("c").unwrap().is_recursive());
    }

    #[test]
    fn forall_and_if() {
        let spec = parse_sidecar("requires: forall i in 0..len(stack): if i < 1 then true else false").unwrap();
        assert!(matches!(spec.requires[0].formula, Formula::Forall { .. }));
    }
}
