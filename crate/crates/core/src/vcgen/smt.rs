//! SMT-LIB2 encoding of monomorphic VCs.
//!
//! Numeric Michelson types are `Int`, `bool` is `Bool`, pairs, options,
//! ors, lists and unit are per-type datatypes, and every other type is an
//! uninterpreted sort. Sets and maps get `mem`/`get`/`update` axioms;
//! comparable uninterpreted sorts get a strict total order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;

use crate::contracts::{ArithOp, CmpOp, Formula, LogicTable, Term};
use crate::model::{compare, Ty, Value, MUTEZ_MAX};

use super::mono::Vc;
use super::simplify::term_ty;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("cannot encode {0}: it was not resolved by instantiation")]
    Unresolved(String),
    #[error("cannot determine the type of {0}")]
    UnknownType(String),
}

fn q(s: &str) -> String {
    format!("|{}|", s.replace(['|', '\\'], "_"))
}

fn num(n: &BigInt) -> String {
    if n.sign() == num_bigint::Sign::Minus {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn is_numeric(t: &Ty) -> bool {
    matches!(t, Ty::Int | Ty::Nat | Ty::Mutez | Ty::Timestamp)
}

#[derive(Default)]
struct Enc {
    sorts: Vec<String>,
    sort_seen: BTreeSet<Ty>,
    decls: Vec<String>,
    decl_seen: BTreeSet<String>,
    defs: Vec<String>,
    axioms: Vec<String>,
    axiom_seen: BTreeSet<String>,
    consts: BTreeMap<String, Ty>,
    /// Literal constants per type, with their names.
    lits: BTreeMap<Ty, Vec<(Value, String)>>,
    lt_used: BTreeSet<Ty>,
    pack_used: BTreeSet<Ty>,
    unpack_used: BTreeSet<Ty>,
}

impl Enc {
    fn sort(&mut self, t: &Ty) -> String {
        if is_numeric(t) {
            return "Int".into();
        }
        if *t == Ty::Bool {
            return "Bool".into();
        }
        let name = q(&t.to_string());
        if self.sort_seen.contains(t) {
            return name;
        }
        let n = t.to_string();
        let decl = match t {
            Ty::Unit => format!("(declare-datatypes (({name} 0)) (((|unit|))))"),
            Ty::Pair(a, b) => {
                let (sa, sb) = (self.sort(a), self.sort(b));
                format!(
                    "(declare-datatypes (({name} 0)) ((({} ({} {sa}) ({} {sb})))))",
                    q(&format!("Pair {n}")),
                    q(&format!("car {n}")),
                    q(&format!("cdr {n}"))
                )
            }
            Ty::Option(a) => {
                let sa = self.sort(a);
                format!(
                    "(declare-datatypes (({name} 0)) ((({}) ({} ({} {sa})))))",
                    q(&format!("None {n}")),
                    q(&format!("Some {n}")),
                    q(&format!("unsome {n}"))
                )
            }
            Ty::Or(a, b) => {
                let (sa, sb) = (self.sort(a), self.sort(b));
                format!(
                    "(declare-datatypes (({name} 0)) ((({} ({} {sa})) ({} ({} {sb})))))",
                    q(&format!("Left {n}")),
                    q(&format!("unleft {n}")),
                    q(&format!("Right {n}")),
                    q(&format!("unright {n}"))
                )
            }
            Ty::List(a) => {
                let sa = self.sort(a);
                format!(
                    "(declare-datatypes (({name} 0)) ((({}) ({} ({} {sa}) ({} {name})))))",
                    q(&format!("Nil {n}")),
                    q(&format!("Cons {n}")),
                    q(&format!("head {n}")),
                    q(&format!("tail {n}"))
                )
            }
            _ => format!("(declare-sort {name} 0)"),
        };
        self.sort_seen.insert(t.clone());
        self.sorts.push(decl);
        name
    }

    fn fun(&mut self, name: &str, args: &[&Ty], ret: &Ty) -> String {
        let qn = q(name);
        if self.decl_seen.insert(qn.clone()) {
            let args: Vec<String> = args.iter().map(|a| self.sort(a)).collect();
            let ret = self.sort(ret);
            self.decls.push(format!("(declare-fun {qn} ({}) {ret})", args.join(" ")));
        }
        qn
    }

    fn axiom(&mut self, a: String) {
        if self.axiom_seen.insert(a.clone()) {
            self.axioms.push(a);
        }
    }

    fn ty_of(&self, t: &Term) -> Result<Ty, SmtError> {
        term_ty(t).ok_or_else(|| SmtError::UnknownType(t.to_string()))
    }

    fn lt(&mut self, t: &Ty) -> String {
        let s = self.sort(t);
        let f = self.fun(&format!("lt {t}"), &[t, t], &Ty::Bool);
        if self.lt_used.insert(t.clone()) {
            self.axiom(format!("(forall ((x {s})) (not ({f} x x)))"));
            self.axiom(format!(
                "(forall ((x {s}) (y {s}) (z {s})) (=> (and ({f} x y) ({f} y z)) ({f} x z)))"
            ));
            self.axiom(format!("(forall ((x {s}) (y {s})) (or ({f} x y) (= x y) ({f} y x)))"));
        }
        f
    }

    fn size(&mut self, t: &Ty) -> String {
        let name = q(&format!("size {t}"));
        if let Ty::List(_) = t {
            if self.decl_seen.insert(name.clone()) {
                let s = self.sort(t);
                let n = t.to_string();
                self.defs.push(format!(
                    "(define-fun-rec {name} ((l {s})) Int (ite ((_ is {}) l) 0 (+ 1 ({name} ({} l)))))",
                    q(&format!("Nil {n}")),
                    q(&format!("tail {n}"))
                ));
            }
            return name;
        }
        let f = self.fun(&format!("size {t}"), &[t], &Ty::Int);
        let s = self.sort(t);
        self.axiom(format!("(forall ((x {s})) (>= ({f} x) 0))"));
        f
    }

    /// `mem`, plus `get` for maps, with the axioms tying them together.
    fn collection(&mut self, c: &Ty) -> (String, Option<String>) {
        let (key, val) = match c {
            Ty::Set(k) => (k.ty(), None),
            Ty::Map(k, v) | Ty::BigMap(k, v) => (k.ty(), Some((**v).clone())),
            _ => (Ty::Unit, None),
        };
        let mem = self.fun(&format!("mem {c}"), &[&key, c], &Ty::Bool);
        let get = val.map(|v| {
            let o = Ty::option(v);
            let get = self.fun(&format!("get {c}"), &[&key, c], &o);
            let (sk, sc) = (self.sort(&key), self.sort(c));
            self.axiom(format!(
                "(forall ((x {sk}) (m {sc})) (= ({mem} x m) ((_ is {}) ({get} x m))))",
                q(&format!("Some {o}"))
            ));
            get
        });
        (mem, get)
    }

    fn update(&mut self, c: &Ty) -> Result<String, SmtError> {
        let (mem, get) = self.collection(c);
        let (key, x) = match c {
            Ty::Set(k) => (k.ty(), Ty::Bool),
            Ty::Map(k, v) | Ty::BigMap(k, v) => (k.ty(), Ty::option((**v).clone())),
            other => return Err(SmtError::UnknownType(format!("update on {other}"))),
        };
        let f = self.fun(&format!("update {c}"), &[&key, &x, c], c);
        let (sk, sx, sc) = (self.sort(&key), self.sort(&x), self.sort(c));
        match get {
            Some(get) => self.axiom(format!(
                "(forall ((k {sk}) (o {sx}) (m {sc}) (y {sk})) (= ({get} y ({f} k o m)) (ite (= y k) o ({get} y m))))"
            )),
            None => self.axiom(format!(
                "(forall ((k {sk}) (b {sx}) (m {sc}) (y {sk})) (= ({mem} y ({f} k b m)) (ite (= y k) b ({mem} y m))))"
            )),
        }
        Ok(f)
    }

    fn named_lit(&mut self, v: &Value) -> String {
        let ty = v.typ_infer();
        self.sort(&ty);
        let entry = self.lits.entry(ty.clone()).or_default();
        if let Some((_, n)) = entry.iter().find(|(x, _)| x == v) {
            return n.clone();
        }
        let name = q(&format!("lit {ty} {}", entry.len()));
        entry.push((v.clone(), name.clone()));
        let s = self.sort(&ty);
        self.decls.push(format!("(declare-const {name} {s})"));
        name
    }

    fn lit(&mut self, v: &Value) -> Result<String, SmtError> {
        let ty = v.typ_infer();
        let n = ty.to_string();
        Ok(match v {
            Value::Int(x) | Value::Nat(x) | Value::Timestamp(x) => num(x),
            Value::Mutez(x) => num(&BigInt::from(*x)),
            Value::Bool(b) => b.to_string(),
            Value::Unit => {
                self.sort(&ty);
                "|unit|".into()
            }
            Value::Pair(a, b) => {
                self.sort(&ty);
                format!("({} {} {})", q(&format!("Pair {n}")), self.lit(a)?, self.lit(b)?)
            }
            Value::Some(a) => {
                self.sort(&ty);
                format!("({} {})", q(&format!("Some {n}")), self.lit(a)?)
            }
            Value::None(_) => {
                self.sort(&ty);
                q(&format!("None {n}"))
            }
            Value::Left(a, _) => {
                self.sort(&ty);
                format!("({} {})", q(&format!("Left {n}")), self.lit(a)?)
            }
            Value::Right(a, _) => {
                self.sort(&ty);
                format!("({} {})", q(&format!("Right {n}")), self.lit(a)?)
            }
            Value::List(xs, _) => {
                self.sort(&ty);
                let mut s = q(&format!("Nil {n}"));
                for x in xs.iter().rev() {
                    s = format!("({} {} {s})", q(&format!("Cons {n}")), self.lit(x)?);
                }
                s
            }
            Value::Set(xs, _) => {
                let c = self.named_lit(v);
                let (mem, _) = self.collection(&ty);
                let sk = self.sort(&ty.args()[0]);
                let mut alts = Vec::new();
                for x in xs {
                    alts.push(format!("(= x {})", self.lit(x)?));
                }
                let size = self.size(&ty);
                self.axiom(format!("(forall ((x {sk})) (= ({mem} x {c}) (or false {})))", alts.join(" ")));
                self.axiom(format!("(= ({size} {c}) {})", xs.len()));
                c
            }
            Value::Map(es, ..) | Value::BigMap(es, ..) => {
                let c = self.named_lit(v);
                let (_, get) = self.collection(&ty);
                let get = get.expect("maps have get");
                let sk = self.sort(&ty.args()[0]);
                let o = Ty::option(ty.args()[1].clone());
                self.sort(&o);
                let mut body = q(&format!("None {o}"));
                for (k, x) in es.iter().rev() {
                    body = format!(
                        "(ite (= x {}) ({} {}) {body})",
                        self.lit(k)?,
                        q(&format!("Some {o}")),
                        self.lit(x)?
                    );
                }
                self.axiom(format!("(forall ((x {sk})) (= ({get} x {c}) {body}))"));
                if !matches!(v, Value::BigMap(..)) {
                    let size = self.size(&ty);
                    self.axiom(format!("(= ({size} {c}) {})", es.len()));
                }
                c
            }
            _ => self.named_lit(v),
        })
    }

    fn term(&mut self, t: &Term) -> Result<String, SmtError> {
        let unresolved = || Err(SmtError::Unresolved(t.to_string()));
        Ok(match t {
            Term::Int(n) => num(n),
            Term::Var(v) => q(v),
            Term::Arith(op, a, b) => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                let f = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "div",
                    ArithOp::Mod => "mod",
                };
                format!("({f} {a} {b})")
            }
            Term::Neg(a) => format!("(- {})", self.term(a)?),
            Term::IntOf(a) | Term::Mk(_, a) => self.term(a)?,
            Term::CompareV(a, b) => {
                let ty = self.ty_of(a)?;
                let (x, y) = (self.term(a)?, self.term(b)?);
                let less = if is_numeric(&ty) {
                    format!("(< {x} {y})")
                } else if ty == Ty::Bool {
                    format!("(and (not {x}) {y})")
                } else {
                    let lt = self.lt(&ty);
                    format!("({lt} {x} {y})")
                };
                format!("(ite {less} (- 1) (ite (= {x} {y}) 0 1))")
            }
            Term::Size(a) => {
                let ty = self.ty_of(a)?;
                let f = self.size(&ty);
                format!("({f} {})", self.term(a)?)
            }
            Term::Call(f, args) => {
                let mut s = format!("({}", q(f));
                for a in args {
                    s.push(' ');
                    s.push_str(&self.term(a)?);
                }
                s.push(')');
                s
            }
            Term::Ite(c, a, b) => format!("(ite {} {} {})", self.formula(c)?, self.term(a)?, self.term(b)?),
            Term::Sym(n, ty) => {
                self.sort(ty);
                self.consts.insert(n.clone(), ty.clone());
                q(n)
            }
            Term::Lit(v) => self.lit(v)?,
            Term::MkBool(f) => self.formula(f)?,
            Term::MkPair(a, b) => {
                let ty = self.ty_of(t)?;
                self.sort(&ty);
                format!("({} {} {})", q(&format!("Pair {ty}")), self.term(a)?, self.term(b)?)
            }
            Term::MkSome(a) | Term::MkLeft(a, _) | Term::MkRight(a, _) => {
                let ty = self.ty_of(t)?;
                self.sort(&ty);
                let c = match t {
                    Term::MkSome(_) => "Some",
                    Term::MkLeft(..) => "Left",
                    _ => "Right",
                };
                format!("({} {})", q(&format!("{c} {ty}")), self.term(a)?)
            }
            Term::MkNone(_) | Term::MkNil(_) => {
                let ty = self.ty_of(t)?;
                self.sort(&ty);
                let c = if matches!(t, Term::MkNone(_)) { "None" } else { "Nil" };
                q(&format!("{c} {ty}"))
            }
            Term::MkCons(a, b) => {
                let ty = self.ty_of(t)?;
                self.sort(&ty);
                format!("({} {} {})", q(&format!("Cons {ty}")), self.term(a)?, self.term(b)?)
            }
            Term::Car(x) | Term::Cdr(x) | Term::Unsome(x) | Term::Unleft(x) | Term::Unright(x) | Term::Head(x) | Term::Tail(x) => {
                let ty = self.ty_of(x)?;
                self.sort(&ty);
                let sel = match t {
                    Term::Car(_) => "car",
                    Term::Cdr(_) => "cdr",
                    Term::Unsome(_) => "unsome",
                    Term::Unleft(_) => "unleft",
                    Term::Unright(_) => "unright",
                    Term::Head(_) => "head",
                    _ => "tail",
                };
                format!("({} {})", q(&format!("{sel} {ty}")), self.term(x)?)
            }
            Term::Concat(a, b) => {
                let ty = self.ty_of(a)?;
                let f = self.fun(&format!("concat {ty}"), &[&ty, &ty], &ty);
                let size = self.size(&ty);
                let s = self.sort(&ty);
                self.axiom(format!(
                    "(forall ((x {s}) (y {s})) (= ({size} ({f} x y)) (+ ({size} x) ({size} y))))"
                ));
                format!("({f} {} {})", self.term(a)?, self.term(b)?)
            }
            Term::MapGet(k, m) => {
                let ty = self.ty_of(m)?;
                let (_, get) = self.collection(&ty);
                let get = get.ok_or_else(|| SmtError::UnknownType(format!("get on {ty}")))?;
                format!("({get} {} {})", self.term(k)?, self.term(m)?)
            }
            Term::Update(k, x, c) => {
                let ty = self.ty_of(c)?;
                let f = self.update(&ty)?;
                format!("({f} {} {} {})", self.term(k)?, self.term(x)?, self.term(c)?)
            }
            Term::Digest(tag, args, ret) => {
                let tys = args.iter().map(|a| self.ty_of(a)).collect::<Result<Vec<_>, _>>()?;
                let sig: Vec<String> = tys.iter().map(|t| t.to_string()).collect();
                let f = self.fun(&format!("{tag} {}", sig.join(" ")), &tys.iter().collect::<Vec<_>>(), ret);
                let mut s = format!("({f}");
                for a in args {
                    s.push(' ');
                    s.push_str(&self.term(a)?);
                }
                s.push(')');
                s
            }
            Term::Pack(a) => {
                let ty = self.ty_of(a)?;
                let f = self.fun(&format!("pack {ty}"), &[&ty], &Ty::Bytes);
                self.pack_used.insert(ty);
                format!("({f} {})", self.term(a)?)
            }
            Term::Unpack(a, ty) => {
                let f = self.fun(&format!("unpack {ty}"), &[&Ty::Bytes], &Ty::option(ty.clone()));
                self.unpack_used.insert(ty.clone());
                format!("({f} {})", self.term(a)?)
            }
            Term::Transfer(a, m, c) => {
                let ty = self.ty_of(a)?;
                let f = self.fun(
                    &format!("transfer {ty}"),
                    &[&ty, &Ty::Mutez, &Ty::contract(ty.clone())],
                    &Ty::Operation,
                );
                format!("({f} {} {} {})", self.term(a)?, self.term(m)?, self.term(c)?)
            }
            Term::SetDelegate(a) => {
                let f = self.fun("set_delegate", &[&Ty::option(Ty::KeyHash)], &Ty::Operation);
                format!("({f} {})", self.term(a)?)
            }
            Term::Len(_) | Term::Name(_) | Term::Slot(..) | Term::TypeOf(_) | Term::TyLit(_) | Term::TyApp(..) | Term::TyArg(..) => {
                return unresolved()
            }
        })
    }

    fn is(&mut self, ctor: &str, x: &Term) -> Result<String, SmtError> {
        let ty = self.ty_of(x)?;
        self.sort(&ty);
        Ok(format!("((_ is {}) {})", q(&format!("{ctor} {ty}")), self.term(x)?))
    }

    fn formula(&mut self, f: &Formula) -> Result<String, SmtError> {
        let many = |this: &mut Self, op: &str, xs: &[Formula], empty: &str| -> Result<String, SmtError> {
            if xs.is_empty() {
                return Ok(empty.into());
            }
            let parts = xs.iter().map(|x| this.formula(x)).collect::<Result<Vec<_>, _>>()?;
            Ok(format!("({op} {})", parts.join(" ")))
        };
        Ok(match f {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Cmp(op, a, b) => {
                let (x, y) = (self.term(a)?, self.term(b)?);
                match op {
                    CmpOp::Eq => format!("(= {x} {y})"),
                    CmpOp::Ne => format!("(not (= {x} {y}))"),
                    other => format!("({} {x} {y})", other.symbol()),
                }
            }
            Formula::Not(x) => format!("(not {})", self.formula(x)?),
            Formula::And(xs) => many(self, "and", xs, "true")?,
            Formula::Or(xs) => many(self, "or", xs, "false")?,
            Formula::Implies(a, b) => format!("(=> {} {})", self.formula(a)?, self.formula(b)?),
            Formula::Iff(a, b) => format!("(= {} {})", self.formula(a)?, self.formula(b)?),
            Formula::Forall { var, lo, hi, body } => {
                let v = q(var);
                format!(
                    "(forall (({v} Int)) (=> (and (<= {} {v}) (< {v} {})) {}))",
                    self.term(lo)?,
                    self.term(hi)?,
                    self.formula(body)?
                )
            }
            Formula::Cases(cs) => {
                let mut s = "false".to_string();
                for (g, b) in cs.iter().rev() {
                    s = format!("(ite {} {} {s})", self.formula(g)?, self.formula(b)?);
                }
                s
            }
            Formula::IsTrue(t) => self.term(t)?,
            Formula::IsSome(t) => self.is("Some", t)?,
            Formula::IsLeft(t) => self.is("Left", t)?,
            Formula::IsCons(t) => self.is("Cons", t)?,
            Formula::Mem(k, c) => {
                let ty = self.ty_of(c)?;
                let (mem, _) = self.collection(&ty);
                format!("({mem} {} {})", self.term(k)?, self.term(c)?)
            }
            Formula::CheckSig(k, s, b) => {
                let f = self.fun("check_signature", &[&Ty::Key, &Ty::Signature, &Ty::Bytes], &Ty::Bool);
                format!("({f} {} {} {})", self.term(k)?, self.term(s)?, self.term(b)?)
            }
            Formula::TyIs(..) => return Err(SmtError::Unresolved(f.to_string())),
        })
    }

    /// Range facts implied by a value's Michelson type.
    fn wf(&mut self, e: &str, t: &Ty) -> Option<String> {
        let n = t.to_string();
        match t {
            Ty::Nat => Some(format!("(>= {e} 0)")),
            Ty::Mutez => Some(format!("(and (>= {e} 0) (<= {e} {MUTEZ_MAX}))")),
            Ty::Pair(a, b) => {
                let parts: Vec<String> = [
                    self.wf(&format!("({} {e})", q(&format!("car {n}"))), a),
                    self.wf(&format!("({} {e})", q(&format!("cdr {n}"))), b),
                ]
                .into_iter()
                .flatten()
                .collect();
                match parts.len() {
                    0 => None,
                    1 => parts.into_iter().next(),
                    _ => Some(format!("(and {})", parts.join(" "))),
                }
            }
            Ty::Option(a) => self
                .wf(&format!("({} {e})", q(&format!("unsome {n}"))), a)
                .map(|w| format!("(=> ((_ is {}) {e}) {w})", q(&format!("Some {n}")))),
            Ty::Or(a, b) => {
                let l = self.wf(&format!("({} {e})", q(&format!("unleft {n}"))), a);
                let r = self.wf(&format!("({} {e})", q(&format!("unright {n}"))), b);
                if l.is_none() && r.is_none() {
                    return None;
                }
                Some(format!(
                    "(ite ((_ is {}) {e}) {} {})",
                    q(&format!("Left {n}")),
                    l.unwrap_or_else(|| "true".into()),
                    r.unwrap_or_else(|| "true".into())
                ))
            }
            Ty::List(a) => {
                let name = q(&format!("wf {t}"));
                let inner = self.wf(&format!("({} l)", q(&format!("head {n}"))), a)?;
                if self.decl_seen.insert(name.clone()) {
                    let s = self.sort(t);
                    self.defs.push(format!(
                        "(define-fun-rec {name} ((l {s})) Bool (ite ((_ is {}) l) true (and {inner} ({name} ({} l)))))",
                        q(&format!("Nil {n}")),
                        q(&format!("tail {n}"))
                    ));
                }
                Some(format!("({name} {e})"))
            }
            Ty::Set(k) => {
                let kt = k.ty();
                let w = self.wf("x", &kt)?;
                let (mem, _) = self.collection(t);
                Some(format!("(forall ((x Int)) (=> ({mem} x {e}) {w}))"))
            }
            _ => None,
        }
    }
}

fn logic_defs(logic: &LogicTable) -> Result<Vec<String>, SmtError> {
    let mut out = Vec::new();
    for f in logic.iter() {
        let mut enc = Enc::default();
        let body = enc.term(&f.body)?;
        let params: Vec<String> = f.params.iter().map(|p| format!("({} Int)", q(p))).collect();
        let kw = if f.is_recursive() { "define-fun-rec" } else { "define-fun" };
        out.push(format!("({kw} {} ({}) Int {body})", q(&f.name), params.join(" ")));
    }
    Ok(out)
}

/// One self-contained SMT-LIB2 script; the VC is valid iff the script is
/// unsatisfiable.
pub fn emit_smt(vc: &Vc, logic: &LogicTable) -> Result<String, SmtError> {
    let mut enc = Enc::default();
    let mut hyps = Vec::new();
    for h in &vc.hypotheses {
        let h = enc.formula(h)?;
        if !hyps.contains(&h) {
            hyps.push(h);
        }
    }
    let goal = enc.formula(&vc.goal)?;
    let consts: Vec<(String, Ty)> = enc.consts.iter().map(|(n, t)| (n.clone(), t.clone())).collect();
    let mut wf = Vec::new();
    for (n, t) in &consts {
        let s = enc.sort(t);
        enc.decls.push(format!("(declare-const {} {s})", q(n)));
        if let Some(w) = enc.wf(&q(n), t) {
            wf.push(w);
        }
    }
    // Literal constants: pairwise distinct and ordered as the values are.
    let lits: Vec<(Ty, Vec<(Value, String)>)> = enc.lits.iter().map(|(t, v)| (t.clone(), v.clone())).collect();
    for (t, vs) in &lits {
        if vs.len() > 1 {
            let names: Vec<&str> = vs.iter().map(|(_, n)| n.as_str()).collect();
            enc.axiom(format!("(distinct {})", names.join(" ")));
        }
        if enc.lt_used.contains(t) {
            let lt = q(&format!("lt {t}"));
            for (a, na) in vs {
                for (b, nb) in vs {
                    if compare(a, b) == Ok(-1) {
                        enc.axiom(format!("({lt} {na} {nb})"));
                    }
                }
            }
        }
    }
    let both: Vec<Ty> = enc.pack_used.intersection(&enc.unpack_used).cloned().collect();
    for t in both {
        let s = enc.sort(&t);
        let o = Ty::option(t.clone());
        enc.sort(&o);
        enc.axiom(format!(
            "(forall ((x {s})) (= ({} ({} x)) ({} x)))",
            q(&format!("unpack {t}")),
            q(&format!("pack {t}")),
            q(&format!("Some {o}"))
        ));
    }
    let mut out = String::new();
    let _ = writeln!(out, "; {}", vc.name);
    out.push_str("(set-logic ALL)\n");
    for s in &enc.sorts {
        let _ = writeln!(out, "{s}");
    }
    for d in &enc.decls {
        let _ = writeln!(out, "{d}");
    }
    for d in &enc.defs {
        let _ = writeln!(out, "{d}");
    }
    for d in logic_defs(logic)? {
        let _ = writeln!(out, "{d}");
    }
    for a in enc.axioms.iter().chain(&wf) {
        let _ = writeln!(out, "(assert {a})");
    }
    for h in &hyps {
        let _ = writeln!(out, "(assert {h})");
    }
    let _ = writeln!(out, "(assert (not {goal}))");
    out.push_str("(check-sat)\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::formula::build::*;

    fn vc(hyps: Vec<Formula>, goal: Formula) -> Vc {
        Vc {
            name: "t".into(),
            path: None,
            hypotheses: hyps,
            goal,
        }
    }

    #[test]
    fn script_layout() {
        let s = emit_smt(&vc(vec![], eq(add(int(1), int(1)), int(2))), &LogicTable::new()).unwrap();
        assert!(s.contains("(assert (not (= (+ 1 1) 2)))"));
        assert!(s.trim_end().ends_with("(check-sat)"));
    }

    #[test]
    fn symbols_are_declared_with_ranges() {
        let x = Term::Sym("x".into(), Ty::pair(Ty::Nat, Ty::Mutez));
        let s = emit_smt(&vc(vec![], eq(Term::Car(Box::new(x.clone())), int(0))), &LogicTable::new()).unwrap();
        assert!(s.contains("(declare-const |x| |pair nat mutez|)"), "{s}");
        assert!(s.contains("(>= (|car pair nat mutez| |x|) 0)"), "{s}");
    }

    #[test]
    fn type_terms_are_rejected() {
        let f = eq(ty_of(s(0)), ty_lit(Ty::Nat));
        assert!(matches!(emit_smt(&vc(vec![], f), &LogicTable::new()), Err(SmtError::Unresolved(_))));
    }
}
