//! The opcode contract table.

use std::fmt;

use super::formula::build::*;
use super::formula::{CmpOp, Formula, NumKind, StackRef, Term, TyCtor, TyShape};
use crate::model::{crypto, Ty, Value, MUTEZ_MAX};
use crate::syntax::{Cond, Node};
use crate::typecheck::arith_signatures;

/// Hoare-style contract of one leaf instruction over the input stack `s`,
/// the fuel and the `result` stack.
///
/// When `fails_if` holds on the input the instruction fails and `ensures`
/// does not apply; otherwise it succeeds and every `ensures` clause holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpcodeContract {
    /// Instruction as written, with operands (`ADD`, `DIG 2`, `PUSH nat 1`).
    pub opcode: String,
    /// Number of input slots replaced by the produced ones.
    pub consumes: usize,
    pub produces: usize,
    pub requires: Vec<Formula>,
    pub ensures: Vec<Formula>,
    pub fails_if: Formula,
}

impl OpcodeContract {
    pub fn may_fail(&self) -> bool {
        self.fails_if != Formula::False
    }

    /// Result length for an input of length `len_s`, when the instruction
    /// does not fail.
    pub fn result_len(&self, len_s: usize) -> usize {
        len_s + self.produces - self.consumes
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no contract for {0}: only leaf instructions have contracts")]
pub struct Unsupported(pub String);

fn opcode_text(node: &Node) -> String {
    let name = node.name();
    match node {
        Node::Dup(n) | Node::Drop(n) => format!("{name} {n}"),
        Node::Dig(n) | Node::Dug(n) => format!("{name} {n}"),
        Node::Push(t, v) => format!("{name} {} {}", ty_atom(t), v.to_atom()),
        Node::Nil(t) | Node::None(t) | Node::Left(t) | Node::Right(t) | Node::Unpack(t) => {
            format!("{name} {}", ty_atom(t))
        }
        _ => name.to_string(),
    }
}

fn ty_atom(t: &Ty) -> String {
    if t.args().is_empty() {
        t.to_string()
    } else {
        format!("({t})")
    }
}

struct Builder {
    c: OpcodeContract,
    result_types: Vec<Formula>,
    result_values: Vec<Formula>,
}

impl Builder {
    /// `min_len` input slots must exist; the top `consumes` are replaced by
    /// `produces` new ones and the rest is framed.
    fn new(node: &Node, min_len: usize, consumes: usize, produces: usize) -> Builder {
        let mut requires = vec![cmp(CmpOp::Gt, name("fuel"), int(0))];
        requires.push(cmp(CmpOp::Ge, len_s(), int(min_len as i64)));
        Builder {
            c: OpcodeContract {
                opcode: opcode_text(node),
                consumes,
                produces,
                requires,
                ensures: Vec::new(),
                fails_if: Formula::False,
            },
            result_types: Vec::new(),
            result_values: Vec::new(),
        }
    }

    fn requires(mut self, f: Formula) -> Self {
        self.c.requires.push(f);
        self
    }

    fn ty(mut self, f: Formula) -> Self {
        self.result_types.push(f);
        self
    }

    fn val(mut self, f: Formula) -> Self {
        self.result_values.push(f);
        self
    }

    /// `result[i]` equals `t` and has its type.
    fn slot(self, i: usize, t: Term, ty: Term) -> Self {
        self.ty(eq(ty_of(r(i)), ty)).val(eq(r(i), t))
    }

    fn fails_if(mut self, f: Formula) -> Self {
        self.c.fails_if = f;
        self
    }

    fn finish(self) -> OpcodeContract {
        let Builder {
            mut c,
            result_types,
            result_values,
        } = self;
        let delta = c.produces as i64 - c.consumes as i64;
        let len = match delta {
            0 => len_s(),
            d if d < 0 => sub(len_s(), int(-d)),
            d => add(len_s(), int(d)),
        };
        c.ensures.push(eq(len_r(), len));
        c.ensures.extend(result_types);
        let m = c.produces as i64;
        let shift = c.consumes as i64 - m;
        let src = || match shift {
            0 => var("i"),
            k if k > 0 => add(var("i"), int(k)),
            k => sub(var("i"), int(-k)),
        };
        c.ensures.push(forall("i", int(m), len_r(), eq(r_at(var("i")), s_at(src()))));
        c.ensures.push(forall(
            "i",
            int(m),
            len_r(),
            eq(ty_of(r_at(var("i"))), ty_of(s_at(src()))),
        ));
        c.ensures.extend(result_values);
        c
    }
}

fn ts(i: usize) -> Term {
    ty_of(s(i))
}

fn is(i: usize, t: Ty) -> Formula {
    has_ty(s(i), t)
}

fn both(a: Ty, b: Ty) -> Formula {
    and(vec![is(0, a), is(1, b)])
}

fn arith_term(node: &Node, a: Term, b: Term) -> Term {
    match node {
        Node::Add => add(a, b),
        Node::Sub => sub(a, b),
        _ => mul(a, b),
    }
}

fn mutez_out_of_range(t: Term) -> Formula {
    or(vec![
        cmp(CmpOp::Lt, t.clone(), int(0)),
        cmp(CmpOp::Gt, t, Term::Int(MUTEZ_MAX.into())),
    ])
}

fn arith(node: &Node) -> OpcodeContract {
    let sigs = arith_signatures(node);
    let guard = |a: &Ty, b: &Ty| both(a.clone(), b.clone());
    let mut b = Builder::new(node, 2, 2, 1)
        .requires(Formula::Cases(sigs.iter().map(|(a, c, _)| (guard(a, c), Formula::True)).collect()))
        .ty(Formula::Cases(
            sigs.iter().map(|(a, c, res)| (guard(a, c), has_ty(r(0), res.clone()))).collect(),
        ));
    if let Node::Ediv = node {
        let value = sigs
            .iter()
            .map(|(a, c, res)| {
                let Ty::Option(p) = res else { unreachable!() };
                let Ty::Pair(qt, rt) = &**p else { unreachable!() };
                let (qk, rk) = (NumKind::of_ty(qt).unwrap(), NumKind::of_ty(rt).unwrap());
                let (x, y) = (num(s(0)), num(s(1)));
                let t = ite(
                    eq(y.clone(), int(0)),
                    Term::MkNone((**p).clone()),
                    Term::MkSome(Box::new(Term::MkPair(
                        Box::new(mk(qk, div(x.clone(), y.clone()))),
                        Box::new(mk(rk, rem(x, y))),
                    ))),
                );
                (guard(a, c), eq(r(0), t))
            })
            .collect();
        return b.val(Formula::Cases(value)).finish();
    }
    let value = sigs
        .iter()
        .map(|(a, c, res)| {
            let k = NumKind::of_ty(res).unwrap();
            (guard(a, c), eq(r(0), mk(k, arith_term(node, num(s(0)), num(s(1))))))
        })
        .collect();
    let overflow: Vec<_> = sigs
        .iter()
        .filter(|(_, _, res)| *res == Ty::Mutez)
        .map(|(a, c, _)| (guard(a, c), mutez_out_of_range(arith_term(node, num(s(0)), num(s(1))))))
        .collect();
    b = b.val(Formula::Cases(value));
    if !overflow.is_empty() {
        b = b.fails_if(Formula::Cases(overflow));
    }
    b.finish()
}

/// Contract of a leaf instruction. `UNPAIR` also has one, so that emitted
/// code can keep it as a single application.
pub fn contract_of(node: &Node) -> Result<OpcodeContract, Unsupported> {
    let unsupported = || Unsupported(node.name().to_string());
    if !node.is_leaf() && !matches!(node, Node::Unpair) {
        return Err(unsupported());
    }
    let bool_ty = || ty_lit(Ty::Bool);
    Ok(match node {
        Node::Car | Node::Cdr => {
            let k = usize::from(matches!(node, Node::Cdr));
            let proj = if k == 0 { Term::Car(Box::new(s(0))) } else { Term::Cdr(Box::new(s(0))) };
            Builder::new(node, 1, 1, 1)
                .requires(Formula::TyIs(ts(0), TyShape::Pair))
                .slot(0, proj, ty_arg(ts(0), k))
                .finish()
        }
        Node::Unpair => Builder::new(node, 1, 1, 2)
            .requires(Formula::TyIs(ts(0), TyShape::Pair))
            .slot(0, Term::Car(Box::new(s(0))), ty_arg(ts(0), 0))
            .slot(1, Term::Cdr(Box::new(s(0))), ty_arg(ts(0), 1))
            .finish(),
        Node::Pair => Builder::new(node, 2, 2, 1)
            .slot(0, Term::MkPair(Box::new(s(0)), Box::new(s(1))), Term::TyApp(TyCtor::Pair, vec![ts(0), ts(1)]))
            .finish(),
        Node::Dup(n) => Builder::new(node, *n, 0, 1).slot(0, s(n - 1), ts(n - 1)).finish(),
        Node::Swap => Builder::new(node, 2, 2, 2)
            .slot(0, s(1), ts(1))
            .slot(1, s(0), ts(0))
            .finish(),
        Node::Dig(n) => {
            let n = *n;
            Builder::new(node, n + 1, n + 1, n + 1)
                .slot(0, s(n), ts(n))
                .ty(forall("j", int(1), int(n as i64 + 1), eq(ty_of(r_at(var("j"))), ty_of(s_at(sub(var("j"), int(1)))))))
                .val(forall("j", int(1), int(n as i64 + 1), eq(r_at(var("j")), s_at(sub(var("j"), int(1))))))
                .finish()
        }
        Node::Dug(n) => {
            let n = *n;
            Builder::new(node, n + 1, n + 1, n + 1)
                .slot(n, s(0), ts(0))
                .ty(forall("j", int(0), int(n as i64), eq(ty_of(r_at(var("j"))), ty_of(s_at(add(var("j"), int(1)))))))
                .val(forall("j", int(0), int(n as i64), eq(r_at(var("j")), s_at(add(var("j"), int(1))))))
                .finish()
        }
        Node::Drop(n) => Builder::new(node, *n, *n, 0).finish(),
        Node::Push(t, v) => Builder::new(node, 0, 0, 1)
            .slot(0, Term::Lit(v.clone()), ty_lit(t.clone()))
            .finish(),
        Node::Unit => Builder::new(node, 0, 0, 1)
            .slot(0, Term::Lit(Value::Unit), ty_lit(Ty::Unit))
            .finish(),
        Node::Nil(t) => Builder::new(node, 0, 0, 1)
            .slot(0, Term::MkNil(t.clone()), ty_lit(Ty::list(t.clone())))
            .finish(),
        Node::Cons => Builder::new(node, 2, 2, 1)
            .requires(eq(ts(1), Term::TyApp(TyCtor::List, vec![ts(0)])))
            .slot(0, Term::MkCons(Box::new(s(0)), Box::new(s(1))), ts(1))
            .finish(),
        Node::Left(t) => Builder::new(node, 1, 1, 1)
            .slot(0, Term::MkLeft(Box::new(s(0)), t.clone()), Term::TyApp(TyCtor::Or, vec![ts(0), ty_lit(t.clone())]))
            .finish(),
        Node::Right(t) => Builder::new(node, 1, 1, 1)
            .slot(0, Term::MkRight(Box::new(s(0)), t.clone()), Term::TyApp(TyCtor::Or, vec![ty_lit(t.clone()), ts(0)]))
            .finish(),
        Node::Some => Builder::new(node, 1, 1, 1)
            .slot(0, Term::MkSome(Box::new(s(0))), Term::TyApp(TyCtor::Option, vec![ts(0)]))
            .finish(),
        Node::None(t) => Builder::new(node, 0, 0, 1)
            .slot(0, Term::MkNone(t.clone()), ty_lit(Ty::option(t.clone())))
            .finish(),
        Node::Compare => Builder::new(node, 2, 2, 1)
            .requires(and(vec![eq(ts(0), ts(1)), Formula::TyIs(ts(0), TyShape::Comparable)]))
            .slot(0, mk(NumKind::Int, Term::CompareV(Box::new(s(0)), Box::new(s(1)))), ty_lit(Ty::Int))
            .finish(),
        Node::Test(c) => {
            let op = match c {
                Cond::Eq => CmpOp::Eq,
                Cond::Neq => CmpOp::Ne,
                Cond::Lt => CmpOp::Lt,
                Cond::Le => CmpOp::Le,
                Cond::Gt => CmpOp::Gt,
                Cond::Ge => CmpOp::Ge,
            };
            Builder::new(node, 1, 1, 1)
                .requires(is(0, Ty::Int))
                .slot(0, Term::MkBool(Box::new(cmp(op, num(s(0)), int(0)))), bool_ty())
                .finish()
        }
        Node::Add | Node::Sub | Node::Mul | Node::Ediv => arith(node),
        Node::Neg => Builder::new(node, 1, 1, 1)
            .requires(or(vec![is(0, Ty::Int), is(0, Ty::Nat)]))
            .slot(0, mk(NumKind::Int, Term::Neg(Box::new(num(s(0))))), ty_lit(Ty::Int))
            .finish(),
        Node::Abs => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::Int))
            .slot(
                0,
                mk(
                    NumKind::Nat,
                    ite(cmp(CmpOp::Lt, num(s(0)), int(0)), Term::Neg(Box::new(num(s(0)))), num(s(0))),
                ),
                ty_lit(Ty::Nat),
            )
            .finish(),
        Node::IsNat => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::Int))
            .slot(
                0,
                ite(
                    cmp(CmpOp::Ge, num(s(0)), int(0)),
                    Term::MkSome(Box::new(mk(NumKind::Nat, num(s(0))))),
                    Term::MkNone(Ty::Nat),
                ),
                ty_lit(Ty::option(Ty::Nat)),
            )
            .finish(),
        Node::Int => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::Nat))
            .slot(0, mk(NumKind::Int, num(s(0))), ty_lit(Ty::Int))
            .finish(),
        Node::And | Node::Or | Node::Xor => {
            let (a, b) = (Formula::IsTrue(s(0)), Formula::IsTrue(s(1)));
            let f = match node {
                Node::And => and(vec![a, b]),
                Node::Or => or(vec![a, b]),
                _ => not(Formula::Iff(Box::new(a), Box::new(b))),
            };
            Builder::new(node, 2, 2, 1)
                .requires(both(Ty::Bool, Ty::Bool))
                .slot(0, Term::MkBool(Box::new(f)), bool_ty())
                .finish()
        }
        Node::Not => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::Bool))
            .slot(0, Term::MkBool(Box::new(not(Formula::IsTrue(s(0))))), bool_ty())
            .finish(),
        Node::Mem => {
            let keyed = |shape| and(vec![Formula::TyIs(ts(1), shape), eq(ty_arg(ts(1), 0), ts(0))]);
            Builder::new(node, 2, 2, 1)
                .requires(or(vec![keyed(TyShape::Set), keyed(TyShape::Map), keyed(TyShape::BigMap)]))
                .slot(0, Term::MkBool(Box::new(Formula::Mem(s(0), s(1)))), bool_ty())
                .finish()
        }
        Node::Get => {
            let keyed = |shape| and(vec![Formula::TyIs(ts(1), shape), eq(ty_arg(ts(1), 0), ts(0))]);
            Builder::new(node, 2, 2, 1)
                .requires(or(vec![keyed(TyShape::Map), keyed(TyShape::BigMap)]))
                .slot(
                    0,
                    Term::MapGet(Box::new(s(0)), Box::new(s(1))),
                    Term::TyApp(TyCtor::Option, vec![ty_arg(ts(1), 1)]),
                )
                .finish()
        }
        Node::Update => {
            let keyed = |shape, val: Formula| {
                and(vec![Formula::TyIs(ts(2), shape), eq(ty_arg(ts(2), 0), ts(0)), val])
            };
            let opt_val = || eq(ts(1), Term::TyApp(TyCtor::Option, vec![ty_arg(ts(2), 1)]));
            Builder::new(node, 3, 3, 1)
                .requires(or(vec![
                    keyed(TyShape::Set, is(1, Ty::Bool)),
                    keyed(TyShape::Map, opt_val()),
                    keyed(TyShape::BigMap, opt_val()),
                ]))
                .slot(0, Term::Update(Box::new(s(0)), Box::new(s(1)), Box::new(s(2))), ts(2))
                .finish()
        }
        Node::Size => Builder::new(node, 1, 1, 1)
            .requires(or(vec![
                is(0, Ty::String),
                is(0, Ty::Bytes),
                Formula::TyIs(ts(0), TyShape::List),
                Formula::TyIs(ts(0), TyShape::Set),
                Formula::TyIs(ts(0), TyShape::Map),
            ]))
            .slot(0, mk(NumKind::Nat, Term::Size(Box::new(s(0)))), ty_lit(Ty::Nat))
            .finish(),
        Node::Concat => Builder::new(node, 2, 2, 1)
            .requires(or(vec![both(Ty::String, Ty::String), both(Ty::Bytes, Ty::Bytes)]))
            .slot(0, Term::Concat(Box::new(s(0)), Box::new(s(1))), ts(0))
            .finish(),
        Node::Failwith => {
            let mut c = Builder::new(node, 1, 1, 0).fails_if(Formula::True).c;
            c.produces = 0;
            c
        }
        Node::Sha256 | Node::Sha512 | Node::Blake2b => {
            let tag = crypto::HASH_TAGS[match node {
                Node::Sha256 => 0,
                Node::Sha512 => 1,
                _ => 2,
            }];
            Builder::new(node, 1, 1, 1)
                .requires(is(0, Ty::Bytes))
                .slot(0, Term::Digest(tag.into(), vec![s(0)], Ty::Bytes), ty_lit(Ty::Bytes))
                .finish()
        }
        Node::HashKey => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::Key))
            .slot(0, Term::Digest("hash_key".into(), vec![s(0)], Ty::KeyHash), ty_lit(Ty::KeyHash))
            .finish(),
        Node::CheckSignature => Builder::new(node, 3, 3, 1)
            .requires(and(vec![is(0, Ty::Key), is(1, Ty::Signature), is(2, Ty::Bytes)]))
            .slot(0, Term::MkBool(Box::new(Formula::CheckSig(s(0), s(1), s(2)))), bool_ty())
            .finish(),
        Node::Pack => Builder::new(node, 1, 1, 1)
            .requires(Formula::TyIs(ts(0), TyShape::Packable))
            .slot(0, Term::Pack(Box::new(s(0))), ty_lit(Ty::Bytes))
            .finish(),
        Node::Unpack(t) => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::Bytes))
            .slot(0, Term::Unpack(Box::new(s(0)), t.clone()), ty_lit(Ty::option(t.clone())))
            .finish(),
        Node::Amount | Node::Balance | Node::Now | Node::Sender | Node::Source | Node::ChainId => {
            let (n, t) = env_name(node).unwrap();
            Builder::new(node, 0, 0, 1).slot(0, name(n), ty_lit(t)).finish()
        }
        Node::SelfContract => Builder::new(node, 0, 0, 1)
            .requires(Formula::TyIs(ty_of(name("self")), TyShape::Contract))
            .slot(0, name("self"), ty_of(name("self")))
            .finish(),
        Node::TransferTokens => Builder::new(node, 3, 3, 1)
            .requires(and(vec![
                is(1, Ty::Mutez),
                eq(ts(2), Term::TyApp(TyCtor::Contract, vec![ts(0)])),
            ]))
            .slot(
                0,
                Term::Transfer(Box::new(s(0)), Box::new(s(1)), Box::new(s(2))),
                ty_lit(Ty::Operation),
            )
            .finish(),
        Node::SetDelegate => Builder::new(node, 1, 1, 1)
            .requires(is(0, Ty::option(Ty::KeyHash)))
            .slot(0, Term::SetDelegate(Box::new(s(0))), ty_lit(Ty::Operation))
            .finish(),
        _ => return Err(unsupported()),
    })
}

/// Environment name and type read by a context instruction.
pub fn env_name(node: &Node) -> Option<(&'static str, Ty)> {
    Some(match node {
        Node::Amount => ("amount", Ty::Mutez),
        Node::Balance => ("balance", Ty::Mutez),
        Node::Now => ("now", Ty::Timestamp),
        Node::Sender => ("sender", Ty::Address),
        Node::Source => ("source", Ty::Address),
        Node::ChainId => ("chain_id", Ty::ChainId),
        _ => return None,
    })
}

/// Result-slot indices in `0..result_len` that no ensures clause mentions,
/// for an input stack of length `len_s`.
pub fn frame_audit(c: &OpcodeContract, len_s: usize) -> Vec<usize> {
    let len_r = c.result_len(len_s);
    let mut covered = vec![false; len_r];
    fn fold(t: &Term, len_s: usize, len_r: usize) -> Option<i64> {
        match t {
            Term::Int(n) => i64::try_from(n).ok(),
            Term::Len(StackRef::S) => Some(len_s as i64),
            Term::Len(StackRef::Result) => Some(len_r as i64),
            Term::Arith(op, a, b) => {
                let (a, b) = (fold(a, len_s, len_r)?, fold(b, len_s, len_r)?);
                match op {
                    super::formula::ArithOp::Add => Some(a + b),
                    super::formula::ArithOp::Sub => Some(a - b),
                    super::formula::ArithOp::Mul => Some(a * b),
                    _ => None,
                }
            }
            _ => None,
        }
    }
    fn visit(f: &Formula, len_s: usize, len_r: usize, covered: &mut [bool]) {
        if let Formula::Forall { var, lo, hi, body } = f {
            if let (Some(lo), Some(hi)) = (fold(lo, len_s, len_r), fold(hi, len_s, len_r)) {
                for i in lo.max(0)..hi {
                    visit(&body.subst_var(var, &int(i)), len_s, len_r, covered);
                }
            }
            return;
        }
        for t in f.terms() {
            if let Term::Slot(StackRef::Result, i) = t {
                if let Some(i) = fold(i, len_s, len_r) {
                    if let Some(c) = usize::try_from(i).ok().and_then(|i| covered.get_mut(i)) {
                        *c = true;
                    }
                }
            }
        }
        let (_, fs) = f.parts();
        for g in fs {
            if matches!(g, Formula::Forall { .. }) {
                visit(g, len_s, len_r, covered);
            }
        }
    }
    for f in &c.ensures {
        visit(f, len_s, len_r, &mut covered);
    }
    covered.iter().enumerate().filter(|(_, c)| !**c).map(|(i, _)| i).collect()
}

impl fmt::Display for OpcodeContract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.opcode)?;
        writeln!(
            f,
            "  consumes {}, produces {}, may fail: {}",
            self.consumes,
            self.produces,
            if self.may_fail() { "yes" } else { "no" }
        )?;
        for r in &self.requires {
            writeln!(f, "  requires {{ {r} }}")?;
        }
        for e in &self.ensures {
            writeln!(f, "  ensures {{ {e} }}")?;
        }
        if self.may_fail() {
            writeln!(f, "  fails if {{ {} }}", self.fails_if)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_instrs;

    fn node(src: &str) -> Node {
        parse_instrs(src).unwrap().node
    }

    #[test]
    fn add_has_length_and_frame_clauses() {
        let c = contract_of(&Node::Add).unwrap();
        assert!(c.ensures.contains(&eq(len_r(), sub(len_s(), int(1)))));
        assert!(c.ensures.contains(&forall("i", int(1), len_r(), eq(r_at(var("i")), s_at(add(var("i"), int(1)))))));
        assert!(c.requires.contains(&cmp(CmpOp::Gt, name("fuel"), int(0))));
        assert!(c.may_fail());
    }

    #[test]
    fn sha512_keeps_length_and_frames_from_one() {
        let c = contract_of(&Node::Sha512).unwrap();
        assert!(c.ensures.contains(&eq(len_r(), len_s())));
        assert!(c.ensures.contains(&forall("i", int(1), len_r(), eq(r_at(var("i")), s_at(var("i"))))));
        assert!(!c.may_fail());
    }

    #[test]
    fn swap_pins_both_slots() {
        let c = contract_of(&Node::Swap).unwrap();
        assert!(c.ensures.contains(&eq(r(0), s(1))));
        assert!(c.ensures.contains(&eq(r(1), s(0))));
    }

    #[test]
    fn control_flow_has_no_contract() {
        assert!(contract_of(&node("IF {} {}")).is_err());
        assert!(contract_of(&node("DIP { DROP }")).is_err());
        assert!(contract_of(&Node::Nop).is_err());
    }

    #[test]
    fn every_result_slot_is_constrained() {
        let samples = [
            "ADD", "SWAP", "DUP 3", "DIG 3", "DUG 2", "DROP 2", "PUSH nat 1", "UNPAIR", "PAIR", "SHA512",
            "CHECK_SIGNATURE", "CAR", "NIL operation", "EDIV", "UPDATE", "SELF",
        ];
        for src in samples {
            let n = if src == "UNPAIR" { Node::Unpair } else { node(src) };
            let c = contract_of(&n).unwrap();
            for len in 4..7 {
                assert!(frame_audit(&c, len).is_empty(), "{src} at length {len}: {:?}", frame_audit(&c, len));
            }
        }
    }

    #[test]
    fn display_mentions_clauses() {
        let text = contract_of(&Node::Add).unwrap().to_string();
        assert!(text.starts_with("ADD\n"));
        assert!(text.contains("ensures { len(result) = (len(s) - 1) }"), "{text}");
    }
}
