//! Forward stack-type inference.
//!
//! Every program point of a well-typed contract has a fixed stack type; the
//! [`TypedProgram`] records the stack type before and after each node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::contracts::formula::packable;
use crate::model::Ty;
use crate::stack::{fmt_stack_ty, StackTy};
use crate::syntax::{expand_contract, Contract, Instr, Node, Path};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointTypes {
    pub before: StackTy,
    /// `None` when the node always fails.
    pub after: Option<StackTy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedProgram {
    /// The macro-expanded contract the paths refer to.
    pub contract: Contract,
    pub entry: StackTy,
    pub at: BTreeMap<Path, PointTypes>,
    pub failing: BTreeSet<Path>,
}

impl TypedProgram {
    pub fn code(&self) -> &Instr {
        &self.contract.code
    }

    pub fn before(&self, p: &Path) -> Option<&StackTy> {
        self.at.get(p).map(|t| &t.before)
    }

    pub fn after(&self, p: &Path) -> Option<&StackTy> {
        self.at.get(p).and_then(|t| t.after.as_ref())
    }
}

/// The four stack conditions derivable from the declared types, plus fuel
/// positivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetySpec {
    pub input_len: usize,
    pub input_ty: Ty,
    pub fuel_positive: bool,
    pub output_len: usize,
    pub output_ty: Ty,
}

impl SafetySpec {
    pub fn for_types(parameter: &Ty, storage: &Ty) -> SafetySpec {
        SafetySpec {
            input_len: 1,
            input_ty: Ty::pair(parameter.clone(), storage.clone()),
            fuel_positive: true,
            output_len: 1,
            output_ty: Ty::contract_result(storage.clone()),
        }
    }
}

impl fmt::Display for SafetySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "requires: len(stack) = {}", self.input_len)?;
        if self.fuel_positive {
            writeln!(f, "requires: fuel > 0")?;
        }
        writeln!(f, "requires: typeof(stack[0]) = {}", self.input_ty)?;
        writeln!(f, "ensures: len(result) = {}", self.output_len)?;
        writeln!(f, "ensures: typeof(result[0]) = {}", self.output_ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("at {path}: {instr} expects {expected}, found {}", fmt_stack_ty(found))]
    Mismatch {
        path: Path,
        instr: &'static str,
        expected: String,
        found: StackTy,
    },
    #[error("at {path}: {instr} needs {needed} stack slots, found {}", fmt_stack_ty(found))]
    Arity {
        path: Path,
        instr: &'static str,
        needed: usize,
        found: StackTy,
    },
    #[error("at {path}: branches of {instr} end with different stacks {} and {}", fmt_stack_ty(left), fmt_stack_ty(right))]
    Join {
        path: Path,
        instr: &'static str,
        left: StackTy,
        right: StackTy,
    },
    #[error("at {path}: body of {instr} must produce {}, produces {}", fmt_stack_ty(expected), fmt_stack_ty(found))]
    LoopShape {
        path: Path,
        instr: &'static str,
        expected: StackTy,
        found: StackTy,
    },
    #[error("at {path}: instructions after an always-failing instruction")]
    FailNotInTail { path: Path },
    #[error("contract must end with {}, ends with {}", fmt_stack_ty(expected), fmt_stack_ty(found))]
    WrongResult { expected: StackTy, found: StackTy },
}

impl TypeError {
    pub fn path(&self) -> Option<&Path> {
        match self {
            TypeError::Mismatch { path, .. }
            | TypeError::Arity { path, .. }
            | TypeError::Join { path, .. }
            | TypeError::LoopShape { path, .. }
            | TypeError::FailNotInTail { path } => Some(path),
            TypeError::WrongResult { .. } => None,
        }
    }
}

/// Why a single leaf does not accept a stack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeafError {
    Arity(usize),
    Expected(String),
}

/// Result signatures `(top, second, result)` of the arithmetic opcodes.
pub fn arith_signatures(node: &Node) -> Vec<(Ty, Ty, Ty)> {
    use Ty::*;
    let pair = |a: Ty, b: Ty| Ty::option(Ty::pair(a, b));
    match node {
        Node::Add => vec![
            (Int, Int, Int),
            (Int, Nat, Int),
            (Nat, Int, Int),
            (Nat, Nat, Nat),
            (Mutez, Mutez, Mutez),
            (Timestamp, Int, Timestamp),
            (Int, Timestamp, Timestamp),
        ],
        Node::Sub => vec![
            (Int, Int, Int),
            (Int, Nat, Int),
            (Nat, Int, Int),
            (Nat, Nat, Int),
            (Mutez, Mutez, Mutez),
            (Timestamp, Int, Timestamp),
            (Timestamp, Timestamp, Int),
        ],
        Node::Mul => vec![
            (Int, Int, Int),
            (Int, Nat, Int),
            (Nat, Int, Int),
            (Nat, Nat, Nat),
            (Mutez, Nat, Mutez),
            (Nat, Mutez, Mutez),
        ],
        Node::Ediv => vec![
            (Int, Int, pair(Int, Nat)),
            (Int, Nat, pair(Int, Nat)),
            (Nat, Int, pair(Int, Nat)),
            (Nat, Nat, pair(Nat, Nat)),
            (Mutez, Nat, pair(Mutez, Mutez)),
            (Mutez, Mutez, pair(Nat, Mutez)),
        ],
        _ => Vec::new(),
    }
}

/// Element type seen by an `ITER` body over a collection type.
pub fn iter_element(t: &Ty) -> Option<Ty> {
    match t {
        Ty::List(e) => Some((**e).clone()),
        Ty::Set(c) => Some(c.ty()),
        Ty::Map(k, v) => Some(Ty::pair(k.ty(), (**v).clone())),
        _ => None,
    }
}

/// Stack typing of one leaf instruction. `Ok(None)` means the instruction
/// always fails. `self_param` is the contract's parameter type, used by
/// `SELF`.
pub fn type_leaf(node: &Node, s: &[Ty], self_param: &Ty) -> Result<Option<StackTy>, LeafError> {
    let need = |n: usize| if s.len() < n { Err(LeafError::Arity(n)) } else { Ok(()) };
    let exp = |m: &str| LeafError::Expected(m.to_owned());
    let replace = |n: usize, with: Vec<Ty>| -> Option<StackTy> {
        let mut out = with;
        out.extend_from_slice(&s[n..]);
        Some(out)
    };
    Ok(match node {
        Node::Car | Node::Cdr => {
            need(1)?;
            match &s[0] {
                Ty::Pair(a, b) => replace(1, vec![if matches!(node, Node::Car) { (**a).clone() } else { (**b).clone() }]),
                _ => return Err(exp("a pair on top")),
            }
        }
        Node::Pair => {
            need(2)?;
            replace(2, vec![Ty::pair(s[0].clone(), s[1].clone())])
        }
        Node::Dup(n) => {
            if *n == 0 {
                return Err(exp("a positive count"));
            }
            need(*n)?;
            replace(0, vec![s[n - 1].clone()])
        }
        Node::Swap => {
            need(2)?;
            replace(2, vec![s[1].clone(), s[0].clone()])
        }
        Node::Dig(n) => {
            need(n + 1)?;
            let mut out = s.to_vec();
            let t = out.remove(*n);
            out.insert(0, t);
            Some(out)
        }
        Node::Dug(n) => {
            need(n + 1)?;
            let mut out = s.to_vec();
            let t = out.remove(0);
            out.insert(*n, t);
            Some(out)
        }
        Node::Drop(n) => {
            need(*n)?;
            replace(*n, vec![])
        }
        Node::Push(t, _) => replace(0, vec![t.clone()]),
        Node::Unit => replace(0, vec![Ty::Unit]),
        Node::Nil(t) => replace(0, vec![Ty::list(t.clone())]),
        Node::Cons => {
            need(2)?;
            if s[1] != Ty::list(s[0].clone()) {
                return Err(exp("an element and a list of that element type"));
            }
            replace(2, vec![s[1].clone()])
        }
        Node::Left(r) => {
            need(1)?;
            replace(1, vec![Ty::or(s[0].clone(), r.clone())])
        }
        Node::Right(l) => {
            need(1)?;
            replace(1, vec![Ty::or(l.clone(), s[0].clone())])
        }
        Node::Some => {
            need(1)?;
            replace(1, vec![Ty::option(s[0].clone())])
        }
        Node::None(t) => replace(0, vec![Ty::option(t.clone())]),
        Node::Compare => {
            need(2)?;
            if s[0] != s[1] || !s[0].is_comparable() {
                return Err(exp("two values of the same comparable type"));
            }
            replace(2, vec![Ty::Int])
        }
        Node::Test(_) => {
            need(1)?;
            if s[0] != Ty::Int {
                return Err(exp("an int on top"));
            }
            replace(1, vec![Ty::Bool])
        }
        Node::Add | Node::Sub | Node::Mul | Node::Ediv => {
            need(2)?;
            let sigs = arith_signatures(node);
            match sigs.iter().find(|(a, b, _)| *a == s[0] && *b == s[1]) {
                Some((_, _, r)) => replace(2, vec![r.clone()]),
                None => {
                    let allowed: Vec<_> = sigs.iter().map(|(a, b, _)| format!("{a}/{b}")).collect();
                    return Err(LeafError::Expected(format!("operands {}", allowed.join(", "))));
                }
            }
        }
        Node::Neg => {
            need(1)?;
            if !matches!(s[0], Ty::Int | Ty::Nat) {
                return Err(exp("an int or nat on top"));
            }
            replace(1, vec![Ty::Int])
        }
        Node::Abs | Node::IsNat => {
            need(1)?;
            if s[0] != Ty::Int {
                return Err(exp("an int on top"));
            }
            let r = if matches!(node, Node::Abs) { Ty::Nat } else { Ty::option(Ty::Nat) };
            replace(1, vec![r])
        }
        Node::Int => {
            need(1)?;
            if s[0] != Ty::Nat {
                return Err(exp("a nat on top"));
            }
            replace(1, vec![Ty::Int])
        }
        Node::And | Node::Or | Node::Xor => {
            need(2)?;
            if s[0] != Ty::Bool || s[1] != Ty::Bool {
                return Err(exp("two bools"));
            }
            replace(2, vec![Ty::Bool])
        }
        Node::Not => {
            need(1)?;
            if s[0] != Ty::Bool {
                return Err(exp("a bool on top"));
            }
            replace(1, vec![Ty::Bool])
        }
        Node::Mem => {
            need(2)?;
            let ok = match (&s[0].comparable(), &s[1]) {
                (Some(k), Ty::Set(c)) => k == c,
                (Some(k), Ty::Map(c, _) | Ty::BigMap(c, _)) => k == c,
                _ => false,
            };
            if !ok {
                return Err(exp("a key and a set or map with that key type"));
            }
            replace(2, vec![Ty::Bool])
        }
        Node::Get => {
            need(2)?;
            match (&s[0].comparable(), &s[1]) {
                (Some(k), Ty::Map(c, v) | Ty::BigMap(c, v)) if k == c => replace(2, vec![Ty::option((**v).clone())]),
                _ => return Err(exp("a key and a map with that key type")),
            }
        }
        Node::Update => {
            need(3)?;
            let ok = match (&s[0].comparable(), &s[1], &s[2]) {
                (Some(k), Ty::Bool, Ty::Set(c)) => k == c,
                (Some(k), Ty::Option(v), Ty::Map(c, w) | Ty::BigMap(c, w)) => k == c && v == w,
                _ => false,
            };
            if !ok {
                return Err(exp("key, bool, set or key, option value, map"));
            }
            replace(3, vec![s[2].clone()])
        }
        Node::Size => {
            need(1)?;
            if !matches!(s[0], Ty::String | Ty::Bytes | Ty::List(_) | Ty::Set(_) | Ty::Map(..)) {
                return Err(exp("a string, bytes, list, set or map"));
            }
            replace(1, vec![Ty::Nat])
        }
        Node::Concat => {
            need(2)?;
            if s[0] != s[1] || !matches!(s[0], Ty::String | Ty::Bytes) {
                return Err(exp("two strings or two bytes"));
            }
            replace(2, vec![s[0].clone()])
        }
        Node::Failwith => {
            need(1)?;
            None
        }
        Node::Sha256 | Node::Sha512 | Node::Blake2b => {
            need(1)?;
            if s[0] != Ty::Bytes {
                return Err(exp("bytes on top"));
            }
            replace(1, vec![Ty::Bytes])
        }
        Node::HashKey => {
            need(1)?;
            if s[0] != Ty::Key {
                return Err(exp("a key on top"));
            }
            replace(1, vec![Ty::KeyHash])
        }
        Node::CheckSignature => {
            need(3)?;
            if s[0] != Ty::Key || s[1] != Ty::Signature || s[2] != Ty::Bytes {
                return Err(exp("key, signature, bytes"));
            }
            replace(3, vec![Ty::Bool])
        }
        Node::Pack => {
            need(1)?;
            if !packable(&s[0]) {
                return Err(exp("a packable value"));
            }
            replace(1, vec![Ty::Bytes])
        }
        Node::Unpack(t) => {
            need(1)?;
            if s[0] != Ty::Bytes {
                return Err(exp("bytes on top"));
            }
            replace(1, vec![Ty::option(t.clone())])
        }
        Node::Amount | Node::Balance => replace(0, vec![Ty::Mutez]),
        Node::Now => replace(0, vec![Ty::Timestamp]),
        Node::Sender | Node::Source => replace(0, vec![Ty::Address]),
        Node::SelfContract => replace(0, vec![Ty::contract(self_param.clone())]),
        Node::ChainId => replace(0, vec![Ty::ChainId]),
        Node::TransferTokens => {
            need(3)?;
            if s[1] != Ty::Mutez || s[2] != Ty::contract(s[0].clone()) {
                return Err(exp("parameter, mutez, contract of that parameter"));
            }
            replace(3, vec![Ty::Operation])
        }
        Node::SetDelegate => {
            need(1)?;
            if s[0] != Ty::option(Ty::KeyHash) {
                return Err(exp("an option key_hash on top"));
            }
            replace(1, vec![Ty::Operation])
        }
        other => return Err(LeafError::Expected(format!("a leaf instruction, got {}", other.name()))),
    })
}

struct Checker<'a> {
    self_param: &'a Ty,
    at: BTreeMap<Path, PointTypes>,
}

impl Checker<'_> {
    fn check(&mut self, i: &Instr, path: &Path, before: &StackTy) -> Result<Option<StackTy>, TypeError> {
        let instr = i.node.name();
        let arity = |needed: usize| TypeError::Arity {
            path: path.clone(),
            instr,
            needed,
            found: before.clone(),
        };
        let mismatch = |expected: &str| TypeError::Mismatch {
            path: path.clone(),
            instr,
            expected: expected.to_owned(),
            found: before.clone(),
        };
        let after = match &i.node {
            Node::Seq(a, b) => match self.check(a, &path.child(0), before)? {
                None => return Err(TypeError::FailNotInTail { path: path.child(1) }),
                Some(mid) => self.check(b, &path.child(1), &mid)?,
            },
            Node::Nop => Some(before.clone()),
            Node::Dip(n, body) => {
                if before.len() < *n {
                    return Err(arity(*n));
                }
                self.check(body, &path.child(0), &before[*n..].to_vec())?.map(|out| {
                    let mut r = before[..*n].to_vec();
                    r.extend(out);
                    r
                })
            }
            Node::If(a, b) | Node::IfLeft(a, b) | Node::IfNone(a, b) | Node::IfCons(a, b) => {
                let Some(top) = before.first() else {
                    return Err(arity(1));
                };
                let rest = &before[1..];
                let with = |t: Vec<Ty>| {
                    let mut v = t;
                    v.extend_from_slice(rest);
                    v
                };
                let (sa, sb) = match (&i.node, top) {
                    (Node::If(..), Ty::Bool) => (rest.to_vec(), rest.to_vec()),
                    (Node::IfLeft(..), Ty::Or(l, r)) => (with(vec![(**l).clone()]), with(vec![(**r).clone()])),
                    (Node::IfNone(..), Ty::Option(t)) => (rest.to_vec(), with(vec![(**t).clone()])),
                    (Node::IfCons(..), Ty::List(t)) => (with(vec![(**t).clone(), top.clone()]), rest.to_vec()),
                    (Node::If(..), _) => return Err(mismatch("a bool on top")),
                    (Node::IfLeft(..), _) => return Err(mismatch("an or on top")),
                    (Node::IfNone(..), _) => return Err(mismatch("an option on top")),
                    _ => return Err(mismatch("a list on top")),
                };
                let ra = self.check(a, &path.child(0), &sa)?;
                let rb = self.check(b, &path.child(1), &sb)?;
                match (ra, rb) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(TypeError::Join {
                            path: path.clone(),
                            instr,
                            left: x,
                            right: y,
                        })
                    }
                    (Some(x), _) => Some(x),
                    (None, y) => y,
                }
            }
            Node::Loop(body) | Node::LoopLeft(body) => {
                let Some(top) = before.first() else {
                    return Err(arity(1));
                };
                let rest = before[1..].to_vec();
                let (body_in, exit) = match (&i.node, top) {
                    (Node::Loop(_), Ty::Bool) => (rest.clone(), rest),
                    (Node::LoopLeft(_), Ty::Or(l, r)) => {
                        let mut a = vec![(**l).clone()];
                        a.extend_from_slice(&rest);
                        let mut b = vec![(**r).clone()];
                        b.extend(rest);
                        (a, b)
                    }
                    (Node::Loop(_), _) => return Err(mismatch("a bool on top")),
                    _ => return Err(mismatch("an or on top")),
                };
                if let Some(out) = self.check(body, &path.child(0), &body_in)? {
                    if &out != before {
                        return Err(TypeError::LoopShape {
                            path: path.clone(),
                            instr,
                            expected: before.clone(),
                            found: out,
                        });
                    }
                }
                Some(exit)
            }
            Node::Iter(body) => {
                let Some(top) = before.first() else {
                    return Err(arity(1));
                };
                let Some(elem) = iter_element(top) else {
                    return Err(mismatch("a list, set or map on top"));
                };
                let rest = before[1..].to_vec();
                let mut body_in = vec![elem];
                body_in.extend_from_slice(&rest);
                if let Some(out) = self.check(body, &path.child(0), &body_in)? {
                    if out != rest {
                        return Err(TypeError::LoopShape {
                            path: path.clone(),
                            instr,
                            expected: rest,
                            found: out,
                        });
                    }
                }
                Some(rest)
            }
            node => match type_leaf(node, before, self.self_param) {
                Ok(r) => r,
                Err(LeafError::Arity(n)) => return Err(arity(n)),
                Err(LeafError::Expected(m)) => return Err(mismatch(&m)),
            },
        };
        self.at.insert(
            path.clone(),
            PointTypes {
                before: before.clone(),
                after: after.clone(),
            },
        );
        Ok(after)
    }
}

/// Typechecks a contract (expanding macros first). The code must map
/// `[pair parameter storage]` to `[pair (list operation) storage]`.
pub fn typecheck(c: &Contract) -> Result<TypedProgram, TypeError> {
    let contract = expand_contract(c);
    let entry = vec![Ty::pair(contract.parameter.clone(), contract.storage.clone())];
    let mut checker = Checker {
        self_param: &contract.parameter,
        at: BTreeMap::new(),
    };
    let out = checker.check(&contract.code, &Path::root(), &entry)?;
    let expected = vec![Ty::contract_result(contract.storage.clone())];
    if let Some(found) = out {
        if found != expected {
            return Err(TypeError::WrongResult { expected, found });
        }
    }
    let failing = checker
        .at
        .iter()
        .filter(|(_, t)| t.after.is_none())
        .map(|(p, _)| p.clone())
        .collect();
    Ok(TypedProgram {
        at: checker.at,
        contract,
        entry,
        failing,
    })
}

/// Typechecks a code fragment against an arbitrary input stack.
pub fn typecheck_fragment(code: &Instr, input: &StackTy, self_param: &Ty) -> Result<BTreeMap<Path, PointTypes>, TypeError> {
    let mut checker = Checker { self_param, at: BTreeMap::new() };
    checker.check(code, &Path::root(), input)?;
    Ok(checker.at)
}

pub fn derive_safety_spec(tp: &TypedProgram) -> SafetySpec {
    SafetySpec::for_types(&tp.contract.parameter, &tp.contract.storage)
}

/// A sequence boundary and the full stack type there. `after` is `None`
/// for the contract entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub after: Option<Path>,
    pub stack: StackTy,
}

/// Stack types at the entry and after the first child of every sequence,
/// in program order.
pub fn annotate_types(tp: &TypedProgram) -> Vec<Boundary> {
    fn go(tp: &TypedProgram, i: &Instr, p: &Path, out: &mut Vec<Boundary>) {
        match &i.node {
            Node::Seq(a, b) => {
                let pa = p.child(0);
                go(tp, a, &pa, out);
                if let Some(s) = tp.after(&pa) {
                    out.push(Boundary {
                        after: Some(pa),
                        stack: s.clone(),
                    });
                }
                go(tp, b, &p.child(1), out);
            }
            _ => {
                for (ix, c) in i.children().into_iter().enumerate() {
                    go(tp, c, &p.child(ix), out);
                }
            }
        }
    }
    let mut out = vec![Boundary {
        after: None,
        stack: tp.entry.clone(),
    }];
    go(tp, tp.code(), &Path::root(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_instrs, parse_source};

    const TOY: &str = "parameter nat; storage nat; code { UNPAIR; ADD; NIL operation; PAIR };";

    #[test]
    fn toy_contract_types() {
        let tp = typecheck(&parse_source(TOY).unwrap()).unwrap();
        let add = Path(vec![1, 0]);
        assert_eq!(tp.code().at(&add).unwrap().node, Node::Add);
        assert_eq!(tp.before(&add).unwrap(), &vec![Ty::Nat, Ty::Nat]);
        assert_eq!(tp.after(&add).unwrap(), &vec![Ty::Nat]);
        assert_eq!(
            tp.after(&Path::root()).unwrap(),
            &vec![Ty::pair(Ty::list(Ty::Operation), Ty::Nat)]
        );
        let b = annotate_types(&tp);
        assert_eq!(b[0].after, None);
        let after_unpair = b.iter().find(|b| b.after == Some(Path(vec![0]))).unwrap();
        assert_eq!(after_unpair.stack, vec![Ty::Nat, Ty::Nat]);
    }

    #[test]
    fn add_rejects_string() {
        let err = typecheck_fragment(&parse_instrs("ADD").unwrap(), &vec![Ty::String, Ty::Int], &Ty::Unit).unwrap_err();
        match err {
            TypeError::Mismatch { instr, expected, .. } => {
                assert_eq!(instr, "ADD");
                assert!(expected.contains("int/int"), "{expected}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_contract_and_spec() {
        let c = parse_source("parameter unit; storage unit; code { CDR; NIL operation; PAIR }").unwrap();
        let tp = typecheck(&c).unwrap();
        let spec = derive_safety_spec(&tp);
        assert_eq!(spec.input_ty, Ty::pair(Ty::Unit, Ty::Unit));
        assert_eq!(spec.output_ty, Ty::pair(Ty::list(Ty::Operation), Ty::Unit));
    }

    #[test]
    fn empty_code_has_only_entry_boundary() {
        let c = parse_source("parameter unit; storage unit; code {}").unwrap();
        let err = typecheck(&c).unwrap_err();
        assert!(matches!(err, TypeError::WrongResult { .. }));
        let at = typecheck_fragment(&Instr::block(vec![]), &vec![Ty::Unit], &Ty::Unit).unwrap();
        assert_eq!(at.len(), 1);
    }

    #[test]
    fn branch_join_and_failure() {
        let code = parse_instrs("IF { PUSH nat 1 } { PUSH int 1 }").unwrap();
        assert!(matches!(
            typecheck_fragment(&code, &vec![Ty::Bool], &Ty::Unit),
            Err(TypeError::Join { .. })
        ));
        let code = parse_instrs("IF { PUSH nat 1 } { UNIT; FAILWITH }").unwrap();
        let at = typecheck_fragment(&code, &vec![Ty::Bool], &Ty::Unit).unwrap();
        assert_eq!(at[&Path::root()].after, Some(vec![Ty::Nat]));
        let code = parse_instrs("UNIT; FAILWITH; DROP").unwrap();
        assert!(matches!(
            typecheck_fragment(&code, &vec![], &Ty::Unit),
            Err(TypeError::FailNotInTail { .. })
        ));
    }

    #[test]
    fn loop_must_preserve_shape() {
        let code = parse_instrs("LOOP { PUSH bool False }").unwrap();
        assert!(typecheck_fragment(&code, &vec![Ty::Bool, Ty::Nat], &Ty::Unit).is_ok());
        let code = parse_instrs("LOOP { DROP; PUSH bool False }").unwrap();
        assert!(matches!(
            typecheck_fragment(&code, &vec![Ty::Bool, Ty::Nat], &Ty::Unit),
            Err(TypeError::LoopShape { .. })
        ));
    }

    #[test]
    fn arity_error() {
        let code = parse_instrs("SWAP").unwrap();
        assert!(matches!(
            typecheck_fragment(&code, &vec![Ty::Nat], &Ty::Unit),
            Err(TypeError::Arity { needed: 2, .. })
        ));
    }
}
