//! Random types, values, stacks and well-typed programs for testing.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::contracts::formula::packable;
use crate::model::{crypto, Comparable, Operation, Ty, Value, MUTEZ_MAX};
use crate::stack::{Stack, StackTy};
use crate::syntax::{Cond, Contract, Instr, Node};
use crate::typecheck::{arith_signatures, type_leaf};

pub const CONDS: [Cond; 6] = [Cond::Eq, Cond::Neq, Cond::Lt, Cond::Le, Cond::Gt, Cond::Ge];

pub fn comparable<R: Rng>(rng: &mut R) -> Comparable {
    *Comparable::ALL.choose(rng).unwrap()
}

/// A random type. `depth` bounds nesting. Operations, contracts and big
/// maps are excluded so every generated type has a literal form.
pub fn ty<R: Rng>(rng: &mut R, depth: usize) -> Ty {
    let atoms = [
        Ty::Int,
        Ty::Nat,
        Ty::String,
        Ty::Bytes,
        Ty::Mutez,
        Ty::Bool,
        Ty::KeyHash,
        Ty::Timestamp,
        Ty::Address,
        Ty::Key,
        Ty::Signature,
        Ty::ChainId,
        Ty::Unit,
    ];
    if depth == 0 || rng.gen_bool(0.6) {
        return atoms.choose(rng).unwrap().clone();
    }
    match rng.gen_range(0..6) {
        0 => Ty::option(ty(rng, depth - 1)),
        1 => Ty::list(ty(rng, depth - 1)),
        2 => Ty::pair(ty(rng, depth - 1), ty(rng, depth - 1)),
        3 => Ty::or(ty(rng, depth - 1), ty(rng, depth - 1)),
        4 => Ty::Set(comparable(rng)),
        _ => Ty::map(comparable(rng), ty(rng, depth - 1)),
    }
}

fn small_int<R: Rng>(rng: &mut R) -> BigInt {
    match rng.gen_range(0..10) {
        0 => BigInt::from(rng.gen::<i64>()) * BigInt::from(rng.gen::<i64>()),
        1..=3 => BigInt::from(rng.gen_range(-3..=3)),
        _ => BigInt::from(rng.gen_range(-1000..=1000)),
    }
}

fn word<R: Rng>(rng: &mut R, prefix: &str) -> String {
    let n = rng.gen_range(0..4);
    let tail: String = (0..n).map(|_| *b"abcxyz".choose(rng).unwrap() as char).collect();
    format!("{prefix}{tail}")
}

fn mutez<R: Rng>(rng: &mut R) -> i64 {
    match rng.gen_range(0..8) {
        0 => MUTEZ_MAX - rng.gen_range(0..3),
        1 => rng.gen_range(0..=MUTEZ_MAX),
        _ => rng.gen_range(0..1000),
    }
}

/// A random well-formed value of type `t`.
pub fn value<R: Rng>(rng: &mut R, t: &Ty) -> Value {
    value_sized(rng, t, 3, false)
}

/// A random value with a literal form (no abstract hash outputs), fit for
/// `PUSH`.
pub fn literal<R: Rng>(rng: &mut R, t: &Ty) -> Value {
    value_sized(rng, t, 3, true)
}

fn value_sized<R: Rng>(rng: &mut R, t: &Ty, budget: usize, concrete: bool) -> Value {
    let n = |rng: &mut R| if budget == 0 { 0 } else { rng.gen_range(0..=budget) };
    match t {
        Ty::Int => Value::Int(small_int(rng)),
        Ty::Nat => Value::Nat(small_int(rng).magnitude().clone().into()),
        Ty::String => Value::String(word(rng, "")),
        Ty::Bytes => {
            if !concrete && rng.gen_bool(0.1) {
                crypto::hash(crypto::HASH_TAGS.choose(rng).unwrap(), &Value::Bytes(vec![rng.gen()]))
            } else {
                let k = rng.gen_range(0..4);
                Value::Bytes((0..k).map(|_| rng.gen()).collect())
            }
        }
        Ty::Mutez => Value::Mutez(mutez(rng)),
        Ty::Bool => Value::Bool(rng.gen()),
        Ty::KeyHash => Value::KeyHash(word(rng, "tz1")),
        Ty::Timestamp => Value::Timestamp(small_int(rng)),
        Ty::Address => Value::Address(word(rng, "KT1")),
        Ty::Key => Value::Key(word(rng, "edpk")),
        Ty::Signature => Value::Signature(word(rng, "edsig")),
        Ty::ChainId => Value::ChainId(word(rng, "Net")),
        Ty::Unit => Value::Unit,
        Ty::Operation => Value::Operation(Box::new(Operation::SetDelegate(Value::None(Ty::KeyHash)))),
        Ty::Contract(p) => Value::Contract(word(rng, "KT1"), (**p).clone()),
        Ty::Option(a) => {
            if rng.gen_bool(0.3) {
                Value::None((**a).clone())
            } else {
                Value::some(value_sized(rng, a, budget.saturating_sub(1), concrete))
            }
        }
        Ty::Pair(a, b) => Value::pair(
            value_sized(rng, a, budget.saturating_sub(1), concrete),
            value_sized(rng, b, budget.saturating_sub(1), concrete),
        ),
        Ty::Or(a, b) => {
            if rng.gen() {
                Value::Left(Box::new(value_sized(rng, a, budget.saturating_sub(1), concrete)), (**b).clone())
            } else {
                Value::Right(Box::new(value_sized(rng, b, budget.saturating_sub(1), concrete)), (**a).clone())
            }
        }
        Ty::List(a) => {
            let k = n(rng);
            Value::List((0..k).map(|_| value_sized(rng, a, budget - 1, concrete)).collect(), (**a).clone())
        }
        Ty::Set(c) => {
            let k = n(rng);
            let xs = (0..k).map(|_| value_sized(rng, &c.ty(), 0, concrete)).collect();
            Value::set(xs, *c).expect("typed elements")
        }
        Ty::Map(c, v) | Ty::BigMap(c, v) => {
            let k = n(rng);
            let mut es: Vec<(Value, Value)> = Vec::new();
            for _ in 0..k {
                let key = value_sized(rng, &c.ty(), 0, concrete);
                if es.iter().all(|(x, _)| *x != key) {
                    es.push((key, value_sized(rng, v, budget - 1, concrete)));
                }
            }
            match Value::map(es, *c, (**v).clone()).expect("typed entries") {
                Value::Map(es, c, v) if matches!(t, Ty::BigMap(..)) => Value::BigMap(es, c, v),
                m => m,
            }
        }
    }
}

pub fn stack_of<R: Rng>(rng: &mut R, tys: &[Ty]) -> Stack {
    Stack::from_top(tys.iter().map(|t| value(rng, t)).collect())
}

/// A random stack of `len` slots of random types.
pub fn stack<R: Rng>(rng: &mut R, len: usize) -> Stack {
    let tys: Vec<Ty> = (0..len).map(|_| ty(rng, 2)).collect();
    stack_of(rng, &tys)
}

fn collection<R: Rng>(rng: &mut R, c: Comparable, kinds: &[u8]) -> Ty {
    match kinds.choose(rng).unwrap() {
        0 => Ty::Set(c),
        1 => Ty::map(c, ty(rng, 1)),
        _ => Ty::big_map(c, ty(rng, 1)),
    }
}

fn member_key<R: Rng>(rng: &mut R, coll: &Value, c: Comparable) -> Value {
    let keys: Vec<&Value> = match coll {
        Value::Set(xs, _) => xs.iter().collect(),
        Value::Map(es, ..) | Value::BigMap(es, ..) => es.iter().map(|(k, _)| k).collect(),
        _ => Vec::new(),
    };
    match keys.choose(rng) {
        Some(k) if rng.gen_bool(0.5) => (*k).clone(),
        _ => value(rng, &c.ty()),
    }
}

/// Operand slots (top first) for `node`, chosen so that the instruction's
/// static requirement holds.
pub fn operands_for<R: Rng>(node: &Node, rng: &mut R) -> Vec<Value> {
    let v = |rng: &mut R, t: &Ty| value(rng, t);
    let any = |rng: &mut R| {
        let t = ty(rng, 2);
        value(rng, &t)
    };
    match node {
        Node::Car | Node::Cdr | Node::Unpair => {
            let t = Ty::pair(ty(rng, 1), ty(rng, 1));
            vec![v(rng, &t)]
        }
        Node::Pair | Node::Swap => vec![any(rng), any(rng)],
        Node::Dup(n) | Node::Drop(n) => (0..*n).map(|_| any(rng)).collect(),
        Node::Dig(n) | Node::Dug(n) => (0..=*n).map(|_| any(rng)).collect(),
        Node::Cons => {
            let t = ty(rng, 1);
            vec![v(rng, &t), v(rng, &Ty::list(t))]
        }
        Node::Left(_) | Node::Right(_) | Node::Some | Node::Failwith => vec![any(rng)],
        Node::Compare => {
            let t = comparable(rng).ty();
            let a = v(rng, &t);
            let b = if rng.gen_bool(0.3) { a.clone() } else { v(rng, &t) };
            vec![a, b]
        }
        Node::Test(_) | Node::Abs | Node::IsNat => vec![v(rng, &Ty::Int)],
        Node::Add | Node::Sub | Node::Mul | Node::Ediv => {
            let sigs = arith_signatures(node);
            let (a, b, _) = sigs.choose(rng).unwrap();
            let mut out = vec![v(rng, a), v(rng, b)];
            if rng.gen_bool(0.1) {
                out[1] = match &out[1] {
                    Value::Mutez(_) => Value::Mutez(0),
                    Value::Nat(_) => Value::Nat(0.into()),
                    Value::Int(_) => Value::Int(0.into()),
                    x => x.clone(),
                };
            }
            out
        }
        Node::Neg => {
            let t = if rng.gen() { Ty::Int } else { Ty::Nat };
            vec![v(rng, &t)]
        }
        Node::Int => vec![v(rng, &Ty::Nat)],
        Node::And | Node::Or | Node::Xor => vec![v(rng, &Ty::Bool), v(rng, &Ty::Bool)],
        Node::Not => vec![v(rng, &Ty::Bool)],
        Node::Mem | Node::Get => {
            let c = comparable(rng);
            let kinds: &[u8] = if matches!(node, Node::Mem) { &[0, 1, 2] } else { &[1, 2] };
            let ct = collection(rng, c, kinds);
            let coll = v(rng, &ct);
            vec![member_key(rng, &coll, c), coll]
        }
        Node::Update => {
            let c = comparable(rng);
            let ct = collection(rng, c, &[0, 1, 2]);
            let coll = v(rng, &ct);
            let x = match &ct {
                Ty::Set(_) => v(rng, &Ty::Bool),
                Ty::Map(_, vt) | Ty::BigMap(_, vt) => v(rng, &Ty::option((**vt).clone())),
                _ => unreachable!(),
            };
            vec![member_key(rng, &coll, c), x, coll]
        }
        Node::Size => {
            let t = match rng.gen_range(0..5) {
                0 => Ty::String,
                1 => Ty::Bytes,
                2 => Ty::list(ty(rng, 1)),
                3 => Ty::Set(comparable(rng)),
                _ => Ty::map(comparable(rng), ty(rng, 1)),
            };
            vec![v(rng, &t)]
        }
        Node::Concat => {
            let t = if rng.gen() { Ty::String } else { Ty::Bytes };
            vec![v(rng, &t), v(rng, &t)]
        }
        Node::Sha256 | Node::Sha512 | Node::Blake2b => vec![v(rng, &Ty::Bytes)],
        Node::HashKey => vec![v(rng, &Ty::Key)],
        Node::CheckSignature => {
            let k = v(rng, &Ty::Key);
            let p = v(rng, &Ty::Bytes);
            let sig = if rng.gen() { crypto::sign(&k, &p) } else { v(rng, &Ty::Signature) };
            vec![k, sig, p]
        }
        Node::Pack => {
            let mut t = ty(rng, 2);
            while !packable(&t) {
                t = ty(rng, 2);
            }
            vec![v(rng, &t)]
        }
        Node::Unpack(t) => {
            let b = if rng.gen() {
                crypto::pack(&v(rng, t))
            } else if rng.gen() {
                let other = ty(rng, 1);
                crypto::pack(&v(rng, &other))
            } else {
                v(rng, &Ty::Bytes)
            };
            vec![b]
        }
        Node::TransferTokens => {
            let t = ty(rng, 1);
            vec![v(rng, &t), v(rng, &Ty::Mutez), v(rng, &Ty::contract(t))]
        }
        Node::SetDelegate => vec![v(rng, &Ty::option(Ty::KeyHash))],
        _ => Vec::new(),
    }
}

/// A stack satisfying the static requirement of `node`: its operands on
/// top of up to three random slots.
pub fn stack_for<R: Rng>(node: &Node, rng: &mut R) -> Stack {
    let mut slots = operands_for(node, rng);
    let extra = rng.gen_range(0..=3);
    for _ in 0..extra {
        let t = ty(rng, 1);
        slots.push(value(rng, &t));
    }
    Stack::from_top(slots)
}

/// One representative of every leaf instruction, with a few operand
/// variants for the parametrized ones.
pub fn leaf_samples() -> Vec<Node> {
    let mut out = vec![
        Node::Car,
        Node::Cdr,
        Node::Unpair,
        Node::Pair,
        Node::Swap,
        Node::Unit,
        Node::Cons,
        Node::Some,
        Node::Compare,
        Node::Add,
        Node::Sub,
        Node::Mul,
        Node::Ediv,
        Node::Neg,
        Node::Abs,
        Node::IsNat,
        Node::Int,
        Node::And,
        Node::Or,
        Node::Not,
        Node::Xor,
        Node::Mem,
        Node::Get,
        Node::Update,
        Node::Size,
        Node::Concat,
        Node::Failwith,
        Node::Sha256,
        Node::Sha512,
        Node::Blake2b,
        Node::HashKey,
        Node::CheckSignature,
        Node::Pack,
        Node::Amount,
        Node::Balance,
        Node::Now,
        Node::Sender,
        Node::Source,
        Node::SelfContract,
        Node::ChainId,
        Node::TransferTokens,
        Node::SetDelegate,
        Node::Push(Ty::Nat, Value::Nat(7.into())),
        Node::Push(Ty::pair(Ty::String, Ty::Bool), Value::pair(Value::String("a".into()), Value::Bool(true))),
        Node::Nil(Ty::Operation),
        Node::Nil(Ty::Int),
        Node::None(Ty::Nat),
        Node::Left(Ty::Nat),
        Node::Right(Ty::Unit),
        Node::Unpack(Ty::Nat),
        Node::Unpack(Ty::pair(Ty::Int, Ty::String)),
    ];
    for n in 1..=3 {
        out.push(Node::Dup(n));
    }
    for n in 0..=3 {
        out.push(Node::Dig(n));
        out.push(Node::Dug(n));
        out.push(Node::Drop(n));
    }
    out.extend(CONDS.iter().map(|c| Node::Test(*c)));
    out
}

fn pushable_ty<R: Rng>(rng: &mut R) -> Ty {
    loop {
        let t = ty(rng, 2);
        if t.is_pushable() {
            return t;
        }
    }
}

fn leaf_candidates<R: Rng>(rng: &mut R, s: &[Ty]) -> Vec<Node> {
    let t = pushable_ty(rng);
    let v = literal(rng, &t);
    let mut c = vec![
        Node::Push(t, v),
        Node::Unit,
        Node::Nil(ty(rng, 1)),
        Node::None(ty(rng, 1)),
        Node::Amount,
        Node::Balance,
        Node::Now,
        Node::Sender,
        Node::ChainId,
        Node::Car,
        Node::Cdr,
        Node::Unpair,
        Node::Pair,
        Node::Swap,
        Node::Cons,
        Node::Some,
        Node::Left(ty(rng, 1)),
        Node::Right(ty(rng, 1)),
        Node::Compare,
        Node::CmpMacro(*CONDS.choose(rng).unwrap()),
        Node::Test(*CONDS.choose(rng).unwrap()),
        Node::Add,
        Node::Sub,
        Node::Mul,
        Node::Ediv,
        Node::Neg,
        Node::Abs,
        Node::IsNat,
        Node::Int,
        Node::And,
        Node::Or,
        Node::Xor,
        Node::Not,
        Node::Mem,
        Node::Get,
        Node::Update,
        Node::Size,
        Node::Concat,
        Node::Sha256,
        Node::Sha512,
        Node::Blake2b,
        Node::HashKey,
        Node::CheckSignature,
        Node::Pack,
        Node::Unpack(ty(rng, 1)),
        Node::SetDelegate,
    ];
    if !s.is_empty() {
        c.push(Node::Drop(1));
        c.push(Node::Dup(rng.gen_range(1..=s.len())));
        c.push(Node::Dig(rng.gen_range(0..s.len())));
        c.push(Node::Dug(rng.gen_range(0..s.len())));
    }
    c.retain(|n| {
        let n = match n {
            Node::Unpair => &Node::Car,
            Node::CmpMacro(_) => &Node::Compare,
            n => n,
        };
        matches!(type_leaf(n, s, &Ty::Unit), Ok(Some(_)))
    });
    c
}

fn apply(node: &Node, s: &[Ty]) -> Vec<Ty> {
    match node {
        Node::Unpair => match &s[0] {
            Ty::Pair(a, b) => [vec![(**a).clone(), (**b).clone()], s[1..].to_vec()].concat(),
            _ => unreachable!(),
        },
        Node::CmpMacro(_) => [vec![Ty::Bool], s[2..].to_vec()].concat(),
        _ => type_leaf(node, s, &Ty::Unit).unwrap().unwrap(),
    }
}

struct ProgramGen<'r, R: Rng> {
    rng: &'r mut R,
}

impl<R: Rng> ProgramGen<'_, R> {
    /// Instructions that push `k` slots and drop them again.
    fn neutral(&mut self, s: &[Ty]) -> Vec<Instr> {
        let k = self.rng.gen_range(0..3);
        let mut out = Vec::new();
        let mut cur = s.to_vec();
        for _ in 0..k {
            let t = pushable_ty(self.rng);
            let v = literal(self.rng, &t);
            let n = Node::Push(t, v);
            cur = apply(&n, &cur);
            out.push(n.into());
        }
        if k > 0 {
            out.push(Node::Drop(k).into());
        }
        out
    }

    fn prog(&mut self, s: &mut Vec<Ty>, size: usize, depth: usize) -> Vec<Instr> {
        let mut out = Vec::new();
        for _ in 0..size {
            if s.len() > 6 {
                out.push(Node::Drop(1).into());
                s.remove(0);
                continue;
            }
            if depth > 0 && !s.is_empty() && self.rng.gen_bool(0.2) {
                if let Some(i) = self.structured(s, depth) {
                    out.push(i);
                    continue;
                }
            }
            let cands = leaf_candidates(self.rng, s);
            let n = cands.choose(self.rng).unwrap().clone();
            *s = apply(&n, s);
            out.push(n.into());
        }
        out
    }

    fn fail_arm(&mut self) -> Instr {
        let t = pushable_ty(self.rng);
        let v = literal(self.rng, &t);
        Instr::block(vec![Node::Push(t, v).into(), Node::Failwith.into()])
    }

    fn structured(&mut self, s: &mut Vec<Ty>, depth: usize) -> Option<Instr> {
        let rest = s[1..].to_vec();
        let drop_then_neutral = |g: &mut Self, n: usize, below: &[Ty]| {
            let mut v: Vec<Instr> = vec![Node::Drop(n).into()];
            v.extend(g.neutral(below));
            Instr::block(v)
        };
        let node = match &s[0] {
            Ty::Bool if self.rng.gen() => {
                let a = Instr::block(self.neutral(&rest));
                let b = if self.rng.gen_bool(0.2) { self.fail_arm() } else { Instr::block(self.neutral(&rest)) };
                Node::If(Box::new(a), Box::new(b))
            }
            Ty::Bool => {
                let mut body = self.neutral(&rest);
                body.push(Node::Push(Ty::Bool, Value::Bool(false)).into());
                Node::Loop(Box::new(Instr::block(body)))
            }
            Ty::Option(_) => {
                let a = Instr::block(self.neutral(&rest));
                let b = drop_then_neutral(self, 1, &rest);
                Node::IfNone(Box::new(a), Box::new(b))
            }
            Ty::Or(_, r) if r.is_pushable() && self.rng.gen() => {
                let l = match &s[0] {
                    Ty::Or(l, _) => (**l).clone(),
                    _ => unreachable!(),
                };
                let rv = literal(self.rng, r);
                let mut body = vec![Instr::from(Node::Drop(1))];
                body.extend(self.neutral(&rest));
                body.push(Node::Push((**r).clone(), rv).into());
                body.push(Node::Right(l).into());
                let out = Node::LoopLeft(Box::new(Instr::block(body)));
                *s = [vec![(**r).clone()], rest].concat();
                return Some(out.into());
            }
            Ty::Or(..) => {
                let a = drop_then_neutral(self, 1, &rest);
                let b = drop_then_neutral(self, 1, &rest);
                Node::IfLeft(Box::new(a), Box::new(b))
            }
            Ty::List(_) if self.rng.gen() => {
                let a = drop_then_neutral(self, 2, &rest);
                let b = Instr::block(self.neutral(&rest));
                Node::IfCons(Box::new(a), Box::new(b))
            }
            Ty::List(_) | Ty::Set(_) | Ty::Map(..) => Node::Iter(Box::new(drop_then_neutral(self, 1, &rest))),
            _ => {
                let n = self.rng.gen_range(1..=s.len());
                let mut below = s[n..].to_vec();
                let size = self.rng.gen_range(1..4);
                let body = self.prog(&mut below, size, depth - 1);
                let out = Node::Dip(n, Box::new(Instr::block(body)));
                *s = [s[..n].to_vec(), below].concat();
                return Some(out.into());
            }
        };
        *s = rest;
        Some(node.into())
    }
}

/// A random well-typed instruction sequence on `input`, with its output
/// stack type. Macros (`UNPAIR`, `CMPEQ`, ...) may occur.
pub fn program<R: Rng>(rng: &mut R, input: &StackTy, size: usize) -> (Instr, StackTy) {
    let mut s = input.clone();
    let items = ProgramGen { rng }.prog(&mut s, size, 2);
    (Instr::block(items), s)
}

/// A random well-typed contract: a random body followed by code that
/// rebuilds a storage value and returns it with no operations.
pub fn contract<R: Rng>(rng: &mut R, size: usize) -> Contract {
    let parameter = ty(rng, 2);
    let storage = pushable_ty(rng);
    let (body, out) = program(rng, &vec![Ty::pair(parameter.clone(), storage.clone())], size);
    let st = literal(rng, &storage);
    let mut items = body.seq_items().into_iter().cloned().collect::<Vec<_>>();
    if !out.is_empty() {
        items.push(Node::Drop(out.len()).into());
    }
    items.push(Node::Push(storage.clone(), st).into());
    items.push(Node::Nil(Ty::Operation).into());
    items.push(Node::Pair.into());
    Contract {
        parameter,
        storage,
        code: Instr::block(items),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecheck::typecheck;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn values_have_their_type() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..500 {
            let t = ty(&mut rng, 3);
            let v = value(&mut rng, &t);
            assert_eq!(v.typ_infer(), t);
            assert!(v.well_formed(), "{v}");
        }
    }

    #[test]
    fn operands_meet_the_static_requirement() {
        let mut rng = StdRng::seed_from_u64(2);
        for node in leaf_samples() {
            for _ in 0..50 {
                let s = stack_for(&node, &mut rng);
                let n = if node == Node::Unpair { Node::Car } else { node.clone() };
                assert!(type_leaf(&n, &s.ty_of(), &Ty::Unit).is_ok(), "{} on {s}", node.name());
            }
        }
    }

    #[test]
    fn generated_contracts_typecheck() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let c = contract(&mut rng, 8);
            typecheck(&c).unwrap_or_else(|e| panic!("{e}\n{}", crate::syntax::pretty_print(&c)));
        }
    }
}
