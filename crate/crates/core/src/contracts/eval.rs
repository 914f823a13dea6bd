//! Concrete evaluation of formulas against stacks.

use std::cell::Cell;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::formula::{ArithOp, CmpOp, Formula, NumKind, Term};
use super::logic::LogicTable;
use crate::model::{compare, crypto, Operation, Ty, Value};
use crate::stack::Stack;

const MAX_DEPTH: usize = 10_000;
const MAX_RANGE: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Int(BigInt),
    V(Value),
    T(Ty),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound name {0}")]
    Unbound(String),
    #[error("sort error: {term} is not {expected}")]
    Sort { term: String, expected: &'static str },
    #[error("unknown logic function {0}")]
    UnknownFunction(String),
    #[error("{0} called with the wrong number of arguments")]
    Arity(String),
    #[error("recursion limit reached in {0}")]
    Depth(String),
    #[error("quantifier range too large in {0}")]
    Range(String),
}

/// Bindings for evaluation: the input stack `s`, the `result` stack and
/// named values (`fuel`, `param`, `amount`, ...).
#[derive(Debug, Clone)]
pub struct Env<'a> {
    pub s: Option<&'a Stack>,
    pub result: Option<&'a Stack>,
    pub names: BTreeMap<String, Val>,
    pub logic: &'a LogicTable,
    vars: Vec<(String, BigInt)>,
    depth: Cell<usize>,
}

impl<'a> Env<'a> {
    pub fn new(logic: &'a LogicTable) -> Env<'a> {
        Env {
            s: None,
            result: None,
            names: BTreeMap::new(),
            logic,
            vars: Vec::new(),
            depth: Cell::new(0),
        }
    }

    pub fn with_stacks(mut self, s: Option<&'a Stack>, result: Option<&'a Stack>) -> Env<'a> {
        self.s = s;
        self.result = result;
        self
    }

    pub fn bind(&mut self, name: &str, v: Val) -> &mut Self {
        self.names.insert(name.into(), v);
        self
    }

    fn stack(&self, r: super::formula::StackRef) -> Result<&'a Stack, EvalError> {
        match r {
            super::formula::StackRef::S => self.s.ok_or_else(|| EvalError::Unbound("s".into())),
            super::formula::StackRef::Result => self.result.ok_or_else(|| EvalError::Unbound("result".into())),
        }
    }
}

/// Euclidean quotient and remainder: `a = q*b + r` with `0 <= r < |b|`.
pub fn ediv(a: &BigInt, b: &BigInt) -> Option<(BigInt, BigInt)> {
    if b.is_zero() {
        return None;
    }
    let mut r = a % b;
    if r.is_negative() {
        r += b.abs();
    }
    let q = (a - &r) / b;
    Some((q, r))
}

pub fn eval_formula(f: &Formula, env: &Env) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => {
            let (Some(x), Some(y)) = (eval_term(a, env)?, eval_term(b, env)?) else {
                return Ok(false);
            };
            match (op, x, y) {
                (_, Val::Int(x), Val::Int(y)) => op.holds(x.cmp(&y)),
                (CmpOp::Eq, Val::V(x), Val::V(y)) => x == y,
                (CmpOp::Ne, Val::V(x), Val::V(y)) => x != y,
                (CmpOp::Eq, Val::T(x), Val::T(y)) => x == y,
                (CmpOp::Ne, Val::T(x), Val::T(y)) => x != y,
                _ => {
                    return Err(EvalError::Sort {
                        term: f.to_string(),
                        expected: "a comparison between terms of one sort",
                    })
                }
            }
        }
        Formula::Not(x) => !eval_formula(x, env)?,
        Formula::And(xs) => {
            for x in xs {
                if !eval_formula(x, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(xs) => {
            for x in xs {
                if eval_formula(x, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(a, b) => !eval_formula(a, env)? || eval_formula(b, env)?,
        Formula::Iff(a, b) => eval_formula(a, env)? == eval_formula(b, env)?,
        Formula::Forall { var, lo, hi, body } => {
            let (Some(lo), Some(hi)) = (int_of(lo, env)?, int_of(hi, env)?) else {
                return Ok(false);
            };
            let (Some(lo_i), Some(hi_i)) = (lo.to_i64(), hi.to_i64()) else {
                return Err(EvalError::Range(f.to_string()));
            };
            if hi_i - lo_i > MAX_RANGE {
                return Err(EvalError::Range(f.to_string()));
            }
            let mut inner = env.clone();
            for i in lo_i..hi_i {
                inner.vars.push((var.clone(), i.into()));
                let ok = eval_formula(body, &inner)?;
                inner.vars.pop();
                if !ok {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Cases(cs) => {
            for (g, b) in cs {
                if eval_formula(g, env)? {
                    return eval_formula(b, env);
                }
            }
            false
        }
        Formula::IsTrue(t) => matches!(value_of(t, env)?, Some(Value::Bool(true))),
        Formula::IsSome(t) => matches!(value_of(t, env)?, Some(Value::Some(_))),
        Formula::IsLeft(t) => matches!(value_of(t, env)?, Some(Value::Left(..))),
        Formula::IsCons(t) => matches!(value_of(t, env)?, Some(Value::List(xs, _)) if !xs.is_empty()),
        Formula::Mem(k, c) => {
            let (Some(k), Some(c)) = (value_of(k, env)?, value_of(c, env)?) else {
                return Ok(false);
            };
            match c {
                Value::Set(xs, _) => xs.contains(&k),
                Value::Map(es, ..) | Value::BigMap(es, ..) => es.iter().any(|(x, _)| *x == k),
                _ => false,
            }
        }
        Formula::CheckSig(k, s, b) => match (value_of(k, env)?, value_of(s, env)?, value_of(b, env)?) {
            (Some(k), Some(s), Some(b)) => crypto::check_signature(&k, &s, &b),
            _ => false,
        },
        Formula::TyIs(t, shape) => match eval_term(t, env)? {
            Some(Val::T(t)) => shape.holds(&t),
            None => false,
            Some(_) => {
                return Err(EvalError::Sort {
                    term: t.to_string(),
                    expected: "a type",
                })
            }
        },
    })
}

fn int_of(t: &Term, env: &Env) -> Result<Option<BigInt>, EvalError> {
    match eval_term(t, env)? {
        Some(Val::Int(n)) => Ok(Some(n)),
        None => Ok(None),
        Some(_) => Err(EvalError::Sort {
            term: t.to_string(),
            expected: "an integer",
        }),
    }
}

fn value_of(t: &Term, env: &Env) -> Result<Option<Value>, EvalError> {
    match eval_term(t, env)? {
        Some(Val::V(v)) => Ok(Some(v)),
        None => Ok(None),
        Some(_) => Err(EvalError::Sort {
            term: t.to_string(),
            expected: "a value",
        }),
    }
}

fn ty_of(t: &Term, env: &Env) -> Result<Option<Ty>, EvalError> {
    match eval_term(t, env)? {
        Some(Val::T(v)) => Ok(Some(v)),
        None => Ok(None),
        Some(_) => Err(EvalError::Sort {
            term: t.to_string(),
            expected: "a type",
        }),
    }
}

fn mk_num(k: NumKind, n: BigInt) -> Option<Value> {
    match k {
        NumKind::Int => Some(Value::Int(n)),
        NumKind::Nat => Value::nat(n).ok(),
        NumKind::Mutez => Value::mutez(n).ok(),
        NumKind::Timestamp => Some(Value::Timestamp(n)),
    }
}

/// Evaluates a term; `Ok(None)` means the term is undefined (an out of
/// range slot, a projection of the wrong constructor, division by zero).
pub fn eval_term(t: &Term, env: &Env) -> Result<Option<Val>, EvalError> {
    macro_rules! val {
        ($e:expr) => {
            match value_of($e, env)? {
                Some(v) => v,
                None => return Ok(None),
            }
        };
    }
    macro_rules! int {
        ($e:expr) => {
            match int_of($e, env)? {
                Some(v) => v,
                None => return Ok(None),
            }
        };
    }
    let v = |x: Option<Value>| Ok(x.map(Val::V));
    match t {
        Term::Int(n) => Ok(Some(Val::Int(n.clone()))),
        Term::Var(name) => env
            .vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, x)| Some(Val::Int(x.clone())))
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        Term::Len(r) => Ok(Some(Val::Int(env.stack(*r)?.len().into()))),
        Term::Arith(op, a, b) => {
            let (x, y) = (int!(a), int!(b));
            Ok(match op {
                ArithOp::Add => Some(x + y),
                ArithOp::Sub => Some(x - y),
                ArithOp::Mul => Some(x * y),
                ArithOp::Div => ediv(&x, &y).map(|(q, _)| q),
                ArithOp::Mod => ediv(&x, &y).map(|(_, r)| r),
            }
            .map(Val::Int))
        }
        Term::Neg(a) => Ok(Some(Val::Int(-int!(a)))),
        Term::IntOf(a) => Ok(val!(a).as_integer().map(Val::Int)),
        Term::CompareV(a, b) => Ok(compare(&val!(a), &val!(b)).ok().map(|c| Val::Int(c.into()))),
        Term::Size(a) => Ok(crypto::size(&val!(a)).map(|n| Val::Int(n.into()))),
        Term::Call(name, args) => {
            let f = env.logic.get(name).ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
            if f.params.len() != args.len() {
                return Err(EvalError::Arity(name.clone()));
            }
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(int!(a));
            }
            if env.depth.get() >= MAX_DEPTH {
                return Err(EvalError::Depth(name.clone()));
            }
            let inner = Env {
                s: None,
                result: None,
                names: BTreeMap::new(),
                logic: env.logic,
                vars: f.params.iter().cloned().zip(vals).collect(),
                depth: Cell::new(env.depth.get() + 1),
            };
            inner.depth.set(env.depth.get() + 1);
            eval_term(&f.body, &inner)
        }
        Term::Ite(c, a, b) => {
            if eval_formula(c, env)? {
                eval_term(a, env)
            } else {
                eval_term(b, env)
            }
        }
        Term::Name(n) => env
            .names
            .get(n)
            .cloned()
            .map(Some)
            .ok_or_else(|| EvalError::Unbound(n.clone())),
        Term::Sym(n, _) => Err(EvalError::Unbound(n.clone())),
        Term::Slot(r, i) => {
            let st = env.stack(*r)?;
            let i = int!(i);
            Ok(i.to_usize().and_then(|i| st.at(i).ok()).map(|x| Val::V(x.clone())))
        }
        Term::Lit(x) => v(Some(x.clone())),
        Term::Mk(k, a) => v(mk_num(*k, int!(a))),
        Term::MkBool(c) => v(Some(Value::Bool(eval_formula(c, env)?))),
        Term::MkPair(a, b) => v(Some(Value::pair(val!(a), val!(b)))),
        Term::Car(a) => v(match val!(a) {
            Value::Pair(x, _) => Some(*x),
            _ => None,
        }),
        Term::Cdr(a) => v(match val!(a) {
            Value::Pair(_, y) => Some(*y),
            _ => None,
        }),
        Term::MkSome(a) => v(Some(Value::some(val!(a)))),
        Term::MkNone(ty) => v(Some(Value::None(ty.clone()))),
        Term::Unsome(a) => v(match val!(a) {
            Value::Some(x) => Some(*x),
            _ => None,
        }),
        Term::MkLeft(a, ty) => v(Some(Value::Left(Box::new(val!(a)), ty.clone()))),
        Term::MkRight(a, ty) => v(Some(Value::Right(Box::new(val!(a)), ty.clone()))),
        Term::Unleft(a) => v(match val!(a) {
            Value::Left(x, _) => Some(*x),
            _ => None,
        }),
        Term::Unright(a) => v(match val!(a) {
            Value::Right(x, _) => Some(*x),
            _ => None,
        }),
        Term::MkNil(ty) => v(Some(Value::List(Vec::new(), ty.clone()))),
        Term::MkCons(h, l) => {
            let h = val!(h);
            v(match val!(l) {
                Value::List(mut xs, ty) if h.typ_infer() == ty => {
                    xs.insert(0, h);
                    Some(Value::List(xs, ty))
                }
                _ => None,
            })
        }
        Term::Head(a) => v(match val!(a) {
            Value::List(xs, _) => xs.into_iter().next(),
            _ => None,
        }),
        Term::Tail(a) => v(match val!(a) {
            Value::List(xs, ty) if !xs.is_empty() => Some(Value::List(xs[1..].to_vec(), ty)),
            _ => None,
        }),
        Term::Concat(a, b) => v(crypto::concat(&val!(a), &val!(b))),
        Term::MapGet(k, m) => {
            let k = val!(k);
            v(match val!(m) {
                Value::Map(es, _, vt) | Value::BigMap(es, _, vt) => Some(
                    es.into_iter()
                        .find(|(x, _)| *x == k)
                        .map_or(Value::None(vt), |(_, x)| Value::some(x)),
                ),
                _ => None,
            })
        }
        Term::Update(k, x, c) => {
            let (k, x, c) = (val!(k), val!(x), val!(c));
            v(update(k, x, c))
        }
        Term::Digest(tag, args, ty) => {
            let mut vals = Vec::new();
            for a in args {
                vals.push(val!(a));
            }
            let refs: Vec<&Value> = vals.iter().collect();
            v(Some(Value::Abstract(crate::model::Abstract::mint(tag, &refs, ty.clone()))))
        }
        Term::Pack(a) => v(Some(crypto::pack(&val!(a)))),
        Term::Unpack(a, ty) => v(Some(crypto::unpack(&val!(a), ty))),
        Term::Transfer(p, a, d) => v(Some(Value::Operation(Box::new(Operation::Transfer {
            parameter: val!(p),
            amount: val!(a),
            destination: val!(d),
        })))),
        Term::SetDelegate(d) => v(Some(Value::Operation(Box::new(Operation::SetDelegate(val!(d)))))),
        Term::TypeOf(a) => Ok(Some(Val::T(val!(a).typ_infer()))),
        Term::TyLit(ty) => Ok(Some(Val::T(ty.clone()))),
        Term::TyApp(c, args) => {
            let mut tys = Vec::new();
            for a in args {
                match ty_of(a, env)? {
                    Some(t) => tys.push(t),
                    None => return Ok(None),
                }
            }
            Ok(Some(Val::T(c.apply(tys))))
        }
        Term::TyArg(a, k) => match ty_of(a, env)? {
            Some(t) => Ok(t.args().get(*k).cloned().map(Val::T)),
            None => Ok(None),
        },
    }
}

/// `UPDATE` on a set (with a bool) or a map (with an option).
pub fn update(k: Value, x: Value, c: Value) -> Option<Value> {
    match (x, c) {
        (Value::Bool(b), Value::Set(mut xs, ct)) => {
            xs.retain(|e| *e != k);
            if b {
                xs.push(k);
            }
            Value::set(xs, ct).ok()
        }
        (x, Value::Map(es, kt, vt)) => update_entries(k, x, es).and_then(|es| Value::map(es, kt, vt).ok()),
        (x, Value::BigMap(es, kt, vt)) => update_entries(k, x, es)
            .and_then(|es| Value::map(es, kt, vt).ok())
            .map(|m| match m {
                Value::Map(es, kt, vt) => Value::BigMap(es, kt, vt),
                other => other,
            }),
        _ => None,
    }
}

fn update_entries(k: Value, x: Value, mut es: Vec<(Value, Value)>) -> Option<Vec<(Value, Value)>> {
    es.retain(|(e, _)| *e != k);
    match x {
        Value::Some(v) => es.push((k, *v)),
        Value::None(_) => {}
        _ => return None,
    }
    Some(es)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::formula::build::*;

    fn st(vs: Vec<Value>) -> Stack {
        Stack::from_top(vs)
    }

    #[test]
    fn length_clause() {
        let logic = LogicTable::new();
        let stk = st(vec![Value::Unit]);
        let env = Env::new(&logic).with_stacks(Some(&stk), None);
        assert!(eval_formula(&eq(len_s(), int(1)), &env).unwrap());
    }

    #[test]
    fn out_of_range_slot_is_false_not_error() {
        let logic = LogicTable::new();
        let stk = st(vec![Value::Unit]);
        let env = Env::new(&logic).with_stacks(Some(&stk), None);
        let f = eq(s(3), s(3));
        assert!(!eval_formula(&f, &env).unwrap());
        assert!(eval_formula(&not(f), &env).unwrap());
    }

    #[test]
    fn cases_fall_through_to_false() {
        let logic = LogicTable::new();
        let stk = st(vec![Value::String("x".into())]);
        let env = Env::new(&logic).with_stacks(Some(&stk), None);
        let f = Formula::Cases(vec![(has_ty(s(0), Ty::Int), Formula::True)]);
        assert!(!eval_formula(&f, &env).unwrap());
    }

    #[test]
    fn euclidean_division() {
        let cases = [(7, 2, 3, 1), (-7, 2, -4, 1), (7, -2, -3, 1), (-7, -2, 4, 1)];
        for (a, b, q, r) in cases {
            assert_eq!(ediv(&a.into(), &b.into()), Some((q.into(), r.into())), "{a} / {b}");
        }
        assert_eq!(ediv(&1.into(), &0.into()), None);
    }

    #[test]
    fn unbound_and_sort_errors() {
        let logic = LogicTable::new();
        let env = Env::new(&logic);
        assert_eq!(
            eval_formula(&eq(len_s(), int(0)), &env),
            Err(EvalError::Unbound("s".into()))
        );
        let stk = st(vec![Value::Unit]);
        let env = Env::new(&logic).with_stacks(Some(&stk), None);
        assert!(matches!(
            eval_formula(&eq(s(0), int(0)), &env),
            Err(EvalError::Sort { .. })
        ));
    }

    #[test]
    fn fact_in_loop_body_clause() {
        // res = fact(n - 1) with n = 5, res = 24.
        let mut logic = LogicTable::new();
        logic
            .declare(
                "fact",
                vec!["n".into()],
                ite(
                    cmp(CmpOp::Le, var("n"), int(0)),
                    int(1),
                    mul(var("n"), Term::Call("fact".into(), vec![sub(var("n"), int(1))])),
                ),
            )
            .unwrap();
        let stk = st(vec![Value::Nat(24.into()), Value::Nat(5.into())]);
        let env = Env::new(&logic).with_stacks(Some(&stk), None);
        let f = Formula::Cases(vec![(
            and(vec![has_ty(s(0), Ty::Nat), has_ty(s(1), Ty::Nat)]),
            eq(Term::Call("fact".into(), vec![sub(num(s(1)), int(1))]), num(s(0))),
        )]);
        assert!(eval_formula(&f, &env).unwrap());
        let t = Term::Call("fact".into(), vec![int(5)]);
        assert_eq!(eval_term(&t, &env).unwrap(), Some(Val::Int(120.into())));
    }

    #[test]
    fn map_update_and_get() {
        use crate::model::Comparable;
        let m = Value::map(vec![], Comparable::Int, Ty::Nat).unwrap();
        let m = update(Value::int(2), Value::some(Value::Nat(5.into())), m).unwrap();
        let m = update(Value::int(1), Value::some(Value::Nat(4.into())), m).unwrap();
        assert!(m.well_formed());
        let logic = LogicTable::new();
        let env = Env::new(&logic);
        let got = eval_term(&Term::MapGet(Box::new(Term::Lit(Value::int(2))), Box::new(Term::Lit(m.clone()))), &env);
        assert_eq!(got.unwrap(), Some(Val::V(Value::some(Value::Nat(5.into())))));
        let m = update(Value::int(2), Value::None(Ty::Nat), m).unwrap();
        assert!(matches!(m, Value::Map(ref es, ..) if es.len() == 1));
    }
}
