//! Bottom-up simplification of instantiated clauses: stack substitution,
//! type-term folding, constant folding and bounded quantifier expansion.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::contracts::eval::ediv;
use crate::contracts::{ArithOp, CmpOp, Formula, NumKind, StackRef, Term};
use crate::model::{compare, crypto, Ty, Value};

/// Largest constant-bound quantifier that is expanded into a conjunction.
const MAX_EXPAND: i64 = 64;

/// Substitutions applied while simplifying.
#[derive(Debug, Clone, Default)]
pub struct Subst<'a> {
    pub s: Option<&'a [Term]>,
    pub result: Option<&'a [Term]>,
    pub names: Option<&'a BTreeMap<String, Term>>,
}

/// Static type of a value term, when it can be read off the term.
pub fn term_ty(t: &Term) -> Option<Ty> {
    let arg = |x: &Term, k: usize| term_ty(x).and_then(|t| t.args().get(k).cloned());
    Some(match t {
        Term::Sym(_, ty) => ty.clone(),
        Term::Lit(v) => v.typ_infer(),
        Term::Mk(k, _) => k.ty(),
        Term::MkBool(_) => Ty::Bool,
        Term::MkPair(a, b) => Ty::pair(term_ty(a)?, term_ty(b)?),
        Term::Car(x) => arg(x, 0)?,
        Term::Cdr(x) => arg(x, 1)?,
        Term::MkSome(a) => Ty::option(term_ty(a)?),
        Term::MkNone(t) => Ty::option(t.clone()),
        Term::Unsome(x) | Term::Head(x) | Term::Unleft(x) => arg(x, 0)?,
        Term::Unright(x) => arg(x, 1)?,
        Term::MkLeft(a, t) => Ty::or(term_ty(a)?, t.clone()),
        Term::MkRight(a, t) => Ty::or(t.clone(), term_ty(a)?),
        Term::MkNil(t) => Ty::list(t.clone()),
        Term::MkCons(_, b) => term_ty(b)?,
        Term::Tail(x) | Term::Concat(x, _) => term_ty(x)?,
        Term::MapGet(_, m) => Ty::option(arg(m, 1)?),
        Term::Update(_, _, c) => term_ty(c)?,
        Term::Digest(_, _, t) => t.clone(),
        Term::Pack(_) => Ty::Bytes,
        Term::Unpack(_, t) => Ty::option(t.clone()),
        Term::Transfer(..) | Term::SetDelegate(_) => Ty::Operation,
        Term::Ite(_, a, b) => term_ty(a).or_else(|| term_ty(b))?,
        _ => return None,
    })
}

fn lit_int(t: &Term) -> Option<&BigInt> {
    match t {
        Term::Int(n) => Some(n),
        _ => None,
    }
}

fn mk_lit(k: NumKind, n: &BigInt) -> Option<Value> {
    match k {
        NumKind::Int => Some(Value::Int(n.clone())),
        NumKind::Nat => Value::nat(n.clone()).ok(),
        NumKind::Mutez => Value::mutez(n.clone()).ok(),
        NumKind::Timestamp => Some(Value::Timestamp(n.clone())),
    }
}

fn fbool(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

pub fn simplify_term(t: &Term, sub: &Subst) -> Term {
    // Children first. Terms holding formulas are handled by hand so the
    // formulas get simplified too.
    let t = match t {
        Term::Ite(c, a, b) => {
            let c = simplify(c, sub);
            match c {
                Formula::True => return simplify_term(a, sub),
                Formula::False => return simplify_term(b, sub),
                c => Term::Ite(Box::new(c), Box::new(simplify_term(a, sub)), Box::new(simplify_term(b, sub))),
            }
        }
        Term::MkBool(c) => match simplify(c, sub) {
            Formula::True => Term::Lit(Value::Bool(true)),
            Formula::False => Term::Lit(Value::Bool(false)),
            Formula::IsTrue(x) if term_ty(&x) == Some(Ty::Bool) => x,
            c => Term::MkBool(Box::new(c)),
        },
        _ => {
            let mut root = true;
            t.rewrite(&mut |x| {
                if root {
                    root = false;
                    None
                } else {
                    Some(simplify_term(x, sub))
                }
            })
        }
    };
    fold_term(t, sub)
}

fn fold_term(t: Term, sub: &Subst) -> Term {
    match t {
        Term::Len(StackRef::S) if sub.s.is_some() => Term::Int(sub.s.unwrap().len().into()),
        Term::Len(StackRef::Result) if sub.result.is_some() => Term::Int(sub.result.unwrap().len().into()),
        Term::Slot(r, i) => {
            let st = match r {
                StackRef::S => sub.s,
                StackRef::Result => sub.result,
            };
            match (st, lit_int(&i).and_then(|n| n.to_usize())) {
                (Some(st), Some(k)) if k < st.len() => st[k].clone(),
                _ => Term::Slot(r, i),
            }
        }
        Term::Name(n) => match sub.names.and_then(|m| m.get(&n)) {
            Some(t) => simplify_term(t, &Subst::default()),
            None => Term::Name(n),
        },
        Term::Arith(op, a, b) => match (lit_int(&a), lit_int(&b)) {
            (Some(x), Some(y)) => {
                let r = match op {
                    ArithOp::Add => Some(x + y),
                    ArithOp::Sub => Some(x - y),
                    ArithOp::Mul => Some(x * y),
                    ArithOp::Div => ediv(x, y).map(|p| p.0),
                    ArithOp::Mod => ediv(x, y).map(|p| p.1),
                };
                match r {
                    Some(n) => Term::Int(n),
                    None => Term::Arith(op, a, b),
                }
            }
            (_, Some(y)) if y == &BigInt::from(0) && matches!(op, ArithOp::Add | ArithOp::Sub) => *a,
            (Some(x), _) if x == &BigInt::from(0) && op == ArithOp::Add => *b,
            (_, Some(y)) if y == &BigInt::from(1) && matches!(op, ArithOp::Mul | ArithOp::Div) => *a,
            (Some(x), _) if x == &BigInt::from(1) && op == ArithOp::Mul => *b,
            _ => Term::Arith(op, a, b),
        },
        Term::Neg(a) => match *a {
            Term::Int(n) => Term::Int(-n),
            a => Term::Neg(Box::new(a)),
        },
        Term::IntOf(a) => match *a {
            Term::Mk(_, x) => *x,
            Term::Lit(ref v) if v.as_integer().is_some() => Term::Int(v.as_integer().unwrap()),
            a => Term::IntOf(Box::new(a)),
        },
        Term::Mk(k, a) => match lit_int(&a).and_then(|n| mk_lit(k, n)) {
            Some(v) => Term::Lit(v),
            None => Term::Mk(k, a),
        },
        Term::CompareV(a, b) => match (&*a, &*b) {
            (Term::Lit(x), Term::Lit(y)) => match compare(x, y) {
                Ok(c) => Term::Int(c.into()),
                Err(_) => Term::CompareV(a, b),
            },
            _ if a == b => Term::Int(0.into()),
            _ => Term::CompareV(a, b),
        },
        Term::Size(a) => match &*a {
            Term::Lit(v) => match crypto::size(v) {
                Some(n) => Term::Int(n.into()),
                None => Term::Size(a),
            },
            _ => Term::Size(a),
        },
        Term::Car(a) => match *a {
            Term::MkPair(x, _) => *x,
            Term::Lit(Value::Pair(x, _)) => Term::Lit(*x),
            a => Term::Car(Box::new(a)),
        },
        Term::Cdr(a) => match *a {
            Term::MkPair(_, y) => *y,
            Term::Lit(Value::Pair(_, y)) => Term::Lit(*y),
            a => Term::Cdr(Box::new(a)),
        },
        Term::Unsome(a) => match *a {
            Term::MkSome(x) => *x,
            Term::Lit(Value::Some(x)) => Term::Lit(*x),
            a => Term::Unsome(Box::new(a)),
        },
        Term::Unleft(a) => match *a {
            Term::MkLeft(x, _) => *x,
            Term::Lit(Value::Left(x, _)) => Term::Lit(*x),
            a => Term::Unleft(Box::new(a)),
        },
        Term::Unright(a) => match *a {
            Term::MkRight(x, _) => *x,
            Term::Lit(Value::Right(x, _)) => Term::Lit(*x),
            a => Term::Unright(Box::new(a)),
        },
        Term::Head(a) => match *a {
            Term::MkCons(x, _) => *x,
            a => Term::Head(Box::new(a)),
        },
        Term::Tail(a) => match *a {
            Term::MkCons(_, y) => *y,
            a => Term::Tail(Box::new(a)),
        },
        Term::TypeOf(a) => match term_ty(&a) {
            Some(t) => Term::TyLit(t),
            None => Term::TypeOf(a),
        },
        Term::TyArg(a, k) => match &*a {
            Term::TyLit(t) if k < t.args().len() => Term::TyLit(t.args()[k].clone()),
            _ => Term::TyArg(a, k),
        },
        Term::TyApp(c, args) => {
            let tys: Option<Vec<Ty>> = args
                .iter()
                .map(|a| match a {
                    Term::TyLit(t) => Some(t.clone()),
                    _ => None,
                })
                .collect();
            match tys {
                Some(tys) if tys.len() == c.arity() => Term::TyLit(c.apply(tys)),
                _ => Term::TyApp(c, args),
            }
        }
        t => t,
    }
}

pub fn simplify(f: &Formula, sub: &Subst) -> Formula {
    let st = |t: &Term| simplify_term(t, sub);
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Cmp(op, a, b) => {
            let (a, b) = (st(a), st(b));
            if let (Some(x), Some(y)) = (lit_int(&a), lit_int(&b)) {
                return fbool(op.holds(x.cmp(y)));
            }
            match (&a, &b) {
                (Term::TyLit(x), Term::TyLit(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                    return fbool((x == y) == (*op == CmpOp::Eq))
                }
                (Term::Lit(x), Term::Lit(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                    return fbool((x == y) == (*op == CmpOp::Eq))
                }
                _ => {}
            }
            if a == b {
                return fbool(matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge));
            }
            Formula::Cmp(*op, a, b)
        }
        Formula::Not(x) => match simplify(x, sub) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(y) => *y,
            y => Formula::Not(Box::new(y)),
        },
        Formula::And(xs) => {
            let mut out = Vec::new();
            for x in xs {
                match simplify(x, sub) {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    Formula::And(ys) => out.extend(ys),
                    y => out.push(y),
                }
            }
            match out.len() {
                0 => Formula::True,
                1 => out.pop().unwrap(),
                _ => Formula::And(out),
            }
        }
        Formula::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                match simplify(x, sub) {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    Formula::Or(ys) => out.extend(ys),
                    y => out.push(y),
                }
            }
            match out.len() {
                0 => Formula::False,
                1 => out.pop().unwrap(),
                _ => Formula::Or(out),
            }
        }
        Formula::Implies(a, b) => match (simplify(a, sub), simplify(b, sub)) {
            (Formula::True, b) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (a, Formula::False) => Formula::Not(Box::new(a)),
            (a, b) if a == b => Formula::True,
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        },
        Formula::Iff(a, b) => match (simplify(a, sub), simplify(b, sub)) {
            (Formula::True, x) | (x, Formula::True) => x,
            (Formula::False, x) | (x, Formula::False) => simplify(&Formula::Not(Box::new(x)), &Subst::default()),
            (a, b) if a == b => Formula::True,
            (a, b) => Formula::Iff(Box::new(a), Box::new(b)),
        },
        Formula::Forall { var, lo, hi, body } => {
            let (lo, hi) = (st(lo), st(hi));
            if let (Some(l), Some(h)) = (lit_int(&lo).and_then(|n| n.to_i64()), lit_int(&hi).and_then(|n| n.to_i64())) {
                if h - l <= MAX_EXPAND {
                    let parts = (l..h).map(|k| body.subst_var(var, &Term::Int(k.into()))).collect();
                    return simplify(&Formula::And(parts), sub);
                }
            }
            Formula::Forall {
                var: var.clone(),
                lo,
                hi,
                body: Box::new(simplify(body, sub)),
            }
        }
        Formula::Cases(cs) => {
            let mut out = Vec::new();
            for (g, b) in cs {
                match simplify(g, sub) {
                    Formula::False => {}
                    Formula::True if out.is_empty() => return simplify(b, sub),
                    Formula::True => {
                        out.push((Formula::True, simplify(b, sub)));
                        break;
                    }
                    g => out.push((g, simplify(b, sub))),
                }
            }
            if out.is_empty() {
                Formula::False
            } else {
                Formula::Cases(out)
            }
        }
        Formula::IsTrue(t) => match st(t) {
            Term::Lit(Value::Bool(b)) => fbool(b),
            Term::MkBool(c) => *c,
            t => Formula::IsTrue(t),
        },
        Formula::IsSome(t) => match st(t) {
            Term::MkSome(_) | Term::Lit(Value::Some(_)) => Formula::True,
            Term::MkNone(_) | Term::Lit(Value::None(_)) => Formula::False,
            t => Formula::IsSome(t),
        },
        Formula::IsLeft(t) => match st(t) {
            Term::MkLeft(..) | Term::Lit(Value::Left(..)) => Formula::True,
            Term::MkRight(..) | Term::Lit(Value::Right(..)) => Formula::False,
            t => Formula::IsLeft(t),
        },
        Formula::IsCons(t) => match st(t) {
            Term::MkCons(..) => Formula::True,
            Term::MkNil(_) => Formula::False,
            Term::Lit(Value::List(xs, _)) => fbool(!xs.is_empty()),
            t => Formula::IsCons(t),
        },
        Formula::Mem(a, b) => Formula::Mem(st(a), st(b)),
        Formula::CheckSig(a, b, c) => Formula::CheckSig(st(a), st(b), st(c)),
        Formula::TyIs(t, shape) => match st(t) {
            Term::TyLit(ty) => fbool(shape.holds(&ty)),
            t => Formula::TyIs(t, *shape),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::contract_of;
    use crate::contracts::formula::build::*;
    use crate::syntax::Node;

    fn sym(n: &str, t: Ty) -> Term {
        Term::Sym(n.into(), t)
    }

    #[test]
    fn add_contract_specializes_to_nat() {
        let c = contract_of(&Node::Add).unwrap();
        let s = vec![sym("a", Ty::Nat), sym("b", Ty::Nat), sym("c", Ty::Int)];
        let r = vec![sym("r", Ty::Nat), sym("c", Ty::Int)];
        let mut fuel = BTreeMap::new();
        fuel.insert("fuel".to_string(), int(5));
        let sub = Subst {
            s: Some(&s),
            result: Some(&r),
            names: Some(&fuel),
        };
        for f in &c.requires {
            assert_eq!(simplify(f, &sub), Formula::True, "{f}");
        }
        let ens: Vec<_> = c.ensures.iter().map(|f| simplify(f, &sub)).filter(|f| *f != Formula::True).collect();
        assert_eq!(ens.len(), 1, "{ens:?}");
        assert_eq!(
            ens[0],
            eq(
                sym("r", Ty::Nat),
                Term::Mk(
                    NumKind::Nat,
                    Box::new(add(Term::IntOf(Box::new(sym("a", Ty::Nat))), Term::IntOf(Box::new(sym("b", Ty::Nat)))))
                )
            )
        );
    }

    #[test]
    fn cases_without_a_true_guard_are_false() {
        let f = Formula::Cases(vec![(Formula::False, Formula::True)]);
        assert_eq!(simplify(&f, &Subst::default()), Formula::False);
    }

    #[test]
    fn projections_fold() {
        let p = Term::MkPair(Box::new(int(1)), Box::new(sym("x", Ty::Int)));
        assert_eq!(simplify_term(&Term::Cdr(Box::new(p)), &Subst::default()), sym("x", Ty::Int));
        let n = Term::IntOf(Box::new(Term::Mk(NumKind::Nat, Box::new(int(3)))));
        assert_eq!(simplify_term(&n, &Subst::default()), int(3));
    }

    #[test]
    fn large_quantifiers_stay() {
        let f = forall("i", int(0), int(1000), cmp(CmpOp::Ge, var("i"), int(0)));
        assert!(matches!(simplify(&f, &Subst::default()), Formula::Forall { .. }));
        let f = forall("i", int(0), int(3), cmp(CmpOp::Ge, var("i"), int(1)));
        assert_eq!(simplify(&f, &Subst::default()), Formula::False);
    }
}
