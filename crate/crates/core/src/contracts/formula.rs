//! The assertion language shared by the runtime checker and both VC
//! emitters.

use std::fmt;

use num_bigint::BigInt;

use crate::model::{Ty, Value};

/// Which stack a slot or length refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackRef {
    /// The input stack of an opcode, or the current stack in a sidecar.
    S,
    Result,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    /// Euclidean division (remainder is never negative).
    Div,
    Mod,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, o: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => o == Equal,
            CmpOp::Ne => o != Equal,
            CmpOp::Lt => o == Less,
            CmpOp::Le => o != Greater,
            CmpOp::Gt => o == Greater,
            CmpOp::Ge => o != Less,
        }
    }
}

/// Numeric value constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumKind {
    Int,
    Nat,
    Mutez,
    Timestamp,
}

impl NumKind {
    pub fn ty(self) -> Ty {
        match self {
            NumKind::Int => Ty::Int,
            NumKind::Nat => Ty::Nat,
            NumKind::Mutez => Ty::Mutez,
            NumKind::Timestamp => Ty::Timestamp,
        }
    }

    pub fn of_ty(t: &Ty) -> Option<NumKind> {
        Some(match t {
            Ty::Int => NumKind::Int,
            Ty::Nat => NumKind::Nat,
            Ty::Mutez => NumKind::Mutez,
            Ty::Timestamp => NumKind::Timestamp,
            _ => return None,
        })
    }
}

/// Type constructors usable in type terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TyCtor {
    Option,
    List,
    Pair,
    Or,
    Contract,
}

impl TyCtor {
    pub fn arity(self) -> usize {
        match self {
            TyCtor::Pair | TyCtor::Or => 2,
            _ => 1,
        }
    }

    pub fn apply(self, args: Vec<Ty>) -> Ty {
        let mut it = args.into_iter();
        let mut next = || it.next().unwrap_or(Ty::Unit);
        match self {
            TyCtor::Option => Ty::option(next()),
            TyCtor::List => Ty::list(next()),
            TyCtor::Pair => {
                let a = next();
                Ty::pair(a, next())
            }
            TyCtor::Or => {
                let a = next();
                Ty::or(a, next())
            }
            TyCtor::Contract => Ty::contract(next()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TyCtor::Option => "option",
            TyCtor::List => "list",
            TyCtor::Pair => "pair",
            TyCtor::Or => "or",
            TyCtor::Contract => "contract",
        }
    }
}

/// Shape tests on types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TyShape {
    Pair,
    Option,
    Or,
    List,
    Set,
    Map,
    BigMap,
    Contract,
    Comparable,
    Packable,
}

impl TyShape {
    pub fn holds(self, t: &Ty) -> bool {
        match self {
            TyShape::Pair => matches!(t, Ty::Pair(..)),
            TyShape::Option => matches!(t, Ty::Option(_)),
            TyShape::Or => matches!(t, Ty::Or(..)),
            TyShape::List => matches!(t, Ty::List(_)),
            TyShape::Set => matches!(t, Ty::Set(_)),
            TyShape::Map => matches!(t, Ty::Map(..)),
            TyShape::BigMap => matches!(t, Ty::BigMap(..)),
            TyShape::Contract => matches!(t, Ty::Contract(_)),
            TyShape::Comparable => t.is_comparable(),
            TyShape::Packable => packable(t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TyShape::Pair => "pair",
            TyShape::Option => "option",
            TyShape::Or => "or",
            TyShape::List => "list",
            TyShape::Set => "set",
            TyShape::Map => "map",
            TyShape::BigMap => "big_map",
            TyShape::Contract => "contract",
            TyShape::Comparable => "comparable",
            TyShape::Packable => "packable",
        }
    }
}

pub fn packable(t: &Ty) -> bool {
    match t {
        Ty::Operation | Ty::BigMap(..) => false,
        Ty::Option(a) | Ty::List(a) | Ty::Contract(a) => packable(a),
        Ty::Pair(a, b) | Ty::Or(a, b) => packable(a) && packable(b),
        Ty::Map(_, v) => packable(v),
        _ => true,
    }
}

/// Terms of three sorts: integers, Michelson values and types. Sorts are
/// checked when a term is evaluated or emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    // integer sort
    Int(BigInt),
    /// Quantified index or logic-function parameter.
    Var(String),
    Len(StackRef),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    /// Numeric payload of an int, nat, mutez or timestamp value.
    IntOf(Box<Term>),
    /// `compare` of two values: -1, 0 or 1.
    CompareV(Box<Term>, Box<Term>),
    Size(Box<Term>),
    /// Application of a declared logic function.
    Call(String, Vec<Term>),
    Ite(Box<Formula>, Box<Term>, Box<Term>),

    // value sort
    /// Environment name: `fuel`, `param`, `storage_in`, `storage_out`,
    /// `amount`, `balance`, `now`, `sender`, `source`, `self`, `chain_id`.
    Name(String),
    /// A symbolic constant of known type (used by the SMT encoding).
    Sym(String, Ty),
    Slot(StackRef, Box<Term>),
    Lit(Value),
    Mk(NumKind, Box<Term>),
    MkBool(Box<Formula>),
    MkPair(Box<Term>, Box<Term>),
    Car(Box<Term>),
    Cdr(Box<Term>),
    MkSome(Box<Term>),
    MkNone(Ty),
    Unsome(Box<Term>),
    /// `Left v` of type `or (typeof v) ty`.
    MkLeft(Box<Term>, Ty),
    /// `Right v` of type `or ty (typeof v)`.
    MkRight(Box<Term>, Ty),
    Unleft(Box<Term>),
    Unright(Box<Term>),
    MkNil(Ty),
    MkCons(Box<Term>, Box<Term>),
    Head(Box<Term>),
    Tail(Box<Term>),
    Concat(Box<Term>, Box<Term>),
    /// Map lookup, an option.
    MapGet(Box<Term>, Box<Term>),
    /// Set or map update: key, bool or option value, collection.
    Update(Box<Term>, Box<Term>, Box<Term>),
    /// Abstract hash output with the given tag.
    Digest(String, Vec<Term>, Ty),
    Pack(Box<Term>),
    Unpack(Box<Term>, Ty),
    Transfer(Box<Term>, Box<Term>, Box<Term>),
    SetDelegate(Box<Term>),

    // type sort
    TypeOf(Box<Term>),
    TyLit(Ty),
    TyApp(TyCtor, Vec<Term>),
    /// The k-th argument of a composite type (`map k v` has `k` then `v`).
    TyArg(Box<Term>, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `forall var. lo <= var < hi -> body`.
    Forall {
        var: String,
        lo: Term,
        hi: Term,
        body: Box<Formula>,
    },
    /// Guarded clauses: the first guard that holds selects its body; when no
    /// guard holds the formula is false.
    Cases(Vec<(Formula, Formula)>),
    IsTrue(Term),
    IsSome(Term),
    IsLeft(Term),
    IsCons(Term),
    Mem(Term, Term),
    CheckSig(Term, Term, Term),
    TyIs(Term, TyShape),
}

/// Builders. They keep the contract table short.
pub mod build {
    use super::*;

    pub fn int(n: i64) -> Term {
        Term::Int(n.into())
    }

    pub fn var(v: &str) -> Term {
        Term::Var(v.into())
    }

    pub fn name(v: &str) -> Term {
        Term::Name(v.into())
    }

    pub fn len_s() -> Term {
        Term::Len(StackRef::S)
    }

    pub fn len_r() -> Term {
        Term::Len(StackRef::Result)
    }

    pub fn s(i: usize) -> Term {
        Term::Slot(StackRef::S, Box::new(int(i as i64)))
    }

    pub fn r(i: usize) -> Term {
        Term::Slot(StackRef::Result, Box::new(int(i as i64)))
    }

    pub fn s_at(t: Term) -> Term {
        Term::Slot(StackRef::S, Box::new(t))
    }

    pub fn r_at(t: Term) -> Term {
        Term::Slot(StackRef::Result, Box::new(t))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn div(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Div, Box::new(a), Box::new(b))
    }

    pub fn rem(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Mod, Box::new(a), Box::new(b))
    }

    pub fn num(t: Term) -> Term {
        Term::IntOf(Box::new(t))
    }

    pub fn mk(k: NumKind, t: Term) -> Term {
        Term::Mk(k, Box::new(t))
    }

    pub fn ty_of(t: Term) -> Term {
        Term::TypeOf(Box::new(t))
    }

    pub fn ty_lit(t: Ty) -> Term {
        Term::TyLit(t)
    }

    pub fn ty_arg(t: Term, k: usize) -> Term {
        Term::TyArg(Box::new(t), k)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Eq, a, b)
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }

    pub fn has_ty(t: Term, ty: Ty) -> Formula {
        eq(ty_of(t), ty_lit(ty))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        Formula::Or(fs)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, lo: Term, hi: Term, body: Formula) -> Formula {
        Formula::Forall {
            var: v.into(),
            lo,
            hi,
            body: Box::new(body),
        }
    }

    pub fn ite(c: Formula, a: Term, b: Term) -> Term {
        Term::Ite(Box::new(c), Box::new(a), Box::new(b))
    }
}

impl Term {
    /// Applies `f` top-down; where it returns a replacement, the subterm is
    /// replaced and not descended into.
    pub fn rewrite(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
        if let Some(t) = f(self) {
            return t;
        }
        let b = |t: &Term, f: &mut dyn FnMut(&Term) -> Option<Term>| Box::new(t.rewrite(f));
        match self {
            Term::Int(_)
            | Term::Var(_)
            | Term::Len(_)
            | Term::Name(_)
            | Term::Sym(..)
            | Term::Lit(_)
            | Term::MkNone(_)
            | Term::MkNil(_)
            | Term::TyLit(_) => self.clone(),
            Term::Arith(op, x, y) => Term::Arith(*op, b(x, f), b(y, f)),
            Term::Neg(x) => Term::Neg(b(x, f)),
            Term::IntOf(x) => Term::IntOf(b(x, f)),
            Term::CompareV(x, y) => Term::CompareV(b(x, f), b(y, f)),
            Term::Size(x) => Term::Size(b(x, f)),
            Term::Call(n, args) => Term::Call(n.clone(), args.iter().map(|a| a.rewrite(f)).collect()),
            Term::Ite(c, x, y) => Term::Ite(Box::new(c.rewrite(f)), b(x, f), b(y, f)),
            Term::Slot(s, i) => Term::Slot(*s, b(i, f)),
            Term::Mk(k, x) => Term::Mk(*k, b(x, f)),
            Term::MkBool(c) => Term::MkBool(Box::new(c.rewrite(f))),
            Term::MkPair(x, y) => Term::MkPair(b(x, f), b(y, f)),
            Term::Car(x) => Term::Car(b(x, f)),
            Term::Cdr(x) => Term::Cdr(b(x, f)),
            Term::MkSome(x) => Term::MkSome(b(x, f)),
            Term::Unsome(x) => Term::Unsome(b(x, f)),
            Term::MkLeft(x, t) => Term::MkLeft(b(x, f), t.clone()),
            Term::MkRight(x, t) => Term::MkRight(b(x, f), t.clone()),
            Term::Unleft(x) => Term::Unleft(b(x, f)),
            Term::Unright(x) => Term::Unright(b(x, f)),
            Term::MkCons(x, y) => Term::MkCons(b(x, f), b(y, f)),
            Term::Head(x) => Term::Head(b(x, f)),
            Term::Tail(x) => Term::Tail(b(x, f)),
            Term::Concat(x, y) => Term::Concat(b(x, f), b(y, f)),
            Term::MapGet(x, y) => Term::MapGet(b(x, f), b(y, f)),
            Term::Update(x, y, z) => Term::Update(b(x, f), b(y, f), b(z, f)),
            Term::Digest(tag, args, t) => Term::Digest(tag.clone(), args.iter().map(|a| a.rewrite(f)).collect(), t.clone()),
            Term::Pack(x) => Term::Pack(b(x, f)),
            Term::Unpack(x, t) => Term::Unpack(b(x, f), t.clone()),
            Term::Transfer(x, y, z) => Term::Transfer(b(x, f), b(y, f), b(z, f)),
            Term::SetDelegate(x) => Term::SetDelegate(b(x, f)),
            Term::TypeOf(x) => Term::TypeOf(b(x, f)),
            Term::TyApp(c, args) => Term::TyApp(*c, args.iter().map(|a| a.rewrite(f)).collect()),
            Term::TyArg(x, k) => Term::TyArg(b(x, f), *k),
        }
    }

    /// Direct subterms and subformulas.
    pub fn parts(&self) -> (Vec<&Term>, Vec<&Formula>) {
        match self {
            Term::Int(_)
            | Term::Var(_)
            | Term::Len(_)
            | Term::Name(_)
            | Term::Sym(..)
            | Term::Lit(_)
            | Term::MkNone(_)
            | Term::MkNil(_)
            | Term::TyLit(_) => (vec![], vec![]),
            Term::Arith(_, x, y)
            | Term::CompareV(x, y)
            | Term::MkPair(x, y)
            | Term::MkCons(x, y)
            | Term::Concat(x, y)
            | Term::MapGet(x, y) => (vec![x, y], vec![]),
            Term::Neg(x)
            | Term::IntOf(x)
            | Term::Size(x)
            | Term::Slot(_, x)
            | Term::Mk(_, x)
            | Term::Car(x)
            | Term::Cdr(x)
            | Term::MkSome(x)
            | Term::Unsome(x)
            | Term::MkLeft(x, _)
            | Term::MkRight(x, _)
            | Term::Unleft(x)
            | Term::Unright(x)
            | Term::Head(x)
            | Term::Tail(x)
            | Term::Pack(x)
            | Term::Unpack(x, _)
            | Term::SetDelegate(x)
            | Term::TypeOf(x)
            | Term::TyArg(x, _) => (vec![x], vec![]),
            Term::Update(x, y, z) | Term::Transfer(x, y, z) => (vec![x, y, z], vec![]),
            Term::Call(_, args) | Term::Digest(_, args, _) | Term::TyApp(_, args) => (args.iter().collect(), vec![]),
            Term::Ite(c, x, y) => (vec![x, y], vec![c]),
            Term::MkBool(c) => (vec![], vec![c]),
        }
    }
}

impl Formula {
    pub fn rewrite(&self, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Formula {
        let bf = |x: &Formula, f: &mut dyn FnMut(&Term) -> Option<Term>| Box::new(x.rewrite(f));
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, a.rewrite(f), b.rewrite(f)),
            Formula::Not(x) => Formula::Not(bf(x, f)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| x.rewrite(f)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| x.rewrite(f)).collect()),
            Formula::Implies(a, b) => Formula::Implies(bf(a, f), bf(b, f)),
            Formula::Iff(a, b) => Formula::Iff(bf(a, f), bf(b, f)),
            Formula::Forall { var, lo, hi, body } => Formula::Forall {
                var: var.clone(),
                lo: lo.rewrite(f),
                hi: hi.rewrite(f),
                body: bf(body, f),
            },
            Formula::Cases(cs) => Formula::Cases(cs.iter().map(|(g, b)| (g.rewrite(f), b.rewrite(f))).collect()),
            Formula::IsTrue(t) => Formula::IsTrue(t.rewrite(f)),
            Formula::IsSome(t) => Formula::IsSome(t.rewrite(f)),
            Formula::IsLeft(t) => Formula::IsLeft(t.rewrite(f)),
            Formula::IsCons(t) => Formula::IsCons(t.rewrite(f)),
            Formula::Mem(a, b) => Formula::Mem(a.rewrite(f), b.rewrite(f)),
            Formula::CheckSig(a, b, c) => Formula::CheckSig(a.rewrite(f), b.rewrite(f), c.rewrite(f)),
            Formula::TyIs(t, s) => Formula::TyIs(t.rewrite(f), *s),
        }
    }

    pub fn parts(&self) -> (Vec<&Term>, Vec<&Formula>) {
        match self {
            Formula::True | Formula::False => (vec![], vec![]),
            Formula::Cmp(_, a, b) | Formula::Mem(a, b) => (vec![a, b], vec![]),
            Formula::Not(x) => (vec![], vec![x]),
            Formula::And(xs) | Formula::Or(xs) => (vec![], xs.iter().collect()),
            Formula::Implies(a, b) | Formula::Iff(a, b) => (vec![], vec![a, b]),
            Formula::Forall { lo, hi, body, .. } => (vec![lo, hi], vec![body]),
            Formula::Cases(cs) => (vec![], cs.iter().flat_map(|(g, b)| [g, b]).collect()),
            Formula::IsTrue(t) | Formula::IsSome(t) | Formula::IsLeft(t) | Formula::IsCons(t) | Formula::TyIs(t, _) => {
                (vec![t], vec![])
            }
            Formula::CheckSig(a, b, c) => (vec![a, b, c], vec![]),
        }
    }

    /// Every term occurring anywhere in the formula, outermost first.
    pub fn terms(&self) -> Vec<&Term> {
        fn go_t<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
            out.push(t);
            let (ts, fs) = t.parts();
            ts.into_iter().for_each(|x| go_t(x, out));
            fs.into_iter().for_each(|x| go_f(x, out));
        }
        fn go_f<'a>(f: &'a Formula, out: &mut Vec<&'a Term>) {
            let (ts, fs) = f.parts();
            ts.into_iter().for_each(|x| go_t(x, out));
            fs.into_iter().for_each(|x| go_f(x, out));
        }
        let mut out = Vec::new();
        go_f(self, &mut out);
        out
    }

    /// Substitutes `var` by `t` (no capture: bound names are distinct by
    /// construction).
    pub fn subst_var(&self, var: &str, t: &Term) -> Formula {
        self.rewrite(&mut |x| match x {
            Term::Var(v) if v == var => Some(t.clone()),
            _ => None,
        })
    }
}

fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for StackRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StackRef::S => "s",
            StackRef::Result => "result",
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Var(v) | Term::Name(v) | Term::Sym(v, _) => f.write_str(v),
            Term::Len(s) => write!(f, "len({s})"),
            Term::Arith(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Term::Neg(a) => write!(f, "-({a})"),
            Term::IntOf(a) => write!(f, "num({a})"),
            Term::CompareV(a, b) => write!(f, "compare({a}, {b})"),
            Term::Size(a) => write!(f, "size({a})"),
            Term::Call(n, args) => {
                write!(f, "{n}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            Term::Ite(c, a, b) => write!(f, "(if {c} then {a} else {b})"),
            Term::Slot(s, i) => write!(f, "{s}[{i}]"),
            Term::Lit(v) => f.write_str(&v.to_atom()),
            Term::Mk(k, a) => write!(f, "{}({a})", k.ty()),
            Term::MkBool(c) => write!(f, "bool({c})"),
            Term::MkPair(a, b) => write!(f, "Pair({a}, {b})"),
            Term::Car(a) => write!(f, "car({a})"),
            Term::Cdr(a) => write!(f, "cdr({a})"),
            Term::MkSome(a) => write!(f, "Some({a})"),
            Term::MkNone(t) => write!(f, "None<{t}>"),
            Term::Unsome(a) => write!(f, "unsome({a})"),
            Term::MkLeft(a, t) => write!(f, "Left<{t}>({a})"),
            Term::MkRight(a, t) => write!(f, "Right<{t}>({a})"),
            Term::Unleft(a) => write!(f, "unleft({a})"),
            Term::Unright(a) => write!(f, "unright({a})"),
            Term::MkNil(t) => write!(f, "Nil<{t}>"),
            Term::MkCons(a, b) => write!(f, "Cons({a}, {b})"),
            Term::Head(a) => write!(f, "head({a})"),
            Term::Tail(a) => write!(f, "tail({a})"),
            Term::Concat(a, b) => write!(f, "concat({a}, {b})"),
            Term::MapGet(a, b) => write!(f, "get({a}, {b})"),
            Term::Update(a, b, c) => write!(f, "update({a}, {b}, {c})"),
            Term::Digest(tag, args, _) => {
                write!(f, "{tag}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            Term::Pack(a) => write!(f, "pack({a})"),
            Term::Unpack(a, t) => write!(f, "unpack<{t}>({a})"),
            Term::Transfer(a, b, c) => write!(f, "transfer({a}, {b}, {c})"),
            Term::SetDelegate(a) => write!(f, "set_delegate({a})"),
            Term::TypeOf(a) => write!(f, "typeof({a})"),
            Term::TyLit(t) => write!(f, "<{t}>"),
            Term::TyApp(c, args) => {
                write!(f, "{}<", c.name())?;
                list(f, args)?;
                f.write_str(">")
            }
            Term::TyArg(a, k) => write!(f, "arg{k}({a})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Formula], op: &str, empty: &str| -> fmt::Result {
            if xs.is_empty() {
                return f.write_str(empty);
            }
            if xs.len() == 1 {
                return write!(f, "{}", xs[0]);
            }
            f.write_str("(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Formula::Not(x) => write!(f, "!({x})"),
            Formula::And(xs) => join(f, xs, "&&", "true"),
            Formula::Or(xs) => join(f, xs, "||", "false"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Formula::Forall { var, lo, hi, body } => write!(f, "(forall {var} in {lo}..{hi}: {body})"),
            Formula::Cases(cs) => {
                f.write_str("case {")?;
                for (g, b) in cs {
                    write!(f, " {g} => {b} |")?;
                }
                f.write_str(" _ => false }")
            }
            Formula::IsTrue(t) => write!(f, "{t}"),
            Formula::IsSome(t) => write!(f, "is_some({t})"),
            Formula::IsLeft(t) => write!(f, "is_left({t})"),
            Formula::IsCons(t) => write!(f, "is_cons({t})"),
            Formula::Mem(a, b) => write!(f, "mem({a}, {b})"),
            Formula::CheckSig(a, b, c) => write!(f, "check_signature({a}, {b}, {c})"),
            Formula::TyIs(t, s) => write!(f, "is_{}({t})", s.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    #[test]
    fn display_frame_clause() {
        let f = forall("i", int(1), len_r(), eq(r_at(var("i")), s_at(add(var("i"), int(1)))));
        assert_eq!(f.to_string(), "(forall i in 1..len(result): result[i] = s[(i + 1)])");
    }

    #[test]
    fn subst_replaces_only_the_variable() {
        let f = eq(r_at(var("i")), s_at(var("j")));
        assert_eq!(f.subst_var("i", &int(3)), eq(r(3), s_at(var("j"))));
    }

    #[test]
    fn terms_lists_nested() {
        let f = Formula::IsTrue(Term::MkBool(Box::new(eq(s(0), s(1)))));
        assert_eq!(f.terms().iter().filter(|t| matches!(t, Term::Slot(..))).count(), 2);
    }
}
