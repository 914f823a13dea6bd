use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use sha2::{Digest as _, Sha256};

use super::compare::compare;
use super::ty::{Comparable, Ty};

/// Largest representable mutez amount, `2^63 - 1`.
pub const MUTEZ_MAX: i64 = i64::MAX;

/// Opaque result of a cryptographic or serialization instruction.
///
/// Equality is tag plus digest plus type; `origin` is carried only so that
/// `UNPACK` can recover a packed value and takes no part in comparisons.
#[derive(Debug, Clone)]
pub struct Abstract {
    pub tag: String,
    pub digest: String,
    pub ty: Ty,
    pub origin: Option<Box<Value>>,
}

impl Abstract {
    /// Mints an abstract value whose digest is a deterministic function of
    /// the tag and the rendered inputs.
    pub fn mint(tag: &str, inputs: &[&Value], ty: Ty) -> Abstract {
        Abstract {
            tag: tag.to_owned(),
            digest: digest_of(tag, inputs),
            ty,
            origin: None,
        }
    }
}

impl PartialEq for Abstract {
    fn eq(&self, other: &Self) -> bool {
        self.tag == other.tag && self.digest == other.digest && self.ty == other.ty
    }
}

impl Eq for Abstract {}

/// Hex SHA-256 over the tag and the canonical rendering of the inputs.
pub fn digest_of(tag: &str, inputs: &[&Value]) -> String {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    for v in inputs {
        h.update(b"\x1f");
        h.update(v.to_string().as_bytes());
        h.update(b"\x1f");
        h.update(v.typ_infer().to_string().as_bytes());
    }
    hex::encode(h.finalize())
}

/// Operations produced by `TRANSFER_TOKENS` and `SET_DELEGATE`. They are
/// recorded, never executed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operation {
    Transfer {
        parameter: Value,
        amount: Value,
        destination: Value,
    },
    SetDelegate(Value),
}

/// A Michelson datum. Composite constructors carry enough type information
/// for [`Value::typ_infer`] to be total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Nat(BigInt),
    String(String),
    Bytes(Vec<u8>),
    Mutez(i64),
    Bool(bool),
    KeyHash(String),
    /// Seconds since the Unix epoch.
    Timestamp(BigInt),
    Address(String),
    Key(String),
    Signature(String),
    ChainId(String),
    Unit,
    Some(Box<Value>),
    None(Ty),
    List(Vec<Value>, Ty),
    Pair(Box<Value>, Box<Value>),
    /// Left payload; the type is the right-hand side.
    Left(Box<Value>, Ty),
    /// Right payload; the type is the left-hand side.
    Right(Box<Value>, Ty),
    Set(Vec<Value>, Comparable),
    Map(Vec<(Value, Value)>, Comparable, Ty),
    BigMap(Vec<(Value, Value)>, Comparable, Ty),
    Contract(String, Ty),
    Operation(Box<Operation>),
    Abstract(Abstract),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("nat cannot be negative: {0}")]
    NegativeNat(BigInt),
    #[error("mutez out of range: {0}")]
    MutezRange(BigInt),
    #[error("element {value} has type {found}, expected {expected}")]
    ElementType {
        value: String,
        expected: Ty,
        found: Ty,
    },
    #[error("duplicate key {0}")]
    DuplicateKey(String),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Value {
        Value::Int(n.into())
    }

    pub fn nat(n: impl Into<BigInt>) -> Result<Value, ValueError> {
        let n = n.into();
        if n.is_negative() {
            return Err(ValueError::NegativeNat(n));
        }
        Ok(Value::Nat(n))
    }

    pub fn mutez(n: impl Into<BigInt>) -> Result<Value, ValueError> {
        let n = n.into();
        match i64::try_from(&n) {
            Ok(m) if m >= 0 => Ok(Value::Mutez(m)),
            _ => Err(ValueError::MutezRange(n)),
        }
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn some(v: Value) -> Value {
        Value::Some(Box::new(v))
    }

    pub fn list(elems: Vec<Value>, elem: Ty) -> Result<Value, ValueError> {
        for e in &elems {
            check_elem(e, &elem)?;
        }
        Ok(Value::List(elems, elem))
    }

    /// Builds a set, sorting and de-duplicating the elements.
    pub fn set(mut elems: Vec<Value>, elem: Comparable) -> Result<Value, ValueError> {
        for e in &elems {
            check_elem(e, &elem.ty())?;
        }
        elems.sort_by(cmp_total);
        elems.dedup();
        Ok(Value::Set(elems, elem))
    }

    /// Builds a map, sorting the entries and rejecting duplicate keys.
    pub fn map(mut entries: Vec<(Value, Value)>, key: Comparable, val: Ty) -> Result<Value, ValueError> {
        for (k, v) in &entries {
            check_elem(k, &key.ty())?;
            check_elem(v, &val)?;
        }
        entries.sort_by(|a, b| cmp_total(&a.0, &b.0));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ValueError::DuplicateKey(w[0].0.to_string()));
            }
        }
        Ok(Value::Map(entries, key, val))
    }

    /// The type of a value. Total.
    pub fn typ_infer(&self) -> Ty {
        match self {
            Value::Int(_) => Ty::Int,
            Value::Nat(_) => Ty::Nat,
            Value::String(_) => Ty::String,
            Value::Bytes(_) => Ty::Bytes,
            Value::Mutez(_) => Ty::Mutez,
            Value::Bool(_) => Ty::Bool,
            Value::KeyHash(_) => Ty::KeyHash,
            Value::Timestamp(_) => Ty::Timestamp,
            Value::Address(_) => Ty::Address,
            Value::Key(_) => Ty::Key,
            Value::Signature(_) => Ty::Signature,
            Value::ChainId(_) => Ty::ChainId,
            Value::Unit => Ty::Unit,
            Value::Some(v) => Ty::option(v.typ_infer()),
            Value::None(t) => Ty::option(t.clone()),
            Value::List(_, t) => Ty::list(t.clone()),
            Value::Pair(a, b) => Ty::pair(a.typ_infer(), b.typ_infer()),
            Value::Left(v, r) => Ty::or(v.typ_infer(), r.clone()),
            Value::Right(v, l) => Ty::or(l.clone(), v.typ_infer()),
            Value::Set(_, c) => Ty::Set(*c),
            Value::Map(_, k, v) => Ty::map(*k, v.clone()),
            Value::BigMap(_, k, v) => Ty::big_map(*k, v.clone()),
            Value::Contract(_, t) => Ty::contract(t.clone()),
            Value::Operation(_) => Ty::Operation,
            Value::Abstract(a) => a.ty.clone(),
        }
    }

    /// Recursive well-formedness: numeric bounds, homogeneous collections and
    /// strictly increasing set/map keys.
    pub fn well_formed(&self) -> bool {
        match self {
            Value::Nat(n) => !n.is_negative(),
            Value::Mutez(m) => *m >= 0,
            Value::Some(v) | Value::Left(v, _) | Value::Right(v, _) => v.well_formed(),
            Value::Pair(a, b) => a.well_formed() && b.well_formed(),
            Value::List(elems, t) => elems.iter().all(|e| e.well_formed() && e.typ_infer() == *t),
            Value::Set(elems, c) => {
                elems.iter().all(|e| e.well_formed() && e.typ_infer() == c.ty()) && strictly_increasing(elems.iter())
            }
            Value::Map(entries, k, v) | Value::BigMap(entries, k, v) => {
                entries.iter().all(|(ek, ev)| {
                    ek.well_formed() && ev.well_formed() && ek.typ_infer() == k.ty() && ev.typ_infer() == *v
                }) && strictly_increasing(entries.iter().map(|(k, _)| k))
            }
            Value::Operation(op) => match &**op {
                Operation::Transfer {
                    parameter,
                    amount,
                    destination,
                } => {
                    parameter.well_formed()
                        && amount.well_formed()
                        && amount.typ_infer() == Ty::Mutez
                        && destination.typ_infer() == Ty::contract(parameter.typ_infer())
                }
                Operation::SetDelegate(d) => d.well_formed() && d.typ_infer() == Ty::option(Ty::KeyHash),
            },
            _ => true,
        }
    }

    /// Numeric payload of an int, nat, mutez or timestamp.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Value::Int(n) | Value::Nat(n) | Value::Timestamp(n) => Some(n.clone()),
            Value::Mutez(m) => Some(BigInt::from(*m)),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn is_atomic_display(&self) -> bool {
        match self {
            Value::Int(n) | Value::Nat(n) | Value::Timestamp(n) => !n.is_negative() || n.is_zero(),
            Value::Some(_) | Value::Left(..) | Value::Right(..) | Value::Pair(..) => false,
            _ => true,
        }
    }

    fn fmt_arg(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atomic_display() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }

    /// Rendering usable in argument position (parenthesized when needed).
    pub fn to_atom(&self) -> String {
        if self.is_atomic_display() {
            self.to_string()
        } else {
            format!("({self})")
        }
    }
}

fn check_elem(v: &Value, expected: &Ty) -> Result<(), ValueError> {
    let found = v.typ_infer();
    if &found != expected {
        return Err(ValueError::ElementType {
            value: v.to_string(),
            expected: expected.clone(),
            found,
        });
    }
    Ok(())
}

fn cmp_total(a: &Value, b: &Value) -> Ordering {
    match compare(a, b) {
        Ok(c) => c.cmp(&0),
        Err(_) => Ordering::Equal,
    }
}

fn strictly_increasing<'a>(mut it: impl Iterator<Item = &'a Value>) -> bool {
    let Some(mut prev) = it.next() else {
        return true;
    };
    for cur in it {
        if compare(prev, cur) != Ok(-1) {
            return false;
        }
        prev = cur;
    }
    true
}

fn write_string(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

fn write_seq<'a>(f: &mut fmt::Formatter<'_>, items: impl Iterator<Item = &'a Value>) -> fmt::Result {
    let items: Vec<_> = items.collect();
    if items.is_empty() {
        return f.write_str("{}");
    }
    f.write_str("{ ")?;
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(" ; ")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(" }")
}

fn write_entries(f: &mut fmt::Formatter<'_>, entries: &[(Value, Value)]) -> fmt::Result {
    if entries.is_empty() {
        return f.write_str("{}");
    }
    f.write_str("{ ")?;
    for (i, (k, v)) in entries.iter().enumerate() {
        if i > 0 {
            f.write_str(" ; ")?;
        }
        f.write_str("Elt ")?;
        k.fmt_arg(f)?;
        f.write_str(" ")?;
        v.fmt_arg(f)?;
    }
    f.write_str(" }")
}

/// Michelson literal syntax. Abstract values and operations, which have no
/// literal form, render as `<tag #digest>`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) | Value::Nat(n) | Value::Timestamp(n) => write!(f, "{n}"),
            Value::Mutez(m) => write!(f, "{m}"),
            Value::String(s)
            | Value::KeyHash(s)
            | Value::Address(s)
            | Value::Key(s)
            | Value::Signature(s)
            | Value::ChainId(s)
            | Value::Contract(s, _) => write_string(f, s),
            Value::Bytes(b) => write!(f, "0x{}", hex::encode(b)),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
            Value::Unit => f.write_str("Unit"),
            Value::Some(v) => {
                f.write_str("Some ")?;
                v.fmt_arg(f)
            }
            Value::None(_) => f.write_str("None"),
            Value::List(elems, _) | Value::Set(elems, _) => write_seq(f, elems.iter()),
            Value::Pair(a, b) => {
                f.write_str("Pair ")?;
                a.fmt_arg(f)?;
                f.write_str(" ")?;
                b.fmt_arg(f)
            }
            Value::Left(v, _) => {
                f.write_str("Left ")?;
                v.fmt_arg(f)
            }
            Value::Right(v, _) => {
                f.write_str("Right ")?;
                v.fmt_arg(f)
            }
            Value::Map(entries, ..) | Value::BigMap(entries, ..) => write_entries(f, entries),
            Value::Operation(op) => match &**op {
                Operation::Transfer {
                    parameter,
                    amount,
                    destination,
                } => write!(f, "<transfer {parameter} {amount} {destination}>"),
                Operation::SetDelegate(d) => write!(f, "<set_delegate {d}>"),
            },
            Value::Abstract(a) => write!(f, "<{} #{}>", a.tag, a.digest),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typ_infer_examples() {
        assert_eq!(Value::Nat(3.into()).typ_infer(), Ty::Nat);
        assert_eq!(
            Value::pair(Value::Nat(1.into()), Value::Nat(2.into())).typ_infer(),
            Ty::pair(Ty::Nat, Ty::Nat)
        );
        assert_eq!(Value::None(Ty::Int).typ_infer(), Ty::option(Ty::Int));
    }

    #[test]
    fn well_formed_examples() {
        let ok = Value::List(vec![Value::int(1), Value::int(2)], Ty::Int);
        assert!(ok.well_formed());
        let mixed = Value::List(vec![Value::int(1), Value::Nat(2.into())], Ty::Int);
        assert!(!mixed.well_formed());
        let dup = Value::Map(
            vec![(Value::int(1), Value::Unit), (Value::int(1), Value::Unit)],
            Comparable::Int,
            Ty::Unit,
        );
        assert!(!dup.well_formed());
        assert!(!Value::Nat((-1).into()).well_formed());
        assert!(!Value::Mutez(-1).well_formed());
    }

    #[test]
    fn smart_constructors_reject_bad_input() {
        assert!(Value::nat(-1).is_err());
        assert!(Value::mutez(BigInt::from(i64::MAX) + 1).is_err());
        assert!(Value::list(vec![Value::Unit], Ty::Int).is_err());
        assert!(Value::map(
            vec![(Value::int(2), Value::Unit), (Value::int(2), Value::Unit)],
            Comparable::Int,
            Ty::Unit
        )
        .is_err());
        let s = Value::set(vec![Value::int(3), Value::int(1), Value::int(3)], Comparable::Int).unwrap();
        assert_eq!(s, Value::Set(vec![Value::int(1), Value::int(3)], Comparable::Int));
        assert!(s.well_formed());
    }

    #[test]
    fn display_uses_literal_syntax() {
        let v = Value::pair(Value::List(vec![], Ty::Operation), Value::Nat(42.into()));
        assert_eq!(v.to_string(), "Pair {} 42");
        let v = Value::some(Value::pair(Value::int(-1), Value::String("a\"b".into())));
        assert_eq!(v.to_string(), "Some (Pair (-1) \"a\\\"b\")");
    }

    #[test]
    fn abstract_equality_ignores_origin() {
        let mut a = Abstract::mint("pack", &[&Value::Unit], Ty::Bytes);
        let b = a.clone();
        a.origin = Some(Box::new(Value::Unit));
        assert_eq!(a, b);
        let c = Abstract::mint("pack", &[&Value::int(0)], Ty::Bytes);
        assert_ne!(b, c);
    }
}
