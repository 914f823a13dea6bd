use chrono::DateTime;
use num_bigint::BigInt;

use super::compare::compare;
use super::ty::Ty;
use super::value::Value;
use crate::syntax::{parse_data, Data};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiteralError {
    #[error("syntax error in literal: {0}")]
    Syntax(String),
    #[error("literal {data} does not have type {ty}")]
    Mismatch { data: String, ty: Ty },
    #[error("nat literal cannot be negative: {0}")]
    NegativeNat(BigInt),
    #[error("mutez literal out of range: {0}")]
    MutezRange(BigInt),
    #[error("invalid timestamp {0:?}")]
    Timestamp(String),
    #[error("elements of {0} literal must be strictly increasing")]
    Unsorted(Ty),
    #[error("type {0} has no literal form")]
    NoLiteral(Ty),
}

/// Parses a literal against its expected type.
pub fn parse_literal(text: &str, ty: &Ty) -> Result<Value, LiteralError> {
    let data = parse_data(text).map_err(|e| LiteralError::Syntax(e.to_string()))?;
    value_of_data(&data, ty)
}

fn mismatch(d: &Data, ty: &Ty) -> LiteralError {
    LiteralError::Mismatch {
        data: d.to_string(),
        ty: ty.clone(),
    }
}

fn prim<'d>(d: &'d Data, name: &str, arity: usize) -> Option<&'d [Data]> {
    match d {
        Data::Prim(p, args) if p == name && args.len() == arity => Some(args),
        _ => None,
    }
}

fn string_payload(d: &Data, ty: &Ty) -> Result<String, LiteralError> {
    match d {
        Data::String(s) => Ok(s.clone()),
        _ => Err(mismatch(d, ty)),
    }
}

fn check_increasing(items: &[Value], ty: &Ty) -> Result<(), LiteralError> {
    for w in items.windows(2) {
        if compare(&w[0], &w[1]) != Ok(-1) {
            return Err(LiteralError::Unsorted(ty.clone()));
        }
    }
    Ok(())
}

fn entries(d: &Data, ty: &Ty, kt: &Ty, vt: &Ty) -> Result<Vec<(Value, Value)>, LiteralError> {
    let Data::Seq(items) = d else {
        return Err(mismatch(d, ty));
    };
    let out = items
        .iter()
        .map(|e| {
            let args = prim(e, "Elt", 2).ok_or_else(|| mismatch(e, ty))?;
            Ok((value_of_data(&args[0], kt)?, value_of_data(&args[1], vt)?))
        })
        .collect::<Result<Vec<_>, LiteralError>>()?;
    let keys: Vec<_> = out.iter().map(|(k, _)| k.clone()).collect();
    check_increasing(&keys, ty)?;
    Ok(out)
}

/// Converts an untyped data expression to a value of type `ty`.
///
/// Timestamps accept either an integer (seconds since the epoch) or an
/// RFC3339 string. Set and map literals must list keys in strictly
/// increasing order.
pub fn value_of_data(d: &Data, ty: &Ty) -> Result<Value, LiteralError> {
    Ok(match ty {
        Ty::Int => match d {
            Data::Int(n) => Value::Int(n.clone()),
            _ => return Err(mismatch(d, ty)),
        },
        Ty::Nat => match d {
            Data::Int(n) => Value::nat(n.clone()).map_err(|_| LiteralError::NegativeNat(n.clone()))?,
            _ => return Err(mismatch(d, ty)),
        },
        Ty::Mutez => match d {
            Data::Int(n) => Value::mutez(n.clone()).map_err(|_| LiteralError::MutezRange(n.clone()))?,
            _ => return Err(mismatch(d, ty)),
        },
        Ty::Timestamp => match d {
            Data::Int(n) => Value::Timestamp(n.clone()),
            Data::String(s) => {
                let t = DateTime::parse_from_rfc3339(s).map_err(|_| LiteralError::Timestamp(s.clone()))?;
                Value::Timestamp(t.timestamp().into())
            }
            _ => return Err(mismatch(d, ty)),
        },
        Ty::String => Value::String(string_payload(d, ty)?),
        Ty::Bytes => match d {
            Data::Bytes(b) => Value::Bytes(b.clone()),
            _ => return Err(mismatch(d, ty)),
        },
        Ty::Bool => match d {
            Data::Prim(p, a) if a.is_empty() && p == "True" => Value::Bool(true),
            Data::Prim(p, a) if a.is_empty() && p == "False" => Value::Bool(false),
            _ => return Err(mismatch(d, ty)),
        },
        Ty::KeyHash => Value::KeyHash(string_payload(d, ty)?),
        Ty::Address => Value::Address(string_payload(d, ty)?),
        Ty::Key => Value::Key(string_payload(d, ty)?),
        Ty::Signature => Value::Signature(string_payload(d, ty)?),
        Ty::ChainId => Value::ChainId(string_payload(d, ty)?),
        Ty::Contract(t) => Value::Contract(string_payload(d, ty)?, (**t).clone()),
        Ty::Unit => {
            prim(d, "Unit", 0).ok_or_else(|| mismatch(d, ty))?;
            Value::Unit
        }
        Ty::Option(t) => {
            if prim(d, "None", 0).is_some() {
                Value::None((**t).clone())
            } else {
                let a = prim(d, "Some", 1).ok_or_else(|| mismatch(d, ty))?;
                Value::some(value_of_data(&a[0], t)?)
            }
        }
        Ty::Pair(a, b) => {
            let args = prim(d, "Pair", 2).ok_or_else(|| mismatch(d, ty))?;
            Value::pair(value_of_data(&args[0], a)?, value_of_data(&args[1], b)?)
        }
        Ty::Or(l, r) => {
            if let Some(a) = prim(d, "Left", 1) {
                Value::Left(Box::new(value_of_data(&a[0], l)?), (**r).clone())
            } else {
                let a = prim(d, "Right", 1).ok_or_else(|| mismatch(d, ty))?;
                Value::Right(Box::new(value_of_data(&a[0], r)?), (**l).clone())
            }
        }
        Ty::List(t) => match d {
            Data::Seq(items) => Value::List(
                items.iter().map(|i| value_of_data(i, t)).collect::<Result<_, _>>()?,
                (**t).clone(),
            ),
            _ => return Err(mismatch(d, ty)),
        },
        Ty::Set(c) => match d {
            Data::Seq(items) => {
                let elems: Vec<_> = items.iter().map(|i| value_of_data(i, &c.ty())).collect::<Result<_, _>>()?;
                check_increasing(&elems, ty)?;
                Value::Set(elems, *c)
            }
            _ => return Err(mismatch(d, ty)),
        },
        Ty::Map(k, v) => Value::Map(entries(d, ty, &k.ty(), v)?, *k, (**v).clone()),
        Ty::BigMap(k, v) => Value::BigMap(entries(d, ty, &k.ty(), v)?, *k, (**v).clone()),
        Ty::Operation => return Err(LiteralError::NoLiteral(ty.clone())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Comparable;

    #[test]
    fn examples() {
        assert_eq!(parse_literal("1", &Ty::Nat), Ok(Value::Nat(1.into())));
        assert_eq!(
            parse_literal("Pair 0 {}", &Ty::pair(Ty::Nat, Ty::list(Ty::Operation))),
            Ok(Value::pair(Value::Nat(0.into()), Value::List(vec![], Ty::Operation)))
        );
        assert_eq!(
            parse_literal("\"1970-01-01T00:00:01Z\"", &Ty::Timestamp),
            Ok(Value::Timestamp(1.into()))
        );
    }

    #[test]
    fn errors() {
        assert_eq!(parse_literal("-1", &Ty::Nat), Err(LiteralError::NegativeNat((-1).into())));
        assert!(matches!(
            parse_literal("9223372036854775808", &Ty::Mutez),
            Err(LiteralError::MutezRange(_))
        ));
        assert!(matches!(parse_literal("\"x\"", &Ty::Int), Err(LiteralError::Mismatch { .. })));
        assert!(matches!(
            parse_literal("{ 2 ; 1 }", &Ty::Set(Comparable::Int)),
            Err(LiteralError::Unsorted(_))
        ));
        assert!(matches!(
            parse_literal("{ Elt 1 Unit ; Elt 1 Unit }", &Ty::map(Comparable::Int, Ty::Unit)),
            Err(LiteralError::Unsorted(_))
        ));
    }

    #[test]
    fn nested_literals() {
        let ty = Ty::or(Ty::option(Ty::Int), Ty::map(Comparable::String, Ty::Bool));
        let v = parse_literal("Right { Elt \"a\" True ; Elt \"b\" False }", &ty).unwrap();
        assert_eq!(v.typ_infer(), ty);
        assert!(v.well_formed());
        let v = parse_literal("Left (Some -3)", &ty).unwrap();
        assert_eq!(v.typ_infer(), ty);
    }
}
