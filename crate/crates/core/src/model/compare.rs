use std::cmp::Ordering;

use super::ty::Ty;
use super::value::{Abstract, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("cannot compare {0} with {1}")]
    TypeMismatch(Ty, Ty),
    #[error("type {0} is not comparable")]
    NotComparable(Ty),
}

/// Three-way comparison over the comparable core: `-1`, `0` or `1`.
///
/// Numeric order for int/nat/mutez/timestamp, byte-lexicographic order for
/// string, bytes, key_hash and address, and `False < True`. Abstract values
/// (hash outputs) sort after every concrete value of their type, then by tag
/// and digest, so the order stays total.
pub fn compare(a: &Value, b: &Value) -> Result<i8, CompareError> {
    let (ta, tb) = (a.typ_infer(), b.typ_infer());
    if ta != tb {
        return Err(CompareError::TypeMismatch(ta, tb));
    }
    if !ta.is_comparable() {
        return Err(CompareError::NotComparable(ta));
    }
    let ord = match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => compare_bool(*x, *y).cmp(&0),
        (Value::Abstract(x), Value::Abstract(y)) => cmp_abstract(x, y),
        (Value::Abstract(_), _) => Ordering::Greater,
        (_, Value::Abstract(_)) => Ordering::Less,
        (Value::Bytes(x), Value::Bytes(y)) => x.cmp(y),
        (Value::String(x), Value::String(y))
        | (Value::KeyHash(x), Value::KeyHash(y))
        | (Value::Address(x), Value::Address(y)) => x.as_bytes().cmp(y.as_bytes()),
        _ => match (a.as_integer(), b.as_integer()) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => return Err(CompareError::NotComparable(ta)),
        },
    };
    Ok(match ord {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    })
}

pub fn compare_bool(a: bool, b: bool) -> i8 {
    match (a, b) {
        (false, true) => -1,
        (true, false) => 1,
        _ => 0,
    }
}

fn cmp_abstract(x: &Abstract, y: &Abstract) -> Ordering {
    (&x.tag, &x.digest).cmp(&(&y.tag, &y.digest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bool_table() {
        assert_eq!(compare_bool(false, true), -1);
        assert_eq!(compare_bool(true, false), 1);
        assert_eq!(compare_bool(true, true), 0);
        assert_eq!(compare_bool(false, false), 0);
    }

    #[test]
    fn examples() {
        assert_eq!(compare(&Value::Bool(false), &Value::Bool(true)), Ok(-1));
        assert_eq!(compare(&Value::int(7), &Value::int(7)), Ok(0));
        assert_eq!(
            compare(&Value::String("abc".into()), &Value::String("abd".into())),
            Ok(-1)
        );
    }

    #[test]
    fn mismatch_is_an_error() {
        assert!(matches!(
            compare(&Value::int(1), &Value::Nat(1.into())),
            Err(CompareError::TypeMismatch(..))
        ));
        assert!(matches!(compare(&Value::Unit, &Value::Unit), Err(CompareError::NotComparable(_))));
    }

    #[test]
    fn abstract_bytes_sort_after_concrete() {
        let h = Value::Abstract(Abstract::mint("sha256", &[&Value::Bytes(vec![])], Ty::Bytes));
        assert_eq!(compare(&Value::Bytes(vec![0xff; 4]), &h), Ok(-1));
        assert_eq!(compare(&h, &h.clone()), Ok(0));
    }
}
