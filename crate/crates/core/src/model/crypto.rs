//! Abstract stand-ins for hashing, serialization and signatures.
//!
//! Every result is an [`Abstract`] value whose digest depends only on the
//! tag and the inputs, so equal inputs give equal outputs.

use super::ty::Ty;
use super::value::{Abstract, Value};

/// Tags for the three hash instructions.
pub const HASH_TAGS: [&str; 3] = ["sha256", "sha512", "blake2b"];

pub fn hash(tag: &str, input: &Value) -> Value {
    Value::Abstract(Abstract::mint(tag, &[input], Ty::Bytes))
}

pub fn hash_key(key: &Value) -> Value {
    Value::Abstract(Abstract::mint("hash_key", &[key], Ty::KeyHash))
}

/// `PACK`: the packed bytes remember the original value.
pub fn pack(v: &Value) -> Value {
    let mut a = Abstract::mint("pack", &[v], Ty::Bytes);
    a.origin = Some(Box::new(v.clone()));
    Value::Abstract(a)
}

/// `UNPACK`: recovers a value only from bytes produced by [`pack`] on a
/// value of type `ty`.
pub fn unpack(bytes: &Value, ty: &Ty) -> Value {
    match bytes {
        Value::Abstract(Abstract {
            tag,
            origin: Some(v),
            ..
        }) if tag == "pack" && v.typ_infer() == *ty => Value::some((**v).clone()),
        _ => Value::None(ty.clone()),
    }
}

/// Signature of `payload` under `key`, as accepted by [`check_signature`].
pub fn sign(key: &Value, payload: &Value) -> Value {
    Value::Abstract(Abstract::mint("sign", &[key, payload], Ty::Signature))
}

/// True iff `sig` was produced by [`sign`] for this key and payload.
pub fn check_signature(key: &Value, sig: &Value, payload: &Value) -> bool {
    *sig == sign(key, payload)
}

/// `SIZE` of strings, bytes and collections. Abstract bytes have the
/// length of the hash they stand for (64 for sha512, 32 otherwise).
pub fn size(v: &Value) -> Option<usize> {
    Some(match v {
        Value::String(s) => s.chars().count(),
        Value::Bytes(b) => b.len(),
        Value::List(xs, _) => xs.len(),
        Value::Set(xs, _) => xs.len(),
        Value::Map(es, ..) | Value::BigMap(es, ..) => es.len(),
        Value::Abstract(a) if a.ty == Ty::Bytes => {
            if a.tag == "sha512" {
                64
            } else {
                32
            }
        }
        _ => return None,
    })
}

/// `CONCAT` of two strings or two byte sequences. Concatenating abstract
/// bytes yields another abstract value.
pub fn concat(a: &Value, b: &Value) -> Option<Value> {
    Some(match (a, b) {
        (Value::String(x), Value::String(y)) => Value::String(format!("{x}{y}")),
        (Value::Bytes(x), Value::Bytes(y)) => Value::Bytes([x.as_slice(), y.as_slice()].concat()),
        _ if a.typ_infer() == Ty::Bytes && b.typ_infer() == Ty::Bytes => {
            Value::Abstract(Abstract::mint("concat", &[a, b], Ty::Bytes))
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip() {
        let v = Value::pair(Value::int(-3), Value::String("x".into()));
        let p = pack(&v);
        assert_eq!(p.typ_infer(), Ty::Bytes);
        assert_eq!(unpack(&p, &v.typ_infer()), Value::some(v.clone()));
        assert_eq!(unpack(&p, &Ty::Int), Value::None(Ty::Int));
        assert_eq!(unpack(&Value::Bytes(vec![1]), &Ty::Int), Value::None(Ty::Int));
    }

    #[test]
    fn signatures() {
        let k = Value::Key("edpk1".into());
        let m = Value::Bytes(vec![0xab]);
        let s = sign(&k, &m);
        assert!(check_signature(&k, &s, &m));
        assert!(!check_signature(&Value::Key("edpk2".into()), &s, &m));
        assert!(!check_signature(&k, &Value::Signature("sig".into()), &m));
    }

    #[test]
    fn hashes_are_deterministic() {
        let b = Value::Bytes(vec![1, 2]);
        assert_eq!(hash("sha512", &b), hash("sha512", &b));
        assert_ne!(hash("sha512", &b), hash("sha256", &b));
    }
}
