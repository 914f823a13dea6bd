use std::fmt;

/// The comparable core: the only types admitting the total order used by
/// `COMPARE` and the only legal key types for sets and maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparable {
    Int,
    Nat,
    String,
    Bytes,
    Mutez,
    Bool,
    KeyHash,
    Timestamp,
    Address,
}

impl Comparable {
    pub const ALL: [Comparable; 9] = [
        Comparable::Int,
        Comparable::Nat,
        Comparable::String,
        Comparable::Bytes,
        Comparable::Mutez,
        Comparable::Bool,
        Comparable::KeyHash,
        Comparable::Timestamp,
        Comparable::Address,
    ];

    pub fn ty(self) -> Ty {
        match self {
            Comparable::Int => Ty::Int,
            Comparable::Nat => Ty::Nat,
            Comparable::String => Ty::String,
            Comparable::Bytes => Ty::Bytes,
            Comparable::Mutez => Ty::Mutez,
            Comparable::Bool => Ty::Bool,
            Comparable::KeyHash => Ty::KeyHash,
            Comparable::Timestamp => Ty::Timestamp,
            Comparable::Address => Ty::Address,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Comparable::Int => "int",
            Comparable::Nat => "nat",
            Comparable::String => "string",
            Comparable::Bytes => "bytes",
            Comparable::Mutez => "mutez",
            Comparable::Bool => "bool",
            Comparable::KeyHash => "key_hash",
            Comparable::Timestamp => "timestamp",
            Comparable::Address => "address",
        }
    }

    /// Integer-valued comparables share one numeric encoding.
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            Comparable::Int | Comparable::Nat | Comparable::Mutez | Comparable::Timestamp
        )
    }
}

impl fmt::Display for Comparable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Michelson types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Int,
    Nat,
    String,
    Bytes,
    Mutez,
    Bool,
    KeyHash,
    Timestamp,
    Address,
    Key,
    Signature,
    ChainId,
    Unit,
    Operation,
    Option(Box<Ty>),
    List(Box<Ty>),
    Pair(Box<Ty>, Box<Ty>),
    Or(Box<Ty>, Box<Ty>),
    Set(Comparable),
    Map(Comparable, Box<Ty>),
    BigMap(Comparable, Box<Ty>),
    Contract(Box<Ty>),
}

impl Ty {
    pub fn option(t: Ty) -> Ty {
        Ty::Option(Box::new(t))
    }

    pub fn list(t: Ty) -> Ty {
        Ty::List(Box::new(t))
    }

    pub fn pair(a: Ty, b: Ty) -> Ty {
        Ty::Pair(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ty, b: Ty) -> Ty {
        Ty::Or(Box::new(a), Box::new(b))
    }

    pub fn map(k: Comparable, v: Ty) -> Ty {
        Ty::Map(k, Box::new(v))
    }

    pub fn big_map(k: Comparable, v: Ty) -> Ty {
        Ty::BigMap(k, Box::new(v))
    }

    pub fn contract(t: Ty) -> Ty {
        Ty::Contract(Box::new(t))
    }

    /// `Pair(List(Operation), storage)`, the result type of every contract.
    pub fn contract_result(storage: Ty) -> Ty {
        Ty::pair(Ty::list(Ty::Operation), storage)
    }

    pub fn comparable(&self) -> Option<Comparable> {
        Some(match self {
            Ty::Int => Comparable::Int,
            Ty::Nat => Comparable::Nat,
            Ty::String => Comparable::String,
            Ty::Bytes => Comparable::Bytes,
            Ty::Mutez => Comparable::Mutez,
            Ty::Bool => Comparable::Bool,
            Ty::KeyHash => Comparable::KeyHash,
            Ty::Timestamp => Comparable::Timestamp,
            Ty::Address => Comparable::Address,
            _ => return None,
        })
    }

    pub fn is_comparable(&self) -> bool {
        self.comparable().is_some()
    }

    /// Child types in constructor order.
    pub fn args(&self) -> Vec<Ty> {
        match self {
            Ty::Option(t) | Ty::List(t) | Ty::Contract(t) => vec![(**t).clone()],
            Ty::Pair(a, b) | Ty::Or(a, b) => vec![(**a).clone(), (**b).clone()],
            Ty::Set(c) => vec![c.ty()],
            Ty::Map(k, v) | Ty::BigMap(k, v) => vec![k.ty(), (**v).clone()],
            _ => Vec::new(),
        }
    }

    /// Whether a value of this type may appear in a `PUSH` literal.
    pub fn is_pushable(&self) -> bool {
        match self {
            Ty::Operation | Ty::BigMap(..) | Ty::Contract(_) => false,
            Ty::Option(t) | Ty::List(t) => t.is_pushable(),
            Ty::Pair(a, b) | Ty::Or(a, b) => a.is_pushable() && b.is_pushable(),
            Ty::Map(_, v) => v.is_pushable(),
            _ => true,
        }
    }

    fn fmt_arg(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args().is_empty() {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.comparable() {
            return f.write_str(c.keyword());
        }
        let head = match self {
            Ty::Key => return f.write_str("key"),
            Ty::Signature => return f.write_str("signature"),
            Ty::ChainId => return f.write_str("chain_id"),
            Ty::Unit => return f.write_str("unit"),
            Ty::Operation => return f.write_str("operation"),
            Ty::Option(_) => "option",
            Ty::List(_) => "list",
            Ty::Pair(..) => "pair",
            Ty::Or(..) => "or",
            Ty::Set(_) => "set",
            Ty::Map(..) => "map",
            Ty::BigMap(..) => "big_map",
            Ty::Contract(_) => "contract",
            _ => unreachable!("comparable types handled above"),
        };
        f.write_str(head)?;
        for a in self.args() {
            f.write_str(" ")?;
            a.fmt_arg(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_nests_arguments() {
        let t = Ty::pair(Ty::list(Ty::Operation), Ty::Nat);
        assert_eq!(t.to_string(), "pair (list operation) nat");
        assert_eq!(Ty::map(Comparable::String, Ty::option(Ty::Int)).to_string(), "map string (option int)");
    }

    #[test]
    fn comparable_subset_is_exact() {
        for c in Comparable::ALL {
            assert_eq!(c.ty().comparable(), Some(c));
        }
        assert!(Ty::Key.comparable().is_none());
        assert!(Ty::pair(Ty::Nat, Ty::Nat).comparable().is_none());
    }
}
