use std::fmt;

use crate::model::{Ty, Value};

/// Immutable execution stack. Index 0 is the top.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Stack {
    // Top of stack is the last element.
    slots: Vec<Value>,
}

/// Static view of a stack: one type per slot, index 0 is the top.
pub type StackTy = Vec<Ty>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("stack index {index} out of bounds for length {len}")]
pub struct OutOfBounds {
    pub index: usize,
    pub len: usize,
}

impl Stack {
    pub fn new() -> Stack {
        Stack::default()
    }

    /// Builds a stack from slots listed top first.
    pub fn from_top(slots: Vec<Value>) -> Stack {
        let mut slots = slots;
        slots.reverse();
        Stack { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn push(&self, v: Value) -> Stack {
        let mut slots = self.slots.clone();
        slots.push(v);
        Stack { slots }
    }

    pub fn top(&self) -> Result<&Value, OutOfBounds> {
        self.at(0)
    }

    pub fn at(&self, i: usize) -> Result<&Value, OutOfBounds> {
        let len = self.len();
        if i >= len {
            return Err(OutOfBounds { index: i, len });
        }
        Ok(&self.slots[len - 1 - i])
    }

    /// The stack without its top `n` slots.
    pub fn drop_n(&self, n: usize) -> Result<Stack, OutOfBounds> {
        self.tail_from(n)
    }

    /// Slots `i..`, i.e. the stack below the first `i` slots.
    pub fn tail_from(&self, i: usize) -> Result<Stack, OutOfBounds> {
        let len = self.len();
        if i > len {
            return Err(OutOfBounds { index: i, len });
        }
        Ok(Stack {
            slots: self.slots[..len - i].to_vec(),
        })
    }

    /// The top `n` slots, top first.
    pub fn take(&self, n: usize) -> Result<Vec<Value>, OutOfBounds> {
        (0..n).map(|i| self.at(i).cloned()).collect()
    }

    /// Pushes `values` so that `values[0]` ends on top.
    pub fn push_all(&self, values: Vec<Value>) -> Stack {
        let mut slots = self.slots.clone();
        slots.extend(values.into_iter().rev());
        Stack { slots }
    }

    /// Slots top first.
    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.slots.iter().rev()
    }

    pub fn ty_of(&self) -> StackTy {
        self.iter().map(Value::typ_infer).collect()
    }

    pub fn well_formed(&self) -> bool {
        self.slots.iter().all(Value::well_formed)
    }
}

/// One slot per line: `i: <value> : <type>`.
impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.iter().enumerate() {
            writeln!(f, "{i}: {v} : {}", v.typ_infer())?;
        }
        Ok(())
    }
}

pub fn fmt_stack_ty(s: &[Ty]) -> String {
    let parts: Vec<_> = s.iter().map(|t| t.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accessors() {
        assert_eq!(Stack::new().push(Value::Unit), Stack::from_top(vec![Value::Unit]));
        let s = Stack::from_top(vec![Value::int(1), Value::int(2), Value::int(3)]);
        assert_eq!(s.tail_from(2).unwrap(), Stack::from_top(vec![Value::int(3)]));
        assert_eq!(s.at(1).unwrap(), &Value::int(2));
        assert_eq!(s.drop_n(3).unwrap().len(), 0);
        assert!(s.at(3).is_err());
        assert!(s.drop_n(4).is_err());
    }

    #[test]
    fn debug_rendering() {
        let s = Stack::from_top(vec![Value::Nat(5u8.into()), Value::Unit]);
        assert_eq!(s.to_string(), "0: 5 : nat\n1: Unit : unit\n");
    }

    proptest! {
        #[test]
        fn push_then_at_zero(xs in proptest::collection::vec(any::<i64>(), 0..8), v in any::<i64>()) {
            let s = Stack::from_top(xs.iter().map(|x| Value::int(*x)).collect());
            let before = s.clone();
            let pushed = s.push(Value::int(v));
            prop_assert_eq!(pushed.at(0).unwrap(), &Value::int(v));
            prop_assert_eq!(pushed.len(), s.len() + 1);
            prop_assert_eq!(&s, &before);
            let mut expect = vec![Ty::Int];
            expect.extend(s.ty_of());
            prop_assert_eq!(pushed.ty_of(), expect);
            prop_assert_eq!(pushed.drop_n(1).unwrap(), s);
        }
    }
}
