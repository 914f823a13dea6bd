//! Types, values, the comparison order and literal parsing.

mod compare;
pub mod crypto;
mod literal;
mod ty;
mod value;

pub use compare::{compare, compare_bool, CompareError};
pub use literal::{parse_literal, value_of_data, LiteralError};
pub use ty::{Comparable, Ty};
pub use value::{digest_of, Abstract, Operation, Value, ValueError, MUTEZ_MAX};
