//! Parsing, typechecking, execution and verification-condition generation
//! for Michelson smart contracts.

pub mod arbitrary;
pub mod contracts;
pub mod interp;
pub mod model;
pub mod solver;
pub mod stack;
pub mod syntax;
pub mod typecheck;
pub mod vcgen;

pub use model::{Comparable, Ty, Value};
pub use stack::{Stack, StackTy};
pub use syntax::{Contract, Instr, Node, Path};
