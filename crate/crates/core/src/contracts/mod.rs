//! Per-opcode contracts, the formula language they are written in, and its
//! evaluator.

pub mod eval;
pub mod formula;
pub mod logic;
mod table;

pub use eval::{eval_formula, eval_term, Env, EvalError, Val};
pub use formula::{ArithOp, CmpOp, Formula, NumKind, StackRef, Term, TyCtor, TyShape};
pub use logic::{LogicError, LogicFn, LogicTable};
pub use table::{contract_of, env_name, frame_audit, OpcodeContract, Unsupported};
