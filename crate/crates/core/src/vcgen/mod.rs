//! Verification-condition generation.

pub mod faithful;
pub mod mono;
pub mod sidecar;
pub mod simplify;
pub mod smt;

pub use faithful::{translate_faithful, translate_faithful_with, FaithfulOptions};
pub use mono::{generate_mono, Applied, MonoOutput, Vc, VcError};
pub use sidecar::{parse_sidecar, Clause, SidecarError, SpecSidecar};
pub use smt::{emit_smt, SmtError};

use crate::contracts::LogicTable;
use crate::solver::Job;

/// Solver jobs for a VC set. With `shortcut`, trivial VCs get no script
/// and are reported as discharged by the simplifier.
pub fn smt_jobs(vcs: &[Vc], logic: &LogicTable, shortcut: bool) -> Result<Vec<Job>, SmtError> {
    vcs.iter()
        .map(|vc| {
            let script = if shortcut && vc.is_trivial() { None } else { Some(emit_smt(vc, logic)?) };
            Ok(Job { name: vc.name.clone(), script })
        })
        .collect()
}
