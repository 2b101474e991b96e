//! Staged configuration: product selection, process sequence exploration
//! over the reduced decision model, and resource selection.

mod metric;
mod session;
mod snapshot;
mod workspace;

pub use metric::{factorial, permutations, SpaceMetric};
pub use session::{ResourceReduction, Stage, StagedSession};
pub use snapshot::{workspace_digest, Snapshot};
pub use workspace::{load_workspace, write_workspace, Workspace, WORKSPACE_FILES};

use crate::diag::Diagnostic;
use crate::vmodels::DValue;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("operation needs the {expected} stage, session is at {actual}")]
    Stage { expected: Stage, actual: Stage },
    #[error("invalid configuration: {}", join(.0))]
    Violations(Vec<Diagnostic>),
    #[error("unknown decision {0}")]
    UnknownDecision(String),
    #[error("value {value} is out of range for {decision}")]
    Range { decision: String, value: DValue },
    #[error("decision {0} is not visible")]
    NotVisible(String),
    #[error("decision {0} is already set")]
    AlreadySet(String),
    #[error("taking {decision} violates rule `{rule}`")]
    RuleViolation { decision: String, rule: String },
    #[error("cannot roll back {requested} decisions, only {available} taken")]
    RollbackTooLarge { requested: usize, available: usize },
    #[error("visible decisions still open: {}", .0.join(", "))]
    Pending(Vec<String>),
    #[error("resource features both required and locked out: {}", .0.join(", "))]
    Contradiction(Vec<String>),
    #[error("inconsistent workspace: {}", join(.0))]
    Inconsistent(Vec<Diagnostic>),
    #[error("r = {r} exceeds n = {n}")]
    PermutationRange { n: u64, r: u64 },
    #[error("snapshot does not replay: {0}")]
    Replay(String),
}

fn join(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}
