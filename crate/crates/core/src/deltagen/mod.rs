//! Delta models over a small function-block network: parsing, selection
//! from a finished session, application and the consistency report.

mod delta;
mod fbn;
mod generate;

pub use delta::{apply_delta, parse_delta, write_delta, DeltaModel, DeltaOp};
pub use fbn::{parse_fbn, write_fbn, Connection, Endpoint, FbNetwork};
pub use generate::{
    bindings, collect_deltas, generate_artifact, load_delta_dir, Check, CheckKind, Collected, ConsistencyReport,
    DeltaBinding, DeltaSet, Generated, DELTA_ATTRIBUTE,
};

use crate::diag::Diagnostic;
use crate::engine::Stage;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeltaError {
    #[error("{0}")]
    Syntax(Diagnostic),
    #[error("duplicate block {0}")]
    DuplicateBlock(String),
    #[error("connection {connection} refers to undeclared block {block}")]
    Dangling { connection: String, block: String },
    #[error("delta {delta} uses {uses}, base application is {app}")]
    UsesMismatch { delta: String, uses: String, app: String },
    #[error("delta {delta} failed: {reason}")]
    Apply { delta: String, reason: String },
    #[error("delta {delta} bound on {element} was not found")]
    MissingDelta { delta: String, element: String },
    #[error("delta {0} is defined twice")]
    DuplicateDelta(String),
    #[error("generation needs a finished session, session is at {0}")]
    NotDone(Stage),
    #[error("{0}")]
    Io(String),
}

impl From<Diagnostic> for DeltaError {
    fn from(d: Diagnostic) -> Self {
        DeltaError::Syntax(d)
    }
}
