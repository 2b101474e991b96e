use super::session::{Stage, StagedSession};
use super::workspace::Workspace;
use super::EngineError;
use crate::vmodels::{cdc_write, dm_write, fm_write, DmConfiguration};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write;
use std::sync::Arc;

/// Serializable session state. Restoring replays the recorded choices on a
/// fresh session rather than trusting the stored assignments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub workspace_digest: String,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_selection: Option<Vec<String>>,
    pub process: DmConfiguration,
    #[serde(default)]
    pub forced: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sequence: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_selection: Option<Vec<String>>,
}

pub fn workspace_digest(ws: &Workspace) -> String {
    let m = &ws.models;
    let mut h = Sha256::new();
    for part in [fm_write(&m.product_fm), dm_write(&m.process_dm), fm_write(&m.resource_fm), cdc_write(&m.cdcs)] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Snapshot {
    pub fn of(s: &StagedSession) -> Snapshot {
        Snapshot {
            workspace_digest: workspace_digest(s.workspace()),
            stage: s.stage(),
            product_selection: s.product_config().map(|c| c.selected.iter().cloned().collect()),
            process: s.process_config().clone(),
            forced: s.forced(),
            sequence: s.sequence().to_vec(),
            resource_selection: s.resource_config().map(|c| c.selected.iter().cloned().collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Snapshot, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::Replay(e.to_string()))
    }

    /// Rebuilds the session on `ws` and checks it matches the snapshot.
    pub fn restore(&self, ws: Arc<Workspace>) -> Result<StagedSession, EngineError> {
        if workspace_digest(&ws) != self.workspace_digest {
            return Err(EngineError::Replay("snapshot was taken on different models".into()));
        }
        let mut s = StagedSession::new(ws)?;
        if let Some(sel) = &self.product_selection {
            s.set_product_config(sel)?;
        }
        for a in self.process.assignments.iter().filter(|a| a.origin == crate::vmodels::Origin::User) {
            s.take_decision(&a.decision, a.value.clone())?;
        }
        if self.stage >= Stage::Resource {
            s.finish_process(self.forced)?;
        }
        if let Some(sel) = &self.resource_selection {
            s.set_resource_config(sel)?;
        }
        let replayed = Snapshot::of(&s);
        if &replayed != self {
            return Err(EngineError::Replay("replayed state differs from the snapshot".into()));
        }
        Ok(s)
    }
}
