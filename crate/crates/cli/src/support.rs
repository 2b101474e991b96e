use crate::Format;
use pprvari_core::engine::{load_workspace, EngineError, Snapshot, StagedSession, Workspace};
use pprvari_core::Diagnostic;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const SESSION_FILE: &str = "session.json";

pub struct Ctx {
    pub format: Format,
    pub workspace: Option<PathBuf>,
}

/// A failed command: exit code and what goes to the error stream.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    /// Invalid input model or configuration.
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match &e {
            EngineError::Inconsistent(ds) if ds.iter().any(|d| d.rule == "io") => Failure::usage(e.to_string()),
            EngineError::PermutationRange { .. } => Failure::usage(e.to_string()),
            _ => Failure::invalid(e.to_string()),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

impl Ctx {
    pub fn workspace_dir(&self) -> Result<&Path, Failure> {
        self.workspace
            .as_deref()
            .ok_or_else(|| Failure::usage("no workspace: pass --workspace or set PPRVARI_WORKSPACE"))
    }

    pub fn load(&self) -> Result<Arc<Workspace>, Failure> {
        Ok(Arc::new(load_workspace(self.workspace_dir()?)?))
    }

    pub fn structured(&self) -> bool {
        self.format == Format::Structured
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> CmdResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn print_json<T: Serialize>(v: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::internal(e.to_string()))?;
    println!("{text}");
    Ok(())
}

/// Diagnostics rendered one per line, prefixed with the file they are about.
pub fn render_diagnostics(file: &Path, ds: &[Diagnostic]) -> String {
    ds.iter()
        .map(|d| match d.pos {
            Some(_) => format!("{}:{d}", file.display()),
            None => format!("{}: {d}", file.display()),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn restore_session(ws: Arc<Workspace>, path: &Path) -> Result<StagedSession, Failure> {
    let snap = Snapshot::from_json(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    snap.restore(ws).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}
