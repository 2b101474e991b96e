use super::delta::{apply_delta, parse_delta, DeltaModel};
use super::fbn::FbNetwork;
use super::DeltaError;
use crate::diag::Diagnostic;
use crate::engine::{Stage, StagedSession};
use crate::logic::Truth;
use crate::vmodels::qualify;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write;
use std::path::Path;

pub const DELTA_ATTRIBUTE: &str = "deltaFile";

/// Delta models by name.
pub type DeltaSet = IndexMap<String, DeltaModel>;

/// A `deltaFile` entry: `D` applies when the element is selected, `!D`
/// when it is not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaBinding {
    pub element: String,
    pub delta_name: String,
    pub negated: bool,
}

fn parse_binding(element: String, value: &str) -> Vec<DeltaBinding> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            let negated = v.starts_with('!');
            DeltaBinding { element: element.clone(), delta_name: v.trim_start_matches('!').trim().to_string(), negated }
        })
        .collect()
}

/// Every binding in the workspace: process decisions, then resource
/// features, then product features, each in model order.
pub fn bindings(s: &StagedSession) -> Vec<DeltaBinding> {
    let m = &s.workspace().models;
    let mut out = Vec::new();
    for d in s.workspace().process_decisions() {
        if let Some(v) = d.attributes.get(DELTA_ATTRIBUTE) {
            out.extend(parse_binding(qualify(&m.process_dm.model_id, &d.id), v));
        }
    }
    for fm in [&m.resource_fm, &m.product_fm] {
        for f in fm.features.values() {
            if let Some(v) = f.attributes.get(DELTA_ATTRIBUTE) {
                out.extend(parse_binding(qualify(&fm.model_id, &f.id), v));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collected {
    pub binding: DeltaBinding,
    pub delta: DeltaModel,
}

/// Deltas whose bindings fire, processes in sequence order first. Each
/// delta is taken once.
pub fn collect_deltas(s: &StagedSession, deltas: &DeltaSet) -> Result<Vec<Collected>, DeltaError> {
    if s.stage() != Stage::Done {
        return Err(DeltaError::NotDone(s.stage()));
    }
    let m = &s.workspace().models;
    let seq: Vec<String> = s.sequence().iter().map(|id| qualify(&m.process_dm.model_id, id)).collect();
    let selected = |el: &str| -> bool {
        let (model, id) = crate::vmodels::split_ref(el).expect("bindings are qualified");
        if model == m.process_dm.model_id {
            s.sequence().iter().any(|x| x == id)
        } else if model == m.resource_fm.model_id {
            s.resource_config().is_some_and(|c| c.selected.contains(id))
        } else {
            s.product_config().is_some_and(|c| c.selected.contains(id))
        }
    };
    let mut all = bindings(s);
    all.sort_by_key(|b| seq.iter().position(|x| *x == b.element).unwrap_or(usize::MAX));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for b in all {
        if selected(&b.element) == b.negated || !seen.insert(b.delta_name.clone()) {
            continue;
        }
        let delta = deltas
            .get(&b.delta_name)
            .cloned()
            .ok_or_else(|| DeltaError::MissingDelta { delta: b.delta_name.clone(), element: b.element.clone() })?;
        out.push(Collected { binding: b, delta });
    }
    Ok(out)
}

/// Reads every `*.delta` file of `dir`, in file-name order.
pub fn load_delta_dir(dir: &Path) -> Result<DeltaSet, DeltaError> {
    let io = |e: std::io::Error| DeltaError::Io(format!("{}: {e}", dir.display()));
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "delta"))
        .collect();
    paths.sort();
    let mut set = DeltaSet::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(io)?;
        let d = parse_delta(&text).map_err(|e| match e {
            DeltaError::Syntax(mut d) => {
                d.message = format!("{}: {}", p.display(), d.message);
                DeltaError::Syntax(d)
            }
            other => other,
        })?;
        if set.contains_key(&d.name) {
            return Err(DeltaError::DuplicateDelta(d.name));
        }
        set.insert(d.name.clone(), d);
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// A selected process or resource has a block.
    Present,
    /// A variant that can never be chosen left no block behind.
    Absent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub kind: CheckKind,
    pub element: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub applied: Vec<String>,
    pub checks: Vec<Check>,
    pub warnings: Vec<Diagnostic>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.ok)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("consistency {}\n", if self.passed() { "PASS" } else { "FAIL" });
        for d in &self.applied {
            let _ = writeln!(s, "applied {d}");
        }
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Present => "present",
                CheckKind::Absent => "absent",
            };
            let _ = writeln!(s, "{kind} {} {}", c.element, if c.ok { "ok" } else { "FAILED" });
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning {}", w.message);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub network: FbNetwork,
    pub report: ConsistencyReport,
}

/// Applies the collected deltas to `base` and checks the result against
/// the session.
pub fn generate_artifact(s: &StagedSession, base: &FbNetwork, deltas: &DeltaSet) -> Result<Generated, DeltaError> {
    let collected = collect_deltas(s, deltas)?;
    let mut net = base.clone();
    let mut report = ConsistencyReport::default();
    for c in &collected {
        let (next, warnings) = apply_delta(&net, &c.delta)?;
        net = next;
        report.warnings.extend(warnings);
        report.applied.push(c.delta.name.clone());
    }
    let m = &s.workspace().models;
    let is_abstract_process = |id: &str| m.process_dm.decisions[id].visibility.is_literal_false();
    for id in s.sequence() {
        if !is_abstract_process(id) {
            report.checks.push(Check { kind: CheckKind::Present, element: id.clone(), ok: net.has_element(id) });
        }
    }
    let rfm = &m.resource_fm;
    if let Some(cfg) = s.resource_config() {
        for id in &cfg.selected {
            if *id != rfm.root && !rfm.features[id].is_abstract {
                report.checks.push(Check { kind: CheckKind::Present, element: id.clone(), ok: net.has_element(id) });
            }
        }
    }
    for d in s.workspace().process_decisions() {
        if !d.visibility.is_literal_false() && s.preset_visibility(&d.id) == Truth::False {
            let ok = !net.blocks.contains_key(&d.id);
            report.checks.push(Check { kind: CheckKind::Absent, element: d.id.clone(), ok });
        }
    }
    if let Some(red) = s.resource_reduction() {
        for id in &red.locked {
            if !rfm.features[id].is_abstract {
                let ok = !net.blocks.contains_key(id);
                report.checks.push(Check { kind: CheckKind::Absent, element: id.clone(), ok });
            }
        }
    }
    Ok(Generated { network: net, report })
}
