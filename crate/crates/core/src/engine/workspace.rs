use super::EngineError;
use crate::diag::Diagnostic;
use crate::ppr::{parse_ppr, write_ppr, PprModel};
use crate::transform::{model_statistics, transform, TransformOutput, KIND, KIND_PRODUCT};
use crate::vmodels::{cdc_read, cdc_write, check_cdc_refs, dm_read, dm_write, fm_read, fm_write, Decision, Range};
use std::collections::HashSet;
use std::fs;
use std::path::Path;

/// Files making up a workspace directory, in write order.
pub const WORKSPACE_FILES: [&str; 6] = ["model.ppr", "product.fm", "process.dm", "resource.fm", "links.cdc", "stats"];

/// A PPR model together with its derived models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workspace {
    pub ppr: PprModel,
    pub models: TransformOutput,
}

impl Workspace {
    pub fn from_ppr(ppr: PprModel, name: &str) -> Result<Self, Vec<Diagnostic>> {
        let models = transform(&ppr, name)?;
        Ok(Workspace { ppr, models })
    }

    pub fn is_product_decision(&self, d: &Decision) -> bool {
        match d.attributes.get(KIND) {
            Some(k) => k == KIND_PRODUCT,
            None => self.models.product_fm.features.contains_key(&d.id),
        }
    }

    pub fn product_decisions(&self) -> impl Iterator<Item = &Decision> {
        self.models.process_dm.decisions.values().filter(|d| self.is_product_decision(d))
    }

    pub fn process_decisions(&self) -> impl Iterator<Item = &Decision> {
        self.models.process_dm.decisions.values().filter(|d| !self.is_product_decision(d))
    }

    /// Problems that keep a session from starting: broken models and
    /// unresolved CDC references.
    pub fn check(&self) -> Vec<Diagnostic> {
        let m = &self.models;
        let mut out = m.product_fm.check();
        out.extend(m.resource_fm.check());
        out.extend(m.process_dm.check());
        out.extend(check_cdc_refs(&m.cdcs, |model, el| {
            if model == m.product_fm.model_id {
                m.product_fm.features.contains_key(el)
            } else if model == m.process_dm.model_id {
                m.process_dm.decisions.contains_key(el)
            } else if model == m.resource_fm.model_id {
                m.resource_fm.features.contains_key(el)
            } else {
                false
            }
        }));
        let enums: HashSet<&str> = m
            .process_dm
            .decisions
            .values()
            .filter(|d| matches!(d.range, Range::Enumeration(_)))
            .map(|d| d.id.as_str())
            .collect();
        for d in self.process_decisions() {
            if enums.contains(d.id.as_str()) {
                out.push(Diagnostic::error("range", "process decisions must be Boolean").about(&d.id));
            }
        }
        out
    }
}

/// Writes the model files and the statistics report into `dir`.
pub fn write_workspace(dir: &Path, ws: &Workspace) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let m = &ws.models;
    let stats = model_statistics(&ws.ppr, m);
    let contents = [
        write_ppr(&ws.ppr),
        fm_write(&m.product_fm),
        dm_write(&m.process_dm),
        fm_write(&m.resource_fm),
        cdc_write(&m.cdcs),
        stats.to_text(),
    ];
    for (name, text) in WORKSPACE_FILES.iter().zip(contents) {
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

/// Reads a workspace written by [`write_workspace`]. The model files are
/// taken as they are, so hand edits survive.
pub fn load_workspace(dir: &Path) -> Result<Workspace, EngineError> {
    let read = |name: &str| {
        fs::read_to_string(dir.join(name)).map_err(|e| {
            EngineError::Inconsistent(vec![Diagnostic::error("io", format!("{}: {e}", dir.join(name).display()))])
        })
    };
    let located = |name: &str, d: Diagnostic| {
        let mut d = d;
        d.message = format!("{name}: {}", d.message);
        EngineError::Inconsistent(vec![d])
    };
    let ppr = parse_ppr(&read("model.ppr")?).map_err(EngineError::Inconsistent)?;
    let product_fm = fm_read(&read("product.fm")?).map_err(|d| located("product.fm", d))?;
    let process_dm = dm_read(&read("process.dm")?).map_err(|d| located("process.dm", d))?;
    let resource_fm = fm_read(&read("resource.fm")?).map_err(|d| located("resource.fm", d))?;
    let cdcs = cdc_read(&read("links.cdc")?).map_err(|d| located("links.cdc", d))?;
    let name = product_fm.model_id.strip_suffix("_product").unwrap_or(&product_fm.model_id).to_string();
    Ok(Workspace {
        ppr,
        models: TransformOutput { name, product_fm, process_dm, resource_fm, cdcs, warnings: Vec::new() },
    })
}
