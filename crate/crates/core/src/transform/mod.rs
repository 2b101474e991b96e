//! Derivation of the variability models from a PPR model.

mod links;
mod process;
mod product;
mod resource;
mod stats;

pub use links::derive_cdcs;
pub use process::to_process_dm;
pub use product::{to_product_fm, ProductStructure};
pub use resource::to_resource_fm;
pub use stats::{model_statistics, model_statistics_with_limit, DmStats, FmStats, PprStats, StatsReport, CONFIG_LIMIT};

use crate::diag::Diagnostic;
use crate::ppr::{validate_model, PprModel, Value};
use crate::vmodels::{CdcRule, DecisionModel, FeatureModel};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Decision attribute telling product decisions from process decisions.
pub const KIND: &str = "kind";
pub const KIND_PRODUCT: &str = "product";
pub const KIND_PROCESS: &str = "process";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformOutput {
    pub name: String,
    pub product_fm: FeatureModel,
    pub process_dm: DecisionModel,
    pub resource_fm: FeatureModel,
    pub cdcs: Vec<CdcRule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<Diagnostic>,
}

pub fn product_model_id(name: &str) -> String {
    format!("{name}_product")
}

pub fn process_model_id(name: &str) -> String {
    format!("{name}_process")
}

pub fn resource_model_id(name: &str) -> String {
    format!("{name}_resource")
}

/// Runs all four derivations. Fails on a model that does not validate.
pub fn transform(ppr: &PprModel, name: &str) -> Result<TransformOutput, Vec<Diagnostic>> {
    let errors: Vec<Diagnostic> = validate_model(ppr).into_iter().filter(|d| d.is_error()).collect();
    if !errors.is_empty() {
        return Err(errors);
    }
    let ppr = ppr.normalized();
    let mut warnings = Vec::new();
    let structure = ProductStructure::analyze(&ppr, &mut warnings);
    let product_fm = product::build_fm(&ppr, &structure, name, &mut warnings);
    let process_dm = process::build_dm(&ppr, &structure, name);
    let resource_fm = resource::build_fm(&ppr, name, &mut warnings);
    let mut out = TransformOutput {
        name: name.to_string(),
        product_fm,
        process_dm,
        resource_fm,
        cdcs: Vec::new(),
        warnings: Vec::new(),
    };
    out.cdcs = derive_cdcs(&ppr, &out);
    out.warnings = warnings;
    Ok(out)
}

/// Products that no process produces, apart from processes that also
/// consume them. Declaration order.
pub fn components(ppr: &PprModel) -> Vec<String> {
    ppr.products
        .keys()
        .filter(|id| {
            !ppr.processes.values().any(|p| p.outputs.iter().any(|o| &o.product == *id) && !p.inputs.contains(*id))
        })
        .cloned()
        .collect()
}

/// String form of PPR attributes for feature and decision metadata.
fn attribute_strings(attrs: &IndexMap<String, Value>) -> IndexMap<String, String> {
    attrs
        .iter()
        .map(|(k, v)| {
            let s = v.as_str().map_or_else(|| v.to_string(), str::to_string);
            (k.clone(), s)
        })
        .collect()
}
