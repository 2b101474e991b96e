use super::{TransformOutput, KIND, KIND_PRODUCT};
use crate::logic::Formula;
use crate::ppr::{Category, PprModel};
use crate::vmodels::{qualify, CdcRule};

/// Cross-model rules in four blocks: product feature to product decision,
/// product feature to consuming processes, process to required resources,
/// and the PPR constraints spanning models.
pub fn derive_cdcs(ppr: &PprModel, out: &TransformOutput) -> Vec<CdcRule> {
    let pm = &out.product_fm.model_id;
    let dm = &out.process_dm.model_id;
    let rm = &out.resource_fm.model_id;
    let p = |id: &str| Formula::var(qualify(pm, id));
    let d = |id: &str| Formula::var(qualify(dm, id));
    let r = |id: &str| Formula::var(qualify(rm, id));
    let is_product_decision = |id: &str| {
        out.process_dm
            .decisions
            .get(id)
            .is_some_and(|x| x.attributes.get(KIND).map(String::as_str) == Some(KIND_PRODUCT))
    };
    let mut rules = Vec::new();
    for f in out.product_fm.concrete_features() {
        if is_product_decision(&f.id) {
            rules.push(CdcRule::new(p(&f.id), d(&f.id)));
        }
    }
    for f in out.product_fm.features.values() {
        if f.parent.is_none() {
            continue;
        }
        for proc in ppr.processes.values() {
            if !proc.is_abstract && proc.inputs.contains(&f.id) {
                rules.push(CdcRule::new(p(&f.id), d(&proc.id)));
            }
        }
    }
    for proc in ppr.processes.values() {
        for res in &proc.resources {
            if out.resource_fm.features.contains_key(res) {
                rules.push(CdcRule::new(d(&proc.id), r(res)));
            }
        }
    }
    for c in ppr.constraints.values() {
        let vars = c.expr.variables();
        if vars.is_empty() {
            continue;
        }
        let mut ok = true;
        let q = c.expr.map_vars(&mut |v| match ppr.categories_of(v).first() {
            Some(Category::Product) if out.product_fm.features.contains_key(v) => p(v),
            Some(Category::Process) => d(v),
            Some(Category::Resource) => r(v),
            _ => {
                ok = false;
                Formula::var(v)
            }
        });
        if !ok {
            continue;
        }
        rules.push(match q {
            Formula::Implies(a, b) => CdcRule::new(*a, *b),
            other => CdcRule::new(Formula::True, other),
        });
    }
    rules
}
