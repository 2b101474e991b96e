use super::{attribute_strings, resource_model_id};
use crate::diag::Diagnostic;
use crate::logic::Formula;
use crate::ppr::{Category, PprModel};
use crate::vmodels::{Feature, FeatureModel, GroupKind, Variability};
use std::collections::HashMap;

/// Resource feature model of `ppr`.
pub fn to_resource_fm(ppr: &PprModel, name: &str) -> FeatureModel {
    build_fm(&ppr.normalized(), name, &mut Vec::new())
}

pub(super) fn build_fm(ppr: &PprModel, name: &str, warnings: &mut Vec<Diagnostic>) -> FeatureModel {
    let root = resource_model_id(name);
    let mut fm = FeatureModel::with_root(&root, &root);
    let mut parent: HashMap<&str, &str> = HashMap::new();
    for r in ppr.resources.values() {
        match r.implements.as_slice() {
            [] => {}
            [p] => {
                let mut cur = Some(p.as_str());
                let mut cyclic = false;
                while let Some(c) = cur {
                    if c == r.id {
                        cyclic = true;
                        break;
                    }
                    cur = parent.get(c).copied();
                }
                if !cyclic {
                    parent.insert(&r.id, p);
                }
            }
            _ => warnings.push(
                Diagnostic::warning(
                    "multiple-parents",
                    format!("{} implements several resources; kept as a feature attribute", r.id),
                )
                .about(&r.id),
            ),
        }
    }
    for r in ppr.resources.values() {
        let p = parent.get(r.id.as_str()).copied();
        let n_impl = ppr.implementers(Category::Resource, &r.id).len();
        let var = match p {
            Some(p) if ppr.implementers(Category::Resource, p).len() == 1 => Variability::Mandatory,
            _ => Variability::Optional,
        };
        let mut f = Feature::new(&r.id, Some(p.unwrap_or(&root)), var);
        f.name = r.name.clone();
        f.is_abstract = r.is_abstract;
        f.group = (n_impl >= 2).then_some(GroupKind::Or);
        f.attributes = attribute_strings(&r.attributes);
        if r.implements.len() > 1 {
            f.attributes.insert("implements".into(), r.implements.join(","));
        }
        fm.add(f);
    }
    fm.canonicalize();
    for r in ppr.resources.values() {
        for q in &r.requires {
            fm.constraints.push(Formula::implies(Formula::var(&r.id), Formula::var(q)));
        }
    }
    let ids: Vec<&String> = ppr.resources.keys().collect();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            if ppr.resources[*a].excludes.contains(b) {
                fm.constraints.push(Formula::implies(Formula::var(*a), Formula::negate(Formula::var(*b))));
            }
        }
    }
    for c in ppr.constraints.values() {
        let vars = c.expr.variables();
        if !vars.is_empty() && vars.iter().all(|v| ppr.resources.contains_key(v)) {
            fm.constraints.push(c.expr.clone());
        }
    }
    fm
}
