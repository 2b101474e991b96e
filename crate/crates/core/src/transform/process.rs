use super::product::ProductStructure;
use super::{attribute_strings, process_model_id, KIND, KIND_PROCESS, KIND_PRODUCT};
use crate::logic::Formula;
use crate::ppr::{PprModel, Process};
use crate::vmodels::{Decision, DecisionModel, GroupKind, Range};

/// Process decision model of `ppr`.
pub fn to_process_dm(ppr: &PprModel, name: &str) -> DecisionModel {
    let ppr = ppr.normalized();
    let s = ProductStructure::analyze(&ppr, &mut Vec::new());
    build_dm(&ppr, &s, name)
}

pub(super) fn build_dm(ppr: &PprModel, s: &ProductStructure, name: &str) -> DecisionModel {
    let mut dm = DecisionModel::new(&process_model_id(name));
    let product_atom = |id: &str| match s.alternative_of(id) {
        Some(g) => Formula::var_eq(g, id),
        None => Formula::var(id),
    };
    for c in &s.components {
        let mut d = if s.groups.get(c) == Some(&GroupKind::Alternative) {
            let opts = s.components.iter().filter(|m| s.alternative_of(m) == Some(c.as_str())).cloned().collect();
            let mut d = Decision::boolean(c, format!("Which {c} types?"));
            d.range = Range::Enumeration(opts);
            d
        } else {
            Decision::boolean(c, format!("Install {c}?"))
        };
        d.visibility = Formula::False;
        d.attributes.insert(KIND.into(), KIND_PRODUCT.into());
        dm.add(d);
    }
    for c in ppr.constraints.values() {
        let vars = c.expr.variables();
        if vars.is_empty() || !vars.iter().all(|v| s.is_component(v)) {
            continue;
        }
        let rule = c.expr.map_vars(&mut |v| product_atom(v));
        let owner = s.alternative_of(&vars[0]).unwrap_or(&vars[0]).to_string();
        dm.decisions[&owner].rules.push(rule);
    }
    for p in ppr.processes.values() {
        let mut d = Decision::boolean(&p.id, format!("Install {}?", p.id));
        d.attributes = attribute_strings(&p.attributes);
        d.attributes.insert(KIND.into(), KIND_PROCESS.into());
        d.visibility = if p.is_abstract {
            Formula::False
        } else {
            let mut atoms: Vec<Formula> =
                p.inputs.iter().filter(|i| s.is_component(i)).map(|i| product_atom(i)).collect();
            for r in inherited_requires(ppr, p) {
                let a = Formula::var(r);
                if !atoms.contains(&a) {
                    atoms.push(a);
                }
            }
            Formula::and_all(atoms)
        };
        for parent in &p.implements {
            d.rules.push(Formula::implies(Formula::var(&p.id), Formula::var(parent)));
        }
        for x in &p.excludes {
            d.rules.push(Formula::implies(Formula::var(&p.id), Formula::negate(Formula::var(x))));
        }
        dm.add(d);
    }
    dm
}

/// Own requires, then those of implemented processes, transitively.
fn inherited_requires<'a>(ppr: &'a PprModel, p: &'a Process) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    let mut queue = vec![p];
    let mut seen = vec![p.id.as_str()];
    while let Some(q) = queue.pop() {
        for r in &q.requires {
            if !out.contains(&r.as_str()) {
                out.push(r);
            }
        }
        for parent in &q.implements {
            if let Some(pp) = ppr.processes.get(parent) {
                if !seen.contains(&pp.id.as_str()) {
                    seen.push(&pp.id);
                    queue.insert(0, pp);
                }
            }
        }
    }
    out
}
