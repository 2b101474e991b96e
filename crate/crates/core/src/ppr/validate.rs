use super::{Category, PprModel, Unit};
use crate::diag::Diagnostic;
use std::collections::{HashMap, HashSet};

/// Checks reference resolution, categories, acyclicity and constraint
/// scopes. Each diagnostic names the offending unit.
pub fn validate_model(m: &PprModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for cat in Category::ALL {
        for u in m.units(cat) {
            for (key, ids) in [
                ("implements", &u.implements),
                ("requires", &u.requires),
                ("excludes", &u.excludes),
                ("children", &u.children),
            ] {
                if key == "children" && !ids.is_empty() && cat != Category::Product {
                    out.push(
                        Diagnostic::error(
                            "children-not-allowed",
                            format!("only products may have children, {} is a {cat}", u.id),
                        )
                        .about(&u.id),
                    );
                    continue;
                }
                for id in ids {
                    check_ref(m, &u.id, key, id, cat, &mut out);
                }
            }
        }
        cycles(m, cat, "implements", |u| &u.implements, &mut out);
        if cat == Category::Product {
            cycles(m, cat, "children", |u| &u.children, &mut out);
        }
    }
    for p in m.processes.values() {
        for id in &p.inputs {
            check_ref(m, &p.id, "inputs", id, Category::Product, &mut out);
        }
        for o in &p.outputs {
            check_ref(m, &p.id, "outputs", &o.product, Category::Product, &mut out);
        }
        for id in &p.resources {
            check_ref(m, &p.id, "resources", id, Category::Resource, &mut out);
        }
    }
    for c in m.constraints.values() {
        for id in &c.scope {
            if m.categories_of(id).is_empty() {
                out.push(
                    Diagnostic::error(
                        "unresolved-reference",
                        format!("unresolved reference {id} in scope of {}", c.id),
                    )
                    .about(&c.id),
                );
            }
        }
        for v in c.expr.variables() {
            if !c.scope.contains(&v) {
                out.push(
                    Diagnostic::error("out-of-scope", format!("variable {v} of {} is not listed in its scope", c.id))
                        .about(&c.id),
                );
            }
        }
    }
    out
}

fn check_ref(m: &PprModel, owner: &str, key: &str, id: &str, want: Category, out: &mut Vec<Diagnostic>) {
    if m.unit_in(want, id).is_some() {
        return;
    }
    let found = m.categories_of(id);
    let d = match found.first() {
        None => Diagnostic::error("unresolved-reference", format!("unresolved reference {id} in `{key}` of {owner}")),
        Some(other) => Diagnostic::error(
            "category-mismatch",
            format!("`{key}` of {owner} expects a {want}, but {id} is a {other}"),
        ),
    };
    out.push(d.about(owner));
}

/// Reports each cycle once, naming its members in discovery order.
fn cycles(m: &PprModel, cat: Category, rel: &str, edges: impl Fn(&Unit) -> &Vec<String>, out: &mut Vec<Diagnostic>) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    let mut reported: HashSet<String> = HashSet::new();
    for start in m.units(cat) {
        if marks.contains_key(start.id.as_str()) {
            continue;
        }
        // iterative DFS keeping the current path
        let mut path: Vec<(&Unit, usize)> = vec![(start, 0)];
        marks.insert(&start.id, Mark::Open);
        while let Some((u, i)) = path.last_mut() {
            let targets = edges(u);
            if *i >= targets.len() {
                marks.insert(&u.id, Mark::Done);
                path.pop();
                continue;
            }
            let t = &targets[*i];
            *i += 1;
            let Some(next) = m.unit_in(cat, t) else { continue };
            match marks.get(next.id.as_str()) {
                Some(Mark::Done) => {}
                Some(Mark::Open) => {
                    let from = path.iter().position(|(p, _)| p.id == next.id).unwrap();
                    let members: Vec<&str> = path[from..].iter().map(|(p, _)| p.id.as_str()).collect();
                    let mut key: Vec<&str> = members.clone();
                    key.sort_unstable();
                    if reported.insert(key.join(",")) {
                        out.push(
                            Diagnostic::error(
                                "cycle",
                                format!("`{rel}` cycle: {} -> {}", members.join(" -> "), next.id),
                            )
                            .about(&next.id),
                        );
                    }
                }
                None => {
                    marks.insert(&next.id, Mark::Open);
                    path.push((next, 0));
                }
            }
        }
    }
}
