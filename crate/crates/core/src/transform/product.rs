use super::{attribute_strings, components, product_model_id};
use crate::diag::Diagnostic;
use crate::logic::Formula;
use crate::ppr::{PprModel, Unit};
use crate::vmodels::{Feature, FeatureModel, GroupKind, Variability};
use indexmap::IndexMap;
use std::collections::{HashMap, HashSet};

/// Tree shape of the product components, shared by the product feature
/// model and the product decisions of the process model.
#[derive(Clone, Debug, Default)]
pub struct ProductStructure {
    pub components: Vec<String>,
    /// Parent component and variability; absent means directly under root.
    pub parent: HashMap<String, (String, Variability)>,
    pub groups: IndexMap<String, GroupKind>,
    /// `parent => member1 || ...` for implementers that could not form a
    /// group because the parent also has children.
    pub implied: Vec<Formula>,
    /// Components implementing more than one parent, with their parents.
    pub multi_parent: IndexMap<String, Vec<String>>,
}

impl ProductStructure {
    pub fn analyze(ppr: &PprModel, warnings: &mut Vec<Diagnostic>) -> Self {
        let comps = components(ppr);
        let is_comp: HashSet<&str> = comps.iter().map(String::as_str).collect();
        let mut s = ProductStructure { components: comps.clone(), ..Default::default() };
        let mut part_of: HashMap<&str, &str> = HashMap::new();
        for c in &comps {
            for ch in &ppr.products[c].children {
                if !is_comp.contains(ch.as_str()) {
                    continue;
                }
                match part_of.get(ch.as_str()) {
                    None => {
                        part_of.insert(ch, c);
                    }
                    Some(first) => warnings.push(
                        Diagnostic::warning(
                            "multiple-parents",
                            format!("{ch} is a child of both {first} and {c}; keeping {first}"),
                        )
                        .about(ch),
                    ),
                }
            }
        }
        let mut implementers: IndexMap<&str, Vec<&Unit>> = IndexMap::new();
        for c in &comps {
            let u = &ppr.products[c];
            if let Some(p) = part_of.get(c.as_str()) {
                s.link(c, p, Variability::Mandatory, warnings);
                continue;
            }
            let parents: Vec<&String> = u.implements.iter().filter(|p| is_comp.contains(p.as_str())).collect();
            match parents.as_slice() {
                [] => {}
                [p] => implementers.entry(p.as_str()).or_default().push(u),
                _ => {
                    warnings.push(
                        Diagnostic::warning(
                            "multiple-parents",
                            format!("{c} implements several products; kept as a feature attribute"),
                        )
                        .about(c),
                    );
                    s.multi_parent.insert(c.clone(), parents.into_iter().cloned().collect());
                }
            }
        }
        for (p, members) in implementers {
            let has_children = part_of.values().any(|q| *q == p);
            let var = if members.len() >= 2 && !has_children {
                let pairwise = members
                    .iter()
                    .enumerate()
                    .all(|(i, a)| members[i + 1..].iter().all(|b| a.excludes.contains(&b.id)));
                s.groups.insert(p.to_string(), if pairwise { GroupKind::Alternative } else { GroupKind::Or });
                Variability::Optional
            } else {
                if members.len() >= 2 {
                    s.implied.push(Formula::implies(
                        Formula::var(p),
                        Formula::or_all(members.iter().map(|m| Formula::var(&m.id)).collect()),
                    ));
                }
                Variability::Optional
            };
            for m in &members {
                s.link(&m.id, p, var, warnings);
            }
        }
        s
    }

    fn link(&mut self, child: &str, parent: &str, var: Variability, warnings: &mut Vec<Diagnostic>) {
        let mut cur = Some(parent);
        while let Some(c) = cur {
            if c == child {
                warnings.push(
                    Diagnostic::warning(
                        "cycle",
                        format!("placing {child} under {parent} would close a cycle; kept under the root"),
                    )
                    .about(child),
                );
                return;
            }
            cur = self.parent.get(c).map(|(p, _)| p.as_str());
        }
        self.parent.insert(child.to_string(), (parent.to_string(), var));
    }

    /// Alternative group containing `id`, if any.
    pub fn alternative_of(&self, id: &str) -> Option<&str> {
        let (p, _) = self.parent.get(id)?;
        (self.groups.get(p) == Some(&GroupKind::Alternative)).then_some(p.as_str())
    }

    pub fn is_component(&self, id: &str) -> bool {
        self.components.iter().any(|c| c == id)
    }
}

/// Product feature model of `ppr`.
pub fn to_product_fm(ppr: &PprModel, name: &str) -> FeatureModel {
    let ppr = ppr.normalized();
    let mut warnings = Vec::new();
    let s = ProductStructure::analyze(&ppr, &mut warnings);
    build_fm(&ppr, &s, name, &mut warnings)
}

pub(super) fn build_fm(
    ppr: &PprModel,
    s: &ProductStructure,
    name: &str,
    warnings: &mut Vec<Diagnostic>,
) -> FeatureModel {
    let root = product_model_id(name);
    let mut fm = FeatureModel::with_root(&root, &root);
    for c in &s.components {
        let u = &ppr.products[c];
        let (parent, var) = match s.parent.get(c) {
            Some((p, v)) => (p.as_str(), *v),
            None if s.multi_parent.contains_key(c) => (root.as_str(), Variability::Optional),
            None => (root.as_str(), Variability::Mandatory),
        };
        let mut f = Feature::new(c, Some(parent), var);
        f.name = u.name.clone();
        f.is_abstract = u.is_abstract;
        f.group = s.groups.get(c).copied();
        f.attributes = attribute_strings(&u.attributes);
        if let Some(ps) = s.multi_parent.get(c) {
            f.attributes.insert("implements".into(), ps.join(","));
        }
        fm.add(f);
    }
    fm.canonicalize();
    fm.constraints.extend(s.implied.iter().cloned());
    for c in &s.components {
        for r in &ppr.products[c].requires {
            if !s.is_component(r) {
                continue;
            }
            // a core target holds in every configuration anyway
            if fm.is_core(r) {
                continue;
            }
            fm.constraints.push(Formula::implies(Formula::var(c), Formula::var(r)));
        }
    }
    for (i, a) in s.components.iter().enumerate() {
        for b in &s.components[i + 1..] {
            let excl = ppr.products[a].excludes.contains(b);
            let absorbed = s.alternative_of(a).is_some() && s.alternative_of(a) == s.alternative_of(b);
            if excl && !absorbed {
                fm.constraints.push(Formula::implies(Formula::var(a), Formula::negate(Formula::var(b))));
            }
        }
    }
    for c in ppr.constraints.values() {
        let vars = c.expr.variables();
        if vars.is_empty() || !vars.iter().all(|v| ppr.products.contains_key(v)) {
            continue;
        }
        if vars.iter().all(|v| s.is_component(v)) {
            fm.constraints.push(c.expr.clone());
        } else {
            warnings.push(
                Diagnostic::warning(
                    "dropped-constraint",
                    format!("constraint {} names intermediate products and is left out of the feature model", c.id),
                )
                .about(&c.id),
            );
        }
    }
    fm
}
