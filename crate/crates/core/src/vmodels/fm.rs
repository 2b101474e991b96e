use crate::diag::{Diagnostic, Pos};
use crate::lex::{is_ident, quote, tokenize_at, Cursor, Tok};
use crate::logic::{enumerate_models, parse_expr_tokens, to_cnf, Assignment, Dialect, Formula};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variability {
    Mandatory,
    Optional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Or,
    Alternative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub id: String,
    pub name: String,
    pub is_abstract: bool,
    pub parent: Option<String>,
    /// Ignored for members of a group.
    pub variability: Variability,
    /// Group kind applying to this feature's children.
    pub group: Option<GroupKind>,
    pub attributes: IndexMap<String, String>,
}

impl Feature {
    pub fn new(id: impl Into<String>, parent: Option<&str>, variability: Variability) -> Self {
        let id = id.into();
        Feature {
            name: id.clone(),
            id,
            is_abstract: false,
            parent: parent.map(str::to_string),
            variability,
            group: None,
            attributes: IndexMap::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureModel {
    pub model_id: String,
    pub root: String,
    pub features: IndexMap<String, Feature>,
    pub constraints: Vec<Formula>,
}

impl FeatureModel {
    /// A model holding only an abstract root.
    pub fn with_root(model_id: &str, root: &str) -> Self {
        let mut r = Feature::new(root, None, Variability::Mandatory);
        r.is_abstract = true;
        FeatureModel {
            model_id: model_id.to_string(),
            root: root.to_string(),
            features: IndexMap::from([(root.to_string(), r)]),
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, f: Feature) {
        self.features.insert(f.id.clone(), f);
    }

    pub fn children(&self, id: &str) -> impl Iterator<Item = &Feature> {
        let id = id.to_string();
        self.features.values().filter(move |f| f.parent.as_deref() == Some(id.as_str()))
    }

    /// Group of the parent, if `id` is a group member.
    pub fn member_group(&self, id: &str) -> Option<GroupKind> {
        let parent = self.features.get(id)?.parent.as_ref()?;
        self.features.get(parent)?.group
    }

    /// Ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.features.get(id).and_then(|f| f.parent.as_deref());
        while let Some(p) = cur {
            out.push(p);
            cur = self.features.get(p).and_then(|f| f.parent.as_deref());
        }
        out
    }

    pub fn depth(&self, id: &str) -> usize {
        self.ancestors(id).len()
    }

    /// True if `id` is in every valid configuration by structure alone:
    /// a chain of mandatory, non-grouped edges up to the root.
    pub fn is_core(&self, id: &str) -> bool {
        let mut cur = id;
        loop {
            let Some(f) = self.features.get(cur) else { return false };
            match &f.parent {
                None => return true,
                Some(p) => {
                    if f.variability != Variability::Mandatory || self.member_group(cur).is_some() {
                        return false;
                    }
                    cur = p;
                }
            }
        }
    }

    /// Subtree of `id` including `id`, in model order.
    pub fn subtree(&self, id: &str) -> Vec<&str> {
        self.features.keys().filter(|f| *f == id || self.ancestors(f).contains(&id)).map(String::as_str).collect()
    }

    pub fn concrete_features(&self) -> impl Iterator<Item = &Feature> {
        self.features.values().filter(|f| !f.is_abstract)
    }

    /// Reorders features into preorder, keeping sibling order.
    pub fn canonicalize(&mut self) {
        let mut order = Vec::new();
        let mut stack = vec![self.root.clone()];
        while let Some(id) = stack.pop() {
            let kids: Vec<String> = self.children(&id).map(|f| f.id.clone()).collect();
            order.push(id);
            stack.extend(kids.into_iter().rev());
        }
        let mut old = std::mem::take(&mut self.features);
        for id in order {
            if let Some(f) = old.shift_remove(&id) {
                self.features.insert(id, f);
            }
        }
        // unreachable features keep their relative order at the end
        self.features.extend(old);
    }

    /// Structural problems: missing root, dangling parents, cycles,
    /// unknown constraint variables.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        match self.features.get(&self.root) {
            None => out.push(Diagnostic::error("root", format!("root {} is not declared", self.root))),
            Some(r) if r.parent.is_some() => {
                out.push(Diagnostic::error("root", "root must not have a parent").about(&self.root))
            }
            _ => {}
        }
        for f in self.features.values() {
            if f.id != self.root {
                match &f.parent {
                    None => out.push(Diagnostic::error("tree", "second root").about(&f.id)),
                    Some(p) if !self.features.contains_key(p) => {
                        out.push(Diagnostic::error("tree", format!("unknown parent {p}")).about(&f.id))
                    }
                    _ => {
                        if self.ancestors(&f.id).len() >= self.features.len() {
                            out.push(Diagnostic::error("tree", "parent cycle").about(&f.id));
                        }
                    }
                }
            }
        }
        for c in &self.constraints {
            for v in c.variables() {
                if !self.features.contains_key(&v) {
                    out.push(
                        Diagnostic::error("unknown-feature", format!("constraint {c} names unknown feature {v}"))
                            .about(v),
                    );
                }
            }
        }
        out
    }
}

/// Propositional semantics of a feature model.
pub fn fm_to_formula(fm: &FeatureModel) -> Formula {
    let mut parts = vec![Formula::var(&fm.root)];
    for f in fm.features.values() {
        let Some(p) = &f.parent else { continue };
        parts.push(Formula::implies(Formula::var(&f.id), Formula::var(p)));
        if fm.member_group(&f.id).is_none() && f.variability == Variability::Mandatory {
            parts.push(Formula::implies(Formula::var(p), Formula::var(&f.id)));
        }
    }
    for f in fm.features.values() {
        let Some(kind) = f.group else { continue };
        let kids: Vec<String> = fm.children(&f.id).map(|c| c.id.clone()).collect();
        if kids.is_empty() {
            continue;
        }
        let body = match kind {
            GroupKind::Or => Formula::or_all(kids.iter().map(Formula::var).collect()),
            GroupKind::Alternative => Formula::exactly_one(&kids),
        };
        parts.push(Formula::implies(Formula::var(&f.id), body));
    }
    parts.extend(fm.constraints.iter().cloned());
    Formula::and_all(parts)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmConfiguration {
    pub model_id: String,
    pub selected: BTreeSet<String>,
}

impl FmConfiguration {
    pub fn new<S: Into<String>>(model_id: &str, selected: impl IntoIterator<Item = S>) -> Self {
        FmConfiguration { model_id: model_id.to_string(), selected: selected.into_iter().map(Into::into).collect() }
    }
}

/// Adds the ancestors of every selected feature.
pub fn with_ancestors(fm: &FeatureModel, selected: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = selected.clone();
    for s in selected {
        for a in fm.ancestors(s) {
            out.insert(a.to_string());
        }
    }
    out
}

/// Total assignment over all features: selected true, the rest false.
pub fn total_assignment(fm: &FeatureModel, selected: &BTreeSet<String>) -> Assignment {
    fm.features.keys().map(|f| (f.clone(), selected.contains(f))).collect()
}

/// Adds mandatory features below every selected feature, repeatedly.
pub fn complete_mandatory(fm: &FeatureModel, selected: &BTreeSet<String>) -> BTreeSet<String> {
    let mut out = with_ancestors(fm, selected);
    out.insert(fm.root.clone());
    loop {
        let before = out.len();
        for f in fm.features.values() {
            if let Some(p) = &f.parent {
                if out.contains(p) && f.variability == Variability::Mandatory && fm.member_group(&f.id).is_none() {
                    out.insert(f.id.clone());
                }
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Checks a selection against the model. Ancestors of selected features
/// are included first; everything else is deselected.
pub fn validate_fm_config(fm: &FeatureModel, cfg: &FmConfiguration) -> Result<(), Vec<Diagnostic>> {
    let unknown: Vec<Diagnostic> = cfg
        .selected
        .iter()
        .filter(|s| !fm.features.contains_key(*s))
        .map(|s| Diagnostic::error("unknown-feature", format!("unknown feature {s}")).about(s))
        .collect();
    if !unknown.is_empty() {
        return Err(unknown);
    }
    let sel = with_ancestors(fm, &cfg.selected);
    let violations = fm_violations(fm, &sel);
    let holds = fm_to_formula(fm).eval(&total_assignment(fm, &sel)) == Ok(true);
    debug_assert_eq!(holds, violations.is_empty(), "structural and formula checks disagree");
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Every way `sel` (taken as the full set of selected features) breaks the
/// model.
pub fn fm_violations(fm: &FeatureModel, sel: &BTreeSet<String>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !sel.contains(&fm.root) {
        out.push(Diagnostic::error("root", format!("root {} is not selected", fm.root)).about(&fm.root));
    }
    for f in fm.features.values() {
        let Some(p) = &f.parent else { continue };
        let on = sel.contains(&f.id);
        if on && !sel.contains(p) {
            out.push(Diagnostic::error("parent", format!("{} is selected without its parent {p}", f.id)).about(&f.id));
        }
        if !on && sel.contains(p) && f.variability == Variability::Mandatory && fm.member_group(&f.id).is_none() {
            out.push(
                Diagnostic::error("mandatory", format!("mandatory feature {} is not selected", f.id)).about(&f.id),
            );
        }
    }
    for f in fm.features.values() {
        let Some(kind) = f.group else { continue };
        if !sel.contains(&f.id) {
            continue;
        }
        let kids: Vec<&str> = fm.children(&f.id).map(|c| c.id.as_str()).collect();
        if kids.is_empty() {
            continue;
        }
        let n = kids.iter().filter(|k| sel.contains(**k)).count();
        match kind {
            GroupKind::Or if n == 0 => out.push(
                Diagnostic::error("or-group", format!("select at least one of {}", kids.join(", "))).about(&f.id),
            ),
            GroupKind::Alternative if n != 1 => out.push(
                Diagnostic::error(
                    "alternative-group",
                    format!("select exactly one of {} ({n} selected)", kids.join(", ")),
                )
                .about(&f.id),
            ),
            _ => {}
        }
    }
    let a = total_assignment(fm, sel);
    for c in &fm.constraints {
        if c.eval(&a) != Ok(true) {
            out.push(Diagnostic::error("constraint", format!("constraint violated: {c}")));
        }
    }
    out
}

/// Number of valid configurations projected onto the concrete features,
/// capped at `limit`; the flag reports truncation.
pub fn count_configurations(fm: &FeatureModel, limit: usize) -> (usize, bool) {
    let mut cnf = to_cnf(&fm_to_formula(fm));
    let vars: Vec<String> = fm.concrete_features().map(|f| f.id.clone()).collect();
    for v in &vars {
        cnf.var(v);
    }
    let e = enumerate_models(&cnf, &vars, limit).expect("all projection variables registered");
    (e.models.len(), e.truncated)
}

// ---- text format ----

const GROUP_WORDS: [&str; 4] = ["mandatory", "optional", "or", "alternative"];

pub fn fm_write(fm: &FeatureModel) -> String {
    if fm.model_id.is_empty() && fm.features.is_empty() && fm.constraints.is_empty() {
        return String::new();
    }
    let mut s = format!("featuremodel {}\nfeatures\n", fm.model_id);
    if fm.features.contains_key(&fm.root) {
        write_feature(fm, &fm.root, 1, &mut s);
    }
    if !fm.constraints.is_empty() {
        s.push_str("constraints\n");
        for c in &fm.constraints {
            let _ = writeln!(s, "  {}", c.display(Dialect::Dm));
        }
    }
    s
}

fn write_feature(fm: &FeatureModel, id: &str, depth: usize, s: &mut String) {
    let f = &fm.features[id];
    let pad = "  ".repeat(depth);
    let mut flags = Vec::new();
    if f.is_abstract {
        flags.push("abstract".to_string());
    }
    if f.name != f.id {
        flags.push(format!("name {}", quote(&f.name)));
    }
    for (k, v) in &f.attributes {
        flags.push(format!("{k} {}", quote(v)));
    }
    if flags.is_empty() {
        let _ = writeln!(s, "{pad}{id}");
    } else {
        let _ = writeln!(s, "{pad}{id} {{{}}}", flags.join(", "));
    }
    let kids: Vec<&Feature> = fm.children(id).collect();
    let mut i = 0;
    while i < kids.len() {
        let word = match f.group {
            Some(GroupKind::Or) => "or",
            Some(GroupKind::Alternative) => "alternative",
            None if kids[i].variability == Variability::Mandatory => "mandatory",
            None => "optional",
        };
        let _ = writeln!(s, "{pad}  {word}");
        let mut j = i;
        while j < kids.len() && (f.group.is_some() || kids[j].variability == kids[i].variability) {
            write_feature(fm, &kids[j].id, depth + 2, s);
            j += 1;
        }
        i = j;
    }
}

enum Frame {
    Feature(String),
    Group(Variability),
}

fn line_tokens(line: &str, n: u32) -> Result<Vec<crate::lex::Token>, Diagnostic> {
    tokenize_at(line, Pos { line: n, column: 1 })
}

pub fn fm_read(text: &str) -> Result<FeatureModel, Diagnostic> {
    let mut fm = FeatureModel::default();
    let lines = text.lines().enumerate().map(|(i, l)| (i as u32 + 1, l));
    let mut section = 0; // 0 header, 1 features, 2 constraints
    let mut stack: Vec<(usize, Frame)> = Vec::new();
    let mut seen_group: std::collections::HashMap<String, Vec<&'static str>> = Default::default();
    let mut constraint_lines: Vec<(u32, &str)> = Vec::new();
    for (n, line) in lines {
        let toks = line_tokens(line, n)?;
        if toks.is_empty() {
            continue;
        }
        let end = Pos { line: n, column: line.chars().count() as u32 + 1 };
        let mut cur = Cursor::new(&toks, end);
        let indent = line.len() - line.trim_start().len();
        if line[..indent].contains('\t') {
            return Err(
                Diagnostic::error("syntax", "tabs are not allowed in indentation").at(Pos { line: n, column: 1 })
            );
        }
        match section {
            0 => {
                cur.expect_keyword("featuremodel")?;
                fm.model_id = cur.ident()?;
                if !cur.at_end() {
                    return Err(cur.unexpected("end of line"));
                }
                section = 1;
                continue;
            }
            1 if indent == 0 => {
                if cur.eat_keyword("features") && cur.at_end() {
                    continue;
                }
                let mut c2 = Cursor::new(&toks, end);
                if c2.eat_keyword("constraints") && c2.at_end() {
                    section = 2;
                    continue;
                }
                return Err(Diagnostic::error("syntax", "expected `features` or `constraints`").at(toks[0].pos));
            }
            1 => {}
            _ => {
                constraint_lines.push((n, line));
                continue;
            }
        }
        while stack.last().is_some_and(|(i, _)| *i >= indent) {
            stack.pop();
        }
        let pos = toks[0].pos;
        if let Some(Tok::Ident(w)) = cur.peek() {
            if GROUP_WORDS.contains(&w.as_str()) && toks.len() == 1 {
                let Some((_, Frame::Feature(owner))) = stack.last() else {
                    return Err(Diagnostic::error("syntax", format!("`{w}` must be nested under a feature")).at(pos));
                };
                let word: &'static str = GROUP_WORDS.iter().find(|g| *g == w).unwrap();
                let (group, var) = match word {
                    "or" => (Some(GroupKind::Or), Variability::Optional),
                    "alternative" => (Some(GroupKind::Alternative), Variability::Optional),
                    "mandatory" => (None, Variability::Mandatory),
                    _ => (None, Variability::Optional),
                };
                let owner = owner.clone();
                let prior = seen_group.entry(owner.clone()).or_default();
                let grouped = |g: &str| g == "or" || g == "alternative";
                if (!prior.is_empty() && (grouped(word) || prior.iter().any(|g| grouped(g))))
                    || prior.last() == Some(&word)
                {
                    return Err(Diagnostic::error(
                        "syntax",
                        format!("`{word}` block conflicts with an earlier block of {owner}"),
                    )
                    .at(pos));
                }
                prior.push(word);
                if group.is_some() {
                    fm.features.get_mut(&owner).unwrap().group = group;
                }
                stack.push((indent, Frame::Group(var)));
                continue;
            }
        }
        let parent = match stack.last() {
            None if fm.features.is_empty() => None,
            Some((_, Frame::Group(v))) => {
                let owner = stack.iter().rev().find_map(|(_, f)| match f {
                    Frame::Feature(id) => Some(id.clone()),
                    _ => None,
                });
                Some((owner.unwrap(), *v))
            }
            _ => {
                return Err(Diagnostic::error(
                    "syntax",
                    "feature must follow a mandatory, optional, or or alternative line",
                )
                .at(pos))
            }
        };
        let id = cur.ident()?;
        if fm.features.contains_key(&id) {
            return Err(Diagnostic::error("duplicate-id", format!("duplicate feature {id}")).at(pos));
        }
        let mut f = match &parent {
            None => {
                fm.root = id.clone();
                Feature::new(&id, None, Variability::Mandatory)
            }
            Some((p, v)) => Feature::new(&id, Some(p), *v),
        };
        if cur.eat(&Tok::LBrace) {
            loop {
                let fpos = cur.pos();
                let key = cur.ident()?;
                if key == "abstract" {
                    f.is_abstract = true;
                } else {
                    let v = cur.string()?;
                    if key == "name" {
                        f.name = v;
                    } else if f.attributes.insert(key.clone(), v).is_some() {
                        return Err(Diagnostic::error("duplicate-key", format!("duplicate attribute {key}")).at(fpos));
                    }
                }
                if !cur.eat(&Tok::Comma) {
                    cur.expect(&Tok::RBrace)?;
                    break;
                }
            }
        }
        if !cur.at_end() {
            return Err(cur.unexpected("end of line"));
        }
        fm.features.insert(id.clone(), f);
        stack.push((indent, Frame::Feature(id)));
    }
    for (n, line) in constraint_lines {
        let toks = line_tokens(line, n)?;
        let end = Pos { line: n, column: line.chars().count() as u32 + 1 };
        let mut cur = Cursor::new(&toks, end);
        let c = parse_expr_tokens(&mut cur, Dialect::Dm)?;
        if !cur.at_end() {
            return Err(cur.unexpected("end of constraint"));
        }
        for v in c.variables() {
            if !fm.features.contains_key(&v) {
                return Err(
                    Diagnostic::error("unknown-feature", format!("unknown feature {v} in constraint")).at(toks[0].pos)
                );
            }
        }
        fm.constraints.push(c);
    }
    if let Some(bad) = fm.features.keys().find(|k| !is_ident(k)) {
        return Err(Diagnostic::error("invalid-id", format!("invalid feature id {bad}")));
    }
    Ok(fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_expr;

    fn sample() -> FeatureModel {
        fm_read(
            "featuremodel m_product\n\
             features\n\
             \x20 m_product {abstract}\n\
             \x20   mandatory\n\
             \x20     Pipe {abstract}\n\
             \x20       alternative\n\
             \x20         Pipe8\n\
             \x20         Pipe3\n\
             \x20         Pipe2\n\
             \x20   optional\n\
             \x20     Barrel1_2 {name \"Barrel 1.2\", deltaFile \"DB\"}\n\
             constraints\n\
             \x20 Pipe2 || Pipe8 => Barrel1_2\n",
        )
        .unwrap()
    }

    #[test]
    fn reads_tree_groups_and_constraints() {
        let fm = sample();
        assert_eq!(fm.root, "m_product");
        assert_eq!(fm.features["Pipe"].group, Some(GroupKind::Alternative));
        assert_eq!(fm.member_group("Pipe3"), Some(GroupKind::Alternative));
        assert_eq!(fm.features["Barrel1_2"].variability, Variability::Optional);
        assert_eq!(fm.features["Barrel1_2"].name, "Barrel 1.2");
        assert_eq!(fm.features["Barrel1_2"].attributes["deltaFile"], "DB");
        assert_eq!(fm.constraints.len(), 1);
        assert!(fm.check().is_empty());
    }

    #[test]
    fn write_read_round_trip() {
        let fm = sample();
        let text = fm_write(&fm);
        assert_eq!(fm_read(&text).unwrap(), fm);
        assert_eq!(fm_write(&fm_read(&text).unwrap()), text);
    }

    #[test]
    fn root_only_formula_is_root_variable() {
        let fm = FeatureModel::with_root("m", "r");
        assert_eq!(fm_to_formula(&fm), Formula::var("r"));
        assert_eq!(count_configurations(&fm, 10), (1, false));
    }

    #[test]
    fn one_optional_child_gives_two_configurations() {
        let mut fm = FeatureModel::with_root("m", "r");
        fm.add(Feature::new("a", Some("r"), Variability::Optional));
        assert_eq!(count_configurations(&fm, 10), (2, false));
        assert_eq!(count_configurations(&fm, 1), (1, true));
    }

    #[test]
    fn alternative_group_semantics() {
        let fm = sample();
        let f = fm_to_formula(&fm);
        let expect = parse_expr(
            "Pipe => (Pipe8 || Pipe3 || Pipe2) && !(Pipe8 && Pipe3) && !(Pipe8 && Pipe2) && !(Pipe3 && Pipe2)",
            Dialect::Dm,
        )
        .unwrap();
        let Formula::And(parts) = &f else { panic!() };
        assert!(parts.contains(&expect), "{f}");
        assert_eq!(count_configurations(&fm, 100), (4, false));
    }

    #[test]
    fn config_validation() {
        let fm = sample();
        let ok = FmConfiguration::new("m_product", ["Pipe2", "Barrel1_2"]);
        assert_eq!(validate_fm_config(&fm, &ok), Ok(()));
        let two = FmConfiguration::new("m_product", ["Pipe2", "Pipe3", "Barrel1_2"]);
        let err = validate_fm_config(&fm, &two).unwrap_err();
        assert_eq!(err[0].rule, "alternative-group");
        let none = FmConfiguration::new("m_product", Vec::<String>::new());
        let rules: Vec<_> = validate_fm_config(&fm, &none).unwrap_err().into_iter().map(|d| d.rule).collect();
        assert_eq!(rules, vec!["root"]);
        let unknown = FmConfiguration::new("m_product", ["Nope"]);
        assert_eq!(validate_fm_config(&fm, &unknown).unwrap_err()[0].rule, "unknown-feature");
    }

    #[test]
    fn completion_adds_mandatory_chain() {
        let fm = sample();
        let sel = complete_mandatory(&fm, &BTreeSet::new());
        assert_eq!(sel, BTreeSet::from(["m_product".to_string(), "Pipe".to_string()]));
        assert!(fm.is_core("Pipe"));
        assert!(!fm.is_core("Pipe2"));
    }

    #[test]
    fn read_errors() {
        let err = fm_read("featuremodel m\nfeatures\n  r\n    Pipe\n").unwrap_err();
        assert_eq!(err.pos, Some(Pos { line: 4, column: 5 }));
        let err = fm_read("featuremodel m\nfeatures\n  r\n    or\n      a\n    mandatory\n      b\n").unwrap_err();
        assert!(err.message.contains("conflicts"));
        let err = fm_read("featuremodel m\nfeatures\n  r\nconstraints\n  r && x\n").unwrap_err();
        assert_eq!(err.rule, "unknown-feature");
        assert_eq!(fm_read("").unwrap(), FeatureModel::default());
    }

    #[test]
    fn canonicalize_orders_preorder() {
        let mut fm = FeatureModel::with_root("m", "r");
        fm.add(Feature::new("a", Some("r"), Variability::Optional));
        fm.add(Feature::new("b", Some("r"), Variability::Optional));
        fm.add(Feature::new("a1", Some("a"), Variability::Optional));
        fm.canonicalize();
        assert_eq!(fm.features.keys().collect::<Vec<_>>(), vec!["r", "a", "a1", "b"]);
    }
}
