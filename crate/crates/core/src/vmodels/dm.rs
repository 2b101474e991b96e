use crate::diag::{Diagnostic, Pos};
use crate::lex::{end_pos, is_ident, quote, tokenize, Cursor, Tok};
use crate::logic::{eq_var_name, parse_expr_tokens, Atom, Dialect, Formula};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "options", rename_all = "lowercase")]
pub enum Range {
    Boolean,
    Enumeration(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub id: String,
    pub question: String,
    pub range: Range,
    pub visibility: Formula,
    pub rules: Vec<Formula>,
    pub attributes: IndexMap<String, String>,
}

impl Decision {
    pub fn boolean(id: impl Into<String>, question: impl Into<String>) -> Self {
        Decision {
            id: id.into(),
            question: question.into(),
            range: Range::Boolean,
            visibility: Formula::True,
            rules: Vec::new(),
            attributes: IndexMap::new(),
        }
    }

    pub fn options(&self) -> &[String] {
        match &self.range {
            Range::Boolean => &[],
            Range::Enumeration(o) => o,
        }
    }

    pub fn is_enum(&self) -> bool {
        matches!(self.range, Range::Enumeration(_))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionModel {
    pub model_id: String,
    pub decisions: IndexMap<String, Decision>,
}

impl DecisionModel {
    pub fn new(model_id: &str) -> Self {
        DecisionModel { model_id: model_id.to_string(), decisions: IndexMap::new() }
    }

    pub fn add(&mut self, d: Decision) {
        self.decisions.insert(d.id.clone(), d);
    }

    /// Every rule of every decision, in document order.
    pub fn all_rules(&self) -> impl Iterator<Item = &Formula> {
        self.decisions.values().flat_map(|d| d.rules.iter())
    }

    /// Unresolved decision and option references, bad ranges.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for d in self.decisions.values() {
            if let Range::Enumeration(opts) = &d.range {
                if opts.is_empty() {
                    out.push(Diagnostic::error("range", "enumeration without options").about(&d.id));
                }
                for (i, o) in opts.iter().enumerate() {
                    if opts[..i].contains(o) {
                        out.push(Diagnostic::error("range", format!("duplicate option {o}")).about(&d.id));
                    }
                }
            }
            for f in std::iter::once(&d.visibility).chain(&d.rules) {
                f.visit_atoms(&mut |a| {
                    if let Some(msg) = self.atom_problem(a) {
                        out.push(Diagnostic::error("unresolved-reference", msg).about(&d.id));
                    }
                });
            }
        }
        out
    }

    fn atom_problem(&self, a: Atom<'_>) -> Option<String> {
        match a {
            Atom::Var(v) => (!self.decisions.contains_key(v)).then(|| format!("unknown decision {v}")),
            Atom::Eq(v, o) => match self.decisions.get(v) {
                None => Some(format!("unknown decision {v}")),
                Some(d) if !d.options().contains(&o.to_string()) => Some(format!("{o} is not an option of {v}")),
                _ => None,
            },
        }
    }

    /// Conjunction of all rules over Boolean solver variables: one per
    /// Boolean decision, one per enumeration option (`d==o`), with at most
    /// one option per decision. A bare enumeration variable means "some
    /// option chosen".
    pub fn rules_formula(&self) -> Formula {
        let mut parts: Vec<Formula> = self.all_rules().map(|r| self.boolean_encoding(r)).collect();
        for d in self.decisions.values() {
            let opts = d.options();
            for (i, a) in opts.iter().enumerate() {
                for b in &opts[i + 1..] {
                    parts.push(Formula::negate(Formula::And(vec![
                        Formula::var(eq_var_name(&d.id, a)),
                        Formula::var(eq_var_name(&d.id, b)),
                    ])));
                }
            }
        }
        Formula::and_all(parts)
    }

    fn boolean_encoding(&self, f: &Formula) -> Formula {
        match f {
            Formula::VarEq(d, o) => Formula::var(eq_var_name(d, o)),
            Formula::Not(x) => Formula::negate(self.boolean_encoding(x)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| self.boolean_encoding(x)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| self.boolean_encoding(x)).collect()),
            Formula::Implies(a, b) => Formula::implies(self.boolean_encoding(a), self.boolean_encoding(b)),
            Formula::Var(v) => match self.decisions.get(v) {
                Some(d) if d.is_enum() => {
                    Formula::or_all(d.options().iter().map(|o| Formula::var(eq_var_name(v, o))).collect())
                }
                _ => f.clone(),
            },
            Formula::True | Formula::False => f.clone(),
        }
    }
}

pub fn dm_write(dm: &DecisionModel) -> String {
    if dm.model_id.is_empty() && dm.decisions.is_empty() {
        return String::new();
    }
    let mut s = format!("dm {}\n", dm.model_id);
    for d in dm.decisions.values() {
        let _ = writeln!(s, "\ndecision {} {{", quote(&d.id));
        let _ = writeln!(s, "  question: {};", quote(&d.question));
        match &d.range {
            Range::Boolean => s.push_str("  type: boolean;\n"),
            Range::Enumeration(opts) => {
                s.push_str("  type: enumeration;\n");
                let _ = writeln!(s, "  range: {};", opts.join(" | "));
            }
        }
        let _ = writeln!(s, "  visible: {};", d.visibility.display(Dialect::Dm));
        if !d.rules.is_empty() {
            let rules: Vec<String> = d.rules.iter().map(|r| r.display(Dialect::Dm).to_string()).collect();
            let _ = writeln!(s, "  rules: {};", rules.join(", "));
        }
        if !d.attributes.is_empty() {
            let attrs: Vec<String> = d.attributes.iter().map(|(k, v)| format!("{k}: {}", quote(v))).collect();
            let _ = writeln!(s, "  attributes: {{{}}};", attrs.join(", "));
        }
        s.push_str("}\n");
    }
    s
}

pub fn dm_read(text: &str) -> Result<DecisionModel, Diagnostic> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, end_pos(text));
    let mut dm = DecisionModel::default();
    if cur.at_end() {
        return Ok(dm);
    }
    cur.expect_keyword("dm")?;
    dm.model_id = cur.ident()?;
    while !cur.at_end() {
        cur.expect_keyword("decision")?;
        let id_pos = cur.pos();
        let id = cur.string()?;
        if !is_ident(&id) {
            return Err(Diagnostic::error("invalid-id", format!("`{id}` is not a valid identifier")).at(id_pos));
        }
        if dm.decisions.contains_key(&id) {
            return Err(Diagnostic::error("duplicate-id", format!("duplicate decision {id}")).at(id_pos));
        }
        cur.expect(&Tok::LBrace)?;
        let mut d = Decision::boolean(&id, "");
        let mut kind: Option<(String, Pos)> = None;
        let mut range: Option<Vec<String>> = None;
        let mut seen: Vec<String> = Vec::new();
        while !cur.eat(&Tok::RBrace) {
            let kpos = cur.pos();
            let key = cur.ident()?;
            if seen.contains(&key) {
                return Err(Diagnostic::error("duplicate-key", format!("duplicate key `{key}`")).at(kpos));
            }
            seen.push(key.clone());
            cur.expect(&Tok::Colon)?;
            match key.as_str() {
                "question" => d.question = cur.string()?,
                "type" => {
                    let p = cur.pos();
                    kind = Some((cur.ident()?, p));
                }
                "range" => {
                    let mut opts = vec![cur.ident()?];
                    while cur.eat(&Tok::Bar) {
                        opts.push(cur.ident()?);
                    }
                    range = Some(opts);
                }
                "visible" => d.visibility = parse_expr_tokens(&mut cur, Dialect::Dm)?,
                "rules" => {
                    d.rules.push(parse_expr_tokens(&mut cur, Dialect::Dm)?);
                    while cur.eat(&Tok::Comma) {
                        d.rules.push(parse_expr_tokens(&mut cur, Dialect::Dm)?);
                    }
                }
                "attributes" => {
                    cur.expect(&Tok::LBrace)?;
                    while !cur.eat(&Tok::RBrace) {
                        let k = cur.ident()?;
                        cur.expect(&Tok::Colon)?;
                        let v = cur.string()?;
                        d.attributes.insert(k, v);
                        if !cur.eat(&Tok::Comma) {
                            cur.expect(&Tok::RBrace)?;
                            break;
                        }
                    }
                }
                _ => {
                    return Err(Diagnostic::error(
                        "syntax",
                        format!("unknown key `{key}`; expected question, type, range, visible, rules or attributes"),
                    )
                    .at(kpos))
                }
            }
            cur.expect(&Tok::Semi)?;
        }
        d.range = match (kind, range) {
            (None, None) => Range::Boolean,
            (Some((k, _)), None) if k == "boolean" => Range::Boolean,
            (Some((k, _)), Some(opts)) if k == "enumeration" => Range::Enumeration(opts),
            (Some((k, p)), _) if k != "boolean" && k != "enumeration" => {
                return Err(Diagnostic::error("syntax", format!("unknown type `{k}`")).at(p))
            }
            (Some((k, p)), None) => return Err(Diagnostic::error("range", format!("type {k} needs a range")).at(p)),
            (_, Some(_)) => return Err(Diagnostic::error("range", "range is only allowed for enumerations").at(id_pos)),
        };
        dm.decisions.insert(id, d);
    }
    Ok(dm)
}
