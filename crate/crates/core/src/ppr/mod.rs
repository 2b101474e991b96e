//! Product-process-resource models.

mod parse;
mod validate;
mod write;

pub use parse::{parse_ppr, parse_ppr_with_warnings};
pub use validate::validate_model;
pub use write::write_ppr;

use crate::diag::Diagnostic;
use crate::logic::{Assignment, Formula};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Product,
    Process,
    Resource,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Product, Category::Process, Category::Resource];

    pub fn keyword(self) -> &'static str {
        match self {
            Category::Product => "Product",
            Category::Process => "Process",
            Category::Resource => "Resource",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.keyword().to_ascii_lowercase())
    }
}

/// Attribute value as written in the source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Str(String),
    Bool(bool),
    /// Numeric literal, kept verbatim.
    Number(String),
    Array(Vec<Value>),
    Object(IndexMap<String, Value>),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(&crate::lex::quote(s)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Number(n) => f.write_str(n),
            Value::Array(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Object(m) => {
                f.write_str("{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    if crate::lex::is_ident(k) {
                        write!(f, " {k}: {v}")?;
                    } else {
                        write!(f, " {}: {v}", crate::lex::quote(k))?;
                    }
                }
                f.write_str(if m.is_empty() { "}" } else { " }" })
            }
        }
    }
}

/// Fields shared by products, processes and resources.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub name: String,
    pub is_abstract: bool,
    pub implements: Vec<String>,
    pub requires: Vec<String>,
    pub excludes: Vec<String>,
    pub children: Vec<String>,
    pub attributes: IndexMap<String, Value>,
}

impl Unit {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Unit {
            name: id.clone(),
            id,
            is_abstract: false,
            implements: Vec::new(),
            requires: Vec::new(),
            excludes: Vec::new(),
            children: Vec::new(),
            attributes: IndexMap::new(),
        }
    }

    pub fn attribute_str(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).and_then(Value::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    /// Port label; empty when the source gives a bare product reference.
    pub label: String,
    pub product: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Process {
    #[serde(flatten)]
    pub unit: Unit,
    pub inputs: Vec<String>,
    pub outputs: Vec<Output>,
    pub resources: Vec<String>,
}

impl Process {
    pub fn new(id: impl Into<String>) -> Self {
        Process { unit: Unit::new(id), inputs: Vec::new(), outputs: Vec::new(), resources: Vec::new() }
    }
}

impl std::ops::Deref for Process {
    type Target = Unit;
    fn deref(&self) -> &Unit {
        &self.unit
    }
}

impl std::ops::DerefMut for Process {
    fn deref_mut(&mut self) -> &mut Unit {
        &mut self.unit
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDef {
    pub id: String,
    pub scope: Vec<String>,
    pub expr: Formula,
}

impl ConstraintDef {
    /// Source form `ids -> expr`.
    pub fn definition(&self) -> String {
        format!("{} -> {}", self.scope.join(","), self.expr.display(crate::logic::Dialect::Ppr))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueType {
    String,
    Number,
    Boolean,
}

impl ValueType {
    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::String => "String",
            ValueType::Number => "Number",
            ValueType::Boolean => "Boolean",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "String" => Some(ValueType::String),
            "Number" => Some(ValueType::Number),
            "Boolean" => Some(ValueType::Boolean),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub id: String,
    pub description: String,
    pub default_value: String,
    pub value_type: ValueType,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PprModel {
    pub products: IndexMap<String, Unit>,
    pub processes: IndexMap<String, Process>,
    pub resources: IndexMap<String, Unit>,
    pub constraints: IndexMap<String, ConstraintDef>,
    pub attribute_defs: IndexMap<String, AttributeDef>,
}

impl PprModel {
    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
            && self.processes.is_empty()
            && self.resources.is_empty()
            && self.constraints.is_empty()
            && self.attribute_defs.is_empty()
    }

    /// Categories declaring `id`, in product, process, resource order.
    pub fn categories_of(&self, id: &str) -> Vec<Category> {
        Category::ALL.into_iter().filter(|&c| self.unit_in(c, id).is_some()).collect()
    }

    pub fn unit_in(&self, cat: Category, id: &str) -> Option<&Unit> {
        match cat {
            Category::Product => self.products.get(id),
            Category::Process => self.processes.get(id).map(|p| &p.unit),
            Category::Resource => self.resources.get(id),
        }
    }

    /// Units of one category in declaration order.
    pub fn units(&self, cat: Category) -> Box<dyn Iterator<Item = &Unit> + '_> {
        match cat {
            Category::Product => Box::new(self.products.values()),
            Category::Process => Box::new(self.processes.values().map(|p| &p.unit)),
            Category::Resource => Box::new(self.resources.values()),
        }
    }

    fn unit_mut(&mut self, cat: Category, id: &str) -> Option<&mut Unit> {
        match cat {
            Category::Product => self.products.get_mut(id),
            Category::Process => self.processes.get_mut(id).map(|p| &mut p.unit),
            Category::Resource => self.resources.get_mut(id),
        }
    }

    /// Units directly implementing `id` in declaration order.
    pub fn implementers(&self, cat: Category, id: &str) -> Vec<&Unit> {
        self.units(cat).filter(|u| u.implements.iter().any(|p| p == id)).collect()
    }

    /// Copy with every exclusion mirrored on its target.
    pub fn normalized(&self) -> PprModel {
        let mut m = self.clone();
        for cat in Category::ALL {
            let pairs: Vec<(String, String)> =
                self.units(cat).flat_map(|u| u.excludes.iter().map(|x| (u.id.clone(), x.clone()))).collect();
            for (a, b) in pairs {
                if let Some(target) = m.unit_mut(cat, &b) {
                    if !target.excludes.contains(&a) {
                        target.excludes.push(a);
                    }
                }
            }
        }
        m
    }
}

/// Evaluates a constraint under an assignment that covers its scope.
pub fn eval_constraint(c: &ConstraintDef, assignment: &Assignment) -> Result<bool, Diagnostic> {
    if let Some(missing) = c.scope.iter().find(|v| assignment.get(v).is_none()) {
        return Err(Diagnostic::error("unassigned", format!("scope variable {missing} is unassigned")).about(&c.id));
    }
    c.expr
        .eval(assignment)
        .map_err(|v| Diagnostic::error("unassigned", format!("variable {v} is unassigned")).about(&c.id))
}

/// Non-abstract units transitively implementing the abstract unit `id`,
/// in declaration order.
pub fn concrete_members(model: &PprModel, id: &str) -> Result<Vec<String>, Diagnostic> {
    let cat = *model
        .categories_of(id)
        .first()
        .ok_or_else(|| Diagnostic::error("not-found", format!("unknown unit {id}")).about(id))?;
    if !model.unit_in(cat, id).unwrap().is_abstract {
        return Err(Diagnostic::error("not-abstract", format!("{id} is not abstract")).about(id));
    }
    let mut reach = std::collections::HashSet::from([id.to_string()]);
    loop {
        let before = reach.len();
        for u in model.units(cat) {
            if !reach.contains(&u.id) && u.implements.iter().any(|p| reach.contains(p)) {
                reach.insert(u.id.clone());
            }
        }
        if reach.len() == before {
            break;
        }
    }
    Ok(model
        .units(cat)
        .filter(|u| u.id != id && !u.is_abstract && reach.contains(&u.id))
        .map(|u| u.id.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> PprModel {
        parse_ppr(
            r#"
            Product "A": { isAbstract: true }
            Product "B": { isAbstract: true, implements: ["A"] }
            Product "C": { implements: ["B"] }
            Product "D": { implements: ["A"], excludes: ["C"] }
            "#,
        )
        .unwrap()
    }

    #[test]
    fn concrete_members_follow_chains() {
        let m = chain();
        assert_eq!(concrete_members(&m, "A").unwrap(), vec!["C", "D"]);
        assert_eq!(concrete_members(&m, "B").unwrap(), vec!["C"]);
        assert_eq!(concrete_members(&m, "C").unwrap_err().rule, "not-abstract");
        assert_eq!(concrete_members(&m, "Z").unwrap_err().rule, "not-found");
    }

    #[test]
    fn normalization_mirrors_excludes() {
        let m = chain().normalized();
        assert_eq!(m.products["C"].excludes, vec!["D"]);
        assert_eq!(m.products["D"].excludes, vec!["C"]);
    }

    #[test]
    fn constraint_evaluation() {
        let m = parse_ppr(
            r#"
            Product "Lock1": {}
            Product "Pipe2": {}
            Product "Pipe3": {}
            Constraint "C1": { definition: "Lock1,Pipe2,Pipe3 -> Lock1 implies Pipe2 OR Pipe3" }
            "#,
        )
        .unwrap();
        let c = &m.constraints["C1"];
        let a = |l, p2, p3| Assignment::new().with("Lock1", l).with("Pipe2", p2).with("Pipe3", p3);
        assert!(eval_constraint(c, &a(true, false, true)).unwrap());
        assert!(eval_constraint(c, &a(false, false, false)).unwrap());
        assert!(!eval_constraint(c, &a(true, false, false)).unwrap());
        let partial = Assignment::new().with("Lock1", true);
        assert_eq!(eval_constraint(c, &partial).unwrap_err().rule, "unassigned");
    }
}
