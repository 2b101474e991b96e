//! Propositional formulas shared by PPR constraints, feature-model
//! constraints, decision visibility conditions and rules, and CDCs.

mod cnf;
mod parse;
mod sat;

pub use cnf::{to_cnf, Cnf, AUX_PREFIX};
pub use parse::{parse_expr, parse_expr_at, parse_expr_tokens, Dialect};
pub use sat::{enumerate_models, sat, Enumeration, SatError, SatResult};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Var(String),
    /// `name == option`: an enumeration decision takes `option`.
    VarEq(String, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

/// Name of the Boolean variable standing for `name == option` when a
/// formula is handed to the solver.
pub fn eq_var_name(name: &str, option: &str) -> String {
    format!("{name}=={option}")
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn var_eq(name: impl Into<String>, option: impl Into<String>) -> Formula {
        Formula::VarEq(name.into(), option.into())
    }

    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction that collapses the empty case to `True` and a single
    /// operand to itself.
    pub fn and_all(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction that collapses the empty case to `False` and a single
    /// operand to itself.
    pub fn or_all(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Exactly one of `vars` holds.
    pub fn exactly_one(vars: &[String]) -> Formula {
        let mut parts = vec![Formula::or_all(vars.iter().map(Formula::var).collect())];
        for (i, a) in vars.iter().enumerate() {
            for b in &vars[i + 1..] {
                parts.push(Formula::negate(Formula::And(vec![Formula::var(a), Formula::var(b)])));
            }
        }
        Formula::and_all(parts)
    }

    pub fn is_literal_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_literal_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    /// Visits every atom (variable or enumeration test) in source order.
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(Atom<'a>)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Var(v) => f(Atom::Var(v)),
            Formula::VarEq(v, o) => f(Atom::Eq(v, o)),
            Formula::Not(x) => x.visit_atoms(f),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.visit_atoms(f)),
            Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Distinct variable names (enumeration tests contribute their
    /// decision name) in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit_atoms(&mut |a| {
            let name = a.name();
            if !out.iter().any(|v| v == name) {
                out.push(name.to_string());
            }
        });
        out
    }

    /// Rewrites every variable name through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Var(v) => f(v),
            Formula::VarEq(v, o) => Formula::VarEq(v.clone(), o.clone()),
            Formula::Not(x) => Formula::negate(x.map_vars(f)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| x.map_vars(f)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| x.map_vars(f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_vars(f), b.map_vars(f)),
        }
    }

    /// Three-valued (Kleene) evaluation; unassigned variables are unknown.
    pub fn eval_partial(&self, v: &impl Valuation) -> Truth {
        match self {
            Formula::True => Truth::True,
            Formula::False => Truth::False,
            Formula::Var(name) => v.lookup(name).into(),
            Formula::VarEq(name, opt) => v.lookup_eq(name, opt).into(),
            Formula::Not(x) => x.eval_partial(v).not(),
            Formula::And(xs) => {
                let mut acc = Truth::True;
                for x in xs {
                    acc = acc.and(x.eval_partial(v));
                    if acc == Truth::False {
                        break;
                    }
                }
                acc
            }
            Formula::Or(xs) => {
                let mut acc = Truth::False;
                for x in xs {
                    acc = acc.or(x.eval_partial(v));
                    if acc == Truth::True {
                        break;
                    }
                }
                acc
            }
            Formula::Implies(a, b) => a.eval_partial(v).not().or(b.eval_partial(v)),
        }
    }

    /// Classical evaluation; fails on the first unassigned variable.
    pub fn eval(&self, v: &impl Valuation) -> Result<bool, String> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(name) => v.lookup(name).ok_or_else(|| name.clone())?,
            Formula::VarEq(name, opt) => v.lookup_eq(name, opt).ok_or_else(|| eq_var_name(name, opt))?,
            Formula::Not(x) => !x.eval(v)?,
            Formula::And(xs) => {
                let mut all = true;
                for x in xs {
                    all &= x.eval(v)?;
                }
                all
            }
            Formula::Or(xs) => {
                let mut any = false;
                for x in xs {
                    any |= x.eval(v)?;
                }
                any
            }
            Formula::Implies(a, b) => !a.eval(v)? || b.eval(v)?,
        })
    }

    pub fn display(&self, dialect: Dialect) -> DisplayFormula<'_> {
        DisplayFormula { f: self, dialect }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(Dialect::Dm).fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom<'a> {
    Var(&'a str),
    Eq(&'a str, &'a str),
}

impl<'a> Atom<'a> {
    pub fn name(&self) -> &'a str {
        match *self {
            Atom::Var(v) | Atom::Eq(v, _) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::True, _) | (_, Truth::True) => Truth::True,
            (Truth::False, Truth::False) => Truth::False,
            _ => Truth::Unknown,
        }
    }
}

impl From<Option<bool>> for Truth {
    fn from(v: Option<bool>) -> Self {
        match v {
            Some(true) => Truth::True,
            Some(false) => Truth::False,
            None => Truth::Unknown,
        }
    }
}

impl From<bool> for Truth {
    fn from(v: bool) -> Self {
        Some(v).into()
    }
}

/// Source of variable values for evaluation.
pub trait Valuation {
    fn lookup(&self, var: &str) -> Option<bool>;

    fn lookup_eq(&self, var: &str, option: &str) -> Option<bool> {
        self.lookup(&eq_var_name(var, option))
    }
}

impl<V: Valuation + ?Sized> Valuation for &V {
    fn lookup(&self, var: &str) -> Option<bool> {
        (**self).lookup(var)
    }

    fn lookup_eq(&self, var: &str, option: &str) -> Option<bool> {
        (**self).lookup_eq(var, option)
    }
}

/// Reads every unassigned variable as false.
#[derive(Clone, Copy, Debug)]
pub struct ClosedWorld<V>(pub V);

impl<V: Valuation> Valuation for ClosedWorld<V> {
    fn lookup(&self, var: &str) -> Option<bool> {
        Some(self.0.lookup(var).unwrap_or(false))
    }

    fn lookup_eq(&self, var: &str, option: &str) -> Option<bool> {
        Some(self.0.lookup_eq(var, option).unwrap_or(false))
    }
}

/// A possibly partial map from variable names to truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(pub BTreeMap<String, bool>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn set(&mut self, var: impl Into<String>, value: bool) -> &mut Self {
        self.0.insert(var.into(), value);
        self
    }

    pub fn with(mut self, var: impl Into<String>, value: bool) -> Self {
        self.set(var, value);
        self
    }

    pub fn get(&self, var: &str) -> Option<bool> {
        self.0.get(var).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Variables assigned true.
    pub fn true_vars(&self) -> impl Iterator<Item = &str> {
        self.iter().filter(|(_, v)| *v).map(|(k, _)| k)
    }
}

impl Valuation for Assignment {
    fn lookup(&self, var: &str) -> Option<bool> {
        self.get(var)
    }
}

impl<S: Into<String>> FromIterator<(S, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, bool)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// Renders a formula in one of the concrete syntaxes; the output parses
/// back to an equal formula in the same dialect.
pub struct DisplayFormula<'a> {
    f: &'a Formula,
    dialect: Dialect,
}

const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_NOT: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(_) => PREC_OR,
        Formula::And(_) => PREC_AND,
        Formula::Not(_) => PREC_NOT,
        _ => PREC_ATOM,
    }
}

impl DisplayFormula<'_> {
    fn write(&self, f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ppr = self.dialect == Dialect::Ppr;
        let child = |c: &Formula, min: u8, out: &mut fmt::Formatter<'_>| -> fmt::Result {
            if prec(c) < min {
                out.write_str("(")?;
                self.write(c, out)?;
                out.write_str(")")
            } else {
                self.write(c, out)
            }
        };
        match f {
            Formula::True => out.write_str("true"),
            Formula::False => out.write_str("false"),
            Formula::Var(v) => out.write_str(v),
            Formula::VarEq(v, o) => write!(out, "{v} == {o}"),
            Formula::Not(x) => {
                out.write_str(if ppr { "NOT " } else { "!" })?;
                child(x, PREC_NOT, out)
            }
            Formula::And(xs) | Formula::Or(xs) => {
                let (op, p) = match (f, ppr) {
                    (Formula::And(_), false) => (" && ", PREC_AND),
                    (Formula::And(_), true) => (" AND ", PREC_AND),
                    (_, false) => (" || ", PREC_OR),
                    (_, true) => (" OR ", PREC_OR),
                };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.write_str(op)?;
                    }
                    // nested n-ary nodes keep their parentheses so the
                    // tree shape survives a round trip
                    child(x, p + 1, out)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                child(a, PREC_IMPLIES + 1, out)?;
                out.write_str(if ppr { " implies " } else { " => " })?;
                child(b, PREC_IMPLIES, out)
            }
        }
    }
}

impl fmt::Display for DisplayFormula<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.f, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Formula {
        Formula::var("X")
    }
    fn y() -> Formula {
        Formula::var("Y")
    }

    #[test]
    fn kleene_or_absorbs_true() {
        let f = Formula::Or(vec![x(), y()]);
        let a = Assignment::new().with("X", true);
        assert_eq!(f.eval_partial(&a), Truth::True);
    }

    #[test]
    fn kleene_implies_with_true_antecedent_is_unknown() {
        let f = Formula::implies(x(), y());
        let a = Assignment::new().with("X", true);
        assert_eq!(f.eval_partial(&a), Truth::Unknown);
    }

    #[test]
    fn false_literal_is_false() {
        assert_eq!(Formula::False.eval_partial(&Assignment::new()), Truth::False);
    }

    #[test]
    fn eval_reports_missing_variable() {
        let f = Formula::And(vec![x(), y()]);
        let a = Assignment::new().with("X", true);
        assert_eq!(f.eval(&a), Err("Y".to_string()));
    }

    #[test]
    fn display_dialects() {
        let f =
            Formula::implies(Formula::var("Lock1"), Formula::Or(vec![Formula::var("Pipe2"), Formula::var("Pipe3")]));
        assert_eq!(f.display(Dialect::Dm).to_string(), "Lock1 => Pipe2 || Pipe3");
        assert_eq!(f.display(Dialect::Ppr).to_string(), "Lock1 implies Pipe2 OR Pipe3");
        let nested = Formula::And(vec![x(), Formula::And(vec![y(), x()])]);
        assert_eq!(nested.to_string(), "X && (Y && X)");
        let left = Formula::implies(Formula::implies(x(), y()), x());
        assert_eq!(left.to_string(), "(X => Y) => X");
    }

    #[test]
    fn exactly_one_semantics() {
        let vars: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let f = Formula::exactly_one(&vars);
        for bits in 0..8u32 {
            let a: Assignment = vars.iter().enumerate().map(|(i, v)| (v.clone(), bits & (1 << i) != 0)).collect();
            assert_eq!(f.eval(&a).unwrap(), bits.count_ones() == 1);
        }
    }

    #[test]
    fn variables_in_first_occurrence_order() {
        let f = Formula::implies(Formula::var_eq("Pipe", "Pipe2"), Formula::And(vec![y(), x(), y()]));
        assert_eq!(f.variables(), vec!["Pipe", "Y", "X"]);
    }
}
