use super::{eq_var_name, Formula};
use indexmap::IndexMap;

/// Prefix of auxiliary variable names. It cannot start an identifier, so
/// auxiliaries never collide with model variables.
pub const AUX_PREFIX: &str = "$t";

/// Clause set over 1-based variable indices; a negative literal is a
/// negated variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub clauses: Vec<Vec<i32>>,
    /// Variable name to index, in order of first appearance.
    pub var_table: IndexMap<String, u32>,
    aux: u32,
}

pub fn to_cnf(f: &Formula) -> Cnf {
    let mut c = Cnf::new();
    c.add_formula(f);
    c
}

impl Cnf {
    pub fn new() -> Self {
        Cnf::default()
    }

    pub fn num_vars(&self) -> u32 {
        self.var_table.len() as u32
    }

    /// Index of `name`, registering it if needed.
    pub fn var(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.var_table.get(name) {
            return i;
        }
        let i = self.var_table.len() as u32 + 1;
        self.var_table.insert(name.to_string(), i);
        i
    }

    pub fn is_aux(name: &str) -> bool {
        name.starts_with(AUX_PREFIX)
    }

    /// Model variables (auxiliaries excluded) in table order.
    pub fn model_vars(&self) -> impl Iterator<Item = &str> {
        self.var_table.keys().map(String::as_str).filter(|n| !Cnf::is_aux(n))
    }

    fn fresh(&mut self) -> i32 {
        self.aux += 1;
        let name = format!("{AUX_PREFIX}{}", self.aux);
        self.var(&name) as i32
    }

    fn atom(&mut self, f: &Formula) -> Option<i32> {
        match f {
            Formula::Var(v) => Some(self.var(v) as i32),
            Formula::VarEq(v, o) => Some(self.var(&eq_var_name(v, o)) as i32),
            Formula::Not(x) => self.atom(x).map(|l| -l),
            _ => None,
        }
    }

    /// Conjoins `f` to the clause set; the result is equisatisfiable and
    /// every model of it restricted to the model variables satisfies `f`.
    pub fn add_formula(&mut self, f: &Formula) {
        // register model variables first so they get the low indices
        f.visit_atoms(&mut |a| {
            let _ = match a {
                super::Atom::Var(v) => self.var(v),
                super::Atom::Eq(v, o) => self.var(&eq_var_name(v, o)),
            };
        });
        let mut conjuncts = Vec::new();
        split_conjuncts(f, false, &mut conjuncts);
        for (g, neg) in conjuncts {
            let mut disjuncts = Vec::new();
            split_disjuncts(g, neg, &mut disjuncts);
            let mut clause = Vec::new();
            let mut satisfied = false;
            for (d, dneg) in disjuncts {
                match (d, dneg) {
                    (Formula::True, false) | (Formula::False, true) => satisfied = true,
                    (Formula::True, true) | (Formula::False, false) => {}
                    _ => {
                        let l = self.define(d);
                        clause.push(if dneg { -l } else { l });
                    }
                }
            }
            if satisfied {
                continue;
            }
            clause.sort_by_key(|l| (l.unsigned_abs(), *l));
            clause.dedup();
            if clause.windows(2).any(|w| w[0] == -w[1]) {
                continue;
            }
            self.clauses.push(clause);
        }
    }

    /// Literal equivalent to `f`, introducing an auxiliary if `f` is not a
    /// literal.
    fn define(&mut self, f: &Formula) -> i32 {
        if let Some(l) = self.atom(f) {
            return l;
        }
        match f {
            Formula::Not(x) => -self.define(x),
            Formula::True | Formula::False => {
                let t = self.fresh();
                self.clauses.push(vec![if f.is_literal_true() { t } else { -t }]);
                t
            }
            Formula::And(xs) => {
                let ls: Vec<i32> = xs.iter().map(|x| self.define(x)).collect();
                let t = self.fresh();
                let mut long = vec![t];
                for &l in &ls {
                    self.clauses.push(vec![-t, l]);
                    long.push(-l);
                }
                self.clauses.push(long);
                t
            }
            Formula::Or(xs) => {
                let ls: Vec<i32> = xs.iter().map(|x| self.define(x)).collect();
                self.define_or(ls)
            }
            Formula::Implies(a, b) => {
                let la = self.define(a);
                let lb = self.define(b);
                self.define_or(vec![-la, lb])
            }
            Formula::Var(_) | Formula::VarEq(..) => unreachable!(),
        }
    }

    fn define_or(&mut self, ls: Vec<i32>) -> i32 {
        let t = self.fresh();
        let mut long = vec![-t];
        for &l in &ls {
            self.clauses.push(vec![t, -l]);
            long.push(l);
        }
        self.clauses.push(long);
        t
    }
}

/// Flattens `f` (negated if `neg`) into a list of conjuncts.
fn split_conjuncts<'a>(f: &'a Formula, neg: bool, out: &mut Vec<(&'a Formula, bool)>) {
    match (f, neg) {
        (Formula::And(xs), false) => xs.iter().for_each(|x| split_conjuncts(x, false, out)),
        (Formula::Or(xs), true) => xs.iter().for_each(|x| split_conjuncts(x, true, out)),
        (Formula::Not(x), _) => split_conjuncts(x, !neg, out),
        (Formula::Implies(a, b), true) => {
            split_conjuncts(a, false, out);
            split_conjuncts(b, true, out);
        }
        (Formula::True, false) | (Formula::False, true) => {}
        _ => out.push((f, neg)),
    }
}

/// Flattens `f` (negated if `neg`) into a list of disjuncts.
fn split_disjuncts<'a>(f: &'a Formula, neg: bool, out: &mut Vec<(&'a Formula, bool)>) {
    match (f, neg) {
        (Formula::Or(xs), false) => xs.iter().for_each(|x| split_disjuncts(x, false, out)),
        (Formula::And(xs), true) => xs.iter().for_each(|x| split_disjuncts(x, true, out)),
        (Formula::Not(x), _) => split_disjuncts(x, !neg, out),
        (Formula::Implies(a, b), false) => {
            split_disjuncts(a, true, out);
            split_disjuncts(b, false, out);
        }
        _ => out.push((f, neg)),
    }
}
