use super::{Assignment, Cnf};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Satisfiable; the witness assigns every model variable.
    Sat(Assignment),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub models: Vec<Assignment>,
    /// More models exist beyond `limit`.
    pub truncated: bool,
}

/// Decides satisfiability of `c` under `assumptions` by DPLL with unit
/// propagation.
pub fn sat(c: &Cnf, assumptions: &Assignment) -> Result<SatResult, SatError> {
    let mut s = Solver::new(c);
    let lits = assumption_lits(c, assumptions)?;
    if !s.solve(&lits) {
        return Ok(SatResult::Unsat);
    }
    let witness = c
        .var_table
        .iter()
        .filter(|(n, _)| !Cnf::is_aux(n))
        .map(|(n, &i)| (n.clone(), s.value[i as usize] > 0))
        .collect();
    Ok(SatResult::Sat(witness))
}

/// All assignments to `vars` that extend to a model of `c`, in
/// lexicographic order (false before true, variables in table order).
pub fn enumerate_models(c: &Cnf, vars: &[String], limit: usize) -> Result<Enumeration, SatError> {
    let mut idx = Vec::with_capacity(vars.len());
    for v in vars {
        let i = *c.var_table.get(v).ok_or_else(|| SatError::UnknownVariable(v.clone()))?;
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    idx.sort_unstable();
    let names: Vec<&str> = idx.iter().map(|&i| c.var_table.get_index(i as usize - 1).unwrap().0.as_str()).collect();
    let mut out = Enumeration::default();
    let mut solver = Solver::new(c);
    let mut prefix: Vec<i32> = Vec::new();
    walk(&mut solver, &idx, &names, &mut prefix, limit, &mut out);
    Ok(out)
}

fn walk(s: &mut Solver, idx: &[u32], names: &[&str], prefix: &mut Vec<i32>, limit: usize, out: &mut Enumeration) {
    if out.truncated || !s.solve(prefix) {
        return;
    }
    if prefix.len() == idx.len() {
        if out.models.len() == limit {
            out.truncated = true;
            return;
        }
        out.models.push(prefix.iter().zip(names).map(|(&l, &n)| (n, l > 0)).collect());
        return;
    }
    let v = idx[prefix.len()] as i32;
    for lit in [-v, v] {
        prefix.push(lit);
        walk(s, idx, names, prefix, limit, out);
        prefix.pop();
    }
}

fn assumption_lits(c: &Cnf, assumptions: &Assignment) -> Result<Vec<i32>, SatError> {
    assumptions
        .iter()
        .map(|(n, v)| {
            let i = *c.var_table.get(n).ok_or_else(|| SatError::UnknownVariable(n.to_string()))? as i32;
            Ok(if v { i } else { -i })
        })
        .collect()
}

struct Solver {
    clauses: Vec<Vec<i32>>,
    /// Clauses mentioning each variable.
    occurs: Vec<Vec<usize>>,
    /// Per variable: 1 true, -1 false, 0 unassigned.
    value: Vec<i8>,
    trail: Vec<u32>,
}

impl Solver {
    fn new(c: &Cnf) -> Self {
        let n = c.num_vars() as usize;
        let mut occurs = vec![Vec::new(); n + 1];
        for (ci, cl) in c.clauses.iter().enumerate() {
            for &l in cl {
                occurs[l.unsigned_abs() as usize].push(ci);
            }
        }
        Solver { clauses: c.clauses.clone(), occurs, value: vec![0; n + 1], trail: Vec::new() }
    }

    fn lit_value(&self, l: i32) -> i8 {
        let v = self.value[l.unsigned_abs() as usize];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    fn assign(&mut self, l: i32) {
        self.value[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
        self.trail.push(l.unsigned_abs());
    }

    fn undo_to(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.value[v as usize] = 0;
        }
    }

    /// Examines one clause: `Err(())` on conflict, `Ok(Some(l))` if unit.
    fn check(&self, ci: usize) -> Result<Option<i32>, ()> {
        let mut unit = None;
        let mut open = 0;
        for &l in &self.clauses[ci] {
            match self.lit_value(l) {
                1 => return Ok(None),
                0 => {
                    open += 1;
                    unit = Some(l);
                }
                _ => {}
            }
        }
        match open {
            0 => Err(()),
            1 => Ok(unit),
            _ => Ok(None),
        }
    }

    /// Unit propagation from the assignments on the trail after `from`.
    fn propagate(&mut self, mut from: usize) -> bool {
        while from < self.trail.len() {
            let v = self.trail[from] as usize;
            from += 1;
            for k in 0..self.occurs[v].len() {
                let ci = self.occurs[v][k];
                match self.check(ci) {
                    Err(()) => return false,
                    Ok(Some(l)) => self.assign(l),
                    Ok(None) => {}
                }
            }
        }
        true
    }

    /// Leaves a satisfying assignment in `value` if one exists; otherwise
    /// restores the empty assignment.
    fn solve(&mut self, assumptions: &[i32]) -> bool {
        self.undo_to(0);
        for &l in assumptions {
            match self.lit_value(l) {
                1 => continue,
                -1 => return false,
                _ => self.assign(l),
            }
        }
        for ci in 0..self.clauses.len() {
            match self.check(ci) {
                Err(()) => {
                    self.undo_to(0);
                    return false;
                }
                Ok(Some(l)) => self.assign(l),
                Ok(None) => {}
            }
        }
        if !self.propagate(0) || !self.search() {
            self.undo_to(0);
            return false;
        }
        true
    }

    fn search(&mut self) -> bool {
        let Some(v) = (1..self.value.len()).find(|&v| self.value[v] == 0) else {
            return true;
        };
        for lit in [-(v as i32), v as i32] {
            let mark = self.trail.len();
            self.assign(lit);
            if self.propagate(mark) && self.search() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}
