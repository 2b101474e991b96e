use super::metric::SpaceMetric;
use super::workspace::Workspace;
use super::EngineError;
use crate::diag::Diagnostic;
use crate::logic::{sat, to_cnf, Assignment, ClosedWorld, Formula, SatResult, Truth, Valuation};
use crate::vmodels::{
    complete_mandatory, fm_to_formula, fm_violations, selection_digest, split_ref, validate_fm_config, with_ancestors,
    Assign, DValue, Decision, DmConfiguration, DmValuation, FmConfiguration, Origin,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Product,
    Process,
    Resource,
    Done,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Product => "product",
            Stage::Process => "process",
            Stage::Resource => "resource",
            Stage::Done => "done",
        })
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "product" => Ok(Stage::Product),
            "process" => Ok(Stage::Process),
            "resource" => Ok(Stage::Resource),
            "done" => Ok(Stage::Done),
            _ => Err(format!("unknown stage {s}")),
        }
    }
}

/// What the finished process sequence leaves of the resource model.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReduction {
    /// Concrete features named directly by a fired CDC.
    pub preselected: BTreeSet<String>,
    /// Abstract features of which at least one member must be chosen.
    pub required_groups: BTreeSet<String>,
    /// Features still open to the user.
    pub allowed: BTreeSet<String>,
    /// Features that may not be selected.
    pub locked: BTreeSet<String>,
}

#[derive(Clone, Debug)]
pub struct StagedSession {
    workspace: Arc<Workspace>,
    product_ids: HashSet<String>,
    stage: Stage,
    product_cfg: Option<FmConfiguration>,
    process_cfg: DmConfiguration,
    forced: bool,
    sequence: Vec<String>,
    reduction: Option<ResourceReduction>,
    resource_cfg: Option<FmConfiguration>,
    metric: Option<SpaceMetric>,
}

/// The metric cache is not part of the state.
impl PartialEq for StagedSession {
    fn eq(&self, o: &Self) -> bool {
        self.workspace == o.workspace
            && self.stage == o.stage
            && self.product_cfg == o.product_cfg
            && self.process_cfg == o.process_cfg
            && self.forced == o.forced
            && self.sequence == o.sequence
            && self.reduction == o.reduction
            && self.resource_cfg == o.resource_cfg
    }
}

impl Eq for StagedSession {}

/// Product decisions read false until preset; process decisions stay
/// unknown until taken.
struct ProcessView<'a> {
    values: &'a DmValuation,
    product_ids: &'a HashSet<String>,
}

impl Valuation for ProcessView<'_> {
    fn lookup(&self, var: &str) -> Option<bool> {
        self.values.lookup(var).or_else(|| self.product_ids.contains(var).then_some(false))
    }

    fn lookup_eq(&self, var: &str, option: &str) -> Option<bool> {
        self.values.lookup_eq(var, option).or_else(|| self.product_ids.contains(var).then_some(false))
    }
}

/// Qualified references across the three models; resources are unknown
/// until the resource selection exists.
struct Combined<'a> {
    session: &'a StagedSession,
    process: DmValuation,
}

impl Valuation for Combined<'_> {
    fn lookup(&self, var: &str) -> Option<bool> {
        let (model, el) = split_ref(var)?;
        let m = &self.session.workspace.models;
        if model == m.product_fm.model_id {
            Some(self.session.product_cfg.as_ref().is_some_and(|c| c.selected.contains(el)))
        } else if model == m.process_dm.model_id {
            self.process.lookup(el)
        } else if model == m.resource_fm.model_id {
            self.session.resource_cfg.as_ref().map(|c| c.selected.contains(el))
        } else {
            None
        }
    }

    fn lookup_eq(&self, var: &str, option: &str) -> Option<bool> {
        let (model, el) = split_ref(var)?;
        if model == self.session.workspace.models.process_dm.model_id {
            self.process.lookup_eq(el, option)
        } else {
            None
        }
    }
}

impl StagedSession {
    pub fn new(workspace: Arc<Workspace>) -> Result<Self, EngineError> {
        let errors: Vec<Diagnostic> = workspace.check().into_iter().filter(Diagnostic::is_error).collect();
        if !errors.is_empty() {
            return Err(EngineError::Inconsistent(errors));
        }
        let product_ids = workspace.product_decisions().map(|d| d.id.clone()).collect();
        let process_cfg =
            DmConfiguration { model_id: workspace.models.process_dm.model_id.clone(), ..Default::default() };
        Ok(StagedSession {
            workspace,
            product_ids,
            stage: Stage::Product,
            product_cfg: None,
            process_cfg,
            forced: false,
            sequence: Vec::new(),
            reduction: None,
            resource_cfg: None,
            metric: None,
        })
    }

    pub fn workspace(&self) -> &Arc<Workspace> {
        &self.workspace
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn product_config(&self) -> Option<&FmConfiguration> {
        self.product_cfg.as_ref()
    }

    pub fn process_config(&self) -> &DmConfiguration {
        &self.process_cfg
    }

    /// Production sequence, available once the process stage is finished.
    pub fn sequence(&self) -> &[String] {
        &self.sequence
    }

    pub fn forced(&self) -> bool {
        self.forced
    }

    pub fn resource_reduction(&self) -> Option<&ResourceReduction> {
        self.reduction.as_ref()
    }

    pub fn resource_config(&self) -> Option<&FmConfiguration> {
        self.resource_cfg.as_ref()
    }

    pub fn is_product_decision(&self, id: &str) -> bool {
        self.product_ids.contains(id)
    }

    fn expect(&self, stage: Stage) -> Result<(), EngineError> {
        if self.stage == stage {
            Ok(())
        } else {
            Err(EngineError::Stage { expected: stage, actual: self.stage })
        }
    }

    fn decision(&self, id: &str) -> Option<&Decision> {
        self.workspace.models.process_dm.decisions.get(id)
    }

    fn truth(&self, f: &Formula, values: &DmValuation) -> Truth {
        f.eval_partial(&ProcessView { values, product_ids: &self.product_ids })
    }

    // ---- product stage ----

    /// Validates the product selection, stores it with its ancestors and
    /// presets the product decisions.
    pub fn set_product_config<S: AsRef<str>>(&mut self, selected: &[S]) -> Result<&[Assign], EngineError> {
        self.expect(Stage::Product)?;
        let fm = &self.workspace.models.product_fm;
        let cfg = FmConfiguration::new(&fm.model_id, selected.iter().map(|s| s.as_ref().to_string()));
        validate_fm_config(fm, &cfg).map_err(EngineError::Violations)?;
        let cfg = FmConfiguration { selected: with_ancestors(fm, &cfg.selected), ..cfg };
        self.process_cfg.product_digest = selection_digest(&cfg);
        self.process_cfg.assignments.clear();
        self.product_cfg = Some(cfg);
        self.reduce_process_dm();
        self.stage = Stage::Process;
        Ok(&self.process_cfg.assignments)
    }

    fn reduce_process_dm(&mut self) {
        let sel = &self.product_cfg.as_ref().expect("product configuration set").selected;
        let mut presets = Vec::new();
        for d in self.workspace.product_decisions() {
            let value = if d.is_enum() {
                match d.options().iter().find(|o| sel.contains(*o)) {
                    Some(o) => DValue::Option(o.clone()),
                    None => continue,
                }
            } else {
                DValue::Bool(sel.contains(&d.id))
            };
            presets.push(Assign { seq: presets.len() as u64, origin: Origin::Preset, decision: d.id.clone(), value });
        }
        self.process_cfg.assignments = presets;
        self.metric = None;
    }

    // ---- process stage ----

    /// Open decisions whose visibility currently evaluates to true, in
    /// model order.
    pub fn visible_decisions(&self) -> Vec<String> {
        if self.stage != Stage::Process {
            return Vec::new();
        }
        let values = self.process_cfg.valuation();
        self.workspace
            .process_decisions()
            .filter(|d| !values.0.contains_key(&d.id) && self.truth(&d.visibility, &values) == Truth::True)
            .map(|d| d.id.clone())
            .collect()
    }

    /// Visibility of a decision under the presets alone.
    pub fn preset_visibility(&self, id: &str) -> Truth {
        let Some(d) = self.decision(id) else { return Truth::False };
        let values = DmValuation(
            self.process_cfg
                .assignments
                .iter()
                .filter(|a| a.origin == Origin::Preset)
                .map(|a| (a.decision.clone(), a.value.clone()))
                .collect(),
        );
        self.truth(&d.visibility, &values)
    }

    /// Records a user decision and propagates rules with a single positive
    /// consequent. Returns the new assignments, the user's first.
    pub fn take_decision(&mut self, id: &str, value: DValue) -> Result<Vec<Assign>, EngineError> {
        self.expect(Stage::Process)?;
        let d = self.decision(id).ok_or_else(|| EngineError::UnknownDecision(id.to_string()))?;
        if !value.fits(&d.range) {
            return Err(EngineError::Range { decision: id.to_string(), value });
        }
        if self.process_cfg.get(id).is_some() {
            return Err(EngineError::AlreadySet(id.to_string()));
        }
        if !self.visible_decisions().iter().any(|v| v == id) {
            return Err(EngineError::NotVisible(id.to_string()));
        }
        let before = self.process_cfg.assignments.len();
        self.push(id, value, Origin::User);
        self.propagate();
        let values = self.process_cfg.valuation();
        let broken = self
            .workspace
            .models
            .process_dm
            .all_rules()
            .find(|r| self.truth(r, &values) == Truth::False)
            .map(|r| r.to_string());
        if let Some(rule) = broken {
            self.process_cfg.assignments.truncate(before);
            return Err(EngineError::RuleViolation { decision: id.to_string(), rule });
        }
        Ok(self.process_cfg.assignments[before..].to_vec())
    }

    fn push(&mut self, id: &str, value: DValue, origin: Origin) {
        let seq = self.process_cfg.next_seq();
        self.process_cfg.assignments.push(Assign { seq, origin, decision: id.to_string(), value });
    }

    fn propagate(&mut self) {
        loop {
            let values = self.process_cfg.valuation();
            let mut next = None;
            'search: for d in self.workspace.models.process_dm.decisions.values() {
                for r in &d.rules {
                    let Formula::Implies(lhs, rhs) = r else { continue };
                    let (target, value) = match rhs.as_ref() {
                        Formula::Var(x) => (x, DValue::Bool(true)),
                        Formula::VarEq(x, o) => (x, DValue::Option(o.clone())),
                        _ => continue,
                    };
                    if values.0.contains_key(target) {
                        continue;
                    }
                    let fits = self.decision(target).is_some_and(|t| value.fits(&t.range));
                    if fits && self.truth(lhs, &values) == Truth::True {
                        next = Some((target.clone(), value));
                        break 'search;
                    }
                }
            }
            match next {
                Some((target, value)) => self.push(&target, value, Origin::Propagated),
                None => return,
            }
        }
    }

    pub fn user_decisions(&self) -> impl Iterator<Item = &Assign> {
        self.process_cfg.assignments.iter().filter(|a| a.origin == Origin::User)
    }

    /// Undoes the last `k` user decisions and everything they propagated.
    pub fn rollback(&mut self, k: usize) -> Result<(), EngineError> {
        self.expect(Stage::Process)?;
        let users: Vec<u64> = self.user_decisions().map(|a| a.seq).collect();
        if k > users.len() {
            return Err(EngineError::RollbackTooLarge { requested: k, available: users.len() });
        }
        if k > 0 {
            let cut = users[users.len() - k];
            self.process_cfg.assignments.retain(|a| a.seq < cut);
        }
        Ok(())
    }

    /// Closes the process stage. Open visible decisions are an error unless
    /// `force` is set, in which case they count as not taken.
    pub fn finish_process(&mut self, force: bool) -> Result<&[String], EngineError> {
        self.expect(Stage::Process)?;
        let pending = self.visible_decisions();
        if !pending.is_empty() && !force {
            return Err(EngineError::Pending(pending));
        }
        let values = self.process_cfg.valuation();
        let view = ClosedWorld(ProcessView { values: &values, product_ids: &self.product_ids });
        let broken: Vec<Diagnostic> = self
            .workspace
            .models
            .process_dm
            .all_rules()
            .filter(|r| r.eval_partial(&view) != Truth::True)
            .map(|r| Diagnostic::error("rule", format!("rule violated: {r}")))
            .collect();
        if !broken.is_empty() {
            return Err(EngineError::Violations(broken));
        }
        let reduction = self.reduce_resource_fm()?;
        self.sequence = self
            .process_cfg
            .assignments
            .iter()
            .filter(|a| a.origin != Origin::Preset && a.value == DValue::Bool(true))
            .map(|a| a.decision.clone())
            .collect();
        self.forced = force;
        self.reduction = Some(reduction);
        self.stage = Stage::Resource;
        Ok(&self.sequence)
    }

    fn combined(&self) -> ClosedWorld<Combined<'_>> {
        ClosedWorld(Combined { session: self, process: self.process_cfg.valuation() })
    }

    fn reduce_resource_fm(&self) -> Result<ResourceReduction, EngineError> {
        let m = &self.workspace.models;
        let rfm = &m.resource_fm;
        let in_model = |f: &Formula, model: &str| {
            let vars = f.variables();
            !vars.is_empty() && vars.iter().all(|v| split_ref(v).is_some_and(|(mm, _)| mm == model))
        };
        let mut red = ResourceReduction::default();
        let mut referenced = BTreeSet::new();
        let view = self.combined();
        for c in &m.cdcs {
            if !in_model(&c.lhs, &m.process_dm.model_id) || !in_model(&c.rhs, &rfm.model_id) {
                continue;
            }
            if c.lhs.eval_partial(&view) != Truth::True {
                continue;
            }
            for v in c.rhs.variables() {
                if let Some((_, el)) = split_ref(&v) {
                    referenced.insert(el.to_string());
                }
            }
            if let Formula::Var(v) = &c.rhs {
                let (_, el) = split_ref(v).expect("checked above");
                match rfm.features.get(el) {
                    Some(f) if f.is_abstract => red.required_groups.insert(el.to_string()),
                    Some(_) => red.preselected.insert(el.to_string()),
                    None => false,
                };
            }
        }
        red.allowed.insert(rfm.root.clone());
        for r in &referenced {
            red.allowed.extend(rfm.ancestors(r).into_iter().map(str::to_string));
            red.allowed.extend(rfm.subtree(r).into_iter().map(str::to_string));
        }
        red.locked = rfm.features.keys().filter(|f| !red.allowed.contains(*f)).cloned().collect();
        let required: BTreeSet<String> = red.preselected.union(&red.required_groups).cloned().collect();
        let clash: Vec<String> = complete_mandatory(rfm, &required).intersection(&red.locked).cloned().collect();
        if !clash.is_empty() {
            return Err(EngineError::Contradiction(clash));
        }
        Ok(red)
    }

    // ---- resource stage ----

    /// Checks the resource selection against the resource model, the locks
    /// and every CDC, then closes the session.
    pub fn set_resource_config<S: AsRef<str>>(&mut self, selected: &[S]) -> Result<(), EngineError> {
        self.expect(Stage::Resource)?;
        let rfm = &self.workspace.models.resource_fm;
        let mut sel: BTreeSet<String> = selected.iter().map(|s| s.as_ref().to_string()).collect();
        let unknown: Vec<Diagnostic> = sel
            .iter()
            .filter(|s| !rfm.features.contains_key(*s))
            .map(|s| Diagnostic::error("unknown-feature", format!("unknown feature {s}")).about(s))
            .collect();
        if !unknown.is_empty() {
            return Err(EngineError::Violations(unknown));
        }
        sel = with_ancestors(rfm, &sel);
        sel.insert(rfm.root.clone());
        let red = self.reduction.as_ref().expect("reduction computed at finish");
        let mut out: Vec<Diagnostic> = sel
            .intersection(&red.locked)
            .map(|f| Diagnostic::error("locked", format!("{f} is not used by the production sequence")).about(f))
            .collect();
        out.extend(fm_violations(rfm, &sel));
        let cfg = FmConfiguration { model_id: rfm.model_id.clone(), selected: sel };
        let previous = self.resource_cfg.replace(cfg);
        let view = self.combined();
        out.extend(
            self.workspace
                .models
                .cdcs
                .iter()
                .filter(|c| c.formula().eval_partial(&view) != Truth::True)
                .map(|c| Diagnostic::error("cdc", format!("CDC violated: {c}"))),
        );
        if !out.is_empty() {
            self.resource_cfg = previous;
            return Err(EngineError::Violations(out));
        }
        self.stage = Stage::Done;
        Ok(())
    }

    /// Some resource selection the stage would accept, found by SAT over the
    /// resource model, the locks and the CDCs; `None` if there is none.
    pub fn suggest_resources(&self) -> Option<BTreeSet<String>> {
        let red = self.reduction.as_ref()?;
        let m = &self.workspace.models;
        let rfm = &m.resource_fm;
        let view = ClosedWorld(Combined { session: self, process: self.process_cfg.valuation() });
        let mut parts = vec![fm_to_formula(rfm)];
        parts.extend(red.locked.iter().map(|f| Formula::negate(Formula::var(f))));
        for c in &m.cdcs {
            parts.push(c.formula().map_vars(&mut |v| match split_ref(v) {
                Some((model, el)) if model == rfm.model_id => Formula::var(el),
                _ => {
                    if view.lookup(v) == Some(true) {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
            }));
        }
        let cnf = to_cnf(&Formula::and_all(parts));
        match sat(&cnf, &Assignment::new()) {
            Ok(SatResult::Sat(w)) => {
                Some(w.true_vars().filter(|f| rfm.features.contains_key(*f)).map(str::to_string).collect())
            }
            _ => None,
        }
    }

    /// Whether every model and CDC holds over the combined configuration.
    pub fn combined_violations(&self) -> Vec<Diagnostic> {
        let view = self.combined();
        let m = &self.workspace.models;
        let mut out = Vec::new();
        if let Some(p) = &self.product_cfg {
            out.extend(fm_violations(&m.product_fm, &p.selected));
        }
        if let Some(r) = &self.resource_cfg {
            out.extend(fm_violations(&m.resource_fm, &r.selected));
        }
        let values = self.process_cfg.valuation();
        let closed = ClosedWorld(ProcessView { values: &values, product_ids: &self.product_ids });
        for r in m.process_dm.all_rules() {
            if r.eval_partial(&closed) != Truth::True {
                out.push(Diagnostic::error("rule", format!("rule violated: {r}")));
            }
        }
        for c in &m.cdcs {
            if c.formula().eval_partial(&view) != Truth::True {
                out.push(Diagnostic::error("cdc", format!("CDC violated: {c}")));
            }
        }
        out
    }

    /// Returns to an earlier stage, dropping everything decided after it.
    /// Going back to the process stage keeps the presets only.
    pub fn reset(&mut self, stage: Stage) -> Result<(), EngineError> {
        if stage > self.stage || stage == Stage::Done {
            return Err(EngineError::Stage { expected: stage, actual: self.stage });
        }
        if stage <= Stage::Resource {
            self.resource_cfg = None;
        }
        if stage <= Stage::Process {
            self.reduction = None;
            self.sequence.clear();
            self.forced = false;
            self.process_cfg.assignments.retain(|a| a.origin == Origin::Preset);
        }
        if stage == Stage::Product {
            self.product_cfg = None;
            self.process_cfg.assignments.clear();
            self.process_cfg.product_digest.clear();
            self.metric = None;
        }
        self.stage = stage;
        Ok(())
    }

    // ---- metric ----

    /// Sequence-space figures for the current product selection; computed
    /// once per selection.
    pub fn sequence_space(&mut self) -> Result<SpaceMetric, EngineError> {
        if self.stage == Stage::Product {
            return Err(EngineError::Stage { expected: Stage::Process, actual: self.stage });
        }
        if let Some(m) = &self.metric {
            return Ok(m.clone());
        }
        let m = SpaceMetric::from_stage_sizes(self.stage_sizes());
        self.metric = Some(m.clone());
        Ok(m)
    }

    /// Sizes of the successive visible batches when every step is taken
    /// from the presets on.
    fn stage_sizes(&self) -> Vec<u64> {
        let mut sim = self.clone();
        sim.reset(Stage::Process).expect("process stage reached");
        let mut sizes = Vec::new();
        loop {
            let batch = sim.visible_decisions();
            if batch.is_empty() {
                return sizes;
            }
            sizes.push(batch.len() as u64);
            for id in batch {
                if sim.take_decision(&id, DValue::Bool(true)).is_err() {
                    let _ = sim.take_decision(&id, DValue::Bool(false));
                }
            }
        }
    }
}
