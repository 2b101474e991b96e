//! Acceptance criteria of the toolchain, one line each. Runs without the
//! libtest harness so the lines are always printed:
//!
//!     cargo test -p pprvari-cli --test acceptance

use pprvari_core::deltagen::{apply_delta, parse_fbn, Connection, Endpoint};
use pprvari_core::engine::{permutations, EngineError, Snapshot, Stage, StagedSession, Workspace};
use pprvari_core::logic::{enumerate_models, sat, to_cnf, Assignment, Formula, SatResult};
use pprvari_core::ppr::parse_ppr;
use pprvari_core::samples::{
    shiftfork_deltas, SHIFTFORK_BASE_FBN, SHIFTFORK_NAME, SHIFTFORK_PPR, WALKTHROUGH_PRODUCTS,
};
use pprvari_core::synth::{random_ppr, SynthParams};
use pprvari_core::transform::{components, transform};
use pprvari_core::vmodels::{
    count_configurations, fm_to_formula, DValue, Feature, FeatureModel, GroupKind, Variability,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

const BIN: &str = env!("CARGO_BIN_EXE_pprvari");

const EXCERPT_LIMIT: Duration = Duration::from_secs(1);
const WALKTHROUGH_LIMIT: Duration = Duration::from_secs(1);
const SOLVER_LIMIT: Duration = Duration::from_secs(30);
const ENGINE_LIMIT: Duration = Duration::from_secs(60);

const SYNTH_MODELS: u64 = 50;
const SOLVER_CASES: u64 = 100;
const SOLVER_MAX_VARS: usize = 12;
const ENGINE_SESSIONS: u64 = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn shiftfork() -> Arc<Workspace> {
    Arc::new(Workspace::from_ppr(parse_ppr(SHIFTFORK_PPR).unwrap(), SHIFTFORK_NAME).unwrap())
}

fn excerpt_fidelity() -> Outcome {
    let start = Instant::now();
    let ppr = parse_ppr(SHIFTFORK_PPR).map_err(|d| format!("{d:?}"))?;
    let out = transform(&ppr, SHIFTFORK_NAME).map_err(|d| format!("{d:?}"))?;
    let took = within(EXCERPT_LIMIT, start)?;
    let fm = &out.product_fm;
    let groups: Vec<(String, BTreeSet<String>)> = fm
        .features
        .values()
        .filter(|f| f.group == Some(GroupKind::Alternative))
        .map(|f| (f.id.clone(), fm.children(&f.id).map(|c| c.id.clone()).collect()))
        .collect();
    let set = |ids: &[&str]| ids.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let want = vec![
        ("Pipe".to_string(), set(&["Pipe8", "Pipe3", "Pipe2"])),
        ("Lock".to_string(), set(&["Lock1", "Lock2", "Lock3"])),
    ];
    ensure(groups == want, || format!("alternative groups {groups:?}"))?;
    let shown: Vec<String> = fm.constraints.iter().map(|c| c.to_string()).collect();
    let want = ["Lock1 => Pipe2 || Pipe3", "Lock2 => Pipe3", "Lock3 => Pipe8", "Pipe2 || Pipe8 => Barrel1_2"];
    ensure(shown == want, || format!("constraints {shown:?}"))?;
    Ok(format!("2 alternative groups, 4 constraints, {took:?}"))
}

fn count_identities() -> Outcome {
    let mut models: Vec<(String, pprvari_core::ppr::PprModel)> =
        (0..SYNTH_MODELS).map(|seed| (format!("synth {seed}"), random_ppr(seed, SynthParams::default()))).collect();
    models.push(("shiftfork".into(), parse_ppr(SHIFTFORK_PPR).unwrap()));
    for (label, ppr) in &models {
        let out = transform(ppr, "m").map_err(|d| format!("{label}: {d:?}"))?;
        let comps = components(ppr).len();
        let got = (out.product_fm.features.len(), out.process_dm.decisions.len(), out.resource_fm.features.len());
        let want = (comps + 1, comps + ppr.processes.len(), ppr.resources.len() + 1);
        ensure(got == want, || format!("{label}: got {got:?}, want {want:?}"))?;
    }
    Ok(format!("{} models", models.len()))
}

fn decision_model_fidelity() -> Outcome {
    let ws = shiftfork();
    let d = ws.models.process_dm.decisions.get("InsertPipe2").ok_or("InsertPipe2 missing")?;
    let vis = d.visibility.to_string();
    let rules: Vec<String> = d.rules.iter().map(|r| r.to_string()).collect();
    ensure(vis == "Pipe == Pipe2", || format!("visibility {vis}"))?;
    ensure(rules == ["InsertPipe2 => InsertPipe"], || format!("rules {rules:?}"))?;
    Ok(format!("visible if {vis}, rule {}", rules[0]))
}

fn walkthrough() -> Outcome {
    let start = Instant::now();
    let mut s = StagedSession::new(shiftfork()).map_err(|e| e.to_string())?;
    s.set_product_config(&WALKTHROUGH_PRODUCTS).map_err(|e| e.to_string())?;
    let first = s.visible_decisions();
    ensure(first.len() == 11, || format!("initial visible set has {}", first.len()))?;
    ensure(first.iter().any(|d| d == "InsertPipe2"), || "InsertPipe2 not visible".into())?;
    let mut sizes = Vec::new();
    loop {
        let batch = s.visible_decisions();
        if batch.is_empty() {
            break;
        }
        sizes.push(batch.len());
        for id in batch {
            s.take_decision(&id, DValue::Bool(true)).map_err(|e| e.to_string())?;
        }
    }
    let snap = Snapshot::of(&s);
    let replayed = snap.restore(shiftfork()).map_err(|e| e.to_string())?;
    ensure(replayed == s, || "replay differs".into())?;
    let took = within(WALKTHROUGH_LIMIT, start)?;
    ensure(sizes == [11, 4, 6, 2, 1], || format!("stage sizes {sizes:?}"))?;
    Ok(format!("stages {sizes:?}, {took:?}"))
}

fn space_metric() -> Outcome {
    let full = permutations(24, 24).map_err(|e| e.to_string())?.to_string();
    ensure(full == "620448401733239439360000", || format!("permutations(24,24) = {full}"))?;
    let mut s = StagedSession::new(shiftfork()).map_err(|e| e.to_string())?;
    s.set_product_config(&WALKTHROUGH_PRODUCTS).map_err(|e| e.to_string())?;
    let m = s.sequence_space().map_err(|e| e.to_string())?;
    let fact = |n: u64| (1..=n).product::<u64>();
    let oracle: u64 = [11, 4, 6, 2, 1].into_iter().map(fact).sum();
    ensure(oracle == 39_917_547, || format!("oracle sum {oracle}"))?;
    ensure(m.full_space.to_string() == full, || format!("full space {}", m.full_space))?;
    ensure(m.reduced_space.to_string() == oracle.to_string(), || format!("reduced space {}", m.reduced_space))?;
    Ok(format!("{} and {}", m.full_space, m.reduced_space))
}

fn random_formula(rng: &mut StdRng, vars: &[String], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::var(vars.choose(rng).unwrap().clone()),
        };
    }
    let sub = |rng: &mut StdRng| random_formula(rng, vars, depth - 1);
    match rng.gen_range(0..4) {
        0 => Formula::negate(sub(rng)),
        1 => Formula::And((0..rng.gen_range(2..4)).map(|_| sub(rng)).collect()),
        2 => Formula::Or((0..rng.gen_range(2..4)).map(|_| sub(rng)).collect()),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

fn random_fm(rng: &mut StdRng, n: usize) -> FeatureModel {
    let id = |i: usize| format!("f{i}");
    let mut fm = FeatureModel::with_root("m", "f0");
    for i in 1..n {
        let parent = id(rng.gen_range(0..i));
        let v = if rng.gen_bool(0.5) { Variability::Optional } else { Variability::Mandatory };
        fm.add(Feature::new(id(i), Some(&parent), v));
    }
    for i in 0..n {
        if fm.children(&id(i)).next().is_none() {
            continue;
        }
        let group = match rng.gen_range(0..4) {
            0 => Some(GroupKind::Or),
            1 => Some(GroupKind::Alternative),
            _ => None,
        };
        fm.features.get_mut(&id(i)).unwrap().group = group;
    }
    let grouped: Vec<String> = fm
        .features
        .values()
        .filter(|f| f.parent.as_ref().is_some_and(|p| fm.features[p].group.is_some()))
        .map(|f| f.id.clone())
        .collect();
    for g in grouped {
        fm.features.get_mut(&g).unwrap().variability = Variability::Optional;
    }
    let vars: Vec<String> = (0..n).map(id).collect();
    fm.constraints = (0..rng.gen_range(0..3)).map(|_| random_formula(rng, &vars, 2)).collect();
    fm.canonicalize();
    fm
}

/// Feature-model semantics read directly off the tree.
fn fm_oracle(fm: &FeatureModel, sel: &BTreeSet<&str>) -> bool {
    if !sel.contains(fm.root.as_str()) {
        return false;
    }
    for f in fm.features.values() {
        let on = sel.contains(f.id.as_str());
        if let Some(p) = &f.parent {
            let parent_on = sel.contains(p.as_str());
            if on && !parent_on {
                return false;
            }
            if fm.features[p].group.is_none() && f.variability == Variability::Mandatory && parent_on && !on {
                return false;
            }
        }
        if let (Some(g), true) = (f.group, on) {
            let n = fm.children(&f.id).filter(|c| sel.contains(c.id.as_str())).count();
            if (g == GroupKind::Or && n == 0) || (g == GroupKind::Alternative && n != 1) {
                return false;
            }
        }
    }
    let a: Assignment = fm.features.keys().map(|k| (k.clone(), sel.contains(k.as_str()))).collect();
    fm.constraints.iter().all(|c| c.eval(&a) == Ok(true))
}

fn truth_table(vars: &[String]) -> impl Iterator<Item = Assignment> + '_ {
    (0..1u32 << vars.len())
        .map(move |bits| vars.iter().enumerate().map(|(i, v)| (v.clone(), bits & (1 << i) != 0)).collect())
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for seed in 0..SOLVER_CASES {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=SOLVER_MAX_VARS);

        // formula: satisfiability and projected model count
        let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let f = random_formula(&mut rng, &vars, 4);
        let fvars = f.variables();
        let models: Vec<Assignment> = truth_table(&fvars).filter(|a| f.eval(a) == Ok(true)).collect();
        let cnf = to_cnf(&f);
        let got_sat = sat(&cnf, &Assignment::new()).map_err(|e| format!("seed {seed}: {e:?}"))?;
        ensure(got_sat.is_sat() == !models.is_empty(), || format!("seed {seed}: sat mismatch on {f}"))?;
        if let SatResult::Sat(w) = &got_sat {
            ensure(f.eval(w) == Ok(true), || format!("seed {seed}: witness does not satisfy {f}"))?;
        }
        let k = rng.gen_range(0..=fvars.len());
        let proj = &fvars[..k];
        let want: BTreeSet<Vec<bool>> =
            models.iter().map(|m| proj.iter().map(|v| m.get(v).unwrap()).collect()).collect();
        let got = enumerate_models(&cnf, proj, usize::MAX).map_err(|e| format!("seed {seed}: {e:?}"))?;
        ensure(got.models.len() == want.len(), || {
            format!("seed {seed}: projected count {} vs {} on {f}", got.models.len(), want.len())
        })?;

        // feature model: configuration count and satisfiability
        let fm = random_fm(&mut rng, n);
        let ids: Vec<String> = fm.features.keys().cloned().collect();
        let valid = truth_table(&ids).filter(|a| fm_oracle(&fm, &a.true_vars().collect())).count();
        let (count, truncated) = count_configurations(&fm, usize::MAX);
        ensure(!truncated && count == valid, || format!("seed {seed}: {count} configurations, oracle {valid}"))?;
        let fm_sat = sat(&to_cnf(&fm_to_formula(&fm)), &Assignment::new()).map_err(|e| format!("{e:?}"))?;
        ensure(fm_sat.is_sat() == (valid > 0), || format!("seed {seed}: feature model sat mismatch"))?;
        checks += 2;
    }
    let took = within(SOLVER_LIMIT, start)?;
    Ok(format!("{checks} instances, 0 mismatches, {took:?}"))
}

/// One randomized session; returns whether it reached the done stage.
fn engine_session(seed: u64) -> Result<bool, String> {
    let ws = Arc::new(
        Workspace::from_ppr(random_ppr(seed, SynthParams::default()), &format!("m{seed}"))
            .map_err(|d| format!("seed {seed}: {d:?}"))?,
    );
    let mut rng = StdRng::seed_from_u64(seed ^ 0xacce);
    let fm = &ws.models.product_fm;
    let vars: Vec<String> = fm.features.keys().cloned().collect();
    let products = enumerate_models(&to_cnf(&fm_to_formula(fm)), &vars, 64).map_err(|e| format!("{e:?}"))?;
    let Some(sel) = products.models.choose(&mut rng) else { return Ok(false) };
    let sel: Vec<&str> = sel.true_vars().collect();
    let mut s = StagedSession::new(ws.clone()).map_err(|e| e.to_string())?;
    s.set_product_config(&sel).map_err(|e| format!("seed {seed}: {e}"))?;

    let eager = seed.is_multiple_of(2);
    loop {
        let visible = s.visible_decisions();
        let Some(id) = visible.choose(&mut rng).cloned() else { break };
        let value = DValue::Bool(eager || rng.gen_bool(0.85));
        let before = s.clone();
        match s.take_decision(&id, value.clone()) {
            Ok(_) => {
                let after = s.clone();
                s.rollback(1).map_err(|e| e.to_string())?;
                ensure(s == before, || format!("seed {seed}: rollback of {id} is not the identity"))?;
                s.take_decision(&id, value).map_err(|e| e.to_string())?;
                ensure(s == after, || format!("seed {seed}: retaking {id} differs"))?;
            }
            Err(EngineError::RuleViolation { .. }) => {
                ensure(s == before, || format!("seed {seed}: refused {id} changed the session"))?;
                let _ = s.take_decision(&id, DValue::Bool(!matches!(value, DValue::Bool(true))));
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
        if s.visible_decisions() == visible {
            break;
        }
    }
    let replay = |s: &StagedSession| -> Result<(), String> {
        let back = Snapshot::of(s).restore(ws.clone()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(&back == s, || format!("seed {seed}: queue replay differs"))
    };
    replay(&s)?;
    if s.finish_process(false).is_err() {
        return Ok(false);
    }
    let Some(res) = s.suggest_resources() else { return Ok(false) };
    let res: Vec<String> = res.into_iter().collect();
    s.set_resource_config(&res).map_err(|e| format!("seed {seed}: {e}"))?;
    ensure(s.stage() == Stage::Done, || format!("seed {seed}: not done"))?;
    let v = s.combined_violations();
    ensure(v.is_empty(), || format!("seed {seed}: completed session violates {v:?}"))?;
    replay(&s)?;
    Ok(true)
}

fn engine_properties() -> Outcome {
    let start = Instant::now();
    let mut done = 0;
    for seed in 0..ENGINE_SESSIONS {
        if engine_session(seed)? {
            done += 1;
        }
    }
    let took = within(ENGINE_LIMIT, start)?;
    ensure(done > 0, || "no session completed".into())?;
    Ok(format!("{ENGINE_SESSIONS} sessions, {done} completed, 0 violations, {took:?}"))
}

fn cli(dir: &Path, args: &[&str]) -> Result<String, String> {
    let o = Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .env_remove("PPRVARI_WORKSPACE")
        .output()
        .map_err(|e| e.to_string())?;
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    ensure(o.status.success(), || {
        format!("pprvari {}: {}{}", args.join(" "), out, String::from_utf8_lossy(&o.stderr))
    })?;
    Ok(out)
}

fn delta_generation() -> Outcome {
    let base = parse_fbn(SHIFTFORK_BASE_FBN).map_err(|e| e.to_string())?;
    let (net, _) = apply_delta(&base, &shiftfork_deltas()["DLock1"]).map_err(|e| e.to_string())?;
    for gone in ["InsertLock1", "WeldLock1", "E_REND_WeldLock1"] {
        ensure(!net.blocks.contains_key(gone), || format!("{gone} still present"))?;
    }
    ensure(net.blocks.contains_key("UltrasonicWeldingRobot16"), || "UltrasonicWeldingRobot16 not added".into())?;
    let c = Connection {
        src: Endpoint::new("UltrasonicWeldingRobot16", "CNF"),
        dst: Endpoint::new("PopulatedPipe", "REQ"),
    };
    ensure(net.event_connections.contains(&c), || "CNF -> REQ connection missing".into())?;

    let t = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = t.path();
    cli(dir, &["sample", "s"])?;
    cli(dir, &["transform", "s/shiftfork.ppr", "--out", "s"])?;
    let answers = "Pipe2 Lock1 Barrel1_2\nall\nall\nall\nall\nall\nfinish\nLF_4 LF_3 SC_70 UltrasonicWeldingRobot_16 PR_05 PR_04\n";
    std::fs::write(dir.join("answers"), answers).map_err(|e| e.to_string())?;
    cli(dir, &["-w", "s", "configure", "--answers", "answers"])?;
    let report = cli(dir, &["-w", "s", "generate"])?;
    ensure(report.starts_with("consistency PASS\n"), || report.clone())?;
    Ok("DLock1 applied, generate consistency PASS".into())
}

fn determinism() -> Outcome {
    let t = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = t.path();
    cli(dir, &["sample", "s"])?;
    cli(dir, &["transform", "s/shiftfork.ppr", "--out", "a"])?;
    cli(dir, &["transform", "s/shiftfork.ppr", "--out", "b"])?;
    let mut files = 0;
    for entry in std::fs::read_dir(dir.join("a")).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        let a = std::fs::read(dir.join("a").join(&name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.join("b").join(&name)).map_err(|e| format!("{name:?}: {e}"))?;
        ensure(a == b, || format!("{name:?} differs"))?;
        files += 1;
    }
    ensure(files > 0, || "no files written".into())?;
    Ok(format!("{files} files byte-identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("excerpt-fidelity", excerpt_fidelity),
        ("count-identities", count_identities),
        ("decision-model-fidelity", decision_model_fidelity),
        ("reduction-walkthrough", walkthrough),
        ("space-metric", space_metric),
        ("solver-oracle", solver_oracle),
        ("engine-properties", engine_properties),
        ("delta-generation", delta_generation),
        ("transform-determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
