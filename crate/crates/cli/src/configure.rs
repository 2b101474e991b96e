//! Line-oriented staged configuration. Answers come from the terminal or a
//! script file; every accepted step is saved as a session snapshot so an
//! interrupted run can be resumed.

use crate::support::{restore_session, write, CmdResult, Ctx, Failure, SESSION_FILE};
use clap::Args;
use pprvari_core::engine::{Snapshot, Stage, StagedSession};
use pprvari_core::vmodels::{complete_mandatory, dconfig_write, fmconfig_write, DValue, Origin, Variability};
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct ConfigureArgs {
    /// Answers, one per line, instead of reading the terminal.
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Continue from a saved session snapshot.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Where to keep the session snapshot; defaults to the workspace.
    #[arg(long)]
    save: Option<PathBuf>,
}

const HELP: &str = "\
product stage:  <feature> ...            select features (ancestors are added)
process stage:  <decision> [true|false|<option>]
                all                      take every visible decision true
                rollback <n>             undo the last n decisions
                finish [force]           end the process stage
resource stage: <feature> ... | suggest  select resources
any stage:      show | reset <stage> | help | quit";

pub fn run(ctx: &Ctx, a: ConfigureArgs) -> CmdResult {
    let ws = ctx.load()?;
    let dir = ctx.workspace_dir()?.to_path_buf();
    let save = a.save.unwrap_or_else(|| dir.join(SESSION_FILE));
    let session = match &a.resume {
        Some(p) => restore_session(ws, p)?,
        None => StagedSession::new(ws)?,
    };
    let input: Box<dyn BufRead> = match &a.answers {
        Some(p) => Box::new(BufReader::new(
            std::fs::File::open(p).map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display())))?,
        )),
        None => Box::new(BufReader::new(std::io::stdin())),
    };
    let mut flow = Flow { s: session, out: std::io::stdout(), echo: a.answers.is_some() };
    let finished = flow.drive(input, &save)?;
    if !finished {
        return Err(Failure::invalid(format!(
            "configuration stopped at the {} stage; continue with --resume {}",
            flow.s.stage(),
            save.display()
        )));
    }
    write_results(&dir, &flow.s)?;
    if ctx.structured() {
        crate::support::print_json(&Snapshot::of(&flow.s))?;
    }
    Ok(())
}

fn write_results(dir: &Path, s: &StagedSession) -> CmdResult {
    if let Some(p) = s.product_config() {
        write(&dir.join("product.config"), &fmconfig_write(p))?;
    }
    write(&dir.join("process.dconfig"), &dconfig_write(s.process_config()))?;
    if let Some(r) = s.resource_config() {
        write(&dir.join("resource.config"), &fmconfig_write(r))?;
    }
    Ok(())
}

struct Flow<W: Write> {
    s: StagedSession,
    out: W,
    echo: bool,
}

enum Step {
    Continue,
    Changed,
    Quit,
}

fn words(line: &str) -> Vec<String> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).map(str::to_string).collect()
}

fn parse_value(v: &str) -> DValue {
    match v {
        "true" | "yes" | "y" => DValue::Bool(true),
        "false" | "no" | "n" => DValue::Bool(false),
        o => DValue::Option(o.to_string()),
    }
}

impl<W: Write> Flow<W> {
    /// Returns whether the session reached the done stage.
    fn drive(&mut self, input: Box<dyn BufRead>, save: &Path) -> Result<bool, Failure> {
        let io = |e: std::io::Error| Failure::internal(e.to_string());
        self.prompt().map_err(io)?;
        for line in input.lines() {
            let line = line.map_err(io)?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if self.echo {
                writeln!(self.out, "> {line}").map_err(io)?;
            }
            match self.answer(line) {
                Ok(Step::Quit) => break,
                Ok(Step::Changed) => {
                    write(save, &Snapshot::of(&self.s).to_json())?;
                }
                Ok(Step::Continue) => {}
                Err(msg) => {
                    eprintln!("{msg}");
                    // a batch may have been taken in part
                    write(save, &Snapshot::of(&self.s).to_json())?;
                }
            }
            if self.s.stage() == Stage::Done {
                self.summary().map_err(io)?;
                return Ok(true);
            }
            self.prompt().map_err(io)?;
        }
        write(save, &Snapshot::of(&self.s).to_json())?;
        Ok(self.s.stage() == Stage::Done)
    }

    fn answer(&mut self, line: &str) -> Result<Step, String> {
        let w = words(line);
        match w[0].as_str() {
            "quit" | "exit" => return Ok(Step::Quit),
            "help" => {
                let _ = writeln!(self.out, "{HELP}");
                return Ok(Step::Continue);
            }
            "show" => {
                let _ = self.show_state();
                return Ok(Step::Continue);
            }
            "reset" => {
                let stage = w.get(1).ok_or("reset needs a stage")?.parse::<Stage>()?;
                self.s.reset(stage).map_err(|e| e.to_string())?;
                return Ok(Step::Changed);
            }
            _ => {}
        }
        match self.s.stage() {
            Stage::Product => {
                let picked: BTreeSet<String> = w.iter().skip(usize::from(w[0] == "select")).cloned().collect();
                let fm = &self.s.workspace().models.product_fm;
                if let Some(unknown) = picked.iter().find(|p| !fm.features.contains_key(*p)) {
                    return Err(format!("unknown feature {unknown}"));
                }
                // mandatory features come along, as in a checkbox tree
                let sel: Vec<String> = complete_mandatory(fm, &picked).into_iter().collect();
                self.s.set_product_config(&sel).map_err(|e| e.to_string())?;
            }
            Stage::Process => match (w[0].as_str(), w.get(1).map(String::as_str)) {
                ("rollback", n) => {
                    let n: usize = n.unwrap_or("1").parse().map_err(|_| "rollback needs a count".to_string())?;
                    self.s.rollback(n).map_err(|e| e.to_string())?;
                }
                ("finish", force) => {
                    self.s.finish_process(force == Some("force")).map_err(|e| e.to_string())?;
                }
                ("all", _) => {
                    let visible = self.s.visible_decisions();
                    if visible.is_empty() {
                        return Err("no visible decisions; type finish".into());
                    }
                    for id in visible {
                        self.s.take_decision(&id, DValue::Bool(true)).map_err(|e| e.to_string())?;
                    }
                }
                _ => {
                    let args: &[String] = if w[0] == "take" { &w[1..] } else { &w };
                    let first = args.first().ok_or("take needs a decision")?;
                    let (id, value) = match first.split_once('=') {
                        Some((id, v)) => (id, v),
                        None => (first.as_str(), args.get(1).map_or("true", String::as_str)),
                    };
                    let log = self.s.take_decision(id, parse_value(value)).map_err(|e| e.to_string())?;
                    for a in log.iter().filter(|a| a.origin == Origin::Propagated) {
                        let _ = writeln!(self.out, "  propagated {} = {}", a.decision, a.value);
                    }
                }
            },
            Stage::Resource => {
                let sel: Vec<String> = if w[0] == "suggest" {
                    let s = self.s.suggest_resources().ok_or("no resource selection satisfies the constraints")?;
                    s.into_iter().collect()
                } else if w[0] == "select" {
                    w[1..].to_vec()
                } else {
                    w
                };
                self.s.set_resource_config(&sel).map_err(|e| e.to_string())?;
            }
            Stage::Done => return Err("configuration is complete".into()),
        }
        Ok(Step::Changed)
    }

    fn prompt(&mut self) -> std::io::Result<()> {
        let o = &mut self.out;
        match self.s.stage() {
            Stage::Product => {
                writeln!(o, "== product stage: select features")?;
                let fm = &self.s.workspace().models.product_fm;
                for f in fm.features.values().filter(|f| f.parent.is_some()) {
                    let pad = "  ".repeat(fm.depth(&f.id));
                    let kind = match (fm.member_group(&f.id), f.variability) {
                        (Some(g), _) => format!("{g:?}").to_lowercase(),
                        (None, Variability::Mandatory) => "mandatory".into(),
                        (None, Variability::Optional) => "optional".into(),
                    };
                    let abs = if f.is_abstract { ", abstract" } else { "" };
                    writeln!(o, "{pad}{} ({kind}{abs})", f.id)?;
                }
            }
            Stage::Process => {
                let visible = self.s.visible_decisions();
                let dm = &self.s.workspace().models.process_dm;
                if visible.is_empty() {
                    writeln!(o, "== process stage: no open decisions, type `finish`")?;
                } else {
                    writeln!(o, "== process stage: {} visible decisions", visible.len())?;
                }
                for id in &visible {
                    writeln!(o, "  {id}  {}", dm.decisions[id].question)?;
                }
                let queue: Vec<String> =
                    self.s.user_decisions().map(|a| format!("{}={}", a.decision, a.value)).collect();
                writeln!(o, "queue: [{}]", queue.join(", "))?;
            }
            Stage::Resource => {
                writeln!(o, "== resource stage")?;
                if let Some(r) = self.s.resource_reduction() {
                    let list =
                        |s: &std::collections::BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
                    writeln!(o, "preselected: {}", list(&r.preselected))?;
                    writeln!(o, "required groups: {}", list(&r.required_groups))?;
                    writeln!(o, "locked: {}", list(&r.locked))?;
                }
                if let Some(s) = self.s.suggest_resources() {
                    writeln!(o, "suggestion: {}", s.into_iter().collect::<Vec<_>>().join(" "))?;
                }
            }
            Stage::Done => {}
        }
        o.flush()
    }

    fn show_state(&mut self) -> std::io::Result<()> {
        writeln!(self.out, "stage: {}", self.s.stage())?;
        if let Some(p) = self.s.product_config() {
            writeln!(self.out, "products: {}", p.selected.iter().cloned().collect::<Vec<_>>().join(" "))?;
        }
        if !self.s.sequence().is_empty() {
            writeln!(self.out, "sequence: {}", self.s.sequence().join(" -> "))?;
        }
        Ok(())
    }

    fn summary(&mut self) -> std::io::Result<()> {
        writeln!(self.out, "== done")?;
        self.show_state()?;
        if let Some(r) = self.s.resource_config() {
            writeln!(self.out, "resources: {}", r.selected.iter().cloned().collect::<Vec<_>>().join(" "))?;
        }
        self.out.flush()
    }
}
