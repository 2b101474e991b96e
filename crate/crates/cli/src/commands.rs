use crate::support::{
    print_json, read, render_diagnostics, restore_session, write, CmdResult, Ctx, Failure, SESSION_FILE,
};
use crate::{Format, GenerateArgs, MetricsArgs, ServeArgs};
use pprvari_core::deltagen::{generate_artifact, load_delta_dir, parse_fbn, write_fbn, DeltaError, DeltaSet};
use pprvari_core::engine::{permutations, write_workspace, StagedSession, Workspace, WORKSPACE_FILES};
use pprvari_core::lex::is_ident;
use pprvari_core::ppr::{parse_ppr_with_warnings, validate_model, PprModel};
use pprvari_core::samples::{SHIFTFORK_BASE_FBN, SHIFTFORK_DELTAS, SHIFTFORK_PPR};
use pprvari_core::transform::model_statistics_with_limit;
use pprvari_core::vmodels::{dconfig_read, DValue, Origin};
use pprvari_core::Diagnostic;
use pprvari_service::{AppState, ServiceConfig};
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Parses and validates; errors fail with exit code 1, warnings go to
/// the error stream.
fn load_ppr(file: &Path) -> Result<(PprModel, Vec<Diagnostic>), Failure> {
    let text = read(file)?;
    let (model, mut diags) =
        parse_ppr_with_warnings(&text).map_err(|ds| Failure::invalid(render_diagnostics(file, &ds)))?;
    diags.extend(validate_model(&model));
    Ok((model, diags))
}

fn model_name(file: &Path, name: Option<String>) -> Result<String, Failure> {
    let name = match name {
        Some(n) => n,
        None => file.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
    };
    if is_ident(&name) {
        Ok(name)
    } else {
        Err(Failure::usage(format!("`{name}` is not a valid model name; pass --name")))
    }
}

fn split_errors(file: &Path, diags: Vec<Diagnostic>) -> Result<Vec<Diagnostic>, Failure> {
    let (errors, warnings): (Vec<_>, Vec<_>) = diags.into_iter().partition(Diagnostic::is_error);
    if errors.is_empty() {
        Ok(warnings)
    } else {
        Err(Failure::invalid(render_diagnostics(file, &errors)))
    }
}

fn warn(file: &Path, warnings: &[Diagnostic]) {
    if !warnings.is_empty() {
        eprintln!("{}", render_diagnostics(file, warnings));
    }
}

pub fn validate(ctx: &Ctx, file: &Path) -> CmdResult {
    let (_, diags) = match load_ppr(file) {
        Ok(r) => r,
        Err(f) if ctx.structured() && f.code == 1 => {
            // syntax errors still produce a structured payload
            let ds = parse_ppr_with_warnings(&read(file)?).err().unwrap_or_default();
            print_json(&json!({"ok": false, "diagnostics": ds}))?;
            return Err(Failure { code: 1, message: f.message });
        }
        Err(f) => return Err(f),
    };
    let ok = !diags.iter().any(Diagnostic::is_error);
    if ctx.structured() {
        print_json(&json!({"ok": ok, "diagnostics": diags}))?;
    } else if ok {
        println!("OK");
    }
    if ok {
        warn(file, &diags);
        Ok(())
    } else {
        Err(Failure::invalid(render_diagnostics(file, &diags)))
    }
}

pub fn transform(ctx: &Ctx, file: &Path, out: Option<PathBuf>, name: Option<String>) -> CmdResult {
    let dir = match out {
        Some(d) => d,
        None => ctx.workspace_dir()?.to_path_buf(),
    };
    let name = model_name(file, name)?;
    let (model, diags) = load_ppr(file)?;
    let warnings = split_errors(file, diags)?;
    let ws = Workspace::from_ppr(model, &name).map_err(|ds| Failure::invalid(render_diagnostics(file, &ds)))?;
    warn(file, &warnings);
    warn(file, &ws.models.warnings);
    write_workspace(&dir, &ws).map_err(|e| Failure::usage(format!("cannot write {}: {e}", dir.display())))?;
    let files: Vec<String> = WORKSPACE_FILES.iter().map(|f| dir.join(f).display().to_string()).collect();
    if ctx.structured() {
        print_json(&json!({"workspace": dir, "name": name, "files": files}))
    } else {
        for f in files {
            println!("wrote {f}");
        }
        Ok(())
    }
}

pub fn stats(ctx: &Ctx, file: &Path, name: Option<String>, limit: usize) -> CmdResult {
    let name = model_name(file, name)?;
    let (model, diags) = load_ppr(file)?;
    split_errors(file, diags)?;
    let ws = Workspace::from_ppr(model, &name).map_err(|ds| Failure::invalid(render_diagnostics(file, &ds)))?;
    let report = model_statistics_with_limit(&ws.ppr, &ws.models, limit);
    match ctx.format {
        Format::Structured => print_json(&report),
        Format::Table => {
            print!("{}", report.to_table(&name));
            Ok(())
        }
        Format::Text => {
            print!("{}", report.to_text());
            Ok(())
        }
    }
}

/// Product selection implied by the preset assignments of a decision
/// configuration.
fn selection_from_presets(ws: &Workspace, text: &str, file: &Path) -> Result<Vec<String>, Failure> {
    let cfg = dconfig_read(text).map_err(|d| Failure::invalid(render_diagnostics(file, &[d])))?;
    let mut sel = Vec::new();
    for a in cfg.assignments.iter().filter(|a| a.origin == Origin::Preset) {
        let Some(d) = ws.models.process_dm.decisions.get(&a.decision) else { continue };
        if !ws.is_product_decision(d) {
            continue;
        }
        match &a.value {
            DValue::Bool(true) => sel.push(a.decision.clone()),
            DValue::Option(o) => {
                sel.push(a.decision.clone());
                sel.push(o.clone());
            }
            DValue::Bool(false) => {}
        }
    }
    Ok(sel)
}

pub fn metrics(ctx: &Ctx, a: MetricsArgs) -> CmdResult {
    if let (Some(n), Some(r)) = (a.n, a.r) {
        let p = permutations(n, r)?;
        return if ctx.structured() {
            print_json(&json!({"n": n, "r": r, "permutations": p.to_string()}))
        } else {
            println!("{p}");
            Ok(())
        };
    }
    let ws = ctx.load()?;
    let dir = ctx.workspace_dir()?;
    let mut session = match (a.products, a.config) {
        (Some(products), _) => {
            let mut s = StagedSession::new(ws)?;
            s.set_product_config(&products)?;
            s
        }
        (None, config) => {
            let path = config.unwrap_or_else(|| {
                let snap = dir.join(SESSION_FILE);
                if snap.exists() {
                    snap
                } else {
                    dir.join("process.dconfig")
                }
            });
            if path.extension().is_some_and(|e| e == "json") {
                restore_session(ws, &path)?
            } else {
                let sel = selection_from_presets(&ws, &read(&path)?, &path)?;
                let mut s = StagedSession::new(ws)?;
                s.set_product_config(&sel)?;
                s
            }
        }
    };
    let m = session.sequence_space()?;
    if ctx.structured() {
        return print_json(&m);
    }
    let sizes: Vec<String> = m.stage_sizes.iter().map(u64::to_string).collect();
    println!("n {}", m.n);
    println!("r {}", m.r);
    println!("full_space {}", m.full_space);
    println!("stage_sizes {}", sizes.join(" "));
    println!("reduced_space {}", m.reduced_space);
    Ok(())
}

fn delta_failure(e: DeltaError) -> Failure {
    match e {
        DeltaError::Io(m) => Failure::usage(m),
        e => Failure::invalid(e.to_string()),
    }
}

fn load_deltas(dir: &Path) -> Result<DeltaSet, Failure> {
    if !dir.is_dir() {
        return Err(Failure::usage(format!("delta directory {} does not exist", dir.display())));
    }
    load_delta_dir(dir).map_err(delta_failure)
}

pub fn generate(ctx: &Ctx, a: GenerateArgs) -> CmdResult {
    let ws = ctx.load()?;
    let dir = ctx.workspace_dir()?;
    let session = restore_session(ws, &a.session.unwrap_or_else(|| dir.join(SESSION_FILE)))?;
    let base_path = a.base.unwrap_or_else(|| dir.join("base.fbn"));
    let base = parse_fbn(&read(&base_path)?).map_err(|e| Failure::invalid(format!("{}: {e}", base_path.display())))?;
    let deltas = load_deltas(&a.deltas.unwrap_or_else(|| dir.join("deltas")))?;
    let g = generate_artifact(&session, &base, &deltas).map_err(delta_failure)?;
    let out = a.out.unwrap_or_else(|| dir.join("generated.fbn"));
    write(&out, &write_fbn(&g.network))?;
    if ctx.structured() {
        print_json(&json!({"output": out, "passed": g.report.passed(), "report": g.report}))?;
    } else {
        print!("{}", g.report.to_text());
    }
    if g.report.passed() {
        Ok(())
    } else {
        let failed: Vec<String> = g.report.failures().map(|c| c.element.clone()).collect();
        Err(Failure::invalid(format!("consistency check failed for {}", failed.join(", "))))
    }
}

pub fn serve(ctx: &Ctx, a: ServeArgs) -> CmdResult {
    let ws = ctx.load()?;
    let dir = ctx.workspace_dir()?.to_path_buf();
    let base_path = a.base.unwrap_or_else(|| dir.join("base.fbn"));
    let base = if base_path.exists() {
        Some(parse_fbn(&read(&base_path)?).map_err(|e| Failure::invalid(format!("{}: {e}", base_path.display())))?)
    } else {
        None
    };
    let delta_dir = a.deltas.unwrap_or_else(|| dir.join("deltas"));
    let deltas = if delta_dir.is_dir() { load_deltas(&delta_dir)? } else { DeltaSet::new() };
    let state = AppState::new(ServiceConfig { workspace: ws, deltas, base, persist_dir: a.persist.then_some(dir) });
    for (id, why) in state.restore_persisted() {
        eprintln!("warning: session {id} not restored: {why}");
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::internal(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port))
            .await
            .map_err(|e| Failure::usage(format!("cannot listen on {}:{}: {e}", a.host, a.port)))?;
        let addr = listener.local_addr().map_err(|e| Failure::internal(e.to_string()))?;
        if ctx.structured() {
            print_json(&json!({"listening": format!("http://{addr}")}))?;
        } else {
            println!("listening on http://{addr}");
        }
        let _ = std::io::stdout().flush();
        pprvari_service::serve(listener, state).await.map_err(|e| Failure::internal(e.to_string()))
    })
}

pub fn sample(ctx: &Ctx, dir: &Path) -> CmdResult {
    let mut files = vec![(dir.join("shiftfork.ppr"), SHIFTFORK_PPR), (dir.join("base.fbn"), SHIFTFORK_BASE_FBN)];
    for (name, text) in SHIFTFORK_DELTAS {
        files.push((dir.join("deltas").join(format!("{name}.delta")), text));
    }
    for (path, text) in &files {
        write(path, text)?;
    }
    if ctx.structured() {
        let names: Vec<&Path> = files.iter().map(|(p, _)| p.as_path()).collect();
        print_json(&json!({"files": names}))
    } else {
        println!("wrote {} files to {}", files.len(), dir.display());
        Ok(())
    }
}
