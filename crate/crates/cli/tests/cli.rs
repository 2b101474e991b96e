use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_pprvari");

const ANSWERS: &str = "\
Pipe2 Lock1 Barrel1_2
all
all
all
all
all
finish
LF_4 LF_3 SC_70 UltrasonicWeldingRobot_16 PR_05 PR_04
";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).env_remove("PPRVARI_WORKSPACE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A sample directory transformed into a workspace `s`.
fn sample_workspace() -> tempfile::TempDir {
    let t = tempfile::tempdir().unwrap();
    assert!(run(t.path(), &["sample", "s"]).status.success());
    let o = run(t.path(), &["transform", "s/shiftfork.ppr", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    t
}

fn configured_workspace() -> tempfile::TempDir {
    let t = sample_workspace();
    std::fs::write(t.path().join("answers"), ANSWERS).unwrap();
    let o = run(t.path(), &["-w", "s", "configure", "--answers", "answers"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    t
}

#[test]
fn validate_exit_codes() {
    let t = sample_workspace();
    let o = run(t.path(), &["validate", "s/shiftfork.ppr"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK\n");

    std::fs::write(t.path().join("bad.ppr"), "Product \"A\": { name: \"A\", implements: [\"Nope\"] }\n").unwrap();
    let o = run(t.path(), &["validate", "bad.ppr"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
    assert_eq!(stderr(&o).lines().count(), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("unresolved-reference"));

    let o = run(t.path(), &["--format", "structured", "validate", "bad.ppr"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["diagnostics"][0]["rule"], "unresolved-reference");

    std::fs::write(t.path().join("syntax.ppr"), "Product \"A\" { }\n").unwrap();
    let o = run(t.path(), &["validate", "syntax.ppr"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("syntax.ppr:1:"), "{}", stderr(&o));

    assert_eq!(run(t.path(), &["validate", "missing.ppr"]).status.code(), Some(2));
    assert_eq!(run(t.path(), &["--format", "table", "validate", "s/shiftfork.ppr"]).status.code(), Some(2));
    assert_eq!(run(t.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn transform_is_byte_identical_on_rerun() {
    let t = sample_workspace();
    let read_all = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        ["model.ppr", "product.fm", "process.dm", "resource.fm", "links.cdc", "stats"]
            .iter()
            .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
            .collect()
    };
    let first = read_all(&t.path().join("s"));
    let o = Command::new(BIN)
        .current_dir(t.path())
        .args(["transform", "s/shiftfork.ppr"])
        .env("PPRVARI_WORKSPACE", "s")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(read_all(&t.path().join("s")), first);
    let fm = String::from_utf8(first[1].1.clone()).unwrap();
    assert_eq!(fm.matches("alternative").count(), 2);
}

#[test]
fn empty_model() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(t.path().join("empty.ppr"), "").unwrap();
    let o = run(t.path(), &["transform", "empty.ppr", "--out", "ws"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(t.path().join("ws/product.fm")).unwrap(),
        "featuremodel empty_product\nfeatures\n  empty_product {abstract}\n"
    );
    let o = run(t.path(), &["stats", "empty.ppr"]);
    assert!(stdout(&o).contains("ppr.products 0\n"));
    assert!(stdout(&o).contains("product_fm.configs 1\n"));
    let o = run(t.path(), &["-w", "ws", "metrics", "--products", "empty_product"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("full_space 1\n") && stdout(&o).contains("reduced_space 1\n"), "{}", stdout(&o));
}

#[test]
fn stats_formats() {
    let t = sample_workspace();
    let o = run(t.path(), &["stats", "s/shiftfork.ppr", "--format", "table"]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.lines().nth(2).unwrap().starts_with("shiftfork |"), "{table}");
    let o = run(t.path(), &["--format", "structured", "stats", "s/shiftfork.ppr", "--limit", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["product_fm"]["n_configs"], 3);
    assert_eq!(v["product_fm"]["configs_truncated"], true);
}

#[test]
fn scripted_configuration_reaches_done() {
    let t = configured_workspace();
    let s = t.path().join("s");
    for f in ["session.json", "product.config", "process.dconfig", "resource.config"] {
        assert!(s.join(f).exists(), "{f}");
    }
    let o = run(t.path(), &["-w", "s", "metrics"]);
    assert_eq!(
        stdout(&o),
        "n 24\nr 24\nfull_space 620448401733239439360000\nstage_sizes 11 4 6 2 1\nreduced_space 39917547\n"
    );
    let o = run(t.path(), &["-w", "s", "metrics", "--config", "s/process.dconfig"]);
    assert!(stdout(&o).ends_with("reduced_space 39917547\n"));
}

#[test]
fn rollback_and_reprompt() {
    let t = sample_workspace();
    let script = "Pipe2 Pipe3 Lock1\nPipe2 Lock1 Barrel1_2\nInsertPipe2\nrollback 1\nInsertPipe3\nquit\n";
    std::fs::write(t.path().join("answers"), script).unwrap();
    let o = run(t.path(), &["-w", "s", "configure", "--answers", "answers"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("alternative-group"), "{err}");
    assert!(err.contains("InsertPipe3 is not visible"), "{err}");
    let out = stdout(&o);
    assert!(out.contains("queue: [InsertPipe2=true]"), "{out}");
    assert!(out.trim_end().ends_with("queue: []\n> quit"), "{out}");

    // resume the saved session and finish it
    let rest: String = ANSWERS.lines().skip(1).map(|l| format!("{l}\n")).collect();
    std::fs::write(t.path().join("rest"), rest).unwrap();
    let o = run(t.path(), &["-w", "s", "configure", "--resume", "s/session.json", "--answers", "rest"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
}

#[test]
fn metrics_permutations() {
    let t = tempfile::tempdir().unwrap();
    let o = run(t.path(), &["metrics", "--n", "24", "--r", "24"]);
    assert_eq!(stdout(&o), "620448401733239439360000\n");
    assert_eq!(run(t.path(), &["metrics", "--n", "2", "--r", "3"]).status.code(), Some(2));
    assert_eq!(run(t.path(), &["metrics"]).status.code(), Some(2));
}

#[test]
fn generate_report_and_failures() {
    let t = configured_workspace();
    let o = run(t.path(), &["-w", "s", "generate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("consistency PASS\n"));
    let net = std::fs::read_to_string(t.path().join("s/generated.fbn")).unwrap();
    assert!(net.contains("fb UltrasonicWeldingRobot_16"));
    assert!(!net.contains("fb InsertPipe3 "));

    std::fs::remove_file(t.path().join("s/deltas/DPipe3.delta")).unwrap();
    let o = run(t.path(), &["-w", "s", "generate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("DPipe3"), "{}", stderr(&o));
}

#[test]
fn generate_needs_a_finished_session() {
    let t = sample_workspace();
    std::fs::write(t.path().join("answers"), "Pipe2 Lock1 Barrel1_2\nquit\n").unwrap();
    run(t.path(), &["-w", "s", "configure", "--answers", "answers"]);
    let o = run(t.path(), &["-w", "s", "generate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("finished session"), "{}", stderr(&o));
}

fn http_get(addr: &str, path: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    resp
}

#[test]
fn serve_on_ephemeral_port() {
    let t = sample_workspace();
    let mut child = Command::new(BIN)
        .current_dir(t.path())
        .args(["-w", "s", "serve", "--port", "0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap().to_string();
    assert!(!addr.ends_with(":0"), "{addr}");
    let resp = http_get(&addr, "/v1/health");
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"status\":\"ok\""), "{resp}");

    let port = addr.rsplit(':').next().unwrap();
    let busy = run(t.path(), &["-w", "s", "serve", "--port", port]);
    assert_eq!(busy.status.code(), Some(2), "{}", stderr(&busy));
    child.kill().unwrap();
    let _ = child.wait();
}
