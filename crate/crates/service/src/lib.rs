//! HTTP/JSON session API over the staged configuration engine.
//!
//! Every route lives under `/v1`. Sessions are kept in memory; with a
//! persistence directory each mutation also writes a snapshot there, and
//! [`AppState::restore_persisted`] brings them back after a restart.

mod error;

pub use error::{ApiError, ErrorBody};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use pprvari_core::deltagen::{generate_artifact, parse_fbn, write_fbn, ConsistencyReport, DeltaSet, FbNetwork};
use pprvari_core::engine::{ResourceReduction, Snapshot, SpaceMetric, Stage, StagedSession, Workspace};
use pprvari_core::vmodels::{Assign, DValue, DmConfiguration};
use pprvari_core::Diagnostic;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};
use tower_http::cors::{AllowOrigin, CorsLayer};

/// What the service serves sessions over.
pub struct ServiceConfig {
    pub workspace: Arc<Workspace>,
    pub deltas: DeltaSet,
    /// Base network used when a generate request names none.
    pub base: Option<FbNetwork>,
    /// Directory for session snapshots; `None` keeps sessions in memory only.
    pub persist_dir: Option<PathBuf>,
}

struct Record {
    session: StagedSession,
    created: u64,
    updated: u64,
}

pub struct AppState {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Record>>>>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

type ApiResult<T> = Result<T, ApiError>;

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState { config, sessions: RwLock::new(HashMap::new()) })
    }

    fn snapshot_path(&self, id: &str) -> Option<PathBuf> {
        self.config.persist_dir.as_ref().map(|d| d.join("sessions").join(format!("{id}.json")))
    }

    /// Loads persisted snapshots; returns the ones that no longer replay,
    /// with the reason.
    pub fn restore_persisted(&self) -> Vec<(String, String)> {
        let Some(dir) = self.config.persist_dir.as_ref().map(|d| d.join("sessions")) else {
            return Vec::new();
        };
        let Ok(entries) = std::fs::read_dir(&dir) else { return Vec::new() };
        let mut failed = Vec::new();
        let mut paths: Vec<PathBuf> = entries.flatten().map(|e| e.path()).collect();
        paths.sort();
        for p in paths {
            let Some(id) = p.file_stem().and_then(|s| s.to_str()).map(str::to_string) else { continue };
            if p.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let restored = std::fs::read_to_string(&p)
                .map_err(|e| e.to_string())
                .and_then(|t| Snapshot::from_json(&t).map_err(|e| e.to_string()))
                .and_then(|s| s.restore(self.config.workspace.clone()).map_err(|e| e.to_string()));
            match restored {
                Ok(session) => {
                    let t = now();
                    let rec = Record { session, created: t, updated: t };
                    self.sessions.write().unwrap().insert(id, Arc::new(Mutex::new(rec)));
                }
                Err(e) => failed.push((id, e)),
            }
        }
        failed
    }

    fn record(&self, id: &str) -> ApiResult<Arc<Mutex<Record>>> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, id: &str, s: &StagedSession) -> ApiResult<()> {
        let Some(path) = self.snapshot_path(id) else { return Ok(()) };
        let write = || -> std::io::Result<()> {
            std::fs::create_dir_all(path.parent().unwrap())?;
            let tmp = path.with_extension("json.tmp");
            std::fs::write(&tmp, Snapshot::of(s).to_json())?;
            std::fs::rename(&tmp, &path)
        };
        write().map_err(|e| ApiError::internal(format!("cannot persist session {id}: {e}")))
    }

    /// Runs `f` on the session under its lock; state is persisted when `f`
    /// succeeds.
    fn mutate<T>(&self, id: &str, f: impl FnOnce(&mut StagedSession) -> ApiResult<T>) -> ApiResult<T> {
        let rec = self.record(id)?;
        let mut rec = rec.lock().unwrap();
        let out = f(&mut rec.session)?;
        rec.updated = now();
        self.persist(id, &rec.session)?;
        Ok(out)
    }
}

/// Parses a request body; an empty body reads as the default value.
fn body<T: DeserializeOwned + Default>(bytes: &Bytes) -> ApiResult<T> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    Ok(serde_json::from_slice(bytes)?)
}

fn required_body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    Ok(serde_json::from_slice(bytes)?)
}

// ---- payloads ----

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    /// Resume from a snapshot instead of starting fresh.
    #[serde(default)]
    pub snapshot: Option<Snapshot>,
}

#[derive(Debug, Serialize)]
pub struct ModelsSummary {
    pub name: String,
    pub product_features: usize,
    pub process_decisions: usize,
    pub resource_features: usize,
    pub cdc_rules: usize,
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub id: String,
    pub stage: Stage,
    pub models: ModelsSummary,
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub id: String,
    pub stage: Stage,
    pub created: u64,
    pub updated: u64,
    pub product_selection: Option<BTreeSet<String>>,
    pub process: DmConfiguration,
    pub visible_decisions: Vec<String>,
    pub queue: Vec<Assign>,
    pub sequence: Vec<String>,
    pub forced: bool,
    pub resource_reduction: Option<ResourceReduction>,
    pub resource_selection: Option<BTreeSet<String>>,
    pub metrics: Option<SpaceMetric>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionRequest {
    pub selected: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ProductResponse {
    pub stage: Stage,
    pub presets: Vec<Assign>,
    pub visible_decisions: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRequest {
    pub decision: String,
    pub value: DValue,
}

#[derive(Debug, Serialize)]
pub struct DecisionResponse {
    pub assignments: Vec<Assign>,
    pub propagated: Vec<String>,
    pub visible_decisions: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollbackRequest {
    pub count: usize,
}

#[derive(Debug, Serialize)]
pub struct RollbackResponse {
    pub queue: Vec<Assign>,
    pub visible_decisions: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinishRequest {
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Serialize)]
pub struct FinishResponse {
    pub stage: Stage,
    pub sequence: Vec<String>,
    pub resource_reduction: Option<ResourceReduction>,
    pub suggested_resources: Option<BTreeSet<String>>,
}

#[derive(Debug, Serialize)]
pub struct ResourceResponse {
    pub stage: Stage,
    pub resource_selection: BTreeSet<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    /// Base network in `.fbn` text; the configured base when absent.
    #[serde(default)]
    pub base: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct GenerateResponse {
    pub fbn: String,
    pub passed: bool,
    pub report: ConsistencyReport,
    pub report_text: String,
}

#[derive(Debug, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub sessions: usize,
}

// ---- handlers ----

fn view(id: &str, rec: &mut Record) -> SessionView {
    let s = &mut rec.session;
    let metrics = s.sequence_space().ok();
    SessionView {
        id: id.to_string(),
        stage: s.stage(),
        created: rec.created,
        updated: rec.updated,
        product_selection: s.product_config().map(|c| c.selected.clone()),
        process: s.process_config().clone(),
        visible_decisions: if s.stage() == Stage::Process { s.visible_decisions() } else { Vec::new() },
        queue: s.user_decisions().cloned().collect(),
        sequence: s.sequence().to_vec(),
        forced: s.forced(),
        resource_reduction: s.resource_reduction().cloned(),
        resource_selection: s.resource_config().map(|c| c.selected.clone()),
        metrics,
    }
}

async fn health(State(st): State<Arc<AppState>>) -> Json<Health> {
    Json(Health { status: "ok", sessions: st.sessions.read().unwrap().len() })
}

async fn create_session(State(st): State<Arc<AppState>>, bytes: Bytes) -> ApiResult<(StatusCode, Json<Created>)> {
    let req: CreateRequest = body(&bytes)?;
    let ws = st.config.workspace.clone();
    let session = match req.snapshot {
        Some(snap) => snap.restore(ws.clone())?,
        None => StagedSession::new(ws.clone())?,
    };
    let id = uuid::Uuid::new_v4().to_string();
    st.persist(&id, &session)?;
    let stage = session.stage();
    let t = now();
    st.sessions.write().unwrap().insert(id.clone(), Arc::new(Mutex::new(Record { session, created: t, updated: t })));
    let m = &ws.models;
    let models = ModelsSummary {
        name: m.name.clone(),
        product_features: m.product_fm.features.len(),
        process_decisions: m.process_dm.decisions.len(),
        resource_features: m.resource_fm.features.len(),
        cdc_rules: m.cdcs.len(),
    };
    Ok((StatusCode::CREATED, Json(Created { id, stage, models })))
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let rec = st.record(&id)?;
    let mut rec = rec.lock().unwrap();
    Ok(Json(view(&id, &mut rec)))
}

async fn post_product(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<ProductResponse>> {
    st.record(&id)?;
    let req: SelectionRequest = required_body(&bytes)?;
    st.mutate(&id, |s| {
        let presets = s.set_product_config(&req.selected)?.to_vec();
        Ok(Json(ProductResponse { stage: s.stage(), presets, visible_decisions: s.visible_decisions() }))
    })
}

async fn post_decision(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<DecisionResponse>> {
    st.record(&id)?;
    let req: DecisionRequest = required_body(&bytes)?;
    st.mutate(&id, |s| {
        let assignments = s.take_decision(&req.decision, req.value)?;
        let propagated =
            assignments.iter().filter(|a| a.decision != req.decision).map(|a| a.decision.clone()).collect();
        Ok(Json(DecisionResponse { assignments, propagated, visible_decisions: s.visible_decisions() }))
    })
}

async fn post_rollback(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<RollbackResponse>> {
    st.record(&id)?;
    let req: RollbackRequest = required_body(&bytes)?;
    st.mutate(&id, |s| {
        s.rollback(req.count)?;
        Ok(Json(RollbackResponse {
            queue: s.user_decisions().cloned().collect(),
            visible_decisions: s.visible_decisions(),
        }))
    })
}

async fn post_finish(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<FinishResponse>> {
    st.record(&id)?;
    let req: FinishRequest = body(&bytes)?;
    st.mutate(&id, |s| {
        let sequence = s.finish_process(req.force)?.to_vec();
        Ok(Json(FinishResponse {
            stage: s.stage(),
            sequence,
            resource_reduction: s.resource_reduction().cloned(),
            suggested_resources: s.suggest_resources(),
        }))
    })
}

async fn post_resource(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<ResourceResponse>> {
    st.record(&id)?;
    let req: SelectionRequest = required_body(&bytes)?;
    st.mutate(&id, |s| {
        s.set_resource_config(&req.selected)?;
        let resource_selection = s.resource_config().map(|c| c.selected.clone()).unwrap_or_default();
        Ok(Json(ResourceResponse { stage: s.stage(), resource_selection }))
    })
}

async fn post_generate(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<GenerateResponse>> {
    let rec = st.record(&id)?;
    let req: GenerateRequest = body(&bytes)?;
    let base = match &req.base {
        Some(text) => parse_fbn(text)?,
        None => st.config.base.clone().ok_or_else(|| {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no-base", "no base network given or configured")
        })?,
    };
    let rec = rec.lock().unwrap();
    let g = generate_artifact(&rec.session, &base, &st.config.deltas)?;
    Ok(Json(GenerateResponse {
        fbn: write_fbn(&g.network),
        passed: g.report.passed(),
        report_text: g.report.to_text(),
        report: g.report,
    }))
}

async fn get_metrics(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SpaceMetric>> {
    let rec = st.record(&id)?;
    let mut rec = rec.lock().unwrap();
    Ok(Json(rec.session.sequence_space()?))
}

async fn get_violations(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Vec<Diagnostic>>> {
    let rec = st.record(&id)?;
    let rec = rec.lock().unwrap();
    Ok(Json(rec.session.combined_violations()))
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(o) = origin.to_str() else { return false };
    let Some(rest) = o.strip_prefix("http://").or_else(|| o.strip_prefix("https://")) else { return false };
    let host = match rest.strip_prefix('[') {
        Some(v6) => v6.split(']').next().map(|h| format!("[{h}]")),
        None => rest.split(':').next().map(str::to_string),
    };
    matches!(host.as_deref(), Some("localhost" | "127.0.0.1" | "[::1]"))
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|o, _| is_local_origin(o)))
        .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
        .allow_headers([axum::http::header::CONTENT_TYPE]);
    let v1 = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/product", post(post_product))
        .route("/sessions/{id}/process/decisions", post(post_decision))
        .route("/sessions/{id}/process/rollback", post(post_rollback))
        .route("/sessions/{id}/process/finish", post(post_finish))
        .route("/sessions/{id}/resource", post(post_resource))
        .route("/sessions/{id}/generate", post(post_generate))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .route("/sessions/{id}/violations", get(get_violations));
    Router::new().nest("/v1", v1).layer(cors).with_state(state)
}

/// Serves the API on an already bound listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
