use crate::auth::User;
use crate::error::{ApiError, ApiResult};
use crate::store::{JobCounts, JobKind, JobRecord, JobStatus};
use crate::AppState;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{MatchedPath, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::Response;
use axum::routing::{delete, get, post, MethodRouter};
use axum::{Json, Router};
use retroplan_chem::{parse_pattern, parse_smiles, CanonicalSmiles};
use retroplan_core::one_step::cluster_precursors;
use retroplan_core::{
    search, CatalogEntry, CatalogFormat, Progress, SearchConfig, SearchContext, SearchResult, StrategyConfig,
    StrategyKind, Suggestion,
};
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::sync::Arc;

/// One row of the API index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Endpoint {
    pub method: String,
    pub path: String,
    pub summary: String,
    /// Schema of the success body under `/api/schemas/{name}`.
    pub response: Option<String>,
}

type Table = Vec<(Endpoint, MethodRouter<AppState>)>;

fn ep(method: &str, path: &str, summary: &str, response: Option<&str>) -> Endpoint {
    Endpoint {
        method: method.into(),
        path: path.into(),
        summary: summary.into(),
        response: response.map(Into::into),
    }
}

fn table() -> Table {
    vec![
        (ep("GET", "/api", "Index of every endpoint", Some("ApiIndex")), get(index)),
        (
            ep("GET", "/api/schemas", "Names of the published response schemas", Some("SchemaList")),
            get(schema_list),
        ),
        (ep("GET", "/api/schemas/{name}", "One response schema", None), get(schema_one)),
        (
            ep("GET", "/api/status", "Module availability and job counts", Some("Status")),
            get(status),
        ),
        (
            ep("GET", "/api/logging/summary", "Calls per endpoint per day", Some("LoggingSummary")),
            get(logging_summary),
        ),
        (
            ep("POST", "/api/retro/expand", "One-step suggestions for a target", Some("ExpandResponse")),
            post(expand),
        ),
        (
            ep("POST", "/api/tree-search/call-async", "Submit a tree search job", Some("JobAccepted")),
            post(call_async),
        ),
        (ep("GET", "/api/results", "The caller's jobs", Some("JobList")), get(list_results)),
        (
            ep("GET", "/api/results/{job_id}", "A job record and, once completed, its result", Some("JobResult")),
            get(get_result),
        ),
        (
            ep("GET", "/api/banlist/{kind}", "Banned chemicals or reactions", Some("BanEntries")),
            get(list_bans),
        ),
        (
            ep("POST", "/api/banlist/{kind}", "Ban chemicals or reactions", Some("BanEntries")),
            post(add_bans),
        ),
        (
            ep("DELETE", "/api/banlist/{kind}", "Lift bans", Some("BanEntries")),
            delete(remove_bans),
        ),
        (
            ep("GET", "/api/buyables", "Look up or search the catalog", Some("BuyableList")),
            get(find_buyables),
        ),
        (
            ep("POST", "/api/buyables", "Bulk upload catalog rows (csv or jsonl)", Some("UploadResponse")),
            post(upload_buyables),
        ),
    ]
}

pub fn endpoints() -> Vec<Endpoint> {
    table().into_iter().map(|(e, _)| e).collect()
}

pub(crate) fn router(state: AppState) -> Router {
    let mut r = Router::new();
    for (e, handler) in table() {
        r = r.route(&e.path, handler);
    }
    r.fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(middleware::from_fn_with_state(state.clone(), count_calls))
        .with_state(state)
}

async fn count_calls(State(st): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(path) = req.extensions().get::<MatchedPath>() {
        st.record_call(format!("{} {}", req.method(), path.as_str()));
    }
    next.run(req).await
}

fn body<T>(b: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    b.map(|Json(v)| v).map_err(|e| ApiError::bad_request("bad_body", e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request("bad_query", e.body_text()))
}

/// Overlay the keys of `patch` onto `base` and parse the result.
fn overlay<T: Serialize + DeserializeOwned>(base: &T, patch: Option<Value>) -> Result<T, String> {
    let mut v = serde_json::to_value(base).map_err(|e| e.to_string())?;
    match patch {
        None | Some(Value::Null) => {}
        Some(Value::Object(m)) => {
            let obj = v.as_object_mut().expect("configs serialize to objects");
            obj.extend(m);
        }
        Some(_) => return Err("config must be an object".into()),
    }
    serde_json::from_value(v).map_err(|e| e.to_string())
}

fn blocking_failed(e: tokio::task::JoinError) -> ApiError {
    ApiError::internal(format!("worker failed: {e}"))
}

// ---- index and schemas

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct ApiIndex {
    pub name: String,
    pub version: String,
    pub endpoints: Vec<Endpoint>,
}

async fn index() -> Json<ApiIndex> {
    Json(ApiIndex {
        name: "retroplan".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        endpoints: endpoints(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct SchemaList {
    pub schemas: Vec<String>,
}

async fn schema_list() -> Json<SchemaList> {
    Json(SchemaList {
        schemas: crate::schema::schemas().into_keys().map(String::from).collect(),
    })
}

async fn schema_one(Path(name): Path<String>) -> ApiResult<Json<Value>> {
    crate::schema::schemas()
        .remove(name.as_str())
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no schema named {name}")))
}

// ---- status and logging

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct ModuleStatus {
    pub available: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct Status {
    pub status: String,
    pub version: String,
    pub uptime_s: f64,
    pub modules: BTreeMap<String, ModuleStatus>,
    /// Jobs submitted but not yet finished.
    pub pending_jobs: usize,
    pub jobs: JobCounts,
}

async fn status(State(st): State<AppState>) -> Json<Status> {
    let one = &st.0.one_step;
    let mut modules = BTreeMap::new();
    for kind in StrategyKind::ALL {
        let on = one.strategies().contains(&kind);
        let detail = match kind {
            StrategyKind::TemplateRelevance => format!("{} templates", one.templates().len()),
            StrategyKind::Retrosim => format!("{} precedent reactions", one.corpus().len()),
        };
        modules.insert(kind.as_str().to_string(), ModuleStatus { available: on, detail });
    }
    modules.insert(
        "buyables".into(),
        ModuleStatus {
            available: true,
            detail: format!("{} entries", st.catalog().len()),
        },
    );
    modules.insert(
        "tree_search".into(),
        ModuleStatus {
            available: true,
            detail: format!("{} workers", st.settings().workers),
        },
    );
    let jobs = st.0.jobs.counts();
    Json(Status {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        uptime_s: st.0.started.elapsed().as_secs_f64(),
        modules,
        pending_jobs: jobs.started,
        jobs,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct LoggingSummary {
    /// Date (YYYY-MM-DD, UTC) to "METHOD /path" to call count.
    pub days: BTreeMap<String, BTreeMap<String, u64>>,
}

async fn logging_summary(State(st): State<AppState>) -> Json<LoggingSummary> {
    Json(LoggingSummary {
        days: st.0.calls.lock().unwrap().clone(),
    })
}

// ---- one-step expansion

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpandRequest {
    target: String,
    #[serde(default)]
    strategies: Option<Vec<String>>,
    #[serde(default)]
    config: Option<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct ExpandResponse {
    pub target: CanonicalSmiles,
    pub strategies: Vec<StrategyKind>,
    /// How many suggestions an interactive client shows by default.
    pub top_n: usize,
    pub suggestions: Vec<Suggestion>,
}

async fn expand(
    State(st): State<AppState>,
    user: User,
    req: Result<Json<ExpandRequest>, JsonRejection>,
) -> ApiResult<Json<ExpandResponse>> {
    let req = body(req)?;
    let target = parse_smiles(&req.target).map_err(|e| ApiError::smiles(&e))?;
    let kinds: Vec<StrategyKind> = match req.strategies {
        None => st.settings().strategies.clone(),
        Some(names) => names
            .iter()
            .map(|n| n.parse())
            .collect::<Result<_, _>>()
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_strategy", e))?,
    };
    if kinds.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "unknown_strategy",
            "no strategies selected",
        ));
    }
    let config: StrategyConfig =
        overlay(&st.0.one_step.config().clone(), req.config).map_err(|e| ApiError::bad_request("invalid_config", e))?;
    let one = st
        .0
        .one_step
        .with(&kinds, config.clone())
        .map_err(|e| ApiError::bad_request("invalid_config", e))?;
    let bans = st.0.bans.get(&user.0);
    let catalog = st.catalog();
    let max_price = st.settings().search.max_price;
    let product = CanonicalSmiles::from_mol(&target);
    let key = product.clone();
    let suggestions = tokio::task::spawn_blocking(move || {
        let list = one.suggest(&target, &catalog.view(max_price));
        let allowed = list.into_iter().filter(|s| bans.allows(&key, s)).collect();
        cluster_precursors(allowed, config.cluster_cutoff)
    })
    .await
    .map_err(blocking_failed)?;
    Ok(Json(ExpandResponse {
        target: product,
        strategies: kinds,
        top_n: config.top_n_returned,
        suggestions,
    }))
}

// ---- tree search jobs

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitRequest {
    target: String,
    #[serde(default)]
    config: Option<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct JobAccepted {
    pub job_id: String,
    pub status: JobStatus,
}

async fn call_async(
    State(st): State<AppState>,
    user: User,
    req: Result<Json<SubmitRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<JobAccepted>)> {
    let req = body(req)?;
    if st.0.closing.load(std::sync::atomic::Ordering::SeqCst) {
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "shutting_down",
            "the service is shutting down",
        ));
    }
    let cfg: SearchConfig =
        overlay(&st.settings().search, req.config).map_err(|e| ApiError::bad_request("invalid_config", e))?;
    cfg.validate().map_err(|e| ApiError::bad_request("invalid_config", e))?;
    let job_id = uuid::Uuid::new_v4().simple().to_string();
    let record = JobRecord {
        job_id: job_id.clone(),
        kind: JobKind::TreeSearch,
        status: JobStatus::Started,
        user_id: user.0.clone(),
        target: req.target.clone(),
        settings: cfg.clone(),
        created_at: chrono::Utc::now(),
        finished_at: None,
        result_ref: None,
        solved: None,
        error: None,
        progress: None,
    };
    let progress = Arc::new(Progress::default());
    st.0.jobs
        .insert(record, progress.clone())
        .map_err(|e| ApiError::internal(format!("cannot persist job: {e}")))?;
    let bans = st.0.bans.get(&user.0);
    let task_state = st.clone();
    let id = job_id.clone();
    st.0.tasks.spawn(async move {
        let st = task_state;
        let _permit = st.0.workers.clone().acquire_owned().await;
        let _gate = st.0.gate.clone().read_owned().await;
        let outcome = if st.0.closing.load(std::sync::atomic::Ordering::SeqCst) {
            Err(SHUTDOWN.to_string())
        } else {
            let one = st.0.one_step.clone();
            let catalog = st.catalog();
            tokio::task::spawn_blocking(move || {
                let view = catalog.view(cfg.max_price);
                let mut ctx = SearchContext::new(one.as_ref(), &view);
                ctx.bans = Some(&bans);
                ctx.progress = Some(&progress);
                let g = search(&req.target, &cfg, &ctx).map_err(|e| e.to_string())?;
                if g.termination() == retroplan_core::search::Termination::Cancelled {
                    return Err(SHUTDOWN.to_string());
                }
                Ok(SearchResult::new(&g, Some(&progress)))
            })
            .await
            .unwrap_or_else(|e| Err(format!("search failed: {e}")))
        };
        if let Err(e) = st.0.jobs.finish(&id, outcome) {
            tracing::error!("cannot record job {id}: {e}");
        }
    });
    Ok((
        StatusCode::ACCEPTED,
        Json(JobAccepted {
            job_id,
            status: JobStatus::Started,
        }),
    ))
}

const SHUTDOWN: &str = "cancelled: the service shut down";

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct JobList {
    pub jobs: Vec<JobRecord>,
}

async fn list_results(State(st): State<AppState>, user: User) -> Json<JobList> {
    Json(JobList {
        jobs: st.0.jobs.list(&user.0),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct JobResult {
    pub job: JobRecord,
    /// Present only once the job has completed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<SearchResult>,
}

async fn get_result(State(st): State<AppState>, Path(job_id): Path<String>) -> ApiResult<Json<JobResult>> {
    let job = st
        .0
        .jobs
        .get(&job_id)
        .ok_or_else(|| ApiError::not_found(format!("no job {job_id}")))?;
    let result = st
        .0
        .jobs
        .result(&job)
        .map_err(|e| ApiError::internal(format!("cannot read result: {e}")))?;
    Ok(Json(JobResult { job, result }))
}

// ---- ban lists

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BanKind {
    Chemicals,
    Reactions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BanRequest {
    entries: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct BanEntries {
    pub user_id: String,
    pub kind: String,
    /// Canonical entries, sorted.
    pub entries: Vec<String>,
}

fn ban_kind(kind: &str) -> ApiResult<BanKind> {
    match kind {
        "chemicals" => Ok(BanKind::Chemicals),
        "reactions" => Ok(BanKind::Reactions),
        _ => Err(ApiError::not_found(format!("no ban list {kind:?}"))),
    }
}

fn entries(list: &retroplan_core::BanList, kind: BanKind) -> BanEntries {
    let (name, entries) = match kind {
        BanKind::Chemicals => ("chemicals", list.banned_chemicals.iter().map(|c| c.to_string()).collect()),
        BanKind::Reactions => ("reactions", list.banned_reactions.iter().cloned().collect()),
    };
    BanEntries {
        user_id: list.user_id.clone(),
        kind: name.into(),
        entries,
    }
}

async fn list_bans(State(st): State<AppState>, user: User, Path(kind): Path<String>) -> ApiResult<Json<BanEntries>> {
    let kind = ban_kind(&kind)?;
    Ok(Json(entries(&st.0.bans.get(&user.0), kind)))
}

async fn change_bans(st: &AppState, user: &User, kind: &str, req: BanRequest, add: bool) -> ApiResult<BanEntries> {
    let kind = ban_kind(kind)?;
    let outcome = st
        .0
        .bans
        .update(&user.0, |list| {
            for e in &req.entries {
                match (kind, add) {
                    (BanKind::Chemicals, true) => list.ban_chemical(e).map(drop)?,
                    (BanKind::Chemicals, false) => list.unban_chemical(e).map(drop)?,
                    (BanKind::Reactions, true) => list.ban_reaction(e).map(drop)?,
                    (BanKind::Reactions, false) => list.unban_reaction(e).map(drop)?,
                }
            }
            Ok::<_, retroplan_core::BanError>(entries(list, kind))
        })
        .map_err(|e| ApiError::internal(format!("cannot save ban list: {e}")))?;
    outcome.map_err(|e| ApiError::bad_request("unparsable_entry", e))
}

async fn add_bans(
    State(st): State<AppState>,
    user: User,
    Path(kind): Path<String>,
    req: Result<Json<BanRequest>, JsonRejection>,
) -> ApiResult<Json<BanEntries>> {
    change_bans(&st, &user, &kind, body(req)?, true).await.map(Json)
}

async fn remove_bans(
    State(st): State<AppState>,
    user: User,
    Path(kind): Path<String>,
    req: Result<Json<BanRequest>, JsonRejection>,
) -> ApiResult<Json<BanEntries>> {
    change_bans(&st, &user, &kind, body(req)?, false).await.map(Json)
}

// ---- buyables

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuyableQuery {
    q: Option<String>,
    max_price: Option<f64>,
    /// `exact` (default) or `substructure`.
    mode: Option<String>,
    limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct BuyableList {
    pub count: usize,
    pub entries: Vec<CatalogEntry>,
}

async fn find_buyables(
    State(st): State<AppState>,
    q: Result<Query<BuyableQuery>, QueryRejection>,
) -> ApiResult<Json<BuyableList>> {
    let q = query(q)?;
    let max_price = q.max_price.unwrap_or(f64::INFINITY);
    let limit = q.limit.unwrap_or(100);
    let catalog = st.catalog();
    let within = |e: &&CatalogEntry| e.price_per_g <= max_price;
    let entries: Vec<CatalogEntry> = match (q.q.as_deref().map(str::trim), q.mode.as_deref()) {
        (None | Some(""), _) => catalog.entries().filter(within).take(limit).cloned().collect(),
        (Some(text), None | Some("exact")) => catalog
            .lookup(text, max_price)
            .map_err(|e| ApiError::smiles(&e))?
            .into_iter()
            .cloned()
            .collect(),
        (Some(text), Some("substructure")) => {
            let pattern = parse_pattern(text).map_err(|e| ApiError::bad_request("unparsable_pattern", e))?;
            catalog
                .substructure_search(&pattern, usize::MAX)
                .into_iter()
                .filter(within)
                .take(limit)
                .cloned()
                .collect()
        }
        (_, Some(m)) => return Err(ApiError::bad_request("bad_query", format!("unknown mode {m:?}"))),
    };
    Ok(Json(BuyableList {
        count: entries.len(),
        entries,
    }))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct UploadQuery {
    format: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
pub struct UploadResponse {
    /// Rows read from the upload.
    pub count: usize,
    /// Catalog size afterwards.
    pub total: usize,
}

async fn upload_buyables(
    State(st): State<AppState>,
    q: Result<Query<UploadQuery>, QueryRejection>,
    headers: axum::http::HeaderMap,
    text: String,
) -> ApiResult<Json<UploadResponse>> {
    let q = query(q)?;
    let format = match q.format.as_deref() {
        Some(f) => f.parse().map_err(|e| ApiError::bad_request("bad_query", e))?,
        None => {
            let ct = headers
                .get(axum::http::header::CONTENT_TYPE)
                .and_then(|v| v.to_str().ok())
                .unwrap_or("");
            if ct.starts_with("text/csv") {
                CatalogFormat::Csv
            } else {
                CatalogFormat::Jsonl
            }
        }
    };
    let st2 = st.clone();
    tokio::task::spawn_blocking(move || {
        let st = st2;
        let mut slot = st.0.catalog.write().unwrap();
        let mut next = (**slot).clone();
        let count = next.import_str(&text, format).map_err(|e| {
            let mut err = ApiError::bad_request("bad_row", &e);
            if let retroplan_core::CatalogError::BadRow { line, .. } = e {
                err.body.line = Some(line);
            }
            err
        })?;
        next.save(&st.snapshot_path())
            .map_err(|e| ApiError::internal(format!("cannot save catalog: {e}")))?;
        let total = next.len();
        *slot = Arc::new(next);
        Ok(Json(UploadResponse { count, total }))
    })
    .await
    .map_err(blocking_failed)?
}

