//! HTTP JSON API under `/api/v1`.
//!
//! One project file per process. Reads share a lock; each mutation holds the
//! write lock, persists the new state, and only then responds.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use store_core::analysis::{cia_summary, coverage_report, surface_summary};
use store_core::catalog::Catalog;
use store_core::docgen::{export_table, ExportKind};
use store_core::model::{Entity, EntityKey, EntityKind, ModelError, Project};
use store_core::persistence::{self, PersistError};
use store_core::risk::RiskInput;
use store_core::workflow::WorkflowError;
use store_core::{commands, Error};
use tokio::sync::RwLock;
use tower_http::services::ServeDir;

use crate::{view, FrontendError};

/// Error body returned with every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub details: Value,
    #[serde(skip)]
    pub status: u16,
}

fn status_for(code: &str) -> StatusCode {
    match code {
        "NotFound" => StatusCode::NOT_FOUND,
        "DuplicateId" | "StillReferenced" | "StepNotCurrent" | "ExitChecksFailed"
        | "StepNotStarted" | "StepNotReady" | "MissingAssessment" | "NothingToExport" => {
            StatusCode::CONFLICT
        }
        "IoFailure" | "IntegrityMismatch" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl ApiError {
    fn new(code: &str, message: impl Into<String>, details: Value) -> Self {
        ApiError {
            code: code.to_owned(),
            message: message.into(),
            details,
            status: status_for(code).as_u16(),
        }
    }

    fn parse(message: impl ToString) -> Self {
        ApiError::new("ParseError", message.to_string(), Value::Null)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::new(e.code(), e.to_string(), e.details())
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for ApiError {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}
from_core!(ModelError, WorkflowError, PersistError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::UNPROCESSABLE_ENTITY);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    path: PathBuf,
    project: RwLock<Project>,
    catalog: Catalog,
}

impl AppState {
    pub fn new(path: PathBuf, project: Project, catalog: Catalog) -> Arc<Self> {
        Arc::new(AppState {
            path,
            project: RwLock::new(project),
            catalog,
        })
    }

    async fn read<T>(&self, f: impl FnOnce(&Project) -> ApiResult<T>) -> ApiResult<T> {
        f(&*self.project.read().await)
    }

    async fn mutate<T>(&self, f: impl FnOnce(&Project) -> ApiResult<(Project, T)>) -> ApiResult<T> {
        let mut guard = self.project.write().await;
        let (next, out) = f(&guard)?;
        if next != *guard {
            persistence::save(&next, &self.path)?;
            *guard = next;
        }
        Ok(out)
    }
}

pub fn router(state: Arc<AppState>, ui: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/project", get(get_project))
        .route("/risk/ranking", get(ranking))
        .route("/risk/{threat_id}", put(put_risk))
        .route("/elicit", post(elicit))
        .route("/workflow", get(workflow))
        .route("/workflow/{step}/{action}", post(workflow_action))
        .route("/reports/{kind}", get(report))
        .route("/document/srs", post(document_srs))
        .route("/export/{kind}", get(export))
        .route("/suggest/stride", get(suggest_stride))
        .route("/suggest/requirements/{threat_id}", get(suggest_requirements))
        .route("/{collection}", get(list).post(create))
        .route("/{collection}/{id}", delete(remove));
    let app = Router::new().nest("/api/v1", api).with_state(state);
    match ui {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Binds, serves until Ctrl-C, and returns.
pub fn serve_blocking(
    path: PathBuf,
    project: Project,
    catalog: Catalog,
    bind: &str,
    ui: Option<PathBuf>,
) -> Result<(), FrontendError> {
    let runtime = tokio::runtime::Runtime::new().map_err(PersistError::IoFailure)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|source| FrontendError::BindFailure {
                address: bind.to_owned(),
                source,
            })?;
        let addr = listener.local_addr().map_err(PersistError::IoFailure)?;
        eprintln!("serving {} on http://{addr}/api/v1", path.display());
        let app = router(AppState::new(path, project, catalog), ui);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(PersistError::IoFailure)?;
        Ok(())
    })
}

fn body_value(body: &Bytes) -> ApiResult<Value> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(Value::Object(Map::new()));
    }
    serde_json::from_slice(body).map_err(ApiError::parse)
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value) -> ApiResult<T> {
    serde_json::from_value(v).map_err(ApiError::parse)
}

fn not_found(what: &str) -> ApiError {
    Error::from(ModelError::NotFound(what.to_owned())).into()
}

async fn get_project(State(s): State<Arc<AppState>>) -> ApiResult<Json<Project>> {
    s.read(|p| Ok(Json(p.clone()))).await
}

#[derive(Debug, Clone, Copy)]
enum Collection {
    Goals,
    Stakeholders,
    Agreements,
    Assets,
    Points,
    Threats,
    Requirements,
    Validations,
}

impl Collection {
    fn parse(name: &str) -> ApiResult<Self> {
        Ok(match name {
            "goals" => Collection::Goals,
            "stakeholders" => Collection::Stakeholders,
            "agreements" => Collection::Agreements,
            "assets" => Collection::Assets,
            "points" => Collection::Points,
            "threats" => Collection::Threats,
            "requirements" => Collection::Requirements,
            "validations" => Collection::Validations,
            other => return Err(not_found(other)),
        })
    }

    fn kind(self) -> EntityKind {
        match self {
            Collection::Goals => EntityKind::Goal,
            Collection::Stakeholders => EntityKind::Stakeholder,
            Collection::Agreements => EntityKind::Agreement,
            Collection::Assets => EntityKind::Asset,
            Collection::Points => EntityKind::AttackPoint,
            Collection::Threats => EntityKind::Threat,
            Collection::Requirements => EntityKind::SecurityRequirement,
            Collection::Validations => EntityKind::ValidationRecord,
        }
    }

    fn items(self, p: &Project) -> Value {
        let v = match self {
            Collection::Goals => serde_json::to_value(&p.goals),
            Collection::Stakeholders => serde_json::to_value(&p.stakeholders),
            Collection::Agreements => serde_json::to_value(&p.agreements),
            Collection::Assets => serde_json::to_value(&p.assets),
            Collection::Points => serde_json::to_value(&p.attack_points),
            Collection::Threats => serde_json::to_value(&p.threats),
            Collection::Requirements => serde_json::to_value(&p.requirements),
            Collection::Validations => serde_json::to_value(&p.validations),
        };
        v.expect("entities serialize")
    }

    fn key(self, id: String) -> ApiResult<EntityKey> {
        Ok(match self {
            Collection::Goals => EntityKey::Goal(id),
            Collection::Stakeholders => EntityKey::Stakeholder(id),
            Collection::Assets => EntityKey::Asset(id),
            Collection::Points => EntityKey::AttackPoint(id),
            Collection::Threats => EntityKey::Threat(id),
            Collection::Requirements => EntityKey::SecurityRequirement(id),
            Collection::Agreements | Collection::Validations => {
                return Err(not_found(&format!("{self:?}/{id}").to_lowercase()))
            }
        })
    }
}

async fn list(State(s): State<Arc<AppState>>, Path(collection): Path<String>) -> ApiResult<Json<Value>> {
    let c = Collection::parse(&collection)?;
    s.read(|p| Ok(Json(c.items(p)))).await
}

async fn create(
    State(s): State<Arc<AppState>>,
    Path(collection): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let c = Collection::parse(&collection)?;
    let v = body_value(&body)?;
    s.mutate(|p| {
        let entity = commands::entity_from_json(p, c.kind(), v).map_err(ApiError::parse)?;
        let echo = serde_json::to_value(&entity).expect("entities serialize")["value"].clone();
        let next = match entity {
            Entity::Agreement(a) => commands::agree(p, a)?,
            Entity::ValidationRecord(r) => commands::validate_requirement(p, r)?,
            other => commands::add(p, other)?,
        };
        Ok((next, (StatusCode::CREATED, Json(echo))))
    })
    .await
}

async fn remove(
    State(s): State<Arc<AppState>>,
    Path((collection, id)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let key = Collection::parse(&collection)?.key(id)?;
    s.mutate(|p| {
        let next = commands::remove(p, &key)?;
        Ok((next, Json(json!({ "removed": key.to_string() }))))
    })
    .await
}

async fn ranking(State(s): State<Arc<AppState>>) -> ApiResult<Json<Vec<view::RankRow>>> {
    s.read(|p| Ok(Json(view::ranking(p)?))).await
}

async fn put_risk(
    State(s): State<Arc<AppState>>,
    Path(threat_id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let mut v = body_value(&body)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| ApiError::parse("expected a JSON object"))?;
    let excluded = obj.remove("excluded").map(from_value::<bool>).transpose()?;
    let rationale = obj
        .remove("exclusion_rationale")
        .map(from_value::<Option<String>>)
        .transpose()?
        .flatten()
        .unwrap_or_default();
    let input = if obj.is_empty() {
        None
    } else {
        Some(from_value::<RiskInput>(v)?)
    };
    s.mutate(|p| {
        let mut next = p.clone();
        if let Some(input) = input {
            next = commands::assess(&next, &threat_id, input)?;
        }
        if let Some(x) = excluded {
            next = commands::set_excluded(&next, &threat_id, x, &rationale)?;
        }
        let a = next
            .assessment(&threat_id)
            .cloned()
            .ok_or_else(|| Error::from(store_core::risk::RiskError::MissingAssessment(vec![threat_id.clone()])))?;
        Ok((next, Json(serde_json::to_value(a).expect("assessment serializes"))))
    })
    .await
}

async fn elicit(State(s): State<Arc<AppState>>) -> ApiResult<Json<view::ElicitView>> {
    let catalog = &s.catalog;
    s.mutate(|p| {
        let outcome = commands::elicit(p, catalog)?;
        let v = view::elicit(&outcome);
        Ok((outcome.project, Json(v)))
    })
    .await
}

async fn workflow(State(s): State<Arc<AppState>>) -> ApiResult<Json<view::WorkflowView>> {
    s.read(|p| Ok(Json(view::workflow(p)))).await
}

async fn workflow_action(
    State(s): State<Arc<AppState>>,
    Path((step, action)): Path<(String, String)>,
) -> ApiResult<Json<view::WorkflowView>> {
    let step: u8 = step
        .parse()
        .map_err(|_| ApiError::from(Error::from(WorkflowError::StepOutOfRange(0))))?;
    let f = match action.as_str() {
        "complete" => commands::complete_step,
        "reopen" => commands::reopen_step,
        other => return Err(not_found(other)),
    };
    s.mutate(|p| {
        let next = f(p, step)?;
        let v = view::workflow(&next);
        Ok((next, Json(v)))
    })
    .await
}

async fn report(State(s): State<Arc<AppState>>, Path(kind): Path<String>) -> ApiResult<Json<Value>> {
    s.read(|p| {
        let v = match kind.as_str() {
            "coverage" => serde_json::to_value(coverage_report(p)),
            "surface" => serde_json::to_value(surface_summary(p)),
            "cia" => serde_json::to_value(cia_summary(p)),
            other => return Err(not_found(other)),
        };
        Ok(Json(v.expect("reports serialize")))
    })
    .await
}

#[derive(Deserialize)]
struct SrsRequest {
    generated_at: Option<String>,
}

/// Writes `srs.md` beside the project file.
async fn document_srs(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: SrsRequest = from_value(body_value(&body)?)?;
    let at = req
        .generated_at
        .unwrap_or_else(|| chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string());
    let dir = s.path.parent().map(PathBuf::from).unwrap_or_default();
    s.mutate(|p| {
        let out = commands::generate_srs(p, "srs.md", &at)?;
        std::fs::write(dir.join("srs.md"), &out.text).map_err(PersistError::IoFailure)?;
        let v = json!({
            "document_path": "srs.md",
            "generated_at": at,
            "checksum": out.document.checksum,
            "text": out.text,
        });
        Ok((out.project, Json(v)))
    })
    .await
}

async fn export(State(s): State<Arc<AppState>>, Path(kind): Path<String>) -> ApiResult<Response> {
    let kind = ExportKind::parse(&kind).ok_or_else(|| not_found(&kind))?;
    s.read(|p| {
        let csv = export_table(p, kind).map_err(Error::from)?;
        Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
    })
    .await
}

#[derive(Deserialize)]
struct StrideQuery {
    #[serde(default)]
    text: String,
}

async fn suggest_stride(Query(q): Query<StrideQuery>) -> Json<view::StrideView> {
    Json(view::stride(&q.text))
}

#[derive(Deserialize)]
struct LimitQuery {
    limit: Option<usize>,
}

async fn suggest_requirements(
    State(s): State<Arc<AppState>>,
    Path(threat_id): Path<String>,
    Query(q): Query<LimitQuery>,
) -> ApiResult<Json<Vec<view::SuggestionView>>> {
    s.read(|p| {
        let t = p.threat(&threat_id).ok_or_else(|| not_found(&threat_id))?;
        Ok(Json(view::requirement_suggestions(t, &s.catalog, q.limit.unwrap_or(3))))
    })
    .await
}
