//! JSON-over-HTTP front end to a [`Workbench`].
//!
//! Every handler delegates to the same workbench call the CLI and tests
//! use, so the HTTP path accepts and rejects exactly what the library does.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::header::{HeaderName, CONTENT_TYPE};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use refann_core::storage::HintRecord;
use refann_core::{
    Annotation, CodeElement, CommitRef, ElementType, Error as CoreError, HintFile, Point, RefactoringTypeDefinition,
    RevisionSide, Selection, Status, TextRange, Workbench,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub const CORS_ENV: &str = "REFANN_CORS_ORIGIN";
pub const DEFAULT_PORT: u16 = 8080;
pub const ANNOTATOR_HEADER: &str = "x-annotator";
pub const VERSION_HEADER: &str = "if-version";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("invalid CORS origin {0:?}")]
    InvalidOrigin(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Binds a listener, reporting an occupied port distinctly.
pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServiceError> {
    TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        io::ErrorKind::AddrInUse => ServiceError::PortInUse(addr.port()),
        _ => ServiceError::Io(e),
    })
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

/// Builds the API router. `cors_origin` is a single origin or `*`.
pub fn router(workbench: Arc<Workbench>, cors_origin: Option<&str>) -> Result<Router, ServiceError> {
    let api = Router::new()
        .route("/api/commits", get(list_commits))
        .route("/api/commits/{id}", get(get_commit))
        .route("/api/commits/{id}/diff", get(get_diff))
        .route("/api/commits/{id}/elements", get(get_elements))
        .route("/api/types", get(list_types).post(add_type))
        .route("/api/annotations", get(list_annotations).post(create_annotation))
        .route("/api/annotations/{id}", get(get_annotation))
        .route("/api/annotations/{id}/completeness", get(get_completeness))
        .route("/api/annotations/{id}/type", put(put_type))
        .route("/api/annotations/{id}/status", post(post_status))
        .route("/api/annotations/{id}/parameters/{side}/{name}", put(put_parameter).delete(delete_parameter))
        .route("/api/annotations/{id}/parameters/{side}/{name}/autofill", post(post_autofill))
        .route("/api/export", get(export))
        .route("/api/metrics/agreement", get(agreement))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint") })
        .with_state(workbench);
    Ok(match cors_origin {
        None => api,
        Some(origin) => api.layer(cors(origin)?),
    })
}

fn cors(origin: &str) -> Result<CorsLayer, ServiceError> {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        AllowOrigin::exact(HeaderValue::from_str(origin).map_err(|_| ServiceError::InvalidOrigin(origin.into()))?)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::PUT, Method::DELETE])
        .allow_headers([CONTENT_TYPE, HeaderName::from_static(ANNOTATOR_HEADER), HeaderName::from_static(VERSION_HEADER)])
        .expose_headers(Any))
}

// Errors -------------------------------------------------------------------

/// The JSON error body: `{"error": <code>, "message": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

/// HTTP status for a library error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "VersionConflict" | "DuplicateName" | "BuiltinOverwrite" => StatusCode::CONFLICT,
        "NotFound" | "UnresolvableCommit" | "UnknownParameter" => StatusCode::NOT_FOUND,
        "TypeMismatch" | "FragmentSpansMethods" | "FragmentOutsideMethod" | "EmptySelection" | "DuplicateElement"
        | "WrongSide" | "NoAutofillRule" | "SourceUnfilled" | "NoAncestorFound" | "IncompleteAnnotation"
        | "InvalidValues" | "UntypedAnnotation" | "TypeDefinitionMismatch" | "InsufficientAnnotators"
        | "BinaryFile" => StatusCode::UNPROCESSABLE_ENTITY,
        "SchemaViolation" | "UnknownType" | "InvalidSchema" | "InvalidValue" | "CodeFragmentNotEnumerable" => {
            StatusCode::BAD_REQUEST
        }
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let code = e.code();
        ApiError::new(status_for(code), code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = %self.code, "{}", self.message);
        }
        (self.status, axum::Json(json!({"error": self.code, "message": self.message}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// `axum::Json` with rejections rendered as [`ApiError`].
struct Json<T>(T);

impl<S, T> FromRequest<S> for Json<T>
where
    axum::Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let axum::Json(value) = axum::Json::<T>::from_request(req, state).await?;
        Ok(Json(value))
    }
}

fn ok<T: Serialize>(value: T) -> Response {
    axum::Json(value).into_response()
}

/// Runs a workbench call off the async executor.
async fn blocking<T, F>(wb: Arc<Workbench>, f: F) -> ApiResult<T>
where
    F: FnOnce(&Workbench) -> Result<T, CoreError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&wb))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
        .map_err(ApiError::from)
}

fn annotator(headers: &HeaderMap) -> ApiResult<String> {
    headers
        .get(ANNOTATOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .ok_or_else(|| ApiError::bad_request("missing X-Annotator header"))
}

fn expected_version(headers: &HeaderMap) -> ApiResult<Option<u64>> {
    headers
        .get(VERSION_HEADER)
        .map(|v| {
            v.to_str()
                .ok()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| ApiError::bad_request("If-Version must be an integer"))
        })
        .transpose()
}

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> ApiResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| ApiError::bad_request(format!("{what}: {e}")))
}

// Commits ------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FileSummary<'a> {
    kind: refann_core::ChangeKind,
    path_before: Option<&'a str>,
    path_after: Option<&'a str>,
    binary: bool,
}

#[derive(Serialize)]
struct CommitSummary<'a> {
    id: String,
    #[serde(flatten)]
    commit: &'a CommitRef,
    message: &'a str,
    files: Vec<FileSummary<'a>>,
}

fn summarize(s: &refann_core::CommitSnapshot) -> CommitSummary<'_> {
    CommitSummary {
        id: s.commit.id(),
        commit: &s.commit,
        message: &s.message,
        files: s
            .files
            .iter()
            .map(|f| FileSummary {
                kind: f.kind,
                path_before: f.path_before.as_deref(),
                path_after: f.path_after.as_deref(),
                binary: f.binary,
            })
            .collect(),
    }
}

async fn list_commits(State(wb): State<Arc<Workbench>>) -> ApiResult<Response> {
    let snapshots = blocking(wb, |wb| Ok(wb.store().list_commits()?)).await?;
    Ok(ok(snapshots.iter().map(summarize).collect::<Vec<_>>()))
}

async fn get_commit(State(wb): State<Arc<Workbench>>, Path(id): Path<String>) -> ApiResult<Response> {
    let snapshot = blocking(wb, move |wb| wb.snapshot(&id)).await?;
    let mut body = serde_json::to_value(&*snapshot).expect("snapshots serialize");
    body["id"] = Value::String(snapshot.commit.id());
    Ok(ok(body))
}

#[derive(Deserialize)]
struct DiffQuery {
    context: Option<usize>,
}

async fn get_diff(
    State(wb): State<Arc<Workbench>>,
    Path(id): Path<String>,
    Query(q): Query<DiffQuery>,
) -> ApiResult<Response> {
    let context = q.context.unwrap_or(refann_core::diff::DEFAULT_CONTEXT_LINES);
    Ok(ok(blocking(wb, move |wb| wb.diff(&id, context)).await?))
}

#[derive(Deserialize)]
struct ElementsQuery {
    side: String,
    #[serde(rename = "type")]
    element_type: String,
    file: Option<String>,
}

async fn get_elements(
    State(wb): State<Arc<Workbench>>,
    Path(id): Path<String>,
    Query(q): Query<ElementsQuery>,
) -> ApiResult<Response> {
    let side: RevisionSide = parse("side", &q.side)?;
    let t: ElementType = parse("type", &q.element_type)?;
    let elements: Vec<CodeElement> = blocking(wb, move |wb| wb.candidates(&id, side, t, q.file.as_deref())).await?;
    Ok(ok(elements))
}

// Types --------------------------------------------------------------------

async fn list_types(State(wb): State<Arc<Workbench>>) -> ApiResult<Response> {
    let registry = blocking(wb, |wb| wb.registry()).await?;
    Ok(ok(registry.types().map(RefactoringTypeDefinition::to_json_value).collect::<Vec<_>>()))
}

async fn add_type(State(wb): State<Arc<Workbench>>, body: String) -> ApiResult<Response> {
    let def = RefactoringTypeDefinition::from_json(&body).map_err(CoreError::from)?;
    let stored = blocking(wb, move |wb| wb.register_type(def)).await?;
    Ok((StatusCode::CREATED, axum::Json(stored.to_json_value())).into_response())
}

// Annotations --------------------------------------------------------------

#[derive(Deserialize)]
struct Page {
    limit: Option<usize>,
    offset: Option<usize>,
}

async fn list_annotations(State(wb): State<Arc<Workbench>>, Query(page): Query<Page>) -> ApiResult<Response> {
    let all = blocking(wb, |wb| wb.annotations()).await?;
    let page: Vec<Annotation> =
        all.into_iter().skip(page.offset.unwrap_or(0)).take(page.limit.unwrap_or(usize::MAX)).collect();
    Ok(ok(page))
}

async fn create_annotation(
    State(wb): State<Arc<Workbench>>,
    headers: HeaderMap,
    Json(hint): Json<HintRecord>,
) -> ApiResult<Response> {
    let who = annotator(&headers)?;
    let (annotation, warnings) = blocking(wb, move |wb| {
        if hint.type_name.is_none() && hint.description.is_none() && hint.prefill.is_none() {
            return Ok((wb.create_annotation(&hint.commit, None, &who, None)?, Vec::new()));
        }
        let mut report = wb.import_hint_file(&HintFile { hints: vec![hint] }, &who)?;
        Ok((report.created.remove(0), report.warnings))
    })
    .await?;
    let warnings: Vec<String> = warnings.into_iter().map(|w| w.message).collect();
    Ok((StatusCode::CREATED, axum::Json(json!({"annotation": annotation, "warnings": warnings}))).into_response())
}

async fn get_annotation(State(wb): State<Arc<Workbench>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(ok(blocking(wb, move |wb| wb.annotation(&id)).await?))
}

async fn get_completeness(State(wb): State<Arc<Workbench>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(ok(blocking(wb, move |wb| wb.completeness(&id)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeBody {
    #[serde(rename = "type")]
    type_name: String,
}

async fn put_type(
    State(wb): State<Arc<Workbench>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Json(body): Json<TypeBody>,
) -> ApiResult<Response> {
    let ev = expected_version(&headers)?;
    Ok(ok(blocking(wb, move |wb| wb.assign_type(&id, ev, &body.type_name)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusBody {
    status: Status,
}

async fn post_status(
    State(wb): State<Arc<Workbench>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Json(body): Json<StatusBody>,
) -> ApiResult<Response> {
    let ev = expected_version(&headers)?;
    Ok(ok(blocking(wb, move |wb| wb.set_status(&id, ev, body.status)).await?))
}

/// Exactly one of `range` or `point`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionBody {
    range: Option<TextRange>,
    point: Option<Point>,
}

impl SelectionBody {
    fn into_selection(self) -> ApiResult<Selection> {
        match (self.range, self.point) {
            (Some(r), None) => Ok(Selection::Range(r)),
            (None, Some(p)) => Ok(Selection::Point(p)),
            _ => Err(ApiError::bad_request("body needs exactly one of \"range\" or \"point\"")),
        }
    }
}

fn with_value(annotation: Annotation, side: RevisionSide, name: &str) -> Value {
    let value = annotation.parameters.ranges(side, name).to_vec();
    json!({"annotation": annotation, "value": value})
}

async fn put_parameter(
    State(wb): State<Arc<Workbench>>,
    Path((id, side, name)): Path<(String, String, String)>,
    headers: HeaderMap,
    Json(body): Json<SelectionBody>,
) -> ApiResult<Response> {
    let side: RevisionSide = parse("side", &side)?;
    let ev = expected_version(&headers)?;
    let selection = body.into_selection()?;
    let key = name.clone();
    let annotation = blocking(wb, move |wb| wb.set_parameter(&id, ev, side, &key, &selection)).await?;
    Ok(ok(with_value(annotation, side, &name)))
}

#[derive(Deserialize)]
struct ClearQuery {
    range: Option<String>,
}

async fn delete_parameter(
    State(wb): State<Arc<Workbench>>,
    Path((id, side, name)): Path<(String, String, String)>,
    Query(q): Query<ClearQuery>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let side: RevisionSide = parse("side", &side)?;
    let ev = expected_version(&headers)?;
    let range: Option<TextRange> = q
        .range
        .map(|r| serde_json::from_str(&r).map_err(|e| ApiError::bad_request(format!("range: {e}"))))
        .transpose()?;
    let key = name.clone();
    let annotation = blocking(wb, move |wb| wb.clear_parameter(&id, ev, side, &key, range.as_ref())).await?;
    Ok(ok(with_value(annotation, side, &name)))
}

async fn post_autofill(
    State(wb): State<Arc<Workbench>>,
    Path((id, side, name)): Path<(String, String, String)>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let side: RevisionSide = parse("side", &side)?;
    let ev = expected_version(&headers)?;
    let (report, annotation) = blocking(wb, move |wb| wb.autofill(&id, ev, side, &name)).await?;
    Ok(ok(json!({"annotation": annotation, "derived": report.derived})))
}

// Export and metrics -------------------------------------------------------

#[derive(Deserialize)]
struct ExportQuery {
    status: Option<String>,
}

async fn export(State(wb): State<Arc<Workbench>>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let status: Option<Status> = q.status.as_deref().filter(|s| !s.is_empty()).map(|s| parse("status", s)).transpose()?;
    let dataset = blocking(wb, move |wb| wb.export_dataset(status)).await?;
    Ok(([(CONTENT_TYPE, "application/json")], dataset.to_canonical_json()).into_response())
}

async fn agreement(State(wb): State<Arc<Workbench>>) -> ApiResult<Response> {
    Ok(ok(blocking(wb, |wb| wb.agreement()).await?))
}
