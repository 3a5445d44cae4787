//! Read-only JSON API over the live index snapshot.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use archive_lens_core::emit::{AnnotationRecord, DocbookSection, PageBox};
use archive_lens_core::Span;
use archive_lens_index::{current_snapshot, open_snapshot, Index, IndexError, LookupError, QueryError, SearchRequest};
use axum::extract::{Path as UrlPath, RawQuery, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

/// The snapshot served right now. Readers clone the `Arc` and keep their
/// view for the whole request, so a swap never disturbs them.
#[derive(Debug, Default)]
pub struct SnapshotHandle {
    live: RwLock<Option<(Arc<Index>, Option<PathBuf>)>>,
    root: Option<PathBuf>,
}

impl SnapshotHandle {
    pub fn with_index(index: Index) -> Self {
        Self {
            live: RwLock::new(Some((Arc::new(index), None))),
            root: None,
        }
    }

    /// Follows the `CURRENT` pointer of an index root. A root without a
    /// snapshot yet starts empty.
    pub fn watch(root: &Path) -> Result<Self, IndexError> {
        let handle = Self {
            live: RwLock::new(None),
            root: Some(root.to_path_buf()),
        };
        handle.reload()?;
        Ok(handle)
    }

    pub fn get(&self) -> Option<Arc<Index>> {
        self.live.read().expect("snapshot lock").as_ref().map(|(i, _)| i.clone())
    }

    pub fn swap(&self, index: Index, source: Option<PathBuf>) {
        *self.live.write().expect("snapshot lock") = Some((Arc::new(index), source));
    }

    /// Opens the snapshot named by `CURRENT` if it differs from the live
    /// one. Returns whether a swap happened.
    pub fn reload(&self) -> Result<bool, IndexError> {
        let Some(root) = &self.root else { return Ok(false) };
        let dir = match current_snapshot(root) {
            Ok(d) => d,
            Err(IndexError::NoSnapshot(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let live = self.live.read().expect("snapshot lock").as_ref().and_then(|(_, p)| p.clone());
        if live.as_ref() == Some(&dir) {
            return Ok(false);
        }
        let index = open_snapshot(&dir)?;
        self.swap(index, Some(dir));
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: message.into(),
        }
    }

    fn unavailable() -> Self {
        Self {
            status: StatusCode::SERVICE_UNAVAILABLE,
            code: "snapshot_unavailable",
            message: "no index snapshot is loaded".into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match e {
            QueryError::UnknownField(_) => "unknown_field",
            QueryError::MalformedQuery(_) => "malformed_query",
            QueryError::NotFacetable(_) => "not_facetable",
        };
        Self {
            status: StatusCode::BAD_REQUEST,
            code,
            message: e.to_string(),
        }
    }
}

impl From<LookupError> for ApiError {
    fn from(e: LookupError) -> Self {
        let (status, code) = match e {
            LookupError::UnknownKind(_) => (StatusCode::NOT_FOUND, "unknown_kind"),
            LookupError::EntityNotFound { .. } => (StatusCode::NOT_FOUND, "entity_not_found"),
            LookupError::UnknownDocument(_) => (StatusCode::NOT_FOUND, "unknown_document"),
            LookupError::InvalidSpan { .. } => (StatusCode::BAD_REQUEST, "invalid_span"),
        };
        Self {
            status,
            code,
            message: e.to_string(),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Decoded query string; keys may repeat.
struct Params(Vec<(String, String)>);

impl Params {
    fn parse(raw: Option<String>) -> Result<Self, ApiError> {
        serde_urlencoded::from_str(raw.as_deref().unwrap_or(""))
            .map(Params)
            .map_err(|e| ApiError::bad_request(e.to_string()))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, ApiError> {
        self.get(key)
            .filter(|v| !v.trim().is_empty())
            .ok_or_else(|| ApiError::bad_request(format!("missing parameter {key}")))
    }

    fn number(&self, key: &str, default: usize) -> Result<usize, ApiError> {
        match self.get(key) {
            None | Some("") => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ApiError::bad_request(format!("{key} must be a non-negative integer"))),
        }
    }

    /// `filter=field:value`, repeatable.
    fn filters(&self) -> Result<Vec<(String, String)>, ApiError> {
        self.0
            .iter()
            .filter(|(k, _)| k == "filter")
            .map(|(_, v)| {
                v.split_once(':')
                    .map(|(f, v)| (f.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| ApiError::bad_request(format!("filter {v:?} is not field:value")))
            })
            .collect()
    }

    /// `facets=a,b`, repeatable.
    fn facets(&self) -> Vec<String> {
        self.0
            .iter()
            .filter(|(k, _)| k == "facets")
            .flat_map(|(_, v)| v.split(','))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    }
}

fn live(state: &SnapshotHandle) -> Result<Arc<Index>, ApiError> {
    state.get().ok_or_else(ApiError::unavailable)
}

type AppState = Arc<SnapshotHandle>;

async fn healthz(State(state): State<AppState>) -> Response {
    match state.get() {
        Some(index) => Json(serde_json::json!({"status": "ok", "documents": index.len()})).into_response(),
        None => ApiError::unavailable().into_response(),
    }
}

async fn search(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<archive_lens_index::SearchResult> {
    let p = Params::parse(raw)?;
    let index = live(&state)?;
    let req = SearchRequest {
        q: p.get("q").unwrap_or("").to_string(),
        filters: p.filters()?,
        facets: p.facets(),
        offset: p.number("offset", 0)?,
        limit: p.number("limit", 0)?,
    };
    Ok(Json(index.search(&req)?))
}

#[derive(Debug, Serialize)]
pub struct DocumentView {
    pub doc_id: String,
    pub collection_id: Option<String>,
    pub title: Option<String>,
    pub date: Option<String>,
    pub language: Option<String>,
    pub text: String,
    pub sections: Vec<DocbookSection>,
    pub annotations: Vec<AnnotationRecord>,
}

async fn document(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<DocumentView> {
    let index = live(&state)?;
    let (doc, text) = index.document(&id)?;
    Ok(Json(DocumentView {
        doc_id: doc.doc_id.clone(),
        collection_id: doc.collection_id.clone(),
        title: doc.title.clone(),
        date: doc.date.clone(),
        language: doc.language.clone(),
        text: text.to_string(),
        sections: doc.sections.clone(),
        annotations: doc.annotations.clone(),
    }))
}

#[derive(Debug, Serialize)]
pub struct HighlightView {
    pub doc_id: String,
    pub span: Span,
    pub boxes: Vec<PageBox>,
}

async fn highlights(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<HighlightView> {
    let p = Params::parse(raw)?;
    let span = p.required("span")?;
    let bad = || ApiError::bad_request(format!("span {span:?} is not start,end"));
    let (s, e) = span.split_once(',').ok_or_else(bad)?;
    let start: usize = s.trim().parse().map_err(|_| bad())?;
    let end: usize = e.trim().parse().map_err(|_| bad())?;
    let index = live(&state)?;
    let span = Span { start, end };
    let boxes = index.highlights(&id, span)?;
    Ok(Json(HighlightView { doc_id: id, span, boxes }))
}

async fn concordance(
    State(state): State<AppState>,
    RawQuery(raw): RawQuery,
) -> ApiResult<archive_lens_index::ConcordanceResult> {
    let p = Params::parse(raw)?;
    let index = live(&state)?;
    let rows = index.concordance(
        p.required("term")?,
        p.number("window", 5)?,
        &p.filters()?,
        p.number("offset", 0)?,
        p.number("limit", 0)?,
    )?;
    Ok(Json(rows))
}

async fn timeline(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<archive_lens_index::Timeline> {
    let p = Params::parse(raw)?;
    let index = live(&state)?;
    Ok(Json(index.term_timeline(p.required("term")?, &p.filters()?)?))
}

async fn entity(
    State(state): State<AppState>,
    UrlPath((kind, name)): UrlPath<(String, String)>,
    RawQuery(raw): RawQuery,
) -> ApiResult<archive_lens_index::EntityCard> {
    let p = Params::parse(raw)?;
    let index = live(&state)?;
    Ok(Json(index.entity_card(&kind, &name, p.number("offset", 0)?, p.number("limit", 0)?)?))
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        code: "not_found",
        message: "no such endpoint".into(),
    }
}

fn cors(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let layer = CorsLayer::new().allow_methods([Method::GET]).allow_headers(Any);
    if origins.iter().any(|o| o == "*") {
        return Some(layer.allow_origin(Any));
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    Some(layer.allow_origin(AllowOrigin::list(list)))
}

pub fn router(state: Arc<SnapshotHandle>, cors_origins: &[String]) -> Router {
    let router = Router::new()
        .route("/healthz", get(healthz))
        .route("/search", get(search))
        .route("/documents/{id}", get(document))
        .route("/documents/{id}/highlights", get(highlights))
        .route("/concordance", get(concordance))
        .route("/timeline", get(timeline))
        .route("/entities/{kind}/{name}", get(entity))
        .fallback(not_found)
        .with_state(state);
    match cors(cors_origins) {
        Some(layer) => router.layer(layer),
        None => router,
    }
}
