use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::StatusCode;
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::error::{parse_json, parse_query};
use super::{ApiError, AppState};
use crate::explore::{PageRequest, RelatedGroup, SearchHit, DEFAULT_PAGE_SIZE};
use crate::narrative::{
    assemble_prompt, available_themes, generate, validate_scaffold, CoCreationRequest, GenerateOptions,
    NarrativeArtifact, ScaffoldReport, Theme,
};
use crate::schema::{vocabulary_document, CostumeRecord, GeneTag, InnerConcept, TagCategory};
use crate::store::{ArtifactEntry, ArtifactFilter};

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<AppState>>;

pub(super) fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/taxonomies", get(taxonomies))
        .route("/api/tags/{category}", get(tags))
        .route("/api/costumes", get(costumes))
        .route("/api/costumes/{id}", get(costume))
        .route("/api/search", get(search))
        .route("/api/favorites", get(list_favorites).post(add_favorite).delete(remove_favorite))
        .route("/api/generate", axum::routing::post(generate_story))
        .route("/api/artifacts", get(artifacts))
        .fallback(not_found)
        .with_state(state)
}

async fn not_found() -> ApiError {
    ApiError::not_found("not_found", "no such route")
}

fn page_of(page: Option<usize>, page_size: Option<usize>) -> Result<PageRequest, ApiError> {
    Ok(PageRequest::new(page.unwrap_or(1), page_size.unwrap_or(DEFAULT_PAGE_SIZE))?)
}

async fn taxonomies() -> Json<Value> {
    Json(vocabulary_document())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagCount {
    pub tag: GeneTag,
    pub value: String,
    pub display_name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagList {
    pub category: String,
    pub tags: Vec<TagCount>,
}

async fn tags(State(state): Shared, Path(category): Path<String>) -> ApiResult<TagList> {
    let category: TagCategory = category.parse()?;
    let view = state.view();
    let tags = category
        .tags()
        .into_iter()
        .map(|tag| TagCount {
            tag,
            value: tag.value_name().to_string(),
            display_name: tag.display_name().to_string(),
            count: view.index.tag_count(tag),
        })
        .collect();
    Ok(Json(TagList { category: category.name().to_string(), tags }))
}

/// Grid entry for a costume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostumeSummary {
    pub id: String,
    pub title: String,
    pub ethnic_group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    pub tags: Vec<GeneTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominant_hex: Option<String>,
}

impl CostumeSummary {
    pub fn of(record: &CostumeRecord) -> Self {
        CostumeSummary {
            id: record.id.clone(),
            title: record.title.clone(),
            ethnic_group: record.ethnic_group.clone(),
            region: record.region.clone(),
            tags: record.tags().into_iter().collect(),
            dominant_hex: record.surface.color_profile.as_ref().map(|p| p.dominant_hex.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostumeList {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub items: Vec<CostumeSummary>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CostumesQuery {
    tag: Option<String>,
    page: Option<usize>,
    page_size: Option<usize>,
}

async fn costumes(State(state): Shared, RawQuery(raw): RawQuery) -> ApiResult<CostumeList> {
    let query: CostumesQuery = parse_query(raw.as_deref())?;
    let page = page_of(query.page, query.page_size)?;
    let view = state.view();
    let (total, ids) = match query.tag {
        Some(tag) => {
            let tag: GeneTag = tag.parse()?;
            let result = view.index.browse_by_tag(tag, page);
            (result.total, result.ids)
        }
        None => (view.index.len(), page.slice(view.index.ids()).to_vec()),
    };
    let items = ids.iter().filter_map(|id| view.corpus.get(id)).map(CostumeSummary::of).collect();
    Ok(Json(CostumeList { total, page: page.page, page_size: page.page_size, items }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResults {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub hits: Vec<SearchHit>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchQuery {
    q: Option<String>,
    page: Option<usize>,
    page_size: Option<usize>,
}

async fn search(State(state): Shared, RawQuery(raw): RawQuery) -> ApiResult<SearchResults> {
    let query: SearchQuery = parse_query(raw.as_deref())?;
    let page = page_of(query.page, query.page_size)?;
    let result = state.view().index.search_keyword(query.q.as_deref().unwrap_or(""), page)?;
    Ok(Json(SearchResults { total: result.total, page: page.page, page_size: page.page_size, hits: result.hits }))
}

/// Inner-layer concept with its interpretation texts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptView {
    pub concept: InnerConcept,
    pub display_name: String,
    pub level: String,
    pub expression_example: String,
    pub connotation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostumeDetail {
    pub record: CostumeRecord,
    pub tags: Vec<GeneTag>,
    /// Keyed by tag category name.
    pub related: BTreeMap<String, Vec<RelatedGroup>>,
    pub available_themes: Vec<Theme>,
    pub inner: Vec<ConceptView>,
}

async fn costume(State(state): Shared, Path(id): Path<String>) -> ApiResult<CostumeDetail> {
    let view = state.view();
    let record = view.corpus.get(&id).ok_or_else(|| ApiError::unknown_costume(&id))?;
    let mut related = BTreeMap::new();
    for &category in TagCategory::ALL {
        related.insert(category.name().to_string(), view.index.related_costumes(&id, category)?);
    }
    let inner = record
        .inner
        .iter()
        .map(|&c| {
            let entry = c.entry();
            ConceptView {
                concept: c,
                display_name: c.display_name().to_string(),
                level: entry.level.name().to_string(),
                expression_example: entry.expression_example.to_string(),
                connotation: entry.connotation.to_string(),
            }
        })
        .collect();
    Ok(Json(CostumeDetail {
        record: record.clone(),
        tags: record.tags().into_iter().collect(),
        related,
        available_themes: available_themes(record),
        inner,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FavoriteRequest {
    pub user_id: String,
    pub costume_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FavoriteList {
    pub user_id: String,
    pub costume_ids: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FavoritesQuery {
    user_id: Option<String>,
}

async fn list_favorites(State(state): Shared, RawQuery(raw): RawQuery) -> ApiResult<FavoriteList> {
    let query: FavoritesQuery = parse_query(raw.as_deref())?;
    let user_id = query
        .user_id
        .filter(|u| !u.is_empty())
        .ok_or_else(|| ApiError::invalid("invalid_query", "user_id is required"))?;
    let costume_ids = state.store().list_favorites(&user_id);
    Ok(Json(FavoriteList { user_id, costume_ids }))
}

async fn add_favorite(State(state): Shared, body: Bytes) -> ApiResult<FavoriteList> {
    let req: FavoriteRequest = parse_json(&body)?;
    let costume_ids = state.store().add_favorite(&req.user_id, &req.costume_id)?;
    Ok(Json(FavoriteList { user_id: req.user_id, costume_ids }))
}

async fn remove_favorite(State(state): Shared, body: Bytes) -> ApiResult<FavoriteList> {
    let req: FavoriteRequest = parse_json(&body)?;
    if req.user_id.is_empty() {
        return Err(ApiError::invalid("invalid_request", "user id must be non-empty"));
    }
    let costume_ids = state.store().remove_favorite(&req.user_id, &req.costume_id)?;
    Ok(Json(FavoriteList { user_id: req.user_id, costume_ids }))
}

/// Co-creation request plus routing options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    pub costume_id: String,
    pub context_theme: Theme,
    pub inner_concept: InnerConcept,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_note: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Provider id; `mock` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
}

impl GenerateRequest {
    pub fn co_creation(&self) -> CoCreationRequest {
        CoCreationRequest {
            costume_id: self.costume_id.clone(),
            context_theme: self.context_theme,
            inner_concept: self.inner_concept,
            user_note: self.user_note.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub artifact_id: u64,
    pub artifact: NarrativeArtifact,
    pub scaffold: ScaffoldReport,
}

async fn generate_story(State(state): Shared, body: Bytes) -> Result<(StatusCode, Json<GenerateResponse>), ApiError> {
    let req: GenerateRequest = parse_json(&body)?;
    let request = req.co_creation();
    let view = state.view();
    let record = view.corpus.get(&request.costume_id).ok_or_else(|| ApiError::unknown_costume(&request.costume_id))?;
    let provider = state.providers.get(req.provider.as_deref().unwrap_or("mock"))?;
    let prompt = assemble_prompt(record, &request, &state.template)?;

    let _slot = state.generate_slots.acquire().await.map_err(|e| ApiError::invalid("unavailable", e.to_string()))?;
    let (artifact, prompt) = {
        let request = request.clone();
        tokio::task::spawn_blocking(move || {
            let artifact = generate(provider.as_ref(), &prompt, &request, &GenerateOptions::default());
            (artifact, prompt)
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", e.to_string()))?
    };
    let artifact = artifact?;
    let scaffold = validate_scaffold(&artifact, &prompt);
    let artifact_id = state.store().append_artifact(artifact.clone(), req.user_id.clone())?;
    Ok((StatusCode::OK, Json(GenerateResponse { artifact_id, artifact, scaffold })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactList {
    pub total: usize,
    pub items: Vec<ArtifactEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArtifactsQuery {
    costume_id: Option<String>,
    user_id: Option<String>,
}

async fn artifacts(State(state): Shared, RawQuery(raw): RawQuery) -> ApiResult<ArtifactList> {
    let query: ArtifactsQuery = parse_query(raw.as_deref())?;
    let filter = ArtifactFilter { costume_id: query.costume_id, user_id: query.user_id };
    let items: Vec<ArtifactEntry> = state.store().list_artifacts(&filter).into_iter().cloned().collect();
    Ok(Json(ArtifactList { total: items.len(), items }))
}
