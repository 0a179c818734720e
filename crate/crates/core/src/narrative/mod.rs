//! Scaffolded co-creation: prompt assembly from the three gene layers,
//! provider dispatch, and lexical anchor checks on the result.

pub mod provider;
pub mod template;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use crate::schema::{CostumeRecord, InnerConcept, MaterialClass, MiddleDimension};

pub use provider::{
    GenerationProvider, MockProvider, ProviderError, ProviderRegistry, ProviderRequest, ProviderResponse, RemoteConfig,
    RemoteProvider,
};
pub use template::{PromptTemplate, TemplateError, KNOWN_PLACEHOLDERS, REQUIRED_PLACEHOLDERS};

use template::Segment;

/// Longest accepted user note, in characters.
pub const MAX_NOTE_CHARS: usize = 500;

/// Shortest narrative excerpt that counts as a middle-layer anchor.
pub const EXCERPT_CHARS: usize = 10;

/// Generation contexts offered to users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theme {
    Religious,
    Festive,
    Artistic,
}

impl Theme {
    pub const ALL: &'static [Theme] = &[Theme::Religious, Theme::Festive, Theme::Artistic];

    pub const fn name(self) -> &'static str {
        match self {
            Theme::Religious => "Religious",
            Theme::Festive => "Festive",
            Theme::Artistic => "Artistic",
        }
    }

    /// Middle-layer dimension that supplies the theme's narrative.
    pub const fn dimension(self) -> MiddleDimension {
        match self {
            Theme::Religious => MiddleDimension::ReligiousBeliefs,
            Theme::Festive => MiddleDimension::FestiveCeremonies,
            Theme::Artistic => MiddleDimension::ArtsEntertainment,
        }
    }
}

impl fmt::Display for Theme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theme {
    type Err = NarrativeError;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theme::ALL
            .iter()
            .copied()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| NarrativeError::UnknownTheme(s.to_string()))
    }
}

impl Serialize for Theme {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Theme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NarrativeError {
    #[error("unknown theme `{0}`; expected Religious, Festive or Artistic")]
    UnknownTheme(String),
    #[error("costume `{record}` does not match request costume `{request}`")]
    IdMismatch { record: String, request: String },
    #[error("costume `{costume_id}` has no {} context for the {theme} theme", .theme.dimension().display_name())]
    ThemeUnavailable { costume_id: String, theme: Theme },
    #[error("user note has {0} characters; the limit is 500")]
    NoteTooLong(usize),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("unknown provider `{0}`")]
    UnknownProvider(String),
    #[error("provider timed out after {attempts} attempts: {detail}")]
    ProviderTimeout { attempts: u32, detail: String },
    #[error("provider refused: {0}")]
    ProviderRefusal(String),
    #[error("provider error: {0}")]
    ProviderProtocol(String),
}

/// A user's co-creation choices for one costume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoCreationRequest {
    pub costume_id: String,
    pub context_theme: Theme,
    pub inner_concept: InnerConcept,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_note: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl CoCreationRequest {
    pub fn new(costume_id: impl Into<String>, theme: Theme, concept: InnerConcept, seed: u64) -> Self {
        CoCreationRequest {
            costume_id: costume_id.into(),
            context_theme: theme,
            inner_concept: concept,
            user_note: None,
            seed,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.user_note = Some(note.into());
        self
    }

    pub fn validate(&self) -> Result<(), NarrativeError> {
        let chars = self.user_note.as_deref().map_or(0, |n| n.chars().count());
        if chars > MAX_NOTE_CHARS {
            return Err(NarrativeError::NoteTooLong(chars));
        }
        Ok(())
    }
}

/// Gene layer a prompt value is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    Surface,
    Middle,
    Inner,
}

/// Substituted prompts with the field path behind every placeholder used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembledPrompt {
    pub story_prompt: String,
    pub image_prompt: String,
    /// Placeholder name to source field path.
    pub provenance: BTreeMap<String, String>,
    /// Placeholder name to substituted value.
    pub values: BTreeMap<String, String>,
}

impl AssembledPrompt {
    /// Layers whose substituted values appear in the story prompt.
    pub fn layers_covered(&self) -> BTreeSet<Layer> {
        self.provenance
            .iter()
            .filter(|(name, _)| {
                self.values.get(*name).is_some_and(|v| !v.is_empty() && self.story_prompt.contains(v.as_str()))
            })
            .filter_map(|(_, path)| layer_of(path))
            .collect()
    }
}

/// Layer of a provenance path, if it names a gene layer.
pub fn layer_of(path: &str) -> Option<Layer> {
    if path.starts_with("record.surface") {
        Some(Layer::Surface)
    } else if path.starts_with("record.middle") {
        Some(Layer::Middle)
    } else if path.starts_with("inner_table") || path == "request.inner_concept" {
        Some(Layer::Inner)
    } else {
        None
    }
}

/// Themes whose mapped context the record carries.
pub fn available_themes(record: &CostumeRecord) -> Vec<Theme> {
    Theme::ALL.iter().copied().filter(|t| record.middle_context(t.dimension()).is_some()).collect()
}

fn join_or_none(items: Vec<String>) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

/// `patterns: …; materials: …; forms: …; dominant color: <hex> (<class>)`
/// with every set in taxonomy order.
pub fn surface_summary(record: &CostumeRecord) -> String {
    let surface = &record.surface;
    let mut patterns: Vec<_> = surface.patterns.iter().collect();
    patterns.sort_by_key(|p| p.class);
    let patterns = patterns
        .iter()
        .map(|p| {
            if p.motifs.is_empty() {
                p.class.display_name().to_string()
            } else {
                format!("{} ({})", p.class.display_name(), p.motifs.join(", "))
            }
        })
        .collect();
    let materials = surface
        .materials
        .iter()
        .map(|m| match (m, &surface.other_material_label) {
            (MaterialClass::Other, Some(label)) => format!("Other ({label})"),
            _ => m.display_name().to_string(),
        })
        .collect();
    let forms = surface.forms.iter().map(|f| f.display_name().to_string()).collect();
    let color = match &surface.color_profile {
        Some(p) => format!("{} ({})", p.dominant_hex, p.perceptual_class.display_name()),
        None => "unknown".to_string(),
    };
    format!(
        "patterns: {}; materials: {}; forms: {}; dominant color: {color}",
        join_or_none(patterns),
        join_or_none(materials),
        join_or_none(forms)
    )
}

fn resolve_field(
    name: &str,
    record: &CostumeRecord,
    request: &CoCreationRequest,
    narrative: &str,
) -> Option<(String, String)> {
    let dim = request.context_theme.dimension();
    let concept = request.inner_concept;
    let entry = concept.entry();
    let resolved = match name {
        "title" => (record.title.clone(), "record.title".to_string()),
        "ethnic_group" => (record.ethnic_group.clone(), "record.ethnic_group".to_string()),
        "region" => (record.region.clone().unwrap_or_default(), "record.region".to_string()),
        "surface_summary" => (surface_summary(record), "record.surface".to_string()),
        "theme" => (request.context_theme.name().to_lowercase(), "request.context_theme".to_string()),
        "middle_dimension" => (dim.display_name().to_string(), format!("record.middle[{}].dimension", dim.name())),
        "middle_narrative" => (narrative.to_string(), format!("record.middle[{}].narrative", dim.name())),
        "inner_concept" => (concept.display_name().to_string(), "request.inner_concept".to_string()),
        "inner_level" => (entry.level.display_name().to_string(), format!("inner_table[{}].level", concept.name())),
        "inner_expression" => {
            (entry.expression_example.to_string(), format!("inner_table[{}].expression_example", concept.name()))
        }
        "inner_connotation" => (entry.connotation.to_string(), format!("inner_table[{}].connotation", concept.name())),
        "user_note" => (request.user_note.clone().unwrap_or_default(), "request.user_note".to_string()),
        _ => return None,
    };
    Some(resolved)
}

fn substitute(
    body: &str,
    field: &'static str,
    resolve: &mut impl FnMut(&str) -> Result<String, NarrativeError>,
) -> Result<String, NarrativeError> {
    let mut out = String::with_capacity(body.len() * 2);
    for segment in template::parse(body, field)? {
        match segment {
            Segment::Text(text) => out.push_str(text),
            Segment::Field(name) => out.push_str(&resolve(name)?),
        }
    }
    Ok(out)
}

/// Fill `template` from the record's three layers and the request.
///
/// Pure: the same inputs always give the same prompt.
pub fn assemble_prompt(
    record: &CostumeRecord,
    request: &CoCreationRequest,
    template: &PromptTemplate,
) -> Result<AssembledPrompt, NarrativeError> {
    if record.id != request.costume_id {
        return Err(NarrativeError::IdMismatch { record: record.id.clone(), request: request.costume_id.clone() });
    }
    request.validate()?;
    let theme = request.context_theme;
    let narrative = record
        .middle_context(theme.dimension())
        .map(|m| m.narrative.as_str())
        .ok_or_else(|| NarrativeError::ThemeUnavailable { costume_id: record.id.clone(), theme })?;

    let mut provenance = BTreeMap::new();
    let mut values = BTreeMap::new();
    let mut resolve = |name: &str| {
        let (value, path) = resolve_field(name, record, request, narrative)
            .ok_or_else(|| TemplateError::UnresolvedPlaceholder(name.to_string()))?;
        provenance.insert(name.to_string(), path);
        values.insert(name.to_string(), value.clone());
        Ok(value)
    };
    let story_prompt = substitute(template.story_body(), "story_body", &mut resolve)?;
    let image_prompt = substitute(template.image_body(), "image_body", &mut resolve)?;
    Ok(AssembledPrompt { story_prompt, image_prompt, provenance, values })
}

/// A generated story with the request that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NarrativeArtifact {
    pub request: CoCreationRequest,
    pub story: String,
    pub image_prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    pub provider_id: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    /// Extra attempts after a timeout or unreachable provider.
    pub retries: u32,
    pub max_length: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { retries: 2, max_length: 2000 }
    }
}

/// Call `provider` and wrap its output. Timeouts and connection failures
/// are retried `options.retries` times; refusals are returned at once.
pub fn generate(
    provider: &dyn GenerationProvider,
    prompt: &AssembledPrompt,
    request: &CoCreationRequest,
    options: &GenerateOptions,
) -> Result<NarrativeArtifact, NarrativeError> {
    let attempts = options.retries + 1;
    let mut last = String::new();
    for _ in 0..attempts {
        match provider.generate(prompt, request.seed, options.max_length) {
            Ok(response) => {
                if let Some(reason) = response.refusal_reason.filter(|r| !r.trim().is_empty()) {
                    return Err(NarrativeError::ProviderRefusal(reason));
                }
                if response.story.trim().is_empty() {
                    return Err(NarrativeError::ProviderProtocol("empty story".into()));
                }
                return Ok(NarrativeArtifact {
                    request: request.clone(),
                    story: response.story,
                    image_prompt: prompt.image_prompt.clone(),
                    image_ref: response.image_descriptor,
                    provider_id: provider.id().to_string(),
                    created_at: Utc::now(),
                });
            }
            Err(e @ (ProviderError::Timeout | ProviderError::Unreachable(_))) => {
                tracing::warn!(provider = provider.id(), error = %e, "generation attempt failed");
                last = e.to_string();
            }
            Err(ProviderError::Refusal(reason)) => return Err(NarrativeError::ProviderRefusal(reason)),
            Err(ProviderError::Protocol(detail)) => return Err(NarrativeError::ProviderProtocol(detail)),
        }
    }
    Err(NarrativeError::ProviderTimeout { attempts, detail: last })
}

/// Anchor a story is expected to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    Title,
    InnerConcept,
    MiddleNarrative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingAnchor {
    pub anchor: AnchorKind,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaffoldReport {
    pub passed: bool,
    pub missing: Vec<MissingAnchor>,
}

fn fold(s: &str) -> String {
    s.nfc().collect::<String>().to_lowercase()
}

/// Any run of [`EXCERPT_CHARS`] characters of `narrative` inside `story`;
/// a shorter narrative must appear whole.
fn contains_excerpt(story: &str, narrative: &str) -> bool {
    let chars: Vec<char> = narrative.chars().collect();
    if chars.is_empty() {
        return false;
    }
    if chars.len() <= EXCERPT_CHARS {
        return story.contains(narrative);
    }
    chars.windows(EXCERPT_CHARS).any(|w| story.contains(&w.iter().collect::<String>()))
}

/// Check the story against the prompt's title, concept and narrative,
/// case-insensitively after NFC normalization.
pub fn validate_scaffold(artifact: &NarrativeArtifact, prompt: &AssembledPrompt) -> ScaffoldReport {
    let story = fold(&artifact.story);
    let value = |key: &str| prompt.values.get(key).cloned().unwrap_or_default();
    let mut missing = Vec::new();

    let title = value("title");
    if title.is_empty() || !story.contains(&fold(&title)) {
        missing.push(MissingAnchor { anchor: AnchorKind::Title, expected: title });
    }
    let concept = artifact.request.inner_concept.display_name().to_string();
    if !story.contains(&fold(&concept)) {
        missing.push(MissingAnchor { anchor: AnchorKind::InnerConcept, expected: concept });
    }
    let narrative = value("middle_narrative");
    if !contains_excerpt(&story, &fold(&narrative)) {
        missing.push(MissingAnchor { anchor: AnchorKind::MiddleNarrative, expected: narrative });
    }
    ScaffoldReport { passed: missing.is_empty(), missing }
}
