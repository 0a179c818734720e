//! Generation providers: the deterministic mock and the HTTP adapter.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AssembledPrompt, NarrativeError};

/// Wire request sent to a provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub story_prompt: String,
    pub image_prompt: String,
    pub seed: u64,
    pub max_length: usize,
}

/// Wire response; a non-empty `refusal_reason` means the provider declined.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProviderResponse {
    #[serde(default)]
    pub story: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_descriptor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("provider timed out")]
    Timeout,
    #[error("provider unreachable: {0}")]
    Unreachable(String),
    #[error("provider refused: {0}")]
    Refusal(String),
    #[error("provider protocol error: {0}")]
    Protocol(String),
}

pub trait GenerationProvider: Send + Sync {
    fn id(&self) -> &str;

    fn generate(
        &self,
        prompt: &AssembledPrompt,
        seed: u64,
        max_length: usize,
    ) -> Result<ProviderResponse, ProviderError>;
}

const OPENINGS: &[&str] = &[
    "Long ago, among the {group}, a garment called the {title} was sewn by lamplight.",
    "The {title} had hung in the {group} household for three generations.",
    "When the first snow came, the {group} grandmother unfolded the {title}.",
    "Every child of the {group} village knew the story of the {title}.",
    "A traveller once asked a {group} weaver why the {title} mattered so much.",
    "The {title} was the last thing packed when the {group} family moved upriver.",
    "In the market square a {group} girl smoothed the folds of the {title}.",
    "Nobody could remember who first stitched the {title}, but every {group} elder had a story.",
    "The {title} arrived at the festival wrapped in indigo cloth, as {group} custom asks.",
    "Rain drummed on the roof while the {group} aunt mended the {title}.",
    "For the {group}, the {title} is never simply clothing.",
    "At dawn the {group} musicians waited until the {title} was brought out.",
    "Her mother said the {title} would teach her what the {group} remember.",
    "The museum label called it the {title}; the {group} called it home.",
    "Before the wedding, the {group} bride touched each motif of the {title}.",
    "Under the old camphor tree, a {group} storyteller held up the {title}.",
];

const CONTEXTS: &[&str] = &[
    "As the elders explain: {excerpt}",
    "People still say: {excerpt}",
    "The custom is simple to tell and hard to forget: {excerpt}",
    "Those who keep the old ways put it like this: {excerpt}",
    "Ask anyone in the valley and they will answer: {excerpt}",
    "The record of the village keeps these words: {excerpt}",
    "It was always so: {excerpt}",
    "Her grandmother's voice came back to her: {excerpt}",
    "The song that goes with it begins: {excerpt}",
    "Written beside the costume in the archive: {excerpt}",
    "Even strangers learn this quickly: {excerpt}",
    "The oldest account says: {excerpt}",
    "Each season confirms the saying: {excerpt}",
    "The weavers teach it with the first stitch: {excerpt}",
    "The festival host reminded everyone: {excerpt}",
    "No one argues with the tradition: {excerpt}",
];

const VALUES: &[&str] = &[
    "In every thread she felt the value of {concept}.",
    "That night she understood that the garment spoke of {concept}.",
    "The lesson of {concept} was sewn into the hem.",
    "What the village passed on was, above all, {concept}.",
    "They named the feeling {concept}, and wore it proudly.",
    "To wear it was to promise {concept} to those who came after.",
    "The elders called this {concept}, and the young ones agreed.",
    "It was {concept}, not silver, that made the costume precious.",
    "Even the smallest motif carried {concept}.",
    "Through the dance, {concept} became something you could see.",
    "She realised the pattern was a map of {concept}.",
    "The weaver smiled: this was what {concept} looked like.",
    "Guests left the feast talking about {concept}.",
    "The costume asked only one thing of its wearer: {concept}.",
    "Across the river, another family kept the same {concept}.",
    "Long after the music stopped, {concept} remained.",
];

const FILLERS: &[&str] = &[
    "Wind moved through the terraced fields.",
    "Somewhere a reed pipe began to play.",
    "The silver ornaments chimed softly.",
    "Smoke from the cooking fires drifted over the roofs.",
    "Children ran between the drying racks of indigo cloth.",
    "The river was high that year.",
    "Lanterns were hung along the wooden bridge.",
    "The embroidery caught the late afternoon light.",
    "Someone laughed near the well.",
    "A rooster called from the hillside.",
    "The loom clicked steadily in the next room.",
    "Mist lay over the mountain until noon.",
    "Drums sounded from the square.",
    "The dye vats smelled of earth and leaves.",
    "Plum blossoms had just opened.",
    "The path to the village was slick with rain.",
    "A grandmother hummed an old tune.",
    "The market stalls were already busy.",
    "Stars came out above the ridge.",
    "The bronze drum was polished for the occasion.",
    "Fresh rice wine was poured for the guests.",
    "Bees worked the rapeseed flowers.",
    "The old house creaked in the wind.",
    "Firelight played across the pleats.",
];

const CLOSINGS: &[&str] = &[
    "And so the story is still told today.",
    "The costume is folded away until the next festival.",
    "That is why the garment is never sold.",
    "Years later, she taught her own daughter the same stitches.",
    "The pattern lives on, one generation to the next.",
    "Visitors who hear the tale rarely forget it.",
    "The museum keeps it now, but the village keeps its meaning.",
    "Some say the motifs still whisper on quiet nights.",
    "It remains the pride of the household.",
    "Each retelling adds a little more colour.",
    "The festival ends, but the garment waits for next year.",
    "Nothing more needed to be said.",
    "The elders nodded; the lesson had been passed on.",
    "And the village slept well that night.",
    "The last thread was tied, and the work was done.",
    "The song faded, but the costume stayed.",
];

/// Single-pass `{key}` substitution; inserted values are not rescanned.
fn fill(skeleton: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(skeleton.len() + 64);
    let mut rest = skeleton;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        match after.find('}').map(|end| (&after[..end], end)) {
            Some((key, end)) if values.iter().any(|(k, _)| *k == key) => {
                let value = values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).unwrap_or_default();
                out.push_str(value);
                rest = &after[end + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn pick<'a>(rng: &mut SplitMix64, bank: &[&'a str]) -> &'a str {
    bank[(rng.next_u64() % bank.len() as u64) as usize]
}

/// Leading sentence of a narrative, or the whole text when that sentence is
/// shorter than ten characters. Always a verbatim substring.
pub fn narrative_excerpt(narrative: &str) -> &str {
    let trimmed = narrative.trim();
    let end = trimmed
        .char_indices()
        .find(|&(_, c)| matches!(c, '.' | '!' | '?' | '。' | '！' | '？'))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(trimmed.len());
    let first = &trimmed[..end];
    if first.chars().count() >= 10 {
        first
    } else {
        trimmed
    }
}

/// Story and image descriptor for a prompt, a pure function of both inputs.
///
/// A SplitMix64 generator seeded with `seed` picks one skeleton from each
/// bank; the title, ethnic group, concept and a narrative excerpt are
/// substituted verbatim, so a fixed seed reproduces the same structure for
/// any prompt.
pub fn mock_story(prompt: &AssembledPrompt, seed: u64) -> (String, String) {
    let value = |key: &str| prompt.values.get(key).map(String::as_str).unwrap_or_default();
    let excerpt = narrative_excerpt(value("middle_narrative"));
    let anchors = [
        ("title", value("title")),
        ("group", value("ethnic_group")),
        ("concept", value("inner_concept")),
        ("excerpt", excerpt),
    ];

    let mut rng = SplitMix64::seed_from_u64(seed);
    let sentences = [
        pick(&mut rng, OPENINGS),
        pick(&mut rng, FILLERS),
        pick(&mut rng, CONTEXTS),
        pick(&mut rng, FILLERS),
        pick(&mut rng, VALUES),
        pick(&mut rng, CLOSINGS),
    ];
    let story = sentences.iter().map(|s| fill(s, &anchors)).collect::<Vec<_>>().join(" ");
    (story, mock_image_descriptor(&prompt.image_prompt))
}

/// `mock-image:` plus the first 16 hex digits of SHA-256 of the prompt.
pub fn mock_image_descriptor(image_prompt: &str) -> String {
    let digest = Sha256::digest(image_prompt.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("mock-image:{hex}")
}

/// Offline provider backed by [`mock_story`]; ignores `max_length`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl MockProvider {
    pub const ID: &'static str = "mock";
}

impl GenerationProvider for MockProvider {
    fn id(&self) -> &str {
        Self::ID
    }

    fn generate(
        &self,
        prompt: &AssembledPrompt,
        seed: u64,
        _max_length: usize,
    ) -> Result<ProviderResponse, ProviderError> {
        let (story, image) = mock_story(prompt, seed);
        Ok(ProviderResponse { story, image_descriptor: Some(image), refusal_reason: None })
    }
}

/// Remote provider settings. The credential is read from the named
/// environment variable at call time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub credential_env: String,
    pub timeout_secs: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: String::new(),
            credential_env: "GENE_ATLAS_PROVIDER_TOKEN".to_string(),
            timeout_secs: 30,
        }
    }
}

/// JSON-over-HTTP adapter: POSTs a [`ProviderRequest`] and expects a
/// [`ProviderResponse`].
#[derive(Debug, Clone)]
pub struct RemoteProvider {
    config: RemoteConfig,
}

impl RemoteProvider {
    pub const ID: &'static str = "remote";

    pub fn new(config: RemoteConfig) -> Self {
        RemoteProvider { config }
    }
}

impl GenerationProvider for RemoteProvider {
    fn id(&self) -> &str {
        Self::ID
    }

    fn generate(
        &self,
        prompt: &AssembledPrompt,
        seed: u64,
        max_length: usize,
    ) -> Result<ProviderResponse, ProviderError> {
        // The blocking client owns a runtime, so it is built and dropped on
        // the calling (non-async) thread.
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(self.config.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Protocol(e.to_string()))?;
        let body = ProviderRequest {
            story_prompt: prompt.story_prompt.clone(),
            image_prompt: prompt.image_prompt.clone(),
            seed,
            max_length,
        };
        let mut request = client.post(&self.config.endpoint).json(&body);
        if let Ok(token) = std::env::var(&self.config.credential_env) {
            request = request.bearer_auth(token);
        }
        let response = request.send().map_err(|e| {
            if e.is_timeout() {
                ProviderError::Timeout
            } else if e.is_connect() {
                ProviderError::Unreachable(e.to_string())
            } else {
                ProviderError::Protocol(e.to_string())
            }
        })?;
        if !response.status().is_success() {
            return Err(ProviderError::Protocol(format!("HTTP {}", response.status())));
        }
        response.json::<ProviderResponse>().map_err(|e| {
            if e.is_timeout() {
                ProviderError::Timeout
            } else {
                ProviderError::Protocol(e.to_string())
            }
        })
    }
}

/// Providers available to a deployment, keyed by id.
#[derive(Clone, Default)]
pub struct ProviderRegistry {
    providers: BTreeMap<String, Arc<dyn GenerationProvider>>,
}

impl std::fmt::Debug for ProviderRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.providers.keys()).finish()
    }
}

impl ProviderRegistry {
    /// Registry holding only the mock provider.
    pub fn with_mock() -> Self {
        let mut registry = ProviderRegistry::default();
        registry.register(Arc::new(MockProvider));
        registry
    }

    pub fn register(&mut self, provider: Arc<dyn GenerationProvider>) {
        self.providers.insert(provider.id().to_string(), provider);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn GenerationProvider>, NarrativeError> {
        self.providers.get(id).cloned().ok_or_else(|| NarrativeError::UnknownProvider(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.providers.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        assert_eq!(fill("a {title} b", &[("title", "{concept}"), ("concept", "X")]), "a {concept} b");
        assert_eq!(fill("{unknown} {x", &[("title", "T")]), "{unknown} {x");
    }

    #[test]
    fn excerpt_is_first_sentence() {
        assert_eq!(narrative_excerpt("Worn at weddings. Dyed with indigo."), "Worn at weddings.");
        assert_eq!(narrative_excerpt("Short. Then a longer sentence."), "Short. Then a longer sentence.");
        assert_eq!(narrative_excerpt("No terminator here"), "No terminator here");
        assert_eq!(narrative_excerpt("节日盛装用于婚礼和庆典场合。其余"), "节日盛装用于婚礼和庆典场合。");
    }

    #[test]
    fn image_descriptor_shape() {
        let d = mock_image_descriptor("x");
        assert!(d.starts_with("mock-image:"));
        assert_eq!(d.len(), "mock-image:".len() + 16);
        // SHA-256("x") = 2d711642b726b044...
        assert_eq!(d, "mock-image:2d711642b726b044");
    }

    #[test]
    fn registry_lookup() {
        let registry = ProviderRegistry::with_mock();
        assert_eq!(registry.get("mock").unwrap().id(), "mock");
        assert!(matches!(registry.get("gpt"), Err(NarrativeError::UnknownProvider(_))));
    }
}
