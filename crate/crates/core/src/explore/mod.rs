//! Gene-first exploration: tag postings, keyword search and related-costume
//! hops over an immutable index.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::schema::{CostumeRecord, GeneTag, MaterialClass, TagCategory};

pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error("duplicate costume id `{0}`")]
    DuplicateId(String),
    #[error("unknown costume `{0}`")]
    UnknownId(String),
    #[error("query has no searchable tokens")]
    EmptyQuery,
    #[error("page must be at least 1")]
    InvalidPage,
    #[error("page_size must be between 1 and 100, got {0}")]
    InvalidPageSize(usize),
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x2E80..=0x2FDF
        | 0x3040..=0x30FF
        | 0x3100..=0x312F
        | 0x3190..=0x31FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xAC00..=0xD7AF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}

/// Lowercase, split on non-alphanumerics, and additionally emit every CJK
/// character as its own token. `"Miao 苗族 silk"` gives
/// `["miao", "苗族", "苗", "族", "silk"]`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        tokens.push(word.to_lowercase());
        if word.chars().any(is_cjk) {
            tokens.extend(word.chars().filter(|&c| is_cjk(c)).map(|c| c.to_lowercase().collect::<String>()));
        }
    }
    tokens
}

/// Text indexed for a record: identity fields, motif labels and the display
/// names of its tags and their categories.
pub fn indexed_text(record: &CostumeRecord) -> Vec<&str> {
    let mut fields = vec![record.title.as_str(), record.ethnic_group.as_str()];
    if let Some(region) = &record.region {
        fields.push(region);
    }
    for pattern in &record.surface.patterns {
        fields.extend(pattern.motifs.iter().map(String::as_str));
    }
    if record.surface.materials.contains(&MaterialClass::Other) {
        if let Some(label) = &record.surface.other_material_label {
            fields.push(label);
        }
    }
    for tag in record.tags() {
        fields.push(tag.category().name());
        fields.push(tag.display_name());
    }
    fields
}

/// 1-based page of at most [`MAX_PAGE_SIZE`] items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRequest {
    pub page: usize,
    pub page_size: usize,
}

impl Default for PageRequest {
    fn default() -> Self {
        PageRequest { page: 1, page_size: DEFAULT_PAGE_SIZE }
    }
}

impl PageRequest {
    pub fn new(page: usize, page_size: usize) -> Result<Self, ExploreError> {
        if page == 0 {
            return Err(ExploreError::InvalidPage);
        }
        if page_size == 0 || page_size > MAX_PAGE_SIZE {
            return Err(ExploreError::InvalidPageSize(page_size));
        }
        Ok(PageRequest { page, page_size })
    }

    /// Slice of `items` on this page; empty past the end.
    pub fn slice<'a, T>(&self, items: &'a [T]) -> &'a [T] {
        let start = (self.page - 1).saturating_mul(self.page_size).min(items.len());
        let end = start.saturating_add(self.page_size).min(items.len());
        &items[start..end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrowsePage {
    pub total: usize,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub costume_id: String,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPage {
    pub total: usize,
    pub hits: Vec<SearchHit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatedGroup {
    pub tag: GeneTag,
    pub ids: Vec<String>,
}

/// Immutable postings over a corpus snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneIndex {
    tag_postings: BTreeMap<GeneTag, BTreeSet<String>>,
    token_postings: BTreeMap<String, BTreeMap<String, u32>>,
    id_order: Vec<String>,
    record_tags: BTreeMap<String, BTreeSet<GeneTag>>,
}

impl GeneIndex {
    pub fn build<'a>(records: impl IntoIterator<Item = &'a CostumeRecord>) -> Result<Self, ExploreError> {
        let mut index = GeneIndex::default();
        for record in records {
            if index.record_tags.contains_key(&record.id) {
                return Err(ExploreError::DuplicateId(record.id.clone()));
            }
            let tags = record.tags();
            for &tag in &tags {
                index.tag_postings.entry(tag).or_default().insert(record.id.clone());
            }
            for field in indexed_text(record) {
                for token in tokenize(field) {
                    *index.token_postings.entry(token).or_default().entry(record.id.clone()).or_default() += 1;
                }
            }
            index.record_tags.insert(record.id.clone(), tags);
        }
        index.id_order = index.record_tags.keys().cloned().collect();
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.id_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_order.is_empty()
    }

    /// All ids, ascending.
    pub fn ids(&self) -> &[String] {
        &self.id_order
    }

    pub fn contains(&self, id: &str) -> bool {
        self.record_tags.contains_key(id)
    }

    /// Sorted ids carrying `tag`.
    pub fn posting(&self, tag: GeneTag) -> Vec<String> {
        self.tag_postings.get(&tag).map(|s| s.iter().cloned().collect()).unwrap_or_default()
    }

    pub fn tag_count(&self, tag: GeneTag) -> usize {
        self.tag_postings.get(&tag).map_or(0, BTreeSet::len)
    }

    /// Per-record frequencies of a canonical token.
    pub fn token_frequencies(&self, token: &str) -> Option<&BTreeMap<String, u32>> {
        self.token_postings.get(token)
    }

    pub fn browse_by_tag(&self, tag: GeneTag, page: PageRequest) -> BrowsePage {
        let ids = self.posting(tag);
        BrowsePage { total: ids.len(), ids: page.slice(&ids).to_vec() }
    }

    /// AND over distinct query tokens, scored by summed term frequency,
    /// ordered by score descending then id ascending.
    pub fn search_keyword(&self, query: &str, page: PageRequest) -> Result<SearchPage, ExploreError> {
        let tokens: BTreeSet<String> = tokenize(query).into_iter().collect();
        if tokens.is_empty() {
            return Err(ExploreError::EmptyQuery);
        }
        let mut postings = Vec::with_capacity(tokens.len());
        for token in &tokens {
            match self.token_postings.get(token) {
                Some(p) => postings.push(p),
                None => return Ok(SearchPage { total: 0, hits: Vec::new() }),
            }
        }
        postings.sort_by_key(|p| p.len());
        let (first, rest) = postings.split_first().expect("at least one token");
        let mut hits: Vec<SearchHit> = first
            .iter()
            .filter_map(|(id, &tf)| {
                let mut score = tf;
                for p in rest {
                    score += p.get(id)?;
                }
                Some(SearchHit { costume_id: id.clone(), score })
            })
            .collect();
        hits.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.costume_id.cmp(&b.costume_id)));
        Ok(SearchPage { total: hits.len(), hits: page.slice(&hits).to_vec() })
    }

    /// For each tag of `category` the costume carries, the other costumes
    /// sharing it, in tag order.
    pub fn related_costumes(&self, costume_id: &str, category: TagCategory) -> Result<Vec<RelatedGroup>, ExploreError> {
        let tags = self.record_tags.get(costume_id).ok_or_else(|| ExploreError::UnknownId(costume_id.to_string()))?;
        Ok(tags
            .iter()
            .filter(|t| t.category() == category)
            .map(|&tag| RelatedGroup {
                tag,
                ids: self.posting(tag).into_iter().filter(|id| id != costume_id).collect(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests;
