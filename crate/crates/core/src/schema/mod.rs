//! Three-layer cultural-gene data model.
//!
//! The surface layer holds the perceivable genes (pattern, color, material,
//! form), the middle layer the socio-cultural context narratives, and the
//! inner layer the value concepts. All vocabularies are closed; documents
//! are checked against them by [`validate_value`] which reports every
//! violation with its field path.

mod inner;
mod validate;
mod vocab;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::color::{ColorProfile, PerceptualRule};

pub use inner::{concept_level, ConceptEntry, CONCEPT_TABLE};
pub use validate::{validate_draft_value, validate_record, validate_value, Validation, Violation};
pub use vocab::{
    ColorClass, FormClass, GeneTag, InnerConcept, InnerLevel, MaterialClass, MiddleDimension, PatternClass, TagCategory,
};

/// Storage and interchange format tag.
pub const FORMAT: &str = "gene-atlas/1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("unknown {vocabulary} value `{value}`")]
    UnknownValue { vocabulary: &'static str, value: String },
    #[error("unknown inner concept `{0}`")]
    UnknownConcept(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
}

/// A pattern class with optional finer motif labels ("dragon", "butterfly").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternEntry {
    pub class: PatternClass,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub motifs: Vec<String>,
}

impl PatternEntry {
    pub fn new(class: PatternClass) -> Self {
        PatternEntry { class, motifs: Vec::new() }
    }

    pub fn with_motifs<I, S>(class: PatternClass, motifs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PatternEntry { class, motifs: motifs.into_iter().map(Into::into).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceGenes {
    #[serde(default)]
    pub patterns: Vec<PatternEntry>,
    #[serde(default)]
    pub materials: BTreeSet<MaterialClass>,
    /// Free-text name for the `Other` material slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_material_label: Option<String>,
    pub forms: BTreeSet<FormClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_profile: Option<ColorProfile>,
}

impl SurfaceGenes {
    pub fn pattern(&self, class: PatternClass) -> Option<&PatternEntry> {
        self.patterns.iter().find(|p| p.class == class)
    }

    pub fn pattern_classes(&self) -> BTreeSet<PatternClass> {
        self.patterns.iter().map(|p| p.class).collect()
    }

    /// Tags carried by these genes; color comes from the profile's class.
    pub fn tags(&self) -> BTreeSet<GeneTag> {
        let mut tags = BTreeSet::new();
        tags.extend(self.patterns.iter().map(|p| GeneTag::Pattern(p.class)));
        if let Some(profile) = &self.color_profile {
            tags.insert(GeneTag::Color(profile.perceptual_class));
        }
        tags.extend(self.materials.iter().map(|&m| GeneTag::Material(m)));
        tags.extend(self.forms.iter().map(|&f| GeneTag::Form(f)));
        tags
    }

    /// Patterns sorted into taxonomy order.
    pub fn normalize(&mut self) {
        self.patterns.sort_by_key(|p| p.class);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiddleContext {
    pub dimension: MiddleDimension,
    pub narrative: String,
}

impl MiddleContext {
    pub fn new(dimension: MiddleDimension, narrative: impl Into<String>) -> Self {
        MiddleContext { dimension, narrative: narrative.into() }
    }
}

/// One garment with all three gene layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostumeRecord {
    pub id: String,
    pub title: String,
    pub ethnic_group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[serde(default)]
    pub image_refs: Vec<String>,
    pub surface: SurfaceGenes,
    #[serde(default)]
    pub middle: Vec<MiddleContext>,
    #[serde(default)]
    pub inner: BTreeSet<InnerConcept>,
    #[serde(default)]
    pub source_text: String,
}

impl CostumeRecord {
    pub fn tags(&self) -> BTreeSet<GeneTag> {
        self.surface.tags()
    }

    pub fn middle_context(&self, dimension: MiddleDimension) -> Option<&MiddleContext> {
        self.middle.iter().find(|m| m.dimension == dimension)
    }
}

/// Ordered legal values of a vocabulary. `category` is one of the tag
/// categories, `middle`, or `inner`.
pub fn taxonomy(category: &str) -> Result<Vec<&'static str>, SchemaError> {
    fn names<T: Copy>(all: &[T], name: fn(T) -> &'static str) -> Vec<&'static str> {
        all.iter().map(|&v| name(v)).collect()
    }
    match vocab::fold_name(category).as_str() {
        "pattern" => Ok(names(PatternClass::ALL, PatternClass::name)),
        "color" => Ok(names(ColorClass::ALL, ColorClass::name)),
        "material" => Ok(names(MaterialClass::ALL, MaterialClass::name)),
        "form" => Ok(names(FormClass::ALL, FormClass::name)),
        "middle" => Ok(names(MiddleDimension::ALL, MiddleDimension::name)),
        "inner" => Ok(names(InnerConcept::ALL, InnerConcept::name)),
        _ => Err(SchemaError::UnknownCategory(category.to_string())),
    }
}

/// Every vocabulary as one machine-readable document. Object keys are
/// sorted; lists keep taxonomy order.
pub fn vocabulary_document() -> Value {
    fn entries<T: Copy>(all: &[T], name: fn(T) -> &'static str, display: fn(T) -> &'static str) -> Value {
        Value::Array(all.iter().map(|&v| json!({ "name": name(v), "display_name": display(v) })).collect())
    }

    let inner: Vec<Value> = CONCEPT_TABLE
        .iter()
        .map(|e| {
            json!({
                "name": e.concept.name(),
                "display_name": e.concept.display_name(),
                "level": e.level.name(),
                "expression_example": e.expression_example,
                "connotation": e.connotation,
            })
        })
        .collect();

    let rule = PerceptualRule::default();
    let mut doc = BTreeMap::new();
    doc.insert("format", json!(FORMAT));
    doc.insert("Pattern", entries(PatternClass::ALL, PatternClass::name, PatternClass::display_name));
    doc.insert("Color", entries(ColorClass::ALL, ColorClass::name, ColorClass::display_name));
    doc.insert("Material", entries(MaterialClass::ALL, MaterialClass::name, MaterialClass::display_name));
    doc.insert("Form", entries(FormClass::ALL, FormClass::name, FormClass::display_name));
    doc.insert("middle", entries(MiddleDimension::ALL, MiddleDimension::name, MiddleDimension::display_name));
    doc.insert("inner_levels", entries(InnerLevel::ALL, InnerLevel::name, InnerLevel::display_name));
    doc.insert("inner", Value::Array(inner));
    doc.insert("color_rules", serde_json::to_value(rule).expect("rule serializes"));
    serde_json::to_value(doc).expect("document serializes")
}

/// [`vocabulary_document`] rendered with sorted keys and a trailing newline.
pub fn vocabulary_document_string() -> String {
    let mut s = serde_json::to_string_pretty(&vocabulary_document()).expect("document serializes");
    s.push('\n');
    s
}
