//! Double-coder annotation: cross-check, third-coder resolution, ingestion.
//!
//! Two drafts are compared over a fixed enumeration of boolean and text
//! fields derived from the vocabularies, so every costume has the same
//! [`FIELD_COUNT`] regardless of what the coders marked.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use unicode_normalization::UnicodeNormalization;

use crate::color::{extract_profile, ColorError, ColorParams, PixelBuffer};
use crate::schema::{
    validate_draft_value, validate_record, ColorClass, CostumeRecord, FormClass, InnerConcept, MaterialClass,
    MiddleContext, MiddleDimension, PatternClass, SurfaceGenes, Violation,
};
use crate::store::Corpus;

/// Number of compared fields for the current vocabularies.
pub const FIELD_COUNT: usize = PatternClass::ALL.len()
    + MaterialClass::ALL.len()
    + FormClass::ALL.len()
    + 2 * MiddleDimension::ALL.len()
    + InnerConcept::ALL.len()
    + 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnotationError {
    #[error("drafts describe different costumes: `{a}` and `{b}`")]
    CostumeMismatch { a: String, b: String },
    #[error("draft {side} is invalid")]
    InvalidDraft { side: Side, violations: Vec<Violation> },
    #[error("malformed draft: {0}")]
    MalformedDraft(String),
    #[error("no decision for conflicting fields: {}", .0.join(", "))]
    MissingDecisions(Vec<String>),
    #[error("report does not match the given drafts")]
    StaleReport,
    #[error("costume id `{0}` already exists")]
    DuplicateId(String),
    #[error("resulting record is invalid")]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Color(#[from] ColorError),
}

/// One coder's transcription of a costume into the gene schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationDraft {
    pub coder_id: String,
    pub costume_id: String,
    pub surface: SurfaceGenes,
    #[serde(default)]
    pub middle: Vec<MiddleContext>,
    #[serde(default)]
    pub inner: BTreeSet<InnerConcept>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_color_class: Option<ColorClass>,
}

impl AnnotationDraft {
    /// Parse a draft document, reporting every schema violation.
    pub fn from_value(value: &Value, side: Side) -> Result<Self, AnnotationError> {
        let validation = validate_draft_value(value);
        if !validation.is_ok() {
            return Err(AnnotationError::InvalidDraft { side, violations: validation.violations });
        }
        serde_json::from_value(value.clone()).map_err(|e| AnnotationError::MalformedDraft(e.to_string()))
    }

    fn check(&self, side: Side) -> Result<(), AnnotationError> {
        let value = serde_json::to_value(self).map_err(|e| AnnotationError::MalformedDraft(e.to_string()))?;
        let validation = validate_draft_value(&value);
        if validation.is_ok() {
            Ok(())
        } else {
            Err(AnnotationError::InvalidDraft { side, violations: validation.violations })
        }
    }

    fn context(&self, dimension: MiddleDimension) -> Option<&MiddleContext> {
        self.middle.iter().find(|m| m.dimension == dimension)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// Third-coder choices keyed by conflicting field path.
pub type Decisions = BTreeMap<String, Side>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub field_path: String,
    pub value_a: String,
    pub value_b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationReport {
    pub costume_id: String,
    pub agreement_rate: f64,
    pub conflicts: Vec<Conflict>,
    pub total_fields: usize,
}

/// Annotation agreed by both coders or settled by the third.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergedAnnotation {
    pub surface: SurfaceGenes,
    pub middle: Vec<MiddleContext>,
    pub inner: BTreeSet<InnerConcept>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manual_color_class: Option<ColorClass>,
}

impl MergedAnnotation {
    /// The annotation layers of a single draft, in canonical order.
    pub fn project(draft: &AnnotationDraft) -> Self {
        let mut merged = MergedAnnotation {
            surface: draft.surface.clone(),
            middle: draft.middle.clone(),
            inner: draft.inner.clone(),
            manual_color_class: draft.manual_color_class,
        };
        merged.normalize();
        merged
    }

    fn normalize(&mut self) {
        self.surface.normalize();
        self.middle.sort_by_key(|m| m.dimension);
    }
}

/// NFC, whitespace runs collapsed to one space, trimmed.
pub fn normalize_text(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn flag(b: bool) -> String {
    b.to_string()
}

struct Field {
    path: String,
    a: String,
    b: String,
    conflicting: bool,
}

impl Field {
    fn exact(path: String, a: String, b: String) -> Self {
        let conflicting = a != b;
        Field { path, a, b, conflicting }
    }
}

fn enumerate_fields(a: &AnnotationDraft, b: &AnnotationDraft) -> Vec<Field> {
    let mut fields = Vec::with_capacity(FIELD_COUNT);
    let (pa, pb) = (a.surface.pattern_classes(), b.surface.pattern_classes());
    for &class in PatternClass::ALL {
        fields.push(Field::exact(
            format!("surface.patterns.{class}"),
            flag(pa.contains(&class)),
            flag(pb.contains(&class)),
        ));
    }
    for &m in MaterialClass::ALL {
        fields.push(Field::exact(
            format!("surface.materials.{m}"),
            flag(a.surface.materials.contains(&m)),
            flag(b.surface.materials.contains(&m)),
        ));
    }
    for &f in FormClass::ALL {
        fields.push(Field::exact(
            format!("surface.forms.{f}"),
            flag(a.surface.forms.contains(&f)),
            flag(b.surface.forms.contains(&f)),
        ));
    }
    for &dim in MiddleDimension::ALL {
        let (ca, cb) = (a.context(dim), b.context(dim));
        fields.push(Field::exact(format!("middle.{dim}"), flag(ca.is_some()), flag(cb.is_some())));
        // Narratives only disagree when both coders recorded the dimension;
        // otherwise the presence field already carries the disagreement.
        let na = ca.map(|c| normalize_text(&c.narrative)).unwrap_or_default();
        let nb = cb.map(|c| normalize_text(&c.narrative)).unwrap_or_default();
        let conflicting = ca.is_some() && cb.is_some() && na != nb;
        fields.push(Field { path: format!("middle.{dim}.narrative"), a: na, b: nb, conflicting });
    }
    for &concept in InnerConcept::ALL {
        fields.push(Field::exact(
            format!("inner.{concept}"),
            flag(a.inner.contains(&concept)),
            flag(b.inner.contains(&concept)),
        ));
    }
    let class_text = |c: Option<ColorClass>| c.map_or_else(|| "none".to_string(), |c| c.name().to_string());
    fields.push(Field::exact(
        "manual_color_class".to_string(),
        class_text(a.manual_color_class),
        class_text(b.manual_color_class),
    ));
    debug_assert_eq!(fields.len(), FIELD_COUNT);
    fields
}

/// Field-level cross-check of two drafts of the same costume.
pub fn compare_drafts(a: &AnnotationDraft, b: &AnnotationDraft) -> Result<ReconciliationReport, AnnotationError> {
    if a.costume_id != b.costume_id {
        return Err(AnnotationError::CostumeMismatch { a: a.costume_id.clone(), b: b.costume_id.clone() });
    }
    a.check(Side::A)?;
    b.check(Side::B)?;

    let fields = enumerate_fields(a, b);
    let total_fields = fields.len();
    let conflicts: Vec<Conflict> = fields
        .into_iter()
        .filter(|f| f.conflicting)
        .map(|f| Conflict { field_path: f.path, value_a: f.a, value_b: f.b })
        .collect();
    Ok(ReconciliationReport {
        costume_id: a.costume_id.clone(),
        agreement_rate: (total_fields - conflicts.len()) as f64 / total_fields as f64,
        conflicts,
        total_fields,
    })
}

fn set_membership<T: Ord>(set: &mut BTreeSet<T>, value: T, present: bool) {
    if present {
        set.insert(value);
    } else {
        set.remove(&value);
    }
}

fn apply_b(merged: &mut MergedAnnotation, b: &AnnotationDraft, path: &str) {
    let mut parts = path.split('.');
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("surface"), Some("patterns"), Some(name), None) => {
            let class = PatternClass::from_name(name).expect("path from enumeration");
            merged.surface.patterns.retain(|p| p.class != class);
            if let Some(entry) = b.surface.pattern(class) {
                merged.surface.patterns.push(entry.clone());
            }
        }
        (Some("surface"), Some("materials"), Some(name), None) => {
            let m = MaterialClass::from_name(name).expect("path from enumeration");
            set_membership(&mut merged.surface.materials, m, b.surface.materials.contains(&m));
            if m == MaterialClass::Other {
                merged.surface.other_material_label = b.surface.other_material_label.clone();
            }
        }
        (Some("surface"), Some("forms"), Some(name), None) => {
            let f = FormClass::from_name(name).expect("path from enumeration");
            set_membership(&mut merged.surface.forms, f, b.surface.forms.contains(&f));
        }
        (Some("middle"), Some(name), narrative, None) => {
            let dim = MiddleDimension::from_name(name).expect("path from enumeration");
            let theirs = b.context(dim);
            if narrative == Some("narrative") {
                if let (Some(ours), Some(theirs)) = (merged.middle.iter_mut().find(|m| m.dimension == dim), theirs) {
                    ours.narrative = theirs.narrative.clone();
                }
            } else {
                merged.middle.retain(|m| m.dimension != dim);
                if let Some(ctx) = theirs {
                    merged.middle.push(ctx.clone());
                }
            }
        }
        (Some("inner"), Some(name), None, None) => {
            let c = InnerConcept::from_name(name).expect("path from enumeration");
            set_membership(&mut merged.inner, c, b.inner.contains(&c));
        }
        (Some("manual_color_class"), None, None, None) => {
            merged.manual_color_class = b.manual_color_class;
        }
        _ => unreachable!("unknown field path {path}"),
    }
}

/// Merge two drafts: agreed fields come from `a`, each conflicting field from
/// the side named in `decisions`.
pub fn resolve(
    report: &ReconciliationReport,
    a: &AnnotationDraft,
    b: &AnnotationDraft,
    decisions: &Decisions,
) -> Result<MergedAnnotation, AnnotationError> {
    let fresh = compare_drafts(a, b)?;
    if &fresh != report {
        return Err(AnnotationError::StaleReport);
    }
    let missing: Vec<String> = report
        .conflicts
        .iter()
        .filter(|c| !decisions.contains_key(&c.field_path))
        .map(|c| c.field_path.clone())
        .collect();
    if !missing.is_empty() {
        return Err(AnnotationError::MissingDecisions(missing));
    }

    let mut merged = MergedAnnotation::project(a);
    for conflict in &report.conflicts {
        if decisions[&conflict.field_path] == Side::B {
            apply_b(&mut merged, b, &conflict.field_path);
        }
    }
    merged.normalize();

    let probe = AnnotationDraft {
        coder_id: "merged".into(),
        costume_id: a.costume_id.clone(),
        surface: merged.surface.clone(),
        middle: merged.middle.clone(),
        inner: merged.inner.clone(),
        manual_color_class: merged.manual_color_class,
    };
    probe.check(Side::A).map_err(|e| match e {
        AnnotationError::InvalidDraft { violations, .. } => AnnotationError::Invalid(violations),
        other => other,
    })?;
    Ok(merged)
}

/// Identity and descriptive metadata supplied alongside the drafts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordMeta {
    pub id: String,
    pub title: String,
    pub ethnic_group: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[serde(default)]
    pub image_refs: Vec<String>,
}

/// Assemble a validated record. The color profile comes from the first image;
/// a coder's manual class overrides the computed one.
pub fn ingest_record(
    corpus: &Corpus,
    source_text: &str,
    meta: RecordMeta,
    images: &[PixelBuffer],
    merged: MergedAnnotation,
    color_params: &ColorParams,
) -> Result<CostumeRecord, AnnotationError> {
    if corpus.contains(&meta.id) {
        return Err(AnnotationError::DuplicateId(meta.id));
    }
    let mut surface = merged.surface;
    surface.color_profile = match images.first() {
        Some(image) => {
            let profile = extract_profile(&image.pixels(), color_params)?;
            Some(match merged.manual_color_class {
                Some(class) => profile.with_manual_class(class),
                None => profile,
            })
        }
        None => None,
    };
    let record = CostumeRecord {
        id: meta.id,
        title: meta.title,
        ethnic_group: meta.ethnic_group,
        region: meta.region,
        image_refs: meta.image_refs,
        surface,
        middle: merged.middle,
        inner: merged.inner,
        source_text: source_text.to_string(),
    };
    let validation = validate_record(&record);
    if !validation.is_ok() {
        return Err(AnnotationError::Invalid(validation.violations));
    }
    Ok(record)
}
