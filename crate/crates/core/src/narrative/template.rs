//! `{{placeholder}}` prompt templates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Placeholders every story body must use.
pub const REQUIRED_PLACEHOLDERS: &[&str] = &[
    "title",
    "ethnic_group",
    "surface_summary",
    "middle_narrative",
    "inner_concept",
    "inner_connotation",
    "user_note",
];

/// Every placeholder the assembler can resolve.
pub const KNOWN_PLACEHOLDERS: &[&str] = &[
    "title",
    "ethnic_group",
    "region",
    "surface_summary",
    "theme",
    "middle_dimension",
    "middle_narrative",
    "inner_concept",
    "inner_level",
    "inner_expression",
    "inner_connotation",
    "user_note",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {field}: unterminated placeholder at byte {offset}")]
    Unterminated { field: &'static str, offset: usize },
    #[error("template {field}: invalid placeholder name `{name}`")]
    InvalidName { field: &'static str, name: String },
    #[error("template references unknown field `{0}`")]
    UnresolvedPlaceholder(String),
    #[error("story body lacks required placeholders: {}", .0.join(", "))]
    MissingRequired(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Segment<'a> {
    Text(&'a str),
    Field(&'a str),
}

pub(crate) fn parse<'a>(body: &'a str, field: &'static str) -> Result<Vec<Segment<'a>>, TemplateError> {
    let mut segments = Vec::new();
    let mut rest = body;
    let mut offset = 0;
    while let Some(start) = rest.find("{{") {
        if start > 0 {
            segments.push(Segment::Text(&rest[..start]));
        }
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or(TemplateError::Unterminated { field, offset: offset + start })?;
        let name = after[..end].trim();
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') {
            return Err(TemplateError::InvalidName { field, name: name.to_string() });
        }
        segments.push(Segment::Field(name));
        let consumed = start + 2 + end + 2;
        offset += consumed;
        rest = &rest[consumed..];
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest));
    }
    Ok(segments)
}

/// Named pair of story and image prompt bodies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawTemplate")]
pub struct PromptTemplate {
    name: String,
    story_body: String,
    image_body: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    name: String,
    story_body: String,
    image_body: String,
}

impl TryFrom<RawTemplate> for PromptTemplate {
    type Error = TemplateError;

    fn try_from(raw: RawTemplate) -> Result<Self, Self::Error> {
        PromptTemplate::new(raw.name, raw.story_body, raw.image_body)
    }
}

impl PromptTemplate {
    /// Check placeholder syntax, that every name is resolvable, and that the
    /// story body uses every required placeholder.
    pub fn new(
        name: impl Into<String>,
        story_body: impl Into<String>,
        image_body: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let template =
            PromptTemplate { name: name.into(), story_body: story_body.into(), image_body: image_body.into() };
        let story = template.placeholders_of(&template.story_body, "story_body")?;
        let image = template.placeholders_of(&template.image_body, "image_body")?;
        if let Some(unknown) = story.iter().chain(&image).find(|n| !KNOWN_PLACEHOLDERS.contains(&n.as_str())) {
            return Err(TemplateError::UnresolvedPlaceholder(unknown.clone()));
        }
        let missing: Vec<String> =
            REQUIRED_PLACEHOLDERS.iter().filter(|r| !story.contains(**r)).map(|r| r.to_string()).collect();
        if !missing.is_empty() {
            return Err(TemplateError::MissingRequired(missing));
        }
        Ok(template)
    }

    /// Template without resolvability checks, for exercising assembly errors.
    pub fn new_unchecked(
        name: impl Into<String>,
        story_body: impl Into<String>,
        image_body: impl Into<String>,
    ) -> Self {
        PromptTemplate { name: name.into(), story_body: story_body.into(), image_body: image_body.into() }
    }

    fn placeholders_of(&self, body: &str, field: &'static str) -> Result<BTreeSet<String>, TemplateError> {
        Ok(parse(body, field)?
            .into_iter()
            .filter_map(|s| match s {
                Segment::Field(name) => Some(name.to_string()),
                Segment::Text(_) => None,
            })
            .collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn story_body(&self) -> &str {
        &self.story_body
    }

    pub fn image_body(&self) -> &str {
        &self.image_body
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

const DEFAULT_STORY: &str = "\
Write a short, culturally grounded story about the {{ethnic_group}} costume \"{{title}}\".
Surface genes: {{surface_summary}}.
Cultural context, {{middle_dimension}}: {{middle_narrative}}
Core value: {{inner_concept}} ({{inner_level}}). How it shows in costume: {{inner_expression}}
What it means today: {{inner_connotation}}
Reader's note: {{user_note}}
Name the costume, the value \"{{inner_concept}}\" and the {{theme}} setting in the story, and stay faithful to the context above.";

const DEFAULT_IMAGE: &str = "\
A detailed illustration of the {{ethnic_group}} costume \"{{title}}\" ({{surface_summary}}) worn in a {{theme}} scene: {{middle_narrative}}";

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate::new("default", DEFAULT_STORY, DEFAULT_IMAGE).expect("default template is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_segments() {
        let segs = parse("a {{ title }} b {{user_note}}", "story_body").unwrap();
        assert_eq!(
            segs,
            [Segment::Text("a "), Segment::Field("title"), Segment::Text(" b "), Segment::Field("user_note")]
        );
        assert!(matches!(parse("x {{title", "story_body"), Err(TemplateError::Unterminated { offset: 2, .. })));
        assert!(matches!(parse("{{Title}}", "story_body"), Err(TemplateError::InvalidName { .. })));
    }

    #[test]
    fn default_template_is_valid() {
        let t = PromptTemplate::default();
        assert_eq!(t.name(), "default");
        for r in REQUIRED_PLACEHOLDERS {
            assert!(t.story_body().contains(&format!("{{{{{r}}}}}")), "{r}");
        }
    }

    #[test]
    fn rejects_unknown_and_missing() {
        let body = REQUIRED_PLACEHOLDERS.iter().map(|r| format!("{{{{{r}}}}}")).collect::<Vec<_>>().join(" ");
        assert!(PromptTemplate::new("t", &body, "{{title}}").is_ok());
        assert_eq!(
            PromptTemplate::new("t", format!("{body} {{{{weather}}}}"), ""),
            Err(TemplateError::UnresolvedPlaceholder("weather".into()))
        );
        assert_eq!(
            PromptTemplate::new("t", "{{title}}", ""),
            Err(TemplateError::MissingRequired(REQUIRED_PLACEHOLDERS[1..].iter().map(|s| s.to_string()).collect()))
        );
    }

    #[test]
    fn json_documents_are_validated() {
        let err = PromptTemplate::from_json(r#"{"name":"t","story_body":"{{title}}","image_body":""}"#);
        assert!(err.is_err());
        let ok = serde_json::to_string(&PromptTemplate::default()).unwrap();
        assert_eq!(PromptTemplate::from_json(&ok).unwrap(), PromptTemplate::default());
    }
}
