//! Document-level validation.
//!
//! Validation walks the JSON form of a record rather than the typed struct so
//! that out-of-vocabulary values, duplicates and unknown fields are reported
//! with their paths instead of failing deserialization at the first problem.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::vocab::{ColorClass, FormClass, InnerConcept, MaterialClass, MiddleDimension, PatternClass};
use super::CostumeRecord;
use crate::color::{self, ColorCluster};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

/// Outcome of validation: ok iff `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Validation {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl Validation {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Validation { ok: violations.is_empty(), violations }
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }
}

const RECORD_KEYS: &[&str] =
    &["id", "title", "ethnic_group", "region", "image_refs", "surface", "middle", "inner", "source_text"];
const DRAFT_KEYS: &[&str] = &["coder_id", "costume_id", "surface", "middle", "inner", "manual_color_class"];
const SURFACE_KEYS: &[&str] = &["patterns", "materials", "other_material_label", "forms", "color_profile"];
const PROFILE_KEYS: &[&str] = &["clusters", "dominant_hex", "perceptual_class", "class_source"];

/// Validate a typed record.
pub fn validate_record(record: &CostumeRecord) -> Validation {
    match serde_json::to_value(record) {
        Ok(value) => validate_value(&value),
        Err(e) => Validation::from_violations(vec![Violation { path: String::new(), message: e.to_string() }]),
    }
}

/// Validate the JSON form of a costume record.
pub fn validate_value(value: &Value) -> Validation {
    let mut c = Checker::default();
    if let Some(map) = c.object(value, "", RECORD_KEYS) {
        c.required_string(map, "id", "id", true);
        c.required_string(map, "title", "title", false);
        c.required_string(map, "ethnic_group", "ethnic_group", false);
        c.optional_string(map, "region", "region");
        if let Some(refs) = c.optional_array(map, "image_refs", "image_refs") {
            for (i, r) in refs.iter().enumerate() {
                if !r.is_string() {
                    c.push(format!("image_refs[{i}]"), "expected a string path");
                }
            }
        }
        c.optional_string(map, "source_text", "source_text");
        c.layers(map, true);
    }
    Validation::from_violations(c.violations)
}

/// Validate the JSON form of a coder's annotation draft.
pub fn validate_draft_value(value: &Value) -> Validation {
    let mut c = Checker::default();
    if let Some(map) = c.object(value, "", DRAFT_KEYS) {
        c.required_string(map, "coder_id", "coder_id", true);
        c.required_string(map, "costume_id", "costume_id", true);
        if let Some(v) = map.get("manual_color_class").filter(|v| !v.is_null()) {
            c.vocab_value::<ColorClass>(v, "manual_color_class", ColorClass::from_name);
        }
        c.layers(map, false);
    }
    Validation::from_violations(c.violations)
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Checker {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), message: message.into() });
    }

    fn object<'v>(&mut self, value: &'v Value, path: &str, known: &[&str]) -> Option<&'v Map<String, Value>> {
        let Some(map) = value.as_object() else {
            self.push(path, "expected an object");
            return None;
        };
        for key in map.keys() {
            if !known.contains(&key.as_str()) {
                self.push(join(path, key), "unknown field");
            }
        }
        Some(map)
    }

    fn required_string(&mut self, map: &Map<String, Value>, key: &str, path: &str, non_empty: bool) {
        match map.get(key) {
            None => self.push(path, "missing field"),
            Some(Value::String(s)) if non_empty && s.trim().is_empty() => self.push(path, "must be non-empty"),
            Some(Value::String(_)) => {}
            Some(_) => self.push(path, "expected a string"),
        }
    }

    fn optional_string(&mut self, map: &Map<String, Value>, key: &str, path: &str) {
        match map.get(key) {
            None | Some(Value::Null) | Some(Value::String(_)) => {}
            Some(_) => self.push(path, "expected a string"),
        }
    }

    fn optional_array<'v>(&mut self, map: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Vec<Value>> {
        match map.get(key) {
            None | Some(Value::Null) => None,
            Some(Value::Array(items)) => Some(items),
            Some(_) => {
                self.push(path, "expected an array");
                None
            }
        }
    }

    fn vocab_value<T>(&mut self, value: &Value, path: &str, parse: fn(&str) -> Option<T>) -> Option<T> {
        match value.as_str() {
            Some(s) => {
                let parsed = parse(s);
                if parsed.is_none() {
                    self.push(path, format!("unknown value `{s}`"));
                }
                parsed
            }
            None => {
                self.push(path, "expected a vocabulary name");
                None
            }
        }
    }

    /// A list of vocabulary names forming a set.
    fn vocab_set<T>(&mut self, items: &[Value], path: &str, parse: fn(&str) -> Option<T>) -> Vec<T>
    where
        T: Eq + std::hash::Hash + Copy,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let item_path = format!("{path}[{i}]");
            if let Some(v) = self.vocab_value(item, &item_path, parse) {
                if !seen.insert(v) {
                    self.push(item_path, "duplicate value");
                } else {
                    out.push(v);
                }
            }
        }
        out
    }

    fn layers(&mut self, map: &Map<String, Value>, is_record: bool) {
        match map.get("surface") {
            Some(surface) => self.surface(surface, is_record),
            None => self.push("surface", "missing field"),
        }
        if let Some(middle) = self.optional_array(map, "middle", "middle") {
            self.middle(middle);
        }
        if let Some(inner) = self.optional_array(map, "inner", "inner") {
            self.vocab_set(inner, "inner", InnerConcept::from_name);
        }
    }

    fn surface(&mut self, value: &Value, is_record: bool) {
        let Some(map) = self.object(value, "surface", SURFACE_KEYS) else {
            return;
        };

        if let Some(patterns) = self.optional_array(map, "patterns", "surface.patterns") {
            let mut seen = HashSet::new();
            for (i, entry) in patterns.iter().enumerate() {
                let path = format!("surface.patterns[{i}]");
                let Some(entry) = self.object(entry, &path, &["class", "motifs"]) else {
                    continue;
                };
                match entry.get("class") {
                    Some(class) => {
                        let class_path = format!("{path}.class");
                        if let Some(class) = self.vocab_value(class, &class_path, PatternClass::from_name) {
                            if !seen.insert(class) {
                                self.push(class_path, "duplicate value");
                            }
                        }
                    }
                    None => self.push(format!("{path}.class"), "missing field"),
                }
                if let Some(motifs) = self.optional_array(entry, "motifs", &format!("{path}.motifs")) {
                    for (j, m) in motifs.iter().enumerate() {
                        match m.as_str() {
                            Some(s) if !s.trim().is_empty() => {}
                            _ => self.push(format!("{path}.motifs[{j}]"), "expected a non-empty label"),
                        }
                    }
                }
            }
        }

        let materials = match self.optional_array(map, "materials", "surface.materials") {
            Some(items) => self.vocab_set(items, "surface.materials", MaterialClass::from_name),
            None => Vec::new(),
        };
        match map.get("other_material_label") {
            None | Some(Value::Null) => {}
            Some(Value::String(s)) => {
                if s.trim().is_empty() {
                    self.push("surface.other_material_label", "must be non-empty");
                } else if !materials.contains(&MaterialClass::Other) {
                    self.push("surface.other_material_label", "label requires the Other material");
                }
            }
            Some(_) => self.push("surface.other_material_label", "expected a string"),
        }

        match map.get("forms") {
            Some(Value::Array(items)) => {
                if items.is_empty() {
                    self.push("surface.forms", "at least one form is required");
                }
                self.vocab_set(items, "surface.forms", FormClass::from_name);
            }
            Some(_) => self.push("surface.forms", "expected an array"),
            None => self.push("surface.forms", "missing field"),
        }

        match map.get("color_profile") {
            None | Some(Value::Null) => {}
            Some(_) if !is_record => self.push("surface.color_profile", "drafts carry no color profile"),
            Some(profile) => self.color_profile(profile),
        }
    }

    fn color_profile(&mut self, value: &Value) {
        const PATH: &str = "surface.color_profile";
        let Some(map) = self.object(value, PATH, PROFILE_KEYS) else {
            return;
        };

        let mut clusters = Vec::new();
        let mut well_formed = true;
        match map.get("clusters") {
            Some(Value::Array(items)) if !items.is_empty() => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("{PATH}.clusters[{i}]");
                    match serde_json::from_value::<ColorCluster>(item.clone()) {
                        Ok(cluster) => {
                            if cluster.centroid.iter().any(|ch| !(0.0..=255.0).contains(ch)) {
                                self.push(format!("{path}.centroid"), "channel outside [0, 255]");
                                well_formed = false;
                            }
                            if !(0.0..=1.0).contains(&cluster.proportion) {
                                self.push(format!("{path}.proportion"), "proportion outside [0, 1]");
                                well_formed = false;
                            }
                            clusters.push(cluster);
                        }
                        Err(e) => {
                            self.push(path, e.to_string());
                            well_formed = false;
                        }
                    }
                }
            }
            Some(Value::Array(_)) => {
                self.push(format!("{PATH}.clusters"), "at least one cluster is required");
                well_formed = false;
            }
            _ => {
                self.push(format!("{PATH}.clusters"), "expected an array of clusters");
                well_formed = false;
            }
        }

        let class = match map.get("perceptual_class") {
            Some(v) => self.vocab_value(v, &format!("{PATH}.perceptual_class"), ColorClass::from_name),
            None => {
                self.push(format!("{PATH}.perceptual_class"), "missing field");
                None
            }
        };
        let manual = match map.get("class_source") {
            None | Some(Value::Null) => false,
            Some(Value::String(s)) if s == "computed" => false,
            Some(Value::String(s)) if s == "manual" => true,
            Some(_) => {
                self.push(format!("{PATH}.class_source"), "expected `computed` or `manual`");
                false
            }
        };
        let hex = match map.get("dominant_hex") {
            Some(Value::String(s)) if color::is_hex_code(s) => Some(s.as_str()),
            Some(_) => {
                self.push(format!("{PATH}.dominant_hex"), "expected #RRGGBB uppercase");
                None
            }
            None => {
                self.push(format!("{PATH}.dominant_hex"), "missing field");
                None
            }
        };

        if !well_formed {
            return;
        }
        let total: f64 = clusters.iter().map(|c| c.proportion).sum();
        if (total - 1.0).abs() > 1e-9 {
            self.push(format!("{PATH}.clusters"), format!("proportions sum to {total}, expected 1"));
        }
        let Ok(dominant) = color::dominant_cluster(&clusters) else {
            return;
        };
        if let (Some(hex), Ok(expected)) = (hex, color::rgb_to_hex(dominant.centroid)) {
            if hex != expected {
                self.push(format!("{PATH}.dominant_hex"), format!("expected {expected} from the dominant cluster"));
            }
        }
        if let (Some(class), false) = (class, manual) {
            if let Ok(expected) = color::classify_perceptual(dominant.centroid) {
                if class != expected {
                    self.push(
                        format!("{PATH}.perceptual_class"),
                        format!("computed class is {expected} for the dominant centroid"),
                    );
                }
            }
        }
    }

    fn middle(&mut self, items: &[Value]) {
        let mut seen = HashSet::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("middle[{i}]");
            let Some(map) = self.object(item, &path, &["dimension", "narrative"]) else {
                continue;
            };
            match map.get("dimension") {
                Some(v) => {
                    let dim_path = format!("{path}.dimension");
                    if let Some(dim) = self.vocab_value(v, &dim_path, MiddleDimension::from_name) {
                        if !seen.insert(dim) {
                            self.push(dim_path, "duplicate dimension");
                        }
                    }
                }
                None => self.push(format!("{path}.dimension"), "missing field"),
            }
            self.required_string(map, "narrative", &format!("{path}.narrative"), true);
        }
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    fn fixture() -> Value {
        json!({
            "id": "GA-0001",
            "title": "Embroidered festival jacket",
            "ethnic_group": "Miao",
            "region": "Guizhou",
            "image_refs": ["images/ga-0001.png"],
            "surface": {
                "patterns": [{"class": "Animal", "motifs": ["butterfly"]}, {"class": "Geometric"}],
                "materials": ["Silk", "Metal"],
                "forms": ["Top"],
                "color_profile": {
                    "clusters": [
                        {"centroid": [200.0, 30.0, 30.0], "proportion": 0.75},
                        {"centroid": [20.0, 20.0, 140.0], "proportion": 0.25}
                    ],
                    "dominant_hex": "#C81E1E",
                    "perceptual_class": "Warm"
                }
            },
            "middle": [
                {"dimension": "FestiveCeremonies", "narrative": "Worn at the Sisters' Meal festival."}
            ],
            "inner": ["Harmony", "Prosperity"],
            "source_text": "A jacket with butterfly embroidery."
        })
    }

    fn paths(v: &Validation) -> Vec<&str> {
        v.violations.iter().map(|v| v.path.as_str()).collect()
    }

    #[test]
    fn fixture_is_valid() {
        let v = validate_value(&fixture());
        assert!(v.is_ok(), "{:?}", v.violations);
    }

    #[test]
    fn typed_record_round_trip_is_valid() {
        let record: CostumeRecord = serde_json::from_value(fixture()).unwrap();
        assert!(validate_record(&record).is_ok());
    }

    #[test]
    fn unknown_inner_concept_reported_at_index() {
        let mut doc = fixture();
        doc["inner"] = json!(["Bravery"]);
        let v = validate_value(&doc);
        assert_eq!(paths(&v), ["inner[0]"]);
        assert!(v.violations[0].message.contains("Bravery"));
    }

    #[test]
    fn duplicate_middle_dimension_reported() {
        let mut doc = fixture();
        doc["middle"] = json!([
            {"dimension": "FestiveCeremonies", "narrative": "One."},
            {"dimension": "FestiveCeremonies", "narrative": "Two."}
        ]);
        let v = validate_value(&doc);
        assert_eq!(paths(&v), ["middle[1].dimension"]);
        assert_eq!(v.violations[0].message, "duplicate dimension");
    }

    #[test]
    fn every_violation_is_reported() {
        let mut doc = fixture();
        doc["id"] = json!("");
        doc["surface"]["forms"] = json!([]);
        doc["surface"]["materials"] = json!(["Silk", "Silk", "Jade"]);
        doc["extra"] = json!(1);
        let v = validate_value(&doc);
        let mut p = paths(&v);
        p.sort();
        assert_eq!(p, ["extra", "id", "surface.forms", "surface.materials[1]", "surface.materials[2]"]);
    }

    #[test]
    fn color_profile_invariants() {
        let mut doc = fixture();
        doc["surface"]["color_profile"]["dominant_hex"] = json!("#000000");
        doc["surface"]["color_profile"]["perceptual_class"] = json!("Cool");
        let v = validate_value(&doc);
        assert_eq!(paths(&v), ["surface.color_profile.dominant_hex", "surface.color_profile.perceptual_class"]);

        // A manual class may disagree with the computed rule.
        let mut doc = fixture();
        doc["surface"]["color_profile"]["perceptual_class"] = json!("Neutral");
        doc["surface"]["color_profile"]["class_source"] = json!("manual");
        assert!(validate_value(&doc).is_ok());

        let mut doc = fixture();
        doc["surface"]["color_profile"]["clusters"][1]["proportion"] = json!(0.2);
        assert_eq!(paths(&validate_value(&doc)), ["surface.color_profile.clusters"]);
    }

    #[test]
    fn other_label_requires_other_material() {
        let mut doc = fixture();
        doc["surface"]["other_material_label"] = json!("bamboo fibre");
        assert_eq!(paths(&validate_value(&doc)), ["surface.other_material_label"]);
        doc["surface"]["materials"] = json!(["Silk", "Other"]);
        assert!(validate_value(&doc).is_ok());
    }

    #[test]
    fn validation_is_pure() {
        let mut doc = fixture();
        doc["inner"] = json!(["Bravery", "Harmony", "Harmony"]);
        let before = doc.clone();
        let a = validate_value(&doc);
        let b = validate_value(&doc);
        assert_eq!(a, b);
        assert_eq!(doc, before);
    }

    #[test]
    fn draft_rejects_color_profile() {
        let draft = json!({
            "coder_id": "c1",
            "costume_id": "GA-0001",
            "surface": fixture()["surface"].clone(),
            "middle": [],
            "inner": []
        });
        assert_eq!(paths(&validate_draft_value(&draft)), ["surface.color_profile"]);
    }
}
