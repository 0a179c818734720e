//! Closed vocabularies of the three gene layers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SchemaError;

/// Lowercased alphanumerics only, so "Rule of Law", "rule_of_law" and
/// "RuleOfLaw" all compare equal.
pub(crate) fn fold_name(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

macro_rules! vocabulary {
    (
        $(#[$meta:meta])*
        $name:ident, $vocab:literal {
            $( $variant:ident => $display:literal ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $( $variant ),+
        }

        impl $name {
            /// Every value, in declaration order.
            pub const ALL: &'static [$name] = &[ $( $name::$variant ),+ ];

            /// Identifier used on the wire and in documents.
            pub const fn name(self) -> &'static str {
                match self {
                    $( $name::$variant => stringify!($variant) ),+
                }
            }

            /// Human-facing label, also indexed for keyword search.
            pub const fn display_name(self) -> &'static str {
                match self {
                    $( $name::$variant => $display ),+
                }
            }

            pub fn parse(s: &str) -> Result<Self, SchemaError> {
                let folded = fold_name(s);
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| fold_name(v.name()) == folded || fold_name(v.display_name()) == folded)
                    .ok_or_else(|| SchemaError::UnknownValue {
                        vocabulary: $vocab,
                        value: s.to_string(),
                    })
            }

            /// Strict identifier match, used by document validation.
            pub fn from_name(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|v| v.name() == s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = SchemaError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::parse(s)
            }
        }
    };
}

vocabulary! {
    /// Pattern classes of the surface layer.
    PatternClass, "Pattern" {
        Geometric => "Geometric",
        Animal => "Animal",
        Plant => "Plant",
    }
}

vocabulary! {
    /// Perceptual color temperature.
    ColorClass, "Color" {
        Cool => "Cool",
        Warm => "Warm",
        Neutral => "Neutral",
    }
}

vocabulary! {
    /// Typical costume materials. `Other` is the ninth slot and may carry a
    /// free-text label on the owning [`SurfaceGenes`](super::SurfaceGenes).
    MaterialClass, "Material" {
        Cloth => "Cloth",
        Silk => "Silk",
        Brocade => "Brocade",
        Satin => "Satin",
        Velvet => "Velvet",
        Gauze => "Gauze",
        Leather => "Leather",
        Metal => "Metal",
        Other => "Other",
    }
}

vocabulary! {
    /// Structural and functional garment category.
    FormClass, "Form" {
        Top => "Top",
        Pants => "Pants",
        Skirt => "Skirt",
        Shoes => "Shoes",
        Hat => "Hat",
        Accessory => "Accessory",
    }
}

vocabulary! {
    /// Middle-layer cultural context dimensions.
    MiddleDimension, "middle" {
        ReligiousBeliefs => "Religious Beliefs",
        FestiveCeremonies => "Festive Ceremonies",
        SocialStructures => "Social Structures",
        LivelihoodActivities => "Livelihood Activities",
        ArtsEntertainment => "Arts & Entertainment",
        EnvironmentalAdaptation => "Environmental Adaptation",
    }
}

vocabulary! {
    /// Level of an inner-layer value concept.
    InnerLevel, "inner level" {
        State => "Values at the State Level",
        Societal => "Guiding Principles at the Societal Level",
        Individual => "Moral Norms at the Individual Level",
    }
}

vocabulary! {
    /// The twelve inner-layer value concepts.
    InnerConcept, "inner" {
        Prosperity => "Prosperity",
        Democracy => "Democracy",
        Civility => "Civility",
        Harmony => "Harmony",
        Freedom => "Freedom",
        Equality => "Equality",
        Justice => "Justice",
        RuleOfLaw => "Rule of Law",
        CommunityGuardianship => "Community Guardianship",
        Dedication => "Dedication",
        Integrity => "Integrity",
        Friendliness => "Friendliness",
    }
}

/// The four surface-layer tag categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TagCategory {
    Pattern,
    Color,
    Material,
    Form,
}

impl TagCategory {
    pub const ALL: &'static [TagCategory] =
        &[TagCategory::Pattern, TagCategory::Color, TagCategory::Material, TagCategory::Form];

    pub const fn name(self) -> &'static str {
        match self {
            TagCategory::Pattern => "Pattern",
            TagCategory::Color => "Color",
            TagCategory::Material => "Material",
            TagCategory::Form => "Form",
        }
    }

    /// Every tag of this category in taxonomy order.
    pub fn tags(self) -> Vec<GeneTag> {
        match self {
            TagCategory::Pattern => PatternClass::ALL.iter().map(|&v| GeneTag::Pattern(v)).collect(),
            TagCategory::Color => ColorClass::ALL.iter().map(|&v| GeneTag::Color(v)).collect(),
            TagCategory::Material => MaterialClass::ALL.iter().map(|&v| GeneTag::Material(v)).collect(),
            TagCategory::Form => FormClass::ALL.iter().map(|&v| GeneTag::Form(v)).collect(),
        }
    }
}

impl fmt::Display for TagCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TagCategory {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded = fold_name(s);
        TagCategory::ALL
            .iter()
            .copied()
            .find(|c| fold_name(c.name()) == folded)
            .ok_or_else(|| SchemaError::UnknownCategory(s.to_string()))
    }
}

/// A surface-layer (category, value) pair. Ordering is category first, then
/// taxonomy order within the category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneTag {
    Pattern(PatternClass),
    Color(ColorClass),
    Material(MaterialClass),
    Form(FormClass),
}

impl GeneTag {
    pub const fn category(self) -> TagCategory {
        match self {
            GeneTag::Pattern(_) => TagCategory::Pattern,
            GeneTag::Color(_) => TagCategory::Color,
            GeneTag::Material(_) => TagCategory::Material,
            GeneTag::Form(_) => TagCategory::Form,
        }
    }

    pub const fn value_name(self) -> &'static str {
        match self {
            GeneTag::Pattern(v) => v.name(),
            GeneTag::Color(v) => v.name(),
            GeneTag::Material(v) => v.name(),
            GeneTag::Form(v) => v.name(),
        }
    }

    pub const fn display_name(self) -> &'static str {
        match self {
            GeneTag::Pattern(v) => v.display_name(),
            GeneTag::Color(v) => v.display_name(),
            GeneTag::Material(v) => v.display_name(),
            GeneTag::Form(v) => v.display_name(),
        }
    }

    /// Every legal tag, category by category.
    pub fn all() -> Vec<GeneTag> {
        TagCategory::ALL.iter().flat_map(|c| c.tags()).collect()
    }

    pub fn from_parts(category: TagCategory, value: &str) -> Result<Self, SchemaError> {
        Ok(match category {
            TagCategory::Pattern => GeneTag::Pattern(value.parse()?),
            TagCategory::Color => GeneTag::Color(value.parse()?),
            TagCategory::Material => GeneTag::Material(value.parse()?),
            TagCategory::Form => GeneTag::Form(value.parse()?),
        })
    }
}

/// `Category:Value`, e.g. `Form:Hat`.
impl fmt::Display for GeneTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.category(), self.value_name())
    }
}

impl FromStr for GeneTag {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || SchemaError::UnknownTag(s.to_string());
        let (category, value) = s.split_once(':').ok_or_else(unknown)?;
        let category: TagCategory = category.trim().parse().map_err(|_| unknown())?;
        GeneTag::from_parts(category, value.trim()).map_err(|_| unknown())
    }
}

impl Serialize for GeneTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GeneTag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
