//! Seed data for the inner-layer value concepts.

use serde::Serialize;

use super::vocab::{InnerConcept, InnerLevel};
use super::SchemaError;

/// One row of the inner-layer interpretation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConceptEntry {
    pub concept: InnerConcept,
    pub level: InnerLevel,
    pub expression_example: &'static str,
    pub connotation: &'static str,
}

pub static CONCEPT_TABLE: [ConceptEntry; 12] = [
    ConceptEntry {
        concept: InnerConcept::Prosperity,
        level: InnerLevel::State,
        expression_example: "The recurring use of patterns symbolizing fertility and abundance (e.g., pomegranates, fish, wheat ears), and the use of splendid materials in festive and wedding attire.",
        connotation: "Materializes the collective aspiration for life's continuity, abundant resources, and well-being. This universal pursuit inspires innovation in contemporary cultural industries.",
    },
    ConceptEntry {
        concept: InnerConcept::Democracy,
        level: InnerLevel::State,
        expression_example: "Certain ceremonial garments worn by elders or community leaders may symbolize a tradition of collective deliberation and respect for members' rights.",
        connotation: "Reflects the inherent wisdom in community governance and social harmony. This provides insights into diverse forms of social organization and inspires modern approaches to participatory consensus-building.",
    },
    ConceptEntry {
        concept: InnerConcept::Civility,
        level: InnerLevel::State,
        expression_example: "Exquisite craftsmanship, complex narrative patterns, and strict dress codes for specific rituals all demonstrate a high regard for wisdom, skill, and behavioral propriety.",
        connotation: "Highlights the universal human respect for knowledge, skill, and decorum. This inspires a greater appreciation for the transmission of traditional crafts and mutual respect in cross-cultural communication.",
    },
    ConceptEntry {
        concept: InnerConcept::Harmony,
        level: InnerLevel::State,
        expression_example: "The extensive use of natural materials, colors, and motifs (flora and fauna) embodies the philosophy of \"harmony between heaven and humanity\" and a reverence for nature.",
        connotation: "Emphasizes the valuable ecological wisdom inherent in many traditional cultures. In an era of global environmental challenges, this concept offers profound inspiration for sustainable design.",
    },
    ConceptEntry {
        concept: InnerConcept::Freedom,
        level: InnerLevel::Societal,
        expression_example: "The structure of nomadic attire, often designed for ease of movement, reflects an adaptation to a migratory lifestyle and a yearning for physical and spiritual freedom.",
        connotation: "Reflects the human desire for vitality, mobility, and liberation of the spirit. This spirit encourages the exploration of the unknown and continues to inspire artistic and cultural expression.",
    },
    ConceptEntry {
        concept: InnerConcept::Equality,
        level: InnerLevel::Societal,
        expression_example: "Symbolic elements shared across different genders or social classes in ceremonial attire; patterns narrating stories of resistance against oppression.",
        connotation: "Expresses the pursuit of fairness and the inherent value of individuals within the community. These ideas contribute to the development of more inclusive societies today.",
    },
    ConceptEntry {
        concept: InnerConcept::Justice,
        level: InnerLevel::Societal,
        expression_example: "The solemn and symmetrical design of garments worn by law-keepers or ritual hosts may symbolize the authority and responsibility to uphold community norms and dispense fairness.",
        connotation: "Embodies the universal human need to establish and maintain a just order. Studying traditional norms helps us understand the formation of justice concepts in diverse cultural contexts.",
    },
    ConceptEntry {
        concept: InnerConcept::RuleOfLaw,
        level: InnerLevel::Societal,
        expression_example: "The specific rules governing who wears what on which occasion is itself a form of social contract, reflecting a shared respect for communal order and established customs.",
        connotation: "Emphasizes the importance of abiding by agreements and respecting rules in social life. This consciousness is a cornerstone of social stability and cultural transmission.",
    },
    ConceptEntry {
        concept: InnerConcept::CommunityGuardianship,
        level: InnerLevel::Individual,
        expression_example: "Totemic patterns symbolizing a specific region or ethnic group; iconic garments that evoke collective emotion and are worn during significant community events.",
        connotation: "Reflects a deep emotional bond and sense of responsibility towards one's homeland and community. This identity is the foundation of cultural diversity and a spiritual tie that unifies a community.",
    },
    ConceptEntry {
        concept: InnerConcept::Dedication,
        level: InnerLevel::Individual,
        expression_example: "The meticulous, time-consuming, and highly skilled craftsmanship involved in making a garment is itself a testament to the artisan's dedication, patience, and creative spirit.",
        connotation: "Showcases the universal virtue of creating value through diligent work and skill. This \"spirit of craftsmanship\" is a vital driving force for social and cultural development.",
    },
    ConceptEntry {
        concept: InnerConcept::Integrity,
        level: InnerLevel::Individual,
        expression_example: "The simple, unadorned style of certain garments may symbolize an honest and upright character; the formality of attire worn for oaths or important agreements implies a high regard for trustworthiness.",
        connotation: "As the foundation of interpersonal relationships and social trust, integrity is a crucial virtue shared across cultures, especially vital for building harmonious communities in our complex modern world.",
    },
    ConceptEntry {
        concept: InnerConcept::Friendliness,
        level: InnerLevel::Individual,
        expression_example: "The vibrant colors and welcoming motifs (e.g., blooming flowers) of festive or ceremonial attire often convey signals of hospitality and inclusiveness.",
        connotation: "Embodies the universal human desire to establish friendly relations and foster emotional communication. This quality is essential for promoting cross-cultural understanding and cooperation.",
    },
];

impl InnerConcept {
    pub fn entry(self) -> &'static ConceptEntry {
        // CONCEPT_TABLE is laid out in declaration order.
        &CONCEPT_TABLE[self as usize]
    }

    pub fn level(self) -> InnerLevel {
        self.entry().level
    }

    pub fn connotation(self) -> &'static str {
        self.entry().connotation
    }

    pub fn expression_example(self) -> &'static str {
        self.entry().expression_example
    }
}

/// Level of a concept given by name. Accepts the identifier or the display
/// name in any case.
pub fn concept_level(name: &str) -> Result<InnerLevel, SchemaError> {
    let concept: InnerConcept = name.parse().map_err(|_| SchemaError::UnknownConcept(name.to_string()))?;
    Ok(concept.level())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_in_declaration_order() {
        for (i, entry) in CONCEPT_TABLE.iter().enumerate() {
            assert_eq!(entry.concept, InnerConcept::ALL[i]);
            assert!(!entry.expression_example.is_empty());
            assert!(!entry.connotation.is_empty());
        }
    }

    #[test]
    fn levels_match_table_rows() {
        assert_eq!(concept_level("Harmony").unwrap(), InnerLevel::State);
        assert_eq!(concept_level("RuleOfLaw").unwrap(), InnerLevel::Societal);
        assert_eq!(concept_level("Dedication").unwrap(), InnerLevel::Individual);
        assert_eq!(concept_level("Prosperity").unwrap(), InnerLevel::State);
        assert_eq!(concept_level("Freedom").unwrap(), InnerLevel::Societal);
        assert_eq!(concept_level("Integrity").unwrap(), InnerLevel::Individual);
        assert!(matches!(concept_level("Bravery"), Err(SchemaError::UnknownConcept(_))));
    }

    #[test]
    fn four_concepts_per_level() {
        for level in InnerLevel::ALL {
            let n = InnerConcept::ALL.iter().filter(|c| c.level() == *level).count();
            assert_eq!(n, 4, "{level}");
        }
    }

    #[test]
    fn harmony_expression_carries_heaven_and_humanity() {
        assert!(InnerConcept::Harmony.expression_example().contains("harmony between heaven and humanity"));
    }
}
