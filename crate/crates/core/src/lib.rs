//! Cultural-gene collection platform for ethnic costume records.
//!
//! Records carry a three-layer gene model (surface, middle, inner). The crate
//! covers ingestion with double-coder reconciliation, dominant-color
//! extraction, a gene-first exploration index, scaffolded narrative prompt
//! assembly, a JSON-lines store, and an HTTP service.

pub mod annotation;
pub mod api;
pub mod color;
pub mod explore;
pub mod narrative;
pub mod schema;
pub mod store;
pub mod synth;
