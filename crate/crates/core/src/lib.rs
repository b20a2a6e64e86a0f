//! Chemistry-aware paper recommendation: formula parsing, chemical entity
//! extraction and resolution, corpus storage, and entity/text similarity
//! ranking with a side-by-side entity alignment.

pub mod api;
#[cfg(feature = "io")]
pub mod app;
#[cfg(feature = "io")]
pub mod config;
pub mod enrichment;
pub mod extraction;
pub mod formula;
pub mod ingestion;
pub mod periodic;
pub mod recommend;

pub use enrichment::{EntityKey, Lexicon, ResolvedEntity, Resolver};
pub use extraction::{EntityOccurrence, Mention, MentionKind};
pub use formula::{canonical_hill, molecular_weight, parse_formula, Composition, FormulaError};
pub use ingestion::{DocId, Document, DocumentFormat};
pub use periodic::{AtomicMassTable, ElementSymbol};
pub use recommend::{AlignmentRow, Recommendation, SimilarityWeights};
