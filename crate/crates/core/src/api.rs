//! JSON payloads shared by the HTTP service and the CLI's `--format json`
//! output. Both front ends serialize through [`to_json_body`], so equal
//! inputs produce byte-identical output.
//!
//! | operation        | body                                                    |
//! |------------------|---------------------------------------------------------|
//! | ingest           | `{"id": "doc-000001"}`                                  |
//! | entities         | `[EntityRow, ...]` in first-mention order               |
//! | recommendations  | `[RecommendationRow, ...]` best first                   |
//! | compare          | `{input, candidate, entity_similarity, rows}`           |
//! | bookmarks        | `[{input, candidate, seq}, ...]` in creation order      |
//! | any error        | `{error, code, detail}`                                 |

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enrichment::ResolvedEntity;
use crate::ingestion::{DocId, IngestError};
use crate::recommend::{AlignmentRow, Recommendation, RecommendError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestResponse {
    pub id: DocId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityRow {
    #[serde(flatten)]
    pub entity: ResolvedEntity,
    pub frequency: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecommendationRow {
    #[serde(flatten)]
    pub recommendation: Recommendation,
    pub title: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResponse {
    pub input: DocId,
    pub candidate: DocId,
    pub entity_similarity: f64,
    pub rows: Vec<AlignmentRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookmarkRequest {
    pub input: DocId,
    pub candidate: DocId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub code: u16,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error("{0}")]
    BadRequest(String),
    #[error("payload of {size} bytes exceeds the {limit}-byte limit")]
    PayloadTooLarge { size: usize, limit: usize },
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn kind(&self) -> &'static str {
        match self {
            ApiError::Ingest(e) => match e {
                IngestError::UnsupportedFormat(_) => "UnsupportedFormat",
                IngestError::MalformedDocument(_) => "MalformedDocument",
                IngestError::EmptyDocument => "EmptyDocument",
                IngestError::UnknownDocument(_) => "UnknownDocument",
                IngestError::StorageCorrupt(_) => "StorageCorrupt",
                IngestError::Io(_) => "Io",
            },
            ApiError::Recommend(RecommendError::UnknownDocument(_)) => "UnknownDocument",
            ApiError::Recommend(RecommendError::InvalidWeights(_)) => "InvalidWeights",
            ApiError::BadRequest(_) => "BadRequest",
            ApiError::PayloadTooLarge { .. } => "PayloadTooLarge",
            ApiError::Internal(_) => "Internal",
        }
    }

    /// HTTP status for this error.
    pub fn status(&self) -> u16 {
        match self.kind() {
            "UnsupportedFormat" | "MalformedDocument" | "EmptyDocument" | "BadRequest" => 400,
            "UnknownDocument" => 404,
            "PayloadTooLarge" => 413,
            "InvalidWeights" => 422,
            _ => 500,
        }
    }

    /// True when the caller, not the system, is at fault.
    pub fn is_input_error(&self) -> bool {
        self.status() < 500
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.kind().to_string(),
            code: self.status(),
            detail: self.to_string(),
        }
    }
}

/// Canonical serialization: compact JSON followed by one newline.
pub fn to_json_body<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string(value).expect("payloads serialize");
    out.push('\n');
    out
}
