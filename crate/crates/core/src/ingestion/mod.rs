//! Document ingestion: payload parsing, entity extraction, term counting and
//! the corpus index.

mod index;
pub mod terms;
mod xml;

#[cfg(feature = "io")]
pub mod store;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enrichment::Resolver;
use crate::extraction::{aggregate_occurrences, extract_mentions, EntityOccurrence};

pub use index::{CorpusIndex, DriftReport};
pub use xml::{parse_structured, TagMap, LOOSE_TEXT_LABEL};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unsupported format `{0}` (expected xml or plaintext)")]
    UnsupportedFormat(String),
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("empty document")]
    EmptyDocument,
    #[error("unknown document {0}")]
    UnknownDocument(DocId),
    #[error("corpus store is corrupt: {0}")]
    StorageCorrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentFormat {
    Xml,
    Plaintext,
}

impl FromStr for DocumentFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xml" => Ok(DocumentFormat::Xml),
            "plaintext" | "text" | "txt" => Ok(DocumentFormat::Plaintext),
            other => Err(IngestError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Corpus-unique document identifier, rendered as `doc-000042`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId(pub u64);

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "doc-{:06}", self.0)
    }
}

impl FromStr for DocId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("doc-")
            .and_then(|n| n.parse().ok())
            .map(DocId)
            .ok_or_else(|| format!("invalid document id `{s}`"))
    }
}

impl Serialize for DocId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DocId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub label: String,
    pub text: String,
}

/// Everything derived from a payload before an id is assigned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedDocument {
    pub title: String,
    pub sections: Vec<Section>,
    pub entities: Vec<EntityOccurrence>,
    pub term_counts: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: DocId,
    pub title: String,
    pub sections: Vec<Section>,
    pub entities: Vec<EntityOccurrence>,
    pub term_counts: BTreeMap<String, u32>,
}

impl Document {
    pub fn new(id: DocId, parsed: ParsedDocument) -> Self {
        Document {
            id,
            title: parsed.title,
            sections: parsed.sections,
            entities: parsed.entities,
            term_counts: parsed.term_counts,
        }
    }

    /// Entity frequencies keyed by entity key.
    pub fn entity_vector(&self) -> BTreeMap<crate::enrichment::EntityKey, u32> {
        self.entities
            .iter()
            .map(|o| (o.key.clone(), o.frequency))
            .collect()
    }
}

fn plaintext_sections(text: &str) -> Vec<Section> {
    let mut sections = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.trim().is_empty() {
                sections.push(std::mem::take(&mut current));
            }
            current.clear();
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    if !current.trim().is_empty() {
        sections.push(current);
    }
    sections
        .into_iter()
        .map(|text| Section {
            label: "paragraph".to_string(),
            text: xml::normalize_whitespace(&text),
        })
        .collect()
}

/// Extract entities and term counts from already-split sections.
pub fn analyze_sections(title: String, sections: Vec<Section>, resolver: &Resolver) -> ParsedDocument {
    let texts: Vec<&str> = sections.iter().map(|s| s.text.as_str()).collect();
    let mentions = extract_mentions(&texts, resolver.lexicon());
    let entities = aggregate_occurrences(mentions, |m| resolver.resolve_mention(m));
    let term_counts = terms::term_counts(&texts);
    ParsedDocument {
        title,
        sections,
        entities,
        term_counts,
    }
}

/// Parse a payload and derive its entities and term counts. An explicit
/// `title` overrides one found in the payload.
pub fn analyze_payload(
    payload: &[u8],
    format: DocumentFormat,
    title: Option<&str>,
    tags: &TagMap,
    resolver: &Resolver,
) -> Result<ParsedDocument, IngestError> {
    if payload.is_empty() {
        return Err(IngestError::EmptyDocument);
    }
    let (parsed_title, sections) = match format {
        DocumentFormat::Xml => {
            let (title, sections) = parse_structured(payload, tags)?;
            let sections = sections
                .into_iter()
                .map(|(label, text)| Section { label, text })
                .collect();
            (title, sections)
        }
        DocumentFormat::Plaintext => {
            let text = std::str::from_utf8(payload)
                .map_err(|e| IngestError::MalformedDocument(format!("invalid UTF-8: {e}")))?;
            (String::new(), plaintext_sections(text))
        }
    };
    let title = title
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .unwrap_or(parsed_title);
    if sections.is_empty() {
        return Err(IngestError::EmptyDocument);
    }
    Ok(analyze_sections(title, sections, resolver))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enrichment::{EntityKey, Lexicon};
    use std::sync::Arc;

    fn resolver() -> Resolver {
        Resolver::offline(Arc::new(Lexicon::bundled()))
    }

    #[test]
    fn plaintext_figure_compounds() {
        let doc = analyze_payload(
            b"Sodium carbonate and water.",
            DocumentFormat::Plaintext,
            None,
            &TagMap::default(),
            &resolver(),
        )
        .unwrap();
        assert_eq!(doc.sections.len(), 1);
        let keys: Vec<&EntityKey> = doc.entities.iter().map(|o| &o.key).collect();
        assert_eq!(keys, vec![&EntityKey::Cid(10340), &EntityKey::Cid(962)]);
    }

    #[test]
    fn xml_with_three_sections() {
        let xml = b"<article><title>Salts</title><abstract>Epsom salt.</abstract>\
            <sec><p>Na2CO3 in water.</p><p>Dry with MgSO4.</p></sec></article>";
        let doc = analyze_payload(xml, DocumentFormat::Xml, None, &TagMap::default(), &resolver())
            .unwrap();
        assert_eq!(doc.title, "Salts");
        assert_eq!(doc.sections.len(), 3);
        assert_eq!(doc.entities.len(), 3);
        let overridden = analyze_payload(
            xml,
            DocumentFormat::Xml,
            Some("Other"),
            &TagMap::default(),
            &resolver(),
        )
        .unwrap();
        assert_eq!(overridden.title, "Other");
    }

    #[test]
    fn plaintext_splits_on_blank_lines() {
        let sections = plaintext_sections("one\ntwo\n\n\nthree  four\n  \n");
        let texts: Vec<&str> = sections.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, vec!["one two", "three four"]);
    }

    #[test]
    fn error_cases() {
        let r = resolver();
        let tags = TagMap::default();
        assert!(matches!(
            analyze_payload(b"", DocumentFormat::Plaintext, None, &tags, &r),
            Err(IngestError::EmptyDocument)
        ));
        assert!(matches!(
            analyze_payload(b"  \n\n ", DocumentFormat::Plaintext, None, &tags, &r),
            Err(IngestError::EmptyDocument)
        ));
        assert!(matches!(
            analyze_payload(b"<a><b></a>", DocumentFormat::Xml, None, &tags, &r),
            Err(IngestError::MalformedDocument(_))
        ));
        assert!(matches!(
            "pdf".parse::<DocumentFormat>(),
            Err(IngestError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn doc_ids_round_trip_and_order_numerically() {
        let id: DocId = "doc-000042".parse().unwrap();
        assert_eq!(id, DocId(42));
        assert_eq!(id.to_string(), "doc-000042");
        assert!(DocId(9) < DocId(10));
        assert!("42".parse::<DocId>().is_err());
        assert_eq!(DocId(1234567).to_string().parse::<DocId>().unwrap(), DocId(1234567));
    }
}
