use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::enrichment::EntityKey;

use super::{DocId, Document};

/// In-memory corpus statistics: an inverted term index plus per-document
/// term and entity vectors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    postings: BTreeMap<String, BTreeMap<DocId, u32>>,
    entities: BTreeMap<DocId, BTreeMap<EntityKey, u32>>,
    #[serde(skip)]
    terms: BTreeMap<DocId, BTreeMap<String, u32>>,
}

impl CorpusIndex {
    pub fn build<'a, I: IntoIterator<Item = &'a Document>>(documents: I) -> Self {
        let mut index = CorpusIndex::default();
        for doc in documents {
            index.insert(doc);
        }
        index
    }

    /// Add (or replace) one document's vectors.
    pub fn insert(&mut self, doc: &Document) {
        self.insert_vectors(doc.id, doc.term_counts.clone(), doc.entity_vector());
    }

    pub fn insert_vectors(
        &mut self,
        id: DocId,
        terms: BTreeMap<String, u32>,
        entities: BTreeMap<EntityKey, u32>,
    ) {
        self.remove(id);
        for (term, &count) in &terms {
            self.postings.entry(term.clone()).or_default().insert(id, count);
        }
        self.terms.insert(id, terms);
        self.entities.insert(id, entities);
    }

    pub fn remove(&mut self, id: DocId) {
        if let Some(terms) = self.terms.remove(&id) {
            for term in terms.keys() {
                if let Some(list) = self.postings.get_mut(term) {
                    list.remove(&id);
                    if list.is_empty() {
                        self.postings.remove(term);
                    }
                }
            }
        }
        self.entities.remove(&id);
    }

    /// Restore the per-document term vectors after deserialization.
    pub fn rebuild_term_vectors(&mut self) {
        self.terms.clear();
        for id in self.entities.keys() {
            self.terms.insert(*id, BTreeMap::new());
        }
        for (term, list) in &self.postings {
            for (id, &count) in list {
                self.terms.entry(*id).or_default().insert(term.clone(), count);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn contains(&self, id: DocId) -> bool {
        self.entities.contains_key(&id)
    }

    /// Document ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = DocId> + '_ {
        self.entities.keys().copied()
    }

    /// Number of distinct indexed terms.
    pub fn vocabulary_len(&self) -> usize {
        self.postings.len()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, BTreeMap::len)
    }

    pub fn postings(&self, term: &str) -> Option<&BTreeMap<DocId, u32>> {
        self.postings.get(term)
    }

    pub fn term_vector(&self, id: DocId) -> Option<&BTreeMap<String, u32>> {
        self.terms.get(&id)
    }

    pub fn entity_vector(&self, id: DocId) -> Option<&BTreeMap<EntityKey, u32>> {
        self.entities.get(&id)
    }

    /// Differences between `self` and `expected`, one line per item.
    pub fn diff(&self, expected: &CorpusIndex) -> Vec<String> {
        let mut drift = Vec::new();
        for id in self.entities.keys() {
            if !expected.entities.contains_key(id) {
                drift.push(format!("index lists unknown document {id}"));
            }
        }
        for (id, vector) in &expected.entities {
            match self.entities.get(id) {
                None => drift.push(format!("document {id} missing from index")),
                Some(v) if v != vector => {
                    drift.push(format!("entity vector of {id} differs"))
                }
                Some(_) => {}
            }
        }
        let terms = self.postings.keys().chain(expected.postings.keys());
        let mut seen = std::collections::BTreeSet::new();
        for term in terms {
            if seen.insert(term) && self.postings.get(term) != expected.postings.get(term) {
                drift.push(format!("postings for `{term}` differ"));
            }
        }
        drift
    }
}

/// Result of rebuilding the index from stored documents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftReport {
    pub documents: usize,
    pub terms: usize,
    pub drift: Vec<String>,
}

impl DriftReport {
    pub fn is_clean(&self) -> bool {
        self.drift.is_empty()
    }
}
