//! Candidate scoring (entity cosine blended with TF-IDF text cosine), top-k
//! ranking and the side-by-side entity alignment.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enrichment::{EntityKey, ResolvedEntity};
use crate::ingestion::{CorpusIndex, DocId, Document};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecommendError {
    #[error("unknown document {0}")]
    UnknownDocument(DocId),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

/// Blend coefficients, normalized so that `entity + text == 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    entity: f64,
    text: f64,
}

impl SimilarityWeights {
    /// Rescale non-negative weights to sum to one. Negative, non-finite or
    /// all-zero inputs are rejected.
    pub fn new(entity: f64, text: f64) -> Result<Self, RecommendError> {
        if !entity.is_finite() || !text.is_finite() {
            return Err(RecommendError::InvalidWeights("weights must be finite".into()));
        }
        if entity < 0.0 || text < 0.0 {
            return Err(RecommendError::InvalidWeights(
                "weights must be non-negative".into(),
            ));
        }
        let sum = entity + text;
        if sum <= 0.0 {
            return Err(RecommendError::InvalidWeights(
                "at least one weight must be positive".into(),
            ));
        }
        Ok(SimilarityWeights {
            entity: entity / sum,
            text: text / sum,
        })
    }

    pub fn entity(&self) -> f64 {
        self.entity
    }

    pub fn text(&self) -> f64 {
        self.text
    }

    pub fn blend(&self, entity_component: f64, text_component: f64) -> f64 {
        self.entity * entity_component + self.text * text_component
    }
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        SimilarityWeights {
            entity: 0.5,
            text: 0.5,
        }
    }
}

/// Cosine of two sparse non-negative vectors, clamped to [0, 1]. Zero when
/// either vector is empty or all-zero.
pub fn cosine<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let norm = |v: &BTreeMap<K, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum();
    let c = dot / (na * nb);
    // an empty f64 sum is -0.0; keep zero positive so it serializes as 0.0
    if c > 0.0 {
        c.min(1.0)
    } else {
        0.0
    }
}

/// Cosine over entity frequency vectors; both-empty yields 0.
pub fn entity_similarity(a: &BTreeMap<EntityKey, u32>, b: &BTreeMap<EntityKey, u32>) -> f64 {
    let to_f = |v: &BTreeMap<EntityKey, u32>| -> BTreeMap<EntityKey, f64> {
        v.iter().map(|(k, &n)| (k.clone(), n as f64)).collect()
    };
    cosine(&to_f(a), &to_f(b))
}

/// Document-frequency statistics for TF-IDF weighting.
pub trait CorpusStats {
    fn document_count(&self) -> usize;
    fn document_frequency(&self, term: &str) -> usize;
}

impl CorpusStats for CorpusIndex {
    fn document_count(&self) -> usize {
        self.len()
    }

    fn document_frequency(&self, term: &str) -> usize {
        CorpusIndex::document_frequency(self, term)
    }
}

/// Smoothed inverse document frequency: `ln((N + 1) / (df + 1)) + 1`.
pub fn idf(document_count: usize, document_frequency: usize) -> f64 {
    ((document_count as f64 + 1.0) / (document_frequency as f64 + 1.0)).ln() + 1.0
}

pub fn tfidf_vector(terms: &BTreeMap<String, u32>, stats: &dyn CorpusStats) -> BTreeMap<String, f64> {
    let n = stats.document_count();
    terms
        .iter()
        .map(|(t, &count)| (t.clone(), count as f64 * idf(n, stats.document_frequency(t))))
        .collect()
}

/// TF-IDF cosine of two term-count vectors (raw counts as tf).
pub fn text_similarity(
    a: &BTreeMap<String, u32>,
    b: &BTreeMap<String, u32>,
    stats: &dyn CorpusStats,
) -> f64 {
    cosine(&tfidf_vector(a, stats), &tfidf_vector(b, stats))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub candidate: DocId,
    pub score: f64,
    pub entity_component: f64,
    pub text_component: f64,
}

/// Scores are rounded to this many decimal places, so candidates whose
/// scores are mathematically equal but differ in the last ulp still tie and
/// fall through to the id tie-break.
pub const SCORE_DECIMALS: i32 = 12;

pub fn quantize_score(raw: f64) -> f64 {
    let scale = 10f64.powi(SCORE_DECIMALS);
    (raw * scale).round() / scale
}

/// Descending score, then ascending document id.
pub fn ranking_order(a: &Recommendation, b: &Recommendation) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.candidate.cmp(&b.candidate))
}

/// Top-`k` candidates for `input` among every other indexed document.
pub fn recommend(
    index: &CorpusIndex,
    input: DocId,
    k: usize,
    weights: SimilarityWeights,
) -> Result<Vec<Recommendation>, RecommendError> {
    let (Some(input_entities), Some(input_terms)) =
        (index.entity_vector(input), index.term_vector(input))
    else {
        return Err(RecommendError::UnknownDocument(input));
    };
    if k == 0 {
        return Ok(Vec::new());
    }
    let input_tfidf = tfidf_vector(input_terms, index);
    let input_entities: BTreeMap<EntityKey, f64> = input_entities
        .iter()
        .map(|(key, &n)| (key.clone(), n as f64))
        .collect();
    let mut ranked: Vec<Recommendation> = index
        .ids()
        .filter(|&id| id != input)
        .map(|id| {
            let entities: BTreeMap<EntityKey, f64> = index
                .entity_vector(id)
                .into_iter()
                .flatten()
                .map(|(key, &n)| (key.clone(), n as f64))
                .collect();
            let terms = index.term_vector(id).cloned().unwrap_or_default();
            let entity_component = cosine(&input_entities, &entities);
            let text_component = cosine(&input_tfidf, &tfidf_vector(&terms, index));
            Recommendation {
                candidate: id,
                score: quantize_score(weights.blend(entity_component, text_component)),
                entity_component,
                text_component,
            }
        })
        .collect();
    ranked.sort_by(ranking_order);
    ranked.truncate(k);
    Ok(ranked)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub entity: ResolvedEntity,
    pub freq_input: u32,
    pub freq_candidate: u32,
    pub matched: bool,
    pub shade: u8,
}

/// Highest shade level.
pub const MAX_SHADE: u8 = 3;

/// Shade for a row: 0 when the entity is missing from either side, else the
/// smaller frequency clamped to `1..=MAX_SHADE`.
pub fn shade_level(freq_input: u32, freq_candidate: u32) -> u8 {
    let shared = freq_input.min(freq_candidate);
    if shared == 0 {
        0
    } else {
        shared.min(MAX_SHADE as u32) as u8
    }
}

/// One row per entity key of either document: matched rows first (by
/// shared frequency descending, then name), then input-only rows, then
/// candidate-only rows (each by frequency descending, then name).
pub fn align_entities(input: &Document, candidate: &Document) -> Vec<AlignmentRow> {
    let by_key = |doc: &Document| -> BTreeMap<EntityKey, (u32, ResolvedEntity)> {
        doc.entities
            .iter()
            .map(|o| (o.key.clone(), (o.frequency, o.entity.clone())))
            .collect()
    };
    let left = by_key(input);
    let right = by_key(candidate);
    let keys: BTreeSet<&EntityKey> = left.keys().chain(right.keys()).collect();
    let mut rows: Vec<(u8, AlignmentRow)> = keys
        .into_iter()
        .map(|key| {
            let freq_input = left.get(key).map_or(0, |(n, _)| *n);
            let freq_candidate = right.get(key).map_or(0, |(n, _)| *n);
            let entity = left
                .get(key)
                .or_else(|| right.get(key))
                .map(|(_, e)| e.clone())
                .expect("key comes from one side");
            let matched = freq_input >= 1 && freq_candidate >= 1;
            let group = match (freq_input > 0, freq_candidate > 0) {
                (true, true) => 0,
                (true, false) => 1,
                _ => 2,
            };
            let row = AlignmentRow {
                entity,
                freq_input,
                freq_candidate,
                matched,
                shade: shade_level(freq_input, freq_candidate),
            };
            (group, row)
        })
        .collect();
    let sort_freq = |group: u8, row: &AlignmentRow| match group {
        0 => row.freq_input.min(row.freq_candidate),
        1 => row.freq_input,
        _ => row.freq_candidate,
    };
    rows.sort_by(|(ga, a), (gb, b)| {
        ga.cmp(gb)
            .then(sort_freq(*gb, b).cmp(&sort_freq(*ga, a)))
            .then_with(|| {
                a.entity
                    .display_name
                    .to_lowercase()
                    .cmp(&b.entity.display_name.to_lowercase())
            })
            .then_with(|| a.entity.key.cmp(&b.entity.key))
    });
    rows.into_iter().map(|(_, row)| row).collect()
}
