//! The application facade: one store, one resolver, one config. The HTTP
//! service and the CLI are thin adapters over [`ChemVis`].

use std::sync::Arc;

use crate::api::{ApiError, ComparisonResponse, EntityRow, IngestResponse, RecommendationRow};
use crate::config::ServiceConfig;
use crate::enrichment::cache::DiskCache;
use crate::enrichment::pubchem::{ClientOptions, PubChemClient};
use crate::enrichment::{CompoundSource, Lexicon, Resolver};
use crate::ingestion::store::{Bookmark, CorpusStore};
use crate::ingestion::{analyze_payload, DocId, DocumentFormat, DriftReport};
use crate::recommend::{align_entities, entity_similarity, recommend, SimilarityWeights};

pub const DEFAULT_K: usize = 10;

pub struct ChemVis {
    config: ServiceConfig,
    resolver: Resolver,
    store: CorpusStore,
}

impl std::fmt::Debug for ChemVis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChemVis")
            .field("store", &self.store.dir())
            .field("online", &self.resolver.is_online())
            .finish()
    }
}

fn load_lexicon(config: &ServiceConfig) -> Result<Lexicon, ApiError> {
    match &config.lexicon_path {
        None => Ok(Lexicon::bundled()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ApiError::Internal(format!("reading lexicon {}: {e}", path.display())))?;
            Lexicon::from_tsv(&text)
                .map_err(|e| ApiError::Internal(format!("lexicon {}: {e}", path.display())))
        }
    }
}

/// Resolver described by `config`: lexicon only when offline, otherwise
/// lexicon backed by the cached, throttled compound service.
pub fn build_resolver(config: &ServiceConfig) -> Result<Resolver, ApiError> {
    let lexicon = Arc::new(load_lexicon(config)?);
    if config.offline {
        return Ok(Resolver::offline(lexicon));
    }
    let cache = match DiskCache::new(&config.cache_dir) {
        Ok(cache) => Some(cache),
        Err(e) => {
            log::warn!("response cache disabled ({}): {e}", config.cache_dir.display());
            None
        }
    };
    let options = ClientOptions {
        base_url: config.pubchem_base.clone(),
        requests_per_second: config.rate_limit,
        max_concurrent: config.max_concurrent_requests,
        extra_properties: config.extra_properties.clone(),
        ..ClientOptions::default()
    };
    let source: Arc<dyn CompoundSource> = Arc::new(PubChemClient::new(options, cache));
    Ok(Resolver::new(lexicon, Some(source)))
}

pub fn parse_doc_id(text: &str) -> Result<DocId, ApiError> {
    text.trim().parse().map_err(ApiError::BadRequest)
}

impl ChemVis {
    pub fn open(config: ServiceConfig) -> Result<Self, ApiError> {
        let resolver = build_resolver(&config)?;
        ChemVis::with_resolver(config, resolver)
    }

    pub fn with_resolver(config: ServiceConfig, resolver: Resolver) -> Result<Self, ApiError> {
        let store = CorpusStore::open(&config.store_dir)?;
        Ok(ChemVis {
            config,
            resolver,
            store,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn store(&self) -> &CorpusStore {
        &self.store
    }

    pub fn resolver(&self) -> &Resolver {
        &self.resolver
    }

    pub fn ingest(
        &self,
        payload: &[u8],
        format: &str,
        title: Option<&str>,
    ) -> Result<IngestResponse, ApiError> {
        let limit = self.config.max_upload_bytes;
        if payload.len() > limit {
            return Err(ApiError::PayloadTooLarge {
                size: payload.len(),
                limit,
            });
        }
        let format: DocumentFormat = format.parse()?;
        let parsed = analyze_payload(payload, format, title, &self.config.tag_map, &self.resolver)?;
        let id = self.store.insert(parsed)?;
        log::info!("ingested {id}");
        Ok(IngestResponse { id })
    }

    pub fn entities(&self, id: DocId) -> Result<Vec<EntityRow>, ApiError> {
        let view = self.store.read();
        let doc = view.document(id)?;
        Ok(doc
            .entities
            .iter()
            .map(|o| EntityRow {
                entity: o.entity.clone(),
                frequency: o.frequency,
            })
            .collect())
    }

    /// Blend weights; a missing side falls back to its configured default.
    pub fn weights(&self, entity: Option<f64>, text: Option<f64>) -> Result<SimilarityWeights, ApiError> {
        let defaults = self.config.default_weights;
        Ok(SimilarityWeights::new(
            entity.unwrap_or(defaults.entity),
            text.unwrap_or(defaults.text),
        )?)
    }

    pub fn recommend(
        &self,
        id: DocId,
        k: usize,
        weights: SimilarityWeights,
    ) -> Result<Vec<RecommendationRow>, ApiError> {
        let view = self.store.read();
        view.document(id)?;
        let ranked = recommend(view.index(), id, k, weights)?;
        ranked
            .into_iter()
            .map(|recommendation| {
                let title = view.document(recommendation.candidate)?.title.clone();
                Ok(RecommendationRow {
                    recommendation,
                    title,
                })
            })
            .collect()
    }

    pub fn compare(&self, input: DocId, candidate: DocId) -> Result<ComparisonResponse, ApiError> {
        let view = self.store.read();
        let left = view.document(input)?;
        let right = view.document(candidate)?;
        Ok(ComparisonResponse {
            input,
            candidate,
            entity_similarity: entity_similarity(&left.entity_vector(), &right.entity_vector()),
            rows: align_entities(left, right),
        })
    }

    pub fn add_bookmark(&self, input: DocId, candidate: DocId) -> Result<Bookmark, ApiError> {
        Ok(self.store.add_bookmark(input, candidate)?)
    }

    pub fn bookmarks(&self, input: DocId) -> Result<Vec<Bookmark>, ApiError> {
        Ok(self.store.bookmarks(input)?)
    }

    pub fn reindex(&self) -> Result<DriftReport, ApiError> {
        Ok(self.store.reindex(&self.resolver)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn app(dir: &std::path::Path) -> ChemVis {
        let config = ServiceConfig {
            store_dir: dir.to_path_buf(),
            offline: true,
            ..ServiceConfig::default()
        };
        ChemVis::open(config).unwrap()
    }

    #[test]
    fn figure_three_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let app = app(dir.path());
        let a = app
            .ingest(b"Na2CO3 and MgSO4 dissolve in H2O.", "plaintext", Some("A"))
            .unwrap()
            .id;
        let b = app
            .ingest(b"Na2CO3 and MgSO4 dissolve in CH4O.", "text", Some("B"))
            .unwrap()
            .id;
        let rows = app.entities(a).unwrap();
        let cids: Vec<_> = rows.iter().map(|r| r.entity.cid.unwrap()).collect();
        assert_eq!(cids, vec![10340, 24083, 962]);
        let cmp = app.compare(a, b).unwrap();
        assert!((cmp.entity_similarity - 2.0 / 3.0).abs() < 1e-9);
        let recs = app.recommend(a, DEFAULT_K, app.weights(None, None).unwrap()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].title, "B");
        assert_eq!(app.add_bookmark(a, b).unwrap().seq, 1);
        assert_eq!(app.bookmarks(a).unwrap().len(), 1);
    }

    #[test]
    fn input_errors() {
        let dir = tempfile::tempdir().unwrap();
        let app = app(dir.path());
        assert_eq!(app.ingest(b"", "xml", None).unwrap_err().status(), 400);
        assert_eq!(app.ingest(b"x", "pdf", None).unwrap_err().status(), 400);
        assert_eq!(app.ingest(b"<a>", "xml", None).unwrap_err().status(), 400);
        let big = vec![b'a'; app.config().max_upload_bytes + 1];
        assert_eq!(app.ingest(&big, "text", None).unwrap_err().status(), 413);
        assert_eq!(app.entities(DocId(9)).unwrap_err().status(), 404);
        assert_eq!(app.weights(Some(0.0), Some(0.0)).unwrap_err().status(), 422);
        assert_eq!(app.weights(Some(-1.0), None).unwrap_err().status(), 422);
        assert_eq!(parse_doc_id("nope").unwrap_err().status(), 400);
    }
}
