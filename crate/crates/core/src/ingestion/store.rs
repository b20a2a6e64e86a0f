//! Single-directory corpus store.
//!
//! Layout:
//!
//! ```text
//! <store>/manifest.json        format tag, version, next id, ordered document ids
//! <store>/records/<id>.json    one Document per file
//! <store>/index.json           inverted term index + per-document entity vectors
//! <store>/bookmarks.json       (input, candidate, seq) triples
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place. The
//! manifest is written last, so a document becomes visible only once its
//! record and the index are on disk.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::enrichment::Resolver;

use super::{
    analyze_sections, CorpusIndex, DocId, Document, DriftReport, IngestError, ParsedDocument,
};

const STORE_FORMAT: &str = "chemvis-store";
const STORE_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    next_id: u64,
    documents: Vec<DocId>,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            format: STORE_FORMAT.to_string(),
            version: STORE_VERSION,
            next_id: 1,
            documents: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bookmark {
    pub input: DocId,
    pub candidate: DocId,
    /// Creation order within the store.
    pub seq: u64,
}

#[derive(Debug, Default)]
struct StoreState {
    manifest: Manifest,
    documents: BTreeMap<DocId, Document>,
    index: CorpusIndex,
    bookmarks: Vec<Bookmark>,
}

/// Read access to a consistent snapshot of the store.
pub struct StoreView<'a>(RwLockReadGuard<'a, StoreState>);

impl StoreView<'_> {
    pub fn document(&self, id: DocId) -> Result<&Document, IngestError> {
        self.0
            .documents
            .get(&id)
            .ok_or(IngestError::UnknownDocument(id))
    }

    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.0.documents.values()
    }

    pub fn index(&self) -> &CorpusIndex {
        &self.0.index
    }

    pub fn len(&self) -> usize {
        self.0.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.documents.is_empty()
    }
}

/// On-disk corpus with a reader-writer lock: many readers or one writer.
#[derive(Debug)]
pub struct CorpusStore {
    dir: PathBuf,
    state: RwLock<StoreState>,
}

fn corrupt(path: &Path, detail: impl std::fmt::Display) -> IngestError {
    IngestError::StorageCorrupt(format!("{}: {detail}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IngestError> {
    let bytes = fs::read(path).map_err(|e| corrupt(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| corrupt(path, e))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IngestError> {
    let bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| IngestError::StorageCorrupt(e.to_string()))?;
    write_atomic(path, &bytes)
}

impl CorpusStore {
    /// Open the store at `dir`, creating an empty one if the directory is
    /// missing or empty.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("records"))?;
        let store = CorpusStore {
            dir,
            state: RwLock::new(StoreState::default()),
        };
        if store.manifest_path().exists() {
            let state = store.load()?;
            *store.state.write().unwrap() = state;
        } else {
            if fs::read_dir(store.dir.join("records"))?.next().is_some() {
                return Err(corrupt(&store.manifest_path(), "missing manifest"));
            }
            let state = store.state.read().unwrap();
            store.persist_index(&state.index)?;
            write_json(&store.bookmarks_path(), &state.bookmarks)?;
            write_json(&store.manifest_path(), &state.manifest)?;
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join("index.json")
    }

    fn bookmarks_path(&self) -> PathBuf {
        self.dir.join("bookmarks.json")
    }

    fn record_path(&self, id: DocId) -> PathBuf {
        self.dir.join("records").join(format!("{id}.json"))
    }

    fn load_documents(&self, manifest: &Manifest) -> Result<BTreeMap<DocId, Document>, IngestError> {
        let mut documents = BTreeMap::new();
        for &id in &manifest.documents {
            let path = self.record_path(id);
            let doc: Document = read_json(&path)?;
            if doc.id != id {
                return Err(corrupt(&path, format!("record holds {}", doc.id)));
            }
            documents.insert(id, doc);
        }
        Ok(documents)
    }

    fn load_index(&self) -> Result<CorpusIndex, IngestError> {
        let mut index: CorpusIndex = read_json(&self.index_path())?;
        index.rebuild_term_vectors();
        Ok(index)
    }

    fn load(&self) -> Result<StoreState, IngestError> {
        let manifest: Manifest = read_json(&self.manifest_path())?;
        if manifest.format != STORE_FORMAT || manifest.version != STORE_VERSION {
            return Err(corrupt(
                &self.manifest_path(),
                format!("unsupported store {} v{}", manifest.format, manifest.version),
            ));
        }
        let documents = self.load_documents(&manifest)?;
        let index = self.load_index()?;
        let bookmarks: Vec<Bookmark> = read_json(&self.bookmarks_path())?;
        Ok(StoreState {
            manifest,
            documents,
            index,
            bookmarks,
        })
    }

    fn persist_index(&self, index: &CorpusIndex) -> Result<(), IngestError> {
        write_json(&self.index_path(), index)
    }

    pub fn read(&self) -> StoreView<'_> {
        StoreView(self.state.read().unwrap())
    }

    /// Persist a parsed document under a fresh id.
    pub fn insert(&self, parsed: ParsedDocument) -> Result<DocId, IngestError> {
        let mut state = self.state.write().unwrap();
        let id = DocId(state.manifest.next_id);
        let doc = Document::new(id, parsed);
        write_json(&self.record_path(id), &doc)?;
        let mut index = state.index.clone();
        index.insert(&doc);
        self.persist_index(&index)?;
        let mut manifest = state.manifest.clone();
        manifest.next_id += 1;
        manifest.documents.push(id);
        write_json(&self.manifest_path(), &manifest)?;
        state.manifest = manifest;
        state.index = index;
        state.documents.insert(id, doc);
        Ok(id)
    }

    /// Rebuild term counts, entity vectors and the inverted index from the
    /// stored sections, compare against what is on disk, and repair any drift.
    pub fn reindex(&self, resolver: &Resolver) -> Result<DriftReport, IngestError> {
        let mut state = self.state.write().unwrap();
        let manifest: Manifest = read_json(&self.manifest_path())?;
        let stored = self.load_documents(&manifest)?;
        let on_disk = self.load_index()?;
        let mut drift = Vec::new();
        let mut rebuilt = BTreeMap::new();
        for (id, doc) in stored {
            let fresh = Document::new(
                id,
                analyze_sections(doc.title.clone(), doc.sections.clone(), resolver),
            );
            if fresh.term_counts != doc.term_counts {
                drift.push(format!("term counts of {id} differ from its sections"));
            }
            if fresh.entity_vector() != doc.entity_vector() {
                drift.push(format!("entities of {id} differ from its sections"));
            }
            if fresh != doc {
                write_json(&self.record_path(id), &fresh)?;
            }
            rebuilt.insert(id, fresh);
        }
        let index = CorpusIndex::build(rebuilt.values());
        drift.extend(on_disk.diff(&index));
        if !drift.is_empty() {
            self.persist_index(&index)?;
        }
        let report = DriftReport {
            documents: rebuilt.len(),
            terms: index.vocabulary_len(),
            drift,
        };
        state.manifest = manifest;
        state.documents = rebuilt;
        state.index = index;
        Ok(report)
    }

    /// Record a bookmark; adding an existing pair is a no-op.
    pub fn add_bookmark(&self, input: DocId, candidate: DocId) -> Result<Bookmark, IngestError> {
        let mut state = self.state.write().unwrap();
        for id in [input, candidate] {
            if !state.documents.contains_key(&id) {
                return Err(IngestError::UnknownDocument(id));
            }
        }
        if let Some(existing) = state
            .bookmarks
            .iter()
            .find(|b| b.input == input && b.candidate == candidate)
        {
            return Ok(existing.clone());
        }
        let seq = state.bookmarks.iter().map(|b| b.seq + 1).max().unwrap_or(1);
        let bookmark = Bookmark {
            input,
            candidate,
            seq,
        };
        let mut bookmarks = state.bookmarks.clone();
        bookmarks.push(bookmark.clone());
        write_json(&self.bookmarks_path(), &bookmarks)?;
        state.bookmarks = bookmarks;
        Ok(bookmark)
    }

    /// Bookmarks of `input` in creation order.
    pub fn bookmarks(&self, input: DocId) -> Result<Vec<Bookmark>, IngestError> {
        let state = self.state.read().unwrap();
        if !state.documents.contains_key(&input) {
            return Err(IngestError::UnknownDocument(input));
        }
        let mut out: Vec<Bookmark> = state
            .bookmarks
            .iter()
            .filter(|b| b.input == input)
            .cloned()
            .collect();
        out.sort_by_key(|b| b.seq);
        Ok(out)
    }
}
