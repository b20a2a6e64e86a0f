//! Browser demo bindings. Every export takes plain strings or numbers and
//! returns a JSON string; failures come back as `{"error": "..."}`.
//!
//! - [`formula_info`]: parse a formula, show Hill order, subscripts, weight
//! - [`compare_texts`]: extract entities from two texts and align them
//! - [`rank_demo`]: rank a small built-in corpus with adjustable weights

use std::sync::{Arc, OnceLock};

use chemvis_core::formula::to_subscript_notation;
use chemvis_core::ingestion::{analyze_payload, CorpusIndex, DocumentFormat, TagMap};
use chemvis_core::recommend::{align_entities, entity_similarity, recommend};
use chemvis_core::{
    canonical_hill, molecular_weight, parse_formula, AtomicMassTable, DocId, Document, Lexicon,
    Resolver, SimilarityWeights,
};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

fn resolver() -> &'static Resolver {
    static RESOLVER: OnceLock<Resolver> = OnceLock::new();
    RESOLVER.get_or_init(|| Resolver::offline(Arc::new(Lexicon::bundled())))
}

fn error(detail: impl std::fmt::Display) -> String {
    json!({ "error": detail.to_string() }).to_string()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(error)
}

fn document(id: u64, title: &str, text: &str) -> Result<Document, String> {
    let parsed = analyze_payload(
        text.as_bytes(),
        DocumentFormat::Plaintext,
        Some(title),
        &TagMap::default(),
        resolver(),
    )
    .map_err(|e| e.to_string())?;
    Ok(Document::new(DocId(id), parsed))
}

#[wasm_bindgen]
pub fn formula_info(text: &str) -> String {
    let composition = match parse_formula(text) {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    let table = AtomicMassTable::standard();
    let hill = canonical_hill(&composition);
    let elements: Vec<_> = composition
        .iter()
        .map(|(el, n)| json!({"element": el.symbol(), "count": n, "mass": table.mass_of(el)}))
        .collect();
    let lexicon = resolver().lexicon();
    let known: Vec<_> = lexicon
        .lookup_formula(&hill)
        .into_iter()
        .map(|r| json!({"cid": r.cid, "name": r.name}))
        .collect();
    json!({
        "input": text,
        "hill": hill,
        "subscript": to_subscript_notation(&hill),
        "weight": molecular_weight(&composition, table),
        "elements": elements,
        "known": known,
    })
    .to_string()
}

#[wasm_bindgen]
pub fn compare_texts(input: &str, candidate: &str) -> String {
    let docs = document(1, "input", input).and_then(|a| Ok((a, document(2, "candidate", candidate)?)));
    let (a, b) = match docs {
        Ok(pair) => pair,
        Err(e) => return error(e),
    };
    to_json(&json!({
        "entity_similarity": entity_similarity(&a.entity_vector(), &b.entity_vector()),
        "rows": align_entities(&a, &b),
    }))
}

const DEMO_CORPUS: &[(&str, &str)] = &[
    ("Salt hydrates", "Sodium carbonate and MgSO4 crystallize from water as hydrates. The crystal lattice of Na2CO3 holds water."),
    ("Alcohol solvents", "Methanol and ethanol dissolve Sodium carbonate poorly. CH4O was used as the solvent."),
    ("Opioid analgesia", "Morphine (MS Contin) and codeine were compared for analgesia. Plasma C17H19NO3 was measured."),
    ("Analgesic tablets", "Aspirin, caffeine and acetaminophen tablets were dissolved in water for the assay."),
    ("Greenhouse gases", "Carbon dioxide and methane emissions were measured over the catalyst."),
    ("Brine evaporation", "Evaporation of brine yields Sodium chloride, magnesium sulphate and calcium carbonate crystals."),
];

/// The built-in corpus: titles in id order.
#[wasm_bindgen]
pub fn demo_corpus() -> String {
    let titles: Vec<_> = DEMO_CORPUS
        .iter()
        .enumerate()
        .map(|(i, (title, text))| json!({"id": DocId(i as u64 + 1), "title": title, "text": text}))
        .collect();
    to_json(&titles)
}

/// Rank the built-in corpus against `text`.
#[wasm_bindgen]
pub fn rank_demo(text: &str, w_entity: f64, w_text: f64) -> String {
    let weights = match SimilarityWeights::new(w_entity, w_text) {
        Ok(w) => w,
        Err(e) => return error(e),
    };
    let mut docs = Vec::with_capacity(DEMO_CORPUS.len() + 1);
    for (i, (title, body)) in DEMO_CORPUS.iter().enumerate() {
        match document(i as u64 + 1, title, body) {
            Ok(d) => docs.push(d),
            Err(e) => return error(e),
        }
    }
    let input_id = DocId(0);
    match document(0, "input", text) {
        Ok(d) => docs.push(d),
        Err(e) => return error(e),
    }
    let index = CorpusIndex::build(&docs);
    let ranked = match recommend(&index, input_id, DEMO_CORPUS.len(), weights) {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let rows: Vec<_> = ranked
        .iter()
        .map(|r| {
            let title = DEMO_CORPUS[r.candidate.0 as usize - 1].0;
            json!({
                "candidate": r.candidate,
                "title": title,
                "score": r.score,
                "entity_component": r.entity_component,
                "text_component": r.text_component,
            })
        })
        .collect();
    to_json(&json!({"weights": weights, "recommendations": rows}))
}
