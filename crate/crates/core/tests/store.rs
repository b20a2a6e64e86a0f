use std::sync::Arc;
use std::thread;

use chemvis_core::ingestion::store::CorpusStore;
use chemvis_core::ingestion::{analyze_payload, DocumentFormat, TagMap};
use chemvis_core::recommend::{recommend, SimilarityWeights};
use chemvis_core::{Lexicon, Resolver};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: &[&str] = &[
    "Sodium carbonate", "water", "methanol", "MgSO4", "H2O", "CH4O", "crystal", "solvent",
    "yield", "reaction", "morphine", "Oramorph", "NaCl", "heated", "filtered", "ethanol",
    "spectrum", "catalyst", "Fe2O3", "benzene",
];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let paragraphs = rng.gen_range(1..4);
    (0..paragraphs)
        .map(|_| {
            let n = rng.gen_range(3..20);
            (0..n)
                .map(|_| *VOCAB.choose(rng).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn resolver() -> Resolver {
    Resolver::offline(Arc::new(Lexicon::bundled()))
}

#[test]
fn reindex_after_random_ingests_reports_no_drift() {
    let dir = tempfile::tempdir().unwrap();
    let r = resolver();
    let tags = TagMap::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..5u64 {
        let store = CorpusStore::open(dir.path()).unwrap();
        for _ in 0..10 {
            let text = random_text(&mut rng);
            let parsed = analyze_payload(text.as_bytes(), DocumentFormat::Plaintext, None, &tags, &r).unwrap();
            store.insert(parsed).unwrap();
        }
        let report = store.reindex(&r).unwrap();
        assert!(report.is_clean(), "round {seed}: {:?}", report.drift);
        assert_eq!(report.documents, 10 * (seed as usize + 1));
    }
}

#[test]
fn identical_payloads_yield_identical_content() {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::open(dir.path()).unwrap();
    let r = resolver();
    let text = b"<article><title>T</title><p>Na2CO3 in H2O.</p></article>";
    let a = store
        .insert(analyze_payload(text, DocumentFormat::Xml, None, &TagMap::default(), &r).unwrap())
        .unwrap();
    let b = store
        .insert(analyze_payload(text, DocumentFormat::Xml, None, &TagMap::default(), &r).unwrap())
        .unwrap();
    assert_ne!(a, b);
    let view = store.read();
    let (da, db) = (view.document(a).unwrap(), view.document(b).unwrap());
    assert_eq!(
        (&da.sections, &da.entities, &da.term_counts),
        (&db.sections, &db.entities, &db.term_counts)
    );
}

#[test]
fn readers_never_see_partial_inserts() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(CorpusStore::open(dir.path()).unwrap());
    let r = Arc::new(resolver());
    let writer = {
        let (store, r) = (store.clone(), r.clone());
        thread::spawn(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..30 {
                let text = random_text(&mut rng);
                let parsed = analyze_payload(
                    text.as_bytes(),
                    DocumentFormat::Plaintext,
                    None,
                    &TagMap::default(),
                    &r,
                )
                .unwrap();
                store.insert(parsed).unwrap();
            }
        })
    };
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let store = store.clone();
            thread::spawn(move || {
                for _ in 0..200 {
                    let view = store.read();
                    assert_eq!(view.len(), view.index().len());
                    for doc in view.documents() {
                        assert!(view.index().contains(doc.id));
                        recommend(view.index(), doc.id, 3, SimilarityWeights::default()).unwrap();
                    }
                }
            })
        })
        .collect();
    writer.join().unwrap();
    for h in readers {
        h.join().unwrap();
    }
    assert_eq!(store.read().len(), 30);
}
