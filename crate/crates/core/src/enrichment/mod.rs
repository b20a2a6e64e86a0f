//! Entity resolution: mentions are mapped to disambiguated compounds using the
//! bundled lexicon first and an optional external compound service second.

mod lexicon;
#[cfg(feature = "io")]
pub mod cache;
#[cfg(feature = "io")]
pub mod pubchem;
#[cfg(feature = "io")]
pub mod throttle;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{Mention, MentionKind};
use crate::formula::{canonical_hill, molecular_weight, parse_formula, FormulaError};
use crate::periodic::AtomicMassTable;

pub use lexicon::{Lexicon, LexiconRecord, NameHit, LEXICON_HEADER, WEIGHT_TOLERANCE};

#[derive(Debug, Error)]
pub enum EnrichmentError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("external compound service: {0}")]
    ExternalService(String),
    #[error("compound not found: {0}")]
    NotFound(String),
    #[error("invalid lexicon: {0}")]
    Lexicon(String),
}

/// Disambiguation identity of an entity. Tiers rank `cid > formula > name`;
/// two keys are equal only when tier and value agree.
///
/// Serialized as `cid:962`, `formula:H2O` or `name:foo`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKey {
    Cid(u64),
    Formula(String),
    Name(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyTier {
    Cid,
    Formula,
    Name,
}

impl EntityKey {
    pub fn tier(&self) -> KeyTier {
        match self {
            EntityKey::Cid(_) => KeyTier::Cid,
            EntityKey::Formula(_) => KeyTier::Formula,
            EntityKey::Name(_) => KeyTier::Name,
        }
    }

    /// Name-tier key for free text (case-folded, whitespace collapsed).
    pub fn name(text: &str) -> Self {
        EntityKey::Name(lexicon::fold_name(text))
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityKey::Cid(cid) => write!(f, "cid:{cid}"),
            EntityKey::Formula(formula) => write!(f, "formula:{formula}"),
            EntityKey::Name(name) => write!(f, "name:{name}"),
        }
    }
}

impl FromStr for EntityKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tier, value) = s
            .split_once(':')
            .ok_or_else(|| format!("entity key `{s}` lacks a tier prefix"))?;
        match tier {
            "cid" => value
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .map(EntityKey::Cid)
                .ok_or_else(|| format!("bad cid in `{s}`")),
            "formula" if !value.is_empty() => Ok(EntityKey::Formula(value.to_string())),
            "name" if !value.is_empty() => Ok(EntityKey::Name(value.to_string())),
            _ => Err(format!("bad entity key `{s}`")),
        }
    }
}

impl Serialize for EntityKey {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityKey {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionStatus {
    Resolved,
    Unresolved,
}

/// A compound with its display properties. Unresolved entities are kept
/// (with a formula- or name-tier key) so they can still be listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedEntity {
    pub key: EntityKey,
    pub cid: Option<u64>,
    pub iupac_name: Option<String>,
    pub display_name: String,
    pub formula: Option<String>,
    pub weight: Option<f64>,
    /// PNG bytes as standard Base64.
    pub structure_image: Option<String>,
    pub synonyms: Vec<String>,
    pub status: ResolutionStatus,
    /// Additional configured properties, by upstream property name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, String>,
}

impl ResolvedEntity {
    pub fn from_record(record: &LexiconRecord) -> Self {
        ResolvedEntity {
            key: EntityKey::Cid(record.cid),
            cid: Some(record.cid),
            iupac_name: None,
            display_name: record.name.clone(),
            formula: Some(record.formula.clone()),
            weight: Some(record.weight),
            structure_image: None,
            synonyms: record.synonyms.clone(),
            status: ResolutionStatus::Resolved,
            properties: BTreeMap::new(),
        }
    }

    pub fn unresolved_name(name: &str) -> Self {
        ResolvedEntity {
            key: EntityKey::name(name),
            cid: None,
            iupac_name: None,
            display_name: name.trim().to_string(),
            formula: None,
            weight: None,
            structure_image: None,
            synonyms: Vec::new(),
            status: ResolutionStatus::Unresolved,
            properties: BTreeMap::new(),
        }
    }

    /// Unresolved formula entity; the weight is computed locally.
    pub fn unresolved_formula(hill: &str) -> Result<Self, FormulaError> {
        let composition = parse_formula(hill)?;
        let hill = canonical_hill(&composition);
        Ok(ResolvedEntity {
            key: EntityKey::Formula(hill.clone()),
            cid: None,
            iupac_name: None,
            display_name: hill.clone(),
            formula: Some(hill),
            weight: Some(molecular_weight(&composition, AtomicMassTable::standard())),
            structure_image: None,
            synonyms: Vec::new(),
            status: ResolutionStatus::Unresolved,
            properties: BTreeMap::new(),
        })
    }

    pub fn is_resolved(&self) -> bool {
        self.status == ResolutionStatus::Resolved
    }
}

/// Properties of one compound as returned by an external service.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompoundRecord {
    pub cid: u64,
    pub title: Option<String>,
    pub iupac_name: Option<String>,
    pub formula: Option<String>,
    pub weight: Option<f64>,
    pub extra: BTreeMap<String, String>,
}

/// A remote compound database. `Ok(None)` / empty lists mean a clean
/// not-found; `Err` is reserved for transport and protocol failures.
pub trait CompoundSource: Send + Sync {
    fn properties_by_name(&self, name: &str) -> Result<Option<CompoundRecord>, EnrichmentError>;
    fn properties_by_cid(&self, cid: u64) -> Result<Option<CompoundRecord>, EnrichmentError>;
    fn cids_by_formula(&self, formula: &str) -> Result<Vec<u64>, EnrichmentError>;
    fn structure_png(&self, cid: u64) -> Result<Option<Vec<u8>>, EnrichmentError>;
}

fn entity_from_compound(
    record: CompoundRecord,
    png: Option<Vec<u8>>,
    fallback_name: &str,
) -> ResolvedEntity {
    // normalize upstream formulas to Hill order; keep verbatim if unparseable
    let formula = record.formula.map(|f| match parse_formula(&f) {
        Ok(c) => canonical_hill(&c),
        Err(_) => f,
    });
    ResolvedEntity {
        key: EntityKey::Cid(record.cid),
        cid: Some(record.cid),
        display_name: record
            .title
            .clone()
            .or_else(|| record.iupac_name.clone())
            .unwrap_or_else(|| fallback_name.to_string()),
        iupac_name: record.iupac_name,
        formula,
        weight: record.weight,
        structure_image: png.map(|bytes| base64::engine::general_purpose::STANDARD.encode(bytes)),
        synonyms: Vec::new(),
        status: ResolutionStatus::Resolved,
        properties: record.extra,
    }
}

/// Fetch the display properties of `cid` from `source`.
pub fn fetch_properties(
    cid: u64,
    source: &dyn CompoundSource,
) -> Result<ResolvedEntity, EnrichmentError> {
    if cid == 0 {
        return Err(EnrichmentError::NotFound("cid 0".into()));
    }
    let record = source
        .properties_by_cid(cid)?
        .ok_or_else(|| EnrichmentError::NotFound(format!("cid {cid}")))?;
    let png = source.structure_png(cid)?;
    Ok(entity_from_compound(record, png, &cid.to_string()))
}

/// Upper bound on candidates fetched for one formula from the external service.
pub const MAX_FORMULA_CANDIDATES: usize = 10;

/// Resolves names and formulas against the lexicon, then optionally against
/// an external [`CompoundSource`]. Successful lookups are memoized.
pub struct Resolver {
    lexicon: Arc<Lexicon>,
    source: Option<Arc<dyn CompoundSource>>,
    names: Mutex<HashMap<String, ResolvedEntity>>,
    formulas: Mutex<HashMap<String, Vec<ResolvedEntity>>>,
}

impl fmt::Debug for Resolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Resolver")
            .field("lexicon_records", &self.lexicon.len())
            .field("online", &self.source.is_some())
            .finish()
    }
}

impl Resolver {
    pub fn offline(lexicon: Arc<Lexicon>) -> Self {
        Resolver::new(lexicon, None)
    }

    pub fn new(lexicon: Arc<Lexicon>, source: Option<Arc<dyn CompoundSource>>) -> Self {
        Resolver {
            lexicon,
            source,
            names: Mutex::new(HashMap::new()),
            formulas: Mutex::new(HashMap::new()),
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn is_online(&self) -> bool {
        self.source.is_some()
    }

    /// Attach a structure image to a lexicon hit when online. Best effort:
    /// failures leave the image empty.
    fn with_structure(&self, mut entity: ResolvedEntity) -> ResolvedEntity {
        if let (Some(source), Some(cid)) = (&self.source, entity.cid) {
            match source.structure_png(cid) {
                Ok(Some(png)) => entity.structure_image = Some(base64::engine::general_purpose::STANDARD.encode(png)),
                Ok(None) => {}
                Err(e) => log::warn!("structure for cid {cid}: {e}"),
            }
        }
        entity
    }

    pub fn resolve_by_name(&self, name: &str) -> Result<ResolvedEntity, EnrichmentError> {
        let folded = lexicon::fold_name(name);
        if folded.is_empty() {
            return Err(EnrichmentError::NotFound("empty name".into()));
        }
        if let Some(hit) = self.names.lock().unwrap().get(&folded) {
            return Ok(hit.clone());
        }
        let entity = if let Some(record) = self.lexicon.lookup_name(name) {
            self.with_structure(ResolvedEntity::from_record(record))
        } else if let Some(source) = &self.source {
            match source.properties_by_name(name.trim())? {
                Some(record) => {
                    let png = source.structure_png(record.cid)?;
                    entity_from_compound(record, png, name.trim())
                }
                None => ResolvedEntity::unresolved_name(name),
            }
        } else {
            ResolvedEntity::unresolved_name(name)
        };
        self.names.lock().unwrap().insert(folded, entity.clone());
        Ok(entity)
    }

    /// Candidates sharing the formula, ordered by ascending cid. An empty
    /// list means the formula is unresolved.
    pub fn resolve_by_formula(&self, formula: &str) -> Result<Vec<ResolvedEntity>, EnrichmentError> {
        let hill = canonical_hill(&parse_formula(formula)?);
        if let Some(hit) = self.formulas.lock().unwrap().get(&hill) {
            return Ok(hit.clone());
        }
        let local = self.lexicon.lookup_formula(&hill);
        let entities = if !local.is_empty() {
            local
                .into_iter()
                .map(|r| self.with_structure(ResolvedEntity::from_record(r)))
                .collect()
        } else if let Some(source) = &self.source {
            let mut cids = source.cids_by_formula(&hill)?;
            cids.sort_unstable();
            cids.dedup();
            cids.truncate(MAX_FORMULA_CANDIDATES);
            let mut out = Vec::with_capacity(cids.len());
            for cid in cids {
                match fetch_properties(cid, source.as_ref()) {
                    Ok(entity) => out.push(entity),
                    Err(EnrichmentError::NotFound(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            out
        } else {
            Vec::new()
        };
        self.formulas.lock().unwrap().insert(hill, entities.clone());
        Ok(entities)
    }

    /// Resolve one extracted mention to a single entity.
    ///
    /// A formula with exactly one candidate resolves to it; zero or several
    /// candidates yield an unresolved formula-tier entity. External failures
    /// degrade to the offline answer.
    pub fn resolve_mention(&self, mention: &Mention) -> ResolvedEntity {
        match mention.kind {
            MentionKind::Name | MentionKind::Synonym => {
                self.resolve_by_name(&mention.surface).unwrap_or_else(|e| {
                    log::warn!("resolving `{}`: {e}", mention.surface);
                    self.lexicon
                        .lookup_name(&mention.surface)
                        .map(ResolvedEntity::from_record)
                        .unwrap_or_else(|| ResolvedEntity::unresolved_name(&mention.surface))
                })
            }
            MentionKind::Formula => {
                let candidates = self.resolve_by_formula(&mention.surface).unwrap_or_else(|e| {
                    log::warn!("resolving `{}`: {e}", mention.surface);
                    Vec::new()
                });
                match <[ResolvedEntity; 1]>::try_from(candidates) {
                    Ok([single]) => single,
                    Err(_) => ResolvedEntity::unresolved_formula(&mention.surface)
                        .unwrap_or_else(|_| ResolvedEntity::unresolved_name(&mention.surface)),
                }
            }
        }
    }
}
