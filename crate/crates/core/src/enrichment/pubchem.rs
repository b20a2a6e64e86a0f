//! Blocking client for a PubChem PUG-REST-shaped compound service.
//!
//! Endpoints used, relative to the configured base URL:
//!
//! - `GET {base}/compound/name/{name}/property/{props}/JSON`
//! - `GET {base}/compound/cid/{cid}/property/{props}/JSON`
//! - `GET {base}/compound/fastformula/{formula}/cids/JSON`
//! - `GET {base}/compound/cid/{cid}/PNG`
//!
//! HTTP 404 is a clean not-found; every other failure is an
//! [`EnrichmentError::ExternalService`].

use std::collections::BTreeMap;
use std::io::Read;
use std::sync::Arc;
use std::time::Duration;

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde_json::Value;

use super::cache::{CachedResponse, DiskCache};
use super::throttle::{Clock, ConcurrencyLimit, RateLimiter, SystemClock};
use super::{CompoundRecord, CompoundSource, EnrichmentError};

pub const DEFAULT_BASE_URL: &str = "https://pubchem.ncbi.nlm.nih.gov/rest/pug";

/// Properties always requested; configured extras are appended.
pub const CORE_PROPERTIES: [&str; 4] = ["Title", "IUPACName", "MolecularFormula", "MolecularWeight"];

const MAX_BODY_BYTES: u64 = 16 * 1024 * 1024;

#[derive(Clone, Debug)]
pub struct ClientOptions {
    pub base_url: String,
    pub requests_per_second: usize,
    pub max_concurrent: usize,
    pub extra_properties: Vec<String>,
    pub timeout: Duration,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            base_url: DEFAULT_BASE_URL.to_string(),
            requests_per_second: 5,
            max_concurrent: 2,
            extra_properties: Vec::new(),
            timeout: Duration::from_secs(30),
        }
    }
}

pub struct PubChemClient {
    base: String,
    agent: ureq::Agent,
    cache: Option<DiskCache>,
    limiter: RateLimiter,
    slots: ConcurrencyLimit,
    properties: Vec<String>,
}

impl std::fmt::Debug for PubChemClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PubChemClient").field("base", &self.base).finish()
    }
}

fn encode_segment(segment: &str) -> String {
    utf8_percent_encode(segment, NON_ALPHANUMERIC).to_string()
}

impl PubChemClient {
    pub fn new(options: ClientOptions, cache: Option<DiskCache>) -> Self {
        PubChemClient::with_clock(options, cache, Arc::new(SystemClock::default()))
    }

    pub fn with_clock(options: ClientOptions, cache: Option<DiskCache>, clock: Arc<dyn Clock>) -> Self {
        let mut properties: Vec<String> = CORE_PROPERTIES.iter().map(|p| p.to_string()).collect();
        for extra in options.extra_properties {
            if !properties.contains(&extra) {
                properties.push(extra);
            }
        }
        PubChemClient {
            base: options.base_url.trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new().timeout(options.timeout).build(),
            cache,
            limiter: RateLimiter::new(options.requests_per_second, clock),
            slots: ConcurrencyLimit::new(options.max_concurrent),
            properties,
        }
    }

    fn property_list(&self) -> String {
        self.properties.join(",")
    }

    /// Fetch `path` relative to the base URL, consulting the cache first.
    fn get(&self, path: &str) -> Result<CachedResponse, EnrichmentError> {
        let url = format!("{}/{}", self.base, path);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&url)) {
            return Ok(hit);
        }
        let response = {
            let _permit = self.slots.acquire();
            self.limiter.acquire();
            log::debug!("GET {url}");
            match self.agent.get(&url).call() {
                Ok(resp) => {
                    let mut body = Vec::new();
                    resp.into_reader()
                        .take(MAX_BODY_BYTES)
                        .read_to_end(&mut body)
                        .map_err(|e| EnrichmentError::ExternalService(format!("{url}: {e}")))?;
                    CachedResponse::Found(body)
                }
                Err(ureq::Error::Status(404, _)) => CachedResponse::NotFound,
                Err(e) => {
                    return Err(EnrichmentError::ExternalService(format!("{url}: {e}")));
                }
            }
        };
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put(&url, &response) {
                log::warn!("could not cache {url}: {e}");
            }
        }
        Ok(response)
    }

    fn get_json(&self, path: &str) -> Result<Option<Value>, EnrichmentError> {
        match self.get(path)? {
            CachedResponse::NotFound => Ok(None),
            CachedResponse::Found(body) => serde_json::from_slice(&body)
                .map(Some)
                .map_err(|e| EnrichmentError::ExternalService(format!("bad JSON from {path}: {e}"))),
        }
    }
}

fn value_to_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Parse the first entry of a `PropertyTable` response.
pub fn parse_property_table(body: &Value) -> Result<Option<CompoundRecord>, EnrichmentError> {
    let entries = body
        .pointer("/PropertyTable/Properties")
        .and_then(Value::as_array)
        .ok_or_else(|| EnrichmentError::ExternalService("response lacks PropertyTable".into()))?;
    let Some(entry) = entries.first().and_then(Value::as_object) else {
        return Ok(None);
    };
    let cid = entry
        .get("CID")
        .and_then(Value::as_u64)
        .filter(|&c| c > 0)
        .ok_or_else(|| EnrichmentError::ExternalService("property entry lacks CID".into()))?;
    let text = |key: &str| entry.get(key).and_then(value_to_string);
    let weight = match entry.get("MolecularWeight") {
        Some(Value::Number(n)) => n.as_f64(),
        Some(Value::String(s)) => s.trim().parse().ok(),
        _ => None,
    };
    let mut extra = BTreeMap::new();
    for (key, value) in entry {
        if key != "CID" && !CORE_PROPERTIES.contains(&key.as_str()) {
            if let Some(v) = value_to_string(value) {
                extra.insert(key.clone(), v);
            }
        }
    }
    Ok(Some(CompoundRecord {
        cid,
        title: text("Title"),
        iupac_name: text("IUPACName"),
        formula: text("MolecularFormula"),
        weight,
        extra,
    }))
}

impl CompoundSource for PubChemClient {
    fn properties_by_name(&self, name: &str) -> Result<Option<CompoundRecord>, EnrichmentError> {
        let path = format!(
            "compound/name/{}/property/{}/JSON",
            encode_segment(name),
            self.property_list()
        );
        match self.get_json(&path)? {
            Some(body) => parse_property_table(&body),
            None => Ok(None),
        }
    }

    fn properties_by_cid(&self, cid: u64) -> Result<Option<CompoundRecord>, EnrichmentError> {
        let path = format!("compound/cid/{cid}/property/{}/JSON", self.property_list());
        match self.get_json(&path)? {
            Some(body) => parse_property_table(&body),
            None => Ok(None),
        }
    }

    fn cids_by_formula(&self, formula: &str) -> Result<Vec<u64>, EnrichmentError> {
        let path = format!("compound/fastformula/{}/cids/JSON", encode_segment(formula));
        let Some(body) = self.get_json(&path)? else {
            return Ok(Vec::new());
        };
        let list = body
            .pointer("/IdentifierList/CID")
            .and_then(Value::as_array)
            .ok_or_else(|| EnrichmentError::ExternalService("response lacks IdentifierList".into()))?;
        Ok(list.iter().filter_map(Value::as_u64).filter(|&c| c > 0).collect())
    }

    fn structure_png(&self, cid: u64) -> Result<Option<Vec<u8>>, EnrichmentError> {
        match self.get(&format!("compound/cid/{cid}/PNG"))? {
            CachedResponse::Found(bytes) => Ok(Some(bytes)),
            CachedResponse::NotFound => Ok(None),
        }
    }
}
