//! Bundled offline compound lexicon and its case-insensitive dictionary matcher.
//!
//! File format (`chemvis-lexicon v1`): one record per line,
//! `cid<TAB>preferred_name<TAB>hill_formula<TAB>molecular_weight[<TAB>synonym]*`.
//! Lines starting with `#` after the header are comments.

use std::collections::{BTreeMap, HashMap};

use crate::formula::{canonical_hill, molecular_weight, parse_formula};
use crate::periodic::AtomicMassTable;

use super::EnrichmentError;

pub const LEXICON_HEADER: &str = "# chemvis-lexicon v1";
const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Maximum allowed gap between a record's listed weight and the weight
/// computed from its formula.
pub const WEIGHT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconRecord {
    pub cid: u64,
    pub name: String,
    pub formula: String,
    pub weight: f64,
    pub synonyms: Vec<String>,
}

/// A dictionary hit: which record, and whether the preferred name matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NameHit {
    pub record: usize,
    pub preferred: bool,
}

#[derive(Debug, Default)]
struct TrieNode {
    children: HashMap<char, usize>,
    hit: Option<NameHit>,
}

#[derive(Debug)]
pub struct Lexicon {
    records: Vec<LexiconRecord>,
    by_name: HashMap<String, NameHit>,
    by_formula: BTreeMap<String, Vec<usize>>,
    trie: Vec<TrieNode>,
}

/// Lowercase and collapse whitespace runs to a single space.
pub(crate) fn fold_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut in_space = false;
    for c in name.trim().chars() {
        if c.is_whitespace() {
            if !in_space {
                out.push(' ');
            }
            in_space = true;
        } else {
            out.extend(c.to_lowercase());
            in_space = false;
        }
    }
    out
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Lexicon::from_tsv(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_tsv(text: &str) -> Result<Self, EnrichmentError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == LEXICON_HEADER => {}
            _ => {
                return Err(EnrichmentError::Lexicon(format!(
                    "missing `{LEXICON_HEADER}` header"
                )))
            }
        }
        let bad = |lineno: usize, msg: &str| {
            EnrichmentError::Lexicon(format!("line {}: {msg}", lineno + 1))
        };
        let mut records = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() < 4 {
                return Err(bad(lineno, "expected at least 4 fields"));
            }
            let cid: u64 = fields[0]
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| bad(lineno, "cid must be a positive integer"))?;
            let composition =
                parse_formula(fields[2]).map_err(|e| bad(lineno, &e.to_string()))?;
            if canonical_hill(&composition) != fields[2] {
                return Err(bad(lineno, "formula is not in Hill order"));
            }
            let weight: f64 = fields[3]
                .parse()
                .map_err(|_| bad(lineno, "bad molecular weight"))?;
            let computed = molecular_weight(&composition, AtomicMassTable::standard());
            if (computed - weight).abs() > WEIGHT_TOLERANCE {
                return Err(bad(
                    lineno,
                    &format!("weight {weight} disagrees with formula ({computed:.3})"),
                ));
            }
            records.push(LexiconRecord {
                cid,
                name: fields[1].to_string(),
                formula: fields[2].to_string(),
                weight,
                synonyms: fields[4..]
                    .iter()
                    .filter(|s| !s.is_empty())
                    .map(|s| s.to_string())
                    .collect(),
            });
        }
        Lexicon::from_records(records)
    }

    pub fn from_records(records: Vec<LexiconRecord>) -> Result<Self, EnrichmentError> {
        let mut lexicon = Lexicon {
            records: Vec::new(),
            by_name: HashMap::new(),
            by_formula: BTreeMap::new(),
            trie: vec![TrieNode::default()],
        };
        for (idx, record) in records.iter().enumerate() {
            if records[..idx].iter().any(|r| r.cid == record.cid) {
                return Err(EnrichmentError::Lexicon(format!(
                    "duplicate cid {}",
                    record.cid
                )));
            }
            let names = std::iter::once((&record.name, true))
                .chain(record.synonyms.iter().map(|s| (s, false)));
            for (name, preferred) in names {
                let folded = fold_name(name);
                if folded.is_empty() {
                    return Err(EnrichmentError::Lexicon(format!(
                        "empty name in record {}",
                        record.cid
                    )));
                }
                let hit = NameHit {
                    record: idx,
                    preferred,
                };
                if let Some(prev) = lexicon.by_name.insert(folded.clone(), hit) {
                    if prev.record != idx {
                        return Err(EnrichmentError::Lexicon(format!(
                            "name `{name}` maps to cids {} and {}",
                            records[prev.record].cid, record.cid
                        )));
                    }
                }
                lexicon.insert_trie(&folded, hit);
            }
            lexicon
                .by_formula
                .entry(record.formula.clone())
                .or_default()
                .push(idx);
        }
        for indices in lexicon.by_formula.values_mut() {
            indices.sort_by_key(|&i| records[i].cid);
        }
        lexicon.records = records;
        Ok(lexicon)
    }

    fn insert_trie(&mut self, folded: &str, hit: NameHit) {
        let mut node = 0;
        for c in folded.chars() {
            node = match self.trie[node].children.get(&c) {
                Some(&next) => next,
                None => {
                    self.trie.push(TrieNode::default());
                    let next = self.trie.len() - 1;
                    self.trie[node].children.insert(c, next);
                    next
                }
            };
        }
        // the preferred name wins if a synonym folds to the same text
        if self.trie[node].hit.map_or(true, |h| !h.preferred) {
            self.trie[node].hit = Some(hit);
        }
    }

    pub fn records(&self) -> &[LexiconRecord] {
        &self.records
    }

    pub fn record(&self, idx: usize) -> &LexiconRecord {
        &self.records[idx]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Case-insensitive lookup by preferred name or synonym.
    pub fn lookup_name(&self, name: &str) -> Option<&LexiconRecord> {
        self.by_name.get(&fold_name(name)).map(|h| &self.records[h.record])
    }

    /// Records sharing a Hill formula, ordered by ascending cid.
    pub fn lookup_formula(&self, hill: &str) -> Vec<&LexiconRecord> {
        self.by_formula
            .get(hill)
            .map(|ids| ids.iter().map(|&i| &self.records[i]).collect())
            .unwrap_or_default()
    }

    pub fn lookup_cid(&self, cid: u64) -> Option<&LexiconRecord> {
        self.records.iter().find(|r| r.cid == cid)
    }

    /// True when `token` is, verbatim, some record's name, synonym or formula.
    pub fn contains_verbatim(&self, token: &str) -> bool {
        self.by_formula.contains_key(token)
            || self.records.iter().any(|r| {
                r.name == token || r.synonyms.iter().any(|s| s == token)
            })
    }

    /// Longest dictionary entry starting at byte offset `start` of `text` and
    /// ending on a word boundary. Whitespace runs in `text` match a single
    /// space in an entry. Returns the end offset and the hit.
    pub fn longest_match_at(&self, text: &str, start: usize) -> Option<(usize, NameHit)> {
        let mut node = 0;
        let mut best = None;
        let mut chars = text[start..].char_indices().peekable();
        'scan: while let Some((offset, c)) = chars.next() {
            if c.is_whitespace() {
                match self.trie[node].children.get(&' ') {
                    Some(&next) => node = next,
                    None => break,
                }
                while chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
                    chars.next();
                }
                continue;
            }
            for lc in c.to_lowercase() {
                match self.trie[node].children.get(&lc) {
                    Some(&next) => node = next,
                    None => break 'scan,
                }
            }
            let end = start + offset + c.len_utf8();
            if let Some(hit) = self.trie[node].hit {
                let at_boundary = text[end..]
                    .chars()
                    .next()
                    .map_or(true, |next| !next.is_alphanumeric());
                if at_boundary {
                    best = Some((end, hit));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicon_loads_with_required_rows() {
        let lex = Lexicon::bundled();
        assert!(lex.len() >= 50);
        for (name, cid) in [
            ("Sodium carbonate", 10340),
            ("Magnesium sulphate", 24083),
            ("Water", 962),
            ("Methanol", 887),
        ] {
            assert_eq!(lex.lookup_name(name).unwrap().cid, cid);
        }
        let morphine = lex.lookup_name("morphine").unwrap();
        for syn in ["Morphinum", "MS Contin", "Oramorph", "Roxano"] {
            assert_eq!(lex.lookup_name(syn).unwrap(), morphine);
        }
    }

    #[test]
    fn bundled_weights_match_formulas() {
        let table = AtomicMassTable::standard();
        for r in Lexicon::bundled().records() {
            let w = molecular_weight(&parse_formula(&r.formula).unwrap(), table);
            assert!((w - r.weight).abs() <= WEIGHT_TOLERANCE, "{}", r.name);
        }
    }

    #[test]
    fn lookups_are_case_and_space_insensitive() {
        let lex = Lexicon::bundled();
        assert_eq!(lex.lookup_name("  sodium   CARBONATE ").unwrap().cid, 10340);
        assert!(lex.lookup_name("unobtainium").is_none());
    }

    #[test]
    fn formula_lookup_orders_isomers_by_cid() {
        let lex = Lexicon::bundled();
        let cids: Vec<u64> = lex.lookup_formula("C2H6O").iter().map(|r| r.cid).collect();
        assert_eq!(cids, vec![702, 8254]);
        assert!(lex.lookup_formula("Xe").is_empty());
    }

    #[test]
    fn rejects_duplicate_synonyms_and_bad_rows() {
        let dup = "# chemvis-lexicon v1\n1\tA\tH2O\t18.015\tshared\n2\tB\tCH4O\t32.042\tShared\n";
        assert!(Lexicon::from_tsv(dup).is_err());
        let wrong_weight = "# chemvis-lexicon v1\n1\tA\tH2O\t20.0\n";
        assert!(Lexicon::from_tsv(wrong_weight).is_err());
        let not_hill = "# chemvis-lexicon v1\n1\tA\tOH2\t18.015\n";
        assert!(Lexicon::from_tsv(not_hill).is_err());
        assert!(Lexicon::from_tsv("1\tA\tH2O\t18.015\n").is_err());
        let zero_cid = "# chemvis-lexicon v1\n0\tA\tH2O\t18.015\n";
        assert!(Lexicon::from_tsv(zero_cid).is_err());
    }

    #[test]
    fn longest_match_prefers_longer_entries_and_respects_boundaries() {
        let lex = Lexicon::bundled();
        let text = "dimethyl  ether and ethers";
        let (end, hit) = lex.longest_match_at(text, 0).unwrap();
        assert_eq!(&text[..end], "dimethyl  ether");
        assert_eq!(lex.record(hit.record).cid, 8254);
        // "ether" inside "ethers" is not a word match
        assert!(lex.longest_match_at(text, 20).is_none());
        assert!(lex.longest_match_at("watery", 0).is_none());
    }
}
