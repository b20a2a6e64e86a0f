//! Embedded periodic table: element symbols, atomic numbers and conventional
//! atomic weights, loaded from `data/elements.tsv`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const ELEMENTS_TSV: &str = include_str!("../data/elements.tsv");
const ELEMENTS_HEADER: &str = "# chemvis-elements v1";

/// A chemical element, identified by atomic number.
///
/// Only the 118 symbols of the embedded table are constructible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSymbol(u8);

impl ElementSymbol {
    pub fn from_symbol(symbol: &str) -> Option<Self> {
        AtomicMassTable::standard()
            .entries
            .iter()
            .position(|e| e.symbol == symbol)
            .map(|i| ElementSymbol(i as u8 + 1))
    }

    pub fn from_atomic_number(z: u8) -> Option<Self> {
        (1..=AtomicMassTable::standard().len() as u8)
            .contains(&z)
            .then_some(ElementSymbol(z))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        &AtomicMassTable::standard().entries[self.0 as usize - 1].symbol
    }

    /// Every element in the table, in atomic-number order.
    pub fn all() -> impl Iterator<Item = ElementSymbol> {
        (1..=AtomicMassTable::standard().len() as u8).map(ElementSymbol)
    }
}

impl fmt::Display for ElementSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for ElementSymbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for ElementSymbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ElementSymbol::from_symbol(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown element `{s}`")))
    }
}

#[derive(Debug, Clone)]
struct ElementEntry {
    symbol: String,
    mass: f64,
}

/// Atomic weights in g/mol for every element of the embedded table.
#[derive(Debug, Clone)]
pub struct AtomicMassTable {
    entries: Vec<ElementEntry>,
}

impl AtomicMassTable {
    /// The table shipped with the crate.
    pub fn standard() -> &'static AtomicMassTable {
        static TABLE: OnceLock<AtomicMassTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            AtomicMassTable::from_tsv(ELEMENTS_TSV).expect("embedded element table is valid")
        })
    }

    /// Parse a table in the `chemvis-elements v1` format. Records must be
    /// listed in atomic-number order starting at 1.
    pub fn from_tsv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(ELEMENTS_HEADER) {
            return Err(format!("missing `{ELEMENTS_HEADER}` header"));
        }
        let mut entries = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(format!("line {}: expected 3 fields", lineno + 2));
            }
            let z: usize = fields[1]
                .parse()
                .map_err(|_| format!("line {}: bad atomic number", lineno + 2))?;
            if z != entries.len() + 1 {
                return Err(format!("line {}: atomic number out of order", lineno + 2));
            }
            let mass: f64 = fields[2]
                .parse()
                .map_err(|_| format!("line {}: bad atomic weight", lineno + 2))?;
            entries.push(ElementEntry {
                symbol: fields[0].to_string(),
                mass,
            });
        }
        if entries.is_empty() || entries.len() > u8::MAX as usize {
            return Err("element count out of range".into());
        }
        Ok(AtomicMassTable { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass_of(&self, element: ElementSymbol) -> f64 {
        self.entries[element.0 as usize - 1].mass
    }
}
