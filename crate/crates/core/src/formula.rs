//! Molecular-formula parsing, Hill-order canonicalization and molecular weights.
//!
//! Accepted notation: element symbols with optional counts, nested `()` / `[]`
//! groups with optional multipliers, middle-dot hydrate segments with an
//! optional leading coefficient (`CuSO4·5H2O`), ASCII or subscript digits and
//! interior whitespace (`Na ₂ CO ₃`). Charges, isotope labels and repeating
//! units are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::periodic::{AtomicMassTable, ElementSymbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("empty formula")]
    EmptyInput,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("malformed formula: {0}")]
    MalformedFormula(String),
}

/// Multiset of elements with strictly positive counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<ElementSymbol, u32>", into = "BTreeMap<ElementSymbol, u32>")]
pub struct Composition {
    counts: BTreeMap<ElementSymbol, u32>,
}

impl Composition {
    /// Build from explicit counts; repeated elements accumulate. Zero counts
    /// and an empty input are rejected.
    pub fn from_counts<I>(counts: I) -> Result<Self, FormulaError>
    where
        I: IntoIterator<Item = (ElementSymbol, u32)>,
    {
        let mut out = Composition::default();
        for (element, n) in counts {
            if n == 0 {
                return Err(FormulaError::MalformedFormula(format!(
                    "zero count for {element}"
                )));
            }
            out.add_element(element, n)?;
        }
        if out.is_empty() {
            return Err(FormulaError::EmptyInput);
        }
        Ok(out)
    }

    pub fn get(&self, element: ElementSymbol) -> u32 {
        self.counts.get(&element).copied().unwrap_or(0)
    }

    /// Elements with counts, in atomic-number order.
    pub fn iter(&self) -> impl Iterator<Item = (ElementSymbol, u32)> + '_ {
        self.counts.iter().map(|(e, n)| (*e, *n))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct_elements(&self) -> usize {
        self.counts.len()
    }

    pub fn total_atoms(&self) -> u64 {
        self.counts.values().map(|&n| n as u64).sum()
    }

    /// Every count multiplied by `factor`, or `None` on overflow or a zero factor.
    pub fn scaled(&self, factor: u32) -> Option<Composition> {
        if factor == 0 {
            return None;
        }
        let mut counts = BTreeMap::new();
        for (e, n) in self.iter() {
            counts.insert(e, n.checked_mul(factor)?);
        }
        Some(Composition { counts })
    }

    /// Element-wise sum, or `None` on overflow.
    pub fn checked_add(&self, other: &Composition) -> Option<Composition> {
        let mut out = self.clone();
        for (e, n) in other.iter() {
            out.add_element(e, n).ok()?;
        }
        Some(out)
    }

    fn add_element(&mut self, element: ElementSymbol, n: u32) -> Result<(), FormulaError> {
        let slot = self.counts.entry(element).or_insert(0);
        *slot = slot
            .checked_add(n)
            .ok_or_else(|| FormulaError::MalformedFormula("count overflow".into()))?;
        Ok(())
    }

    fn merge_scaled(&mut self, other: &Composition, factor: u32) -> Result<(), FormulaError> {
        for (e, n) in other.iter() {
            let n = n
                .checked_mul(factor)
                .ok_or_else(|| FormulaError::MalformedFormula("count overflow".into()))?;
            self.add_element(e, n)?;
        }
        Ok(())
    }
}

impl Add for &Composition {
    type Output = Composition;

    /// Panics on count overflow; use [`Composition::checked_add`] otherwise.
    fn add(self, rhs: &Composition) -> Composition {
        self.checked_add(rhs).expect("composition count overflow")
    }
}

impl TryFrom<BTreeMap<ElementSymbol, u32>> for Composition {
    type Error = FormulaError;

    fn try_from(counts: BTreeMap<ElementSymbol, u32>) -> Result<Self, Self::Error> {
        Composition::from_counts(counts)
    }
}

impl From<Composition> for BTreeMap<ElementSymbol, u32> {
    fn from(c: Composition) -> Self {
        c.counts
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical_hill(self))
    }
}

impl std::str::FromStr for Composition {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

fn subscript_to_ascii(c: char) -> Option<char> {
    match c {
        '₀'..='₉' => char::from_digit(c as u32 - '₀' as u32, 10),
        _ => None,
    }
}

fn is_hydrate_dot(c: char) -> bool {
    matches!(c, '·' | '•' | '⋅' | '∙')
}

/// Map subscript digits to ASCII and drop whitespace.
pub(crate) fn normalize_formula_text(text: &str) -> String {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| subscript_to_ascii(c).unwrap_or(c))
        .collect()
}

/// Parse formula notation into a [`Composition`].
pub fn parse_formula(text: &str) -> Result<Composition, FormulaError> {
    let normalized = normalize_formula_text(text);
    if normalized.is_empty() {
        return Err(FormulaError::EmptyInput);
    }
    let chars: Vec<char> = normalized.chars().collect();
    let mut total = Composition::default();
    for segment in chars.split(|&c| is_hydrate_dot(c)) {
        if segment.is_empty() {
            return Err(FormulaError::MalformedFormula(
                "empty hydrate segment".into(),
            ));
        }
        let mut parser = Parser {
            chars: segment,
            pos: 0,
        };
        let coefficient = parser.count()?.unwrap_or(1);
        let part = parser.groups(None)?;
        if parser.pos != segment.len() {
            let c = segment[parser.pos];
            return Err(FormulaError::MalformedFormula(format!(
                "unbalanced `{c}`"
            )));
        }
        total.merge_scaled(&part, coefficient)?;
    }
    Ok(total)
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    /// An optional run of ASCII digits; zero is an error.
    fn count(&mut self) -> Result<Option<u32>, FormulaError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let n: u32 = digits
            .parse()
            .map_err(|_| FormulaError::MalformedFormula(format!("count `{digits}` too large")))?;
        if n == 0 {
            return Err(FormulaError::MalformedFormula("zero count".into()));
        }
        Ok(Some(n))
    }

    fn groups(&mut self, close: Option<char>) -> Result<Composition, FormulaError> {
        let mut out = Composition::default();
        loop {
            match self.peek() {
                None => {
                    if let Some(c) = close {
                        return Err(FormulaError::MalformedFormula(format!("missing `{c}`")));
                    }
                    break;
                }
                Some(c @ ('(' | '[')) => {
                    self.pos += 1;
                    let want = if c == '(' { ')' } else { ']' };
                    let inner = self.groups(Some(want))?;
                    self.pos += 1;
                    let n = self.count()?.unwrap_or(1);
                    out.merge_scaled(&inner, n)?;
                }
                Some(c @ (')' | ']')) => {
                    if close == Some(c) {
                        break;
                    }
                    return Err(FormulaError::MalformedFormula(format!("unbalanced `{c}`")));
                }
                Some(c) if c.is_ascii_uppercase() => {
                    let element = self.element()?;
                    let n = self.count()?.unwrap_or(1);
                    out.add_element(element, n)?;
                }
                Some(c) if c.is_ascii_digit() => {
                    return Err(FormulaError::MalformedFormula(
                        "dangling multiplier".into(),
                    ));
                }
                Some(c) => {
                    return Err(FormulaError::MalformedFormula(format!(
                        "unexpected `{c}`"
                    )));
                }
            }
        }
        if out.is_empty() {
            return Err(FormulaError::MalformedFormula("empty group".into()));
        }
        Ok(out)
    }

    fn element(&mut self) -> Result<ElementSymbol, FormulaError> {
        let start = self.pos;
        self.pos += 1;
        while self.peek().is_some_and(|c| c.is_ascii_lowercase()) {
            self.pos += 1;
        }
        let symbol: String = self.chars[start..self.pos].iter().collect();
        ElementSymbol::from_symbol(&symbol).ok_or(FormulaError::UnknownElement(symbol))
    }
}

/// Hill-order rendering: C, then H, then the rest alphabetically when carbon
/// is present; otherwise everything alphabetically. Counts of 1 are omitted.
pub fn canonical_hill(composition: &Composition) -> String {
    let mut elements: Vec<(ElementSymbol, u32)> = composition.iter().collect();
    let carbon = ElementSymbol::from_symbol("C");
    let hydrogen = ElementSymbol::from_symbol("H");
    let has_carbon = composition.get(carbon.expect("C in table")) > 0;
    let rank = |e: ElementSymbol| -> u8 {
        if has_carbon && Some(e) == carbon {
            0
        } else if has_carbon && Some(e) == hydrogen {
            1
        } else {
            2
        }
    };
    elements.sort_by(|(a, _), (b, _)| rank(*a).cmp(&rank(*b)).then(a.symbol().cmp(b.symbol())));
    let mut out = String::new();
    for (e, n) in elements {
        out.push_str(e.symbol());
        if n > 1 {
            out.push_str(&n.to_string());
        }
    }
    out
}

/// Σ count · atomic weight, in g/mol.
pub fn molecular_weight(composition: &Composition, table: &AtomicMassTable) -> f64 {
    composition
        .iter()
        .map(|(e, n)| n as f64 * table.mass_of(e))
        .sum()
}

/// Render ASCII counts as Unicode subscripts (`H2O` → `H₂O`).
pub fn to_subscript_notation(formula: &str) -> String {
    formula
        .chars()
        .map(|c| match c.to_digit(10) {
            Some(d) => char::from_u32('₀' as u32 + d).unwrap_or(c),
            None => c,
        })
        .collect()
}
