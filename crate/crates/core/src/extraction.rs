//! Chemical mention detection: lexicon names/synonyms plus guarded formula
//! literals, and per-document aggregation into entity occurrences.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::enrichment::{EntityKey, Lexicon, ResolvedEntity};
use crate::formula::{normalize_formula_text, parse_formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Name,
    Synonym,
    Formula,
}

/// Location of a mention: section index and byte range within that section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub section: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    fn overlaps(&self, other: &Span) -> bool {
        self.section == other.section && self.start < other.end && other.start < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub surface: String,
    pub span: Span,
    pub kind: MentionKind,
}

impl Mention {
    #[cfg(test)]
    pub(crate) fn test_formula(surface: &str) -> Self {
        Mention {
            surface: surface.to_string(),
            span: Span {
                section: 0,
                start: 0,
                end: surface.len(),
            },
            kind: MentionKind::Formula,
        }
    }
}

/// All mentions of one entity within a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityOccurrence {
    pub key: EntityKey,
    pub frequency: u32,
    pub entity: ResolvedEntity,
    pub mentions: Vec<Mention>,
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '(' | ')' | '[' | ']' | '·' | '•' | '⋅' | '∙')
}

fn is_subscript_digit(c: char) -> bool {
    ('₀'..='₉').contains(&c)
}

/// Decide whether a formula-shaped token should count as a formula mention.
///
/// Accepted when the token parses and at least one holds: it has a subscript
/// digit; it has an explicit count greater than one; it names two or more
/// distinct elements and is not an all-capitals word; it appears verbatim in
/// the lexicon.
pub fn formula_guard(token: &str, lexicon: &Lexicon) -> bool {
    let Ok(composition) = parse_formula(token) else {
        return false;
    };
    if token.chars().any(is_subscript_digit) {
        return true;
    }
    let normalized = normalize_formula_text(token);
    let has_count_above_one = normalized
        .split(|c: char| !c.is_ascii_digit())
        .filter(|run| !run.is_empty())
        .any(|run| run.parse::<u64>().map_or(true, |n| n > 1));
    if has_count_above_one {
        return true;
    }
    if composition.distinct_elements() >= 2 && token.chars().any(|c| c.is_lowercase()) {
        return true;
    }
    lexicon.contains_verbatim(token)
}

/// Split off enclosing brackets that do not belong to the formula, e.g. the
/// parentheses in `(H2O)` or the trailing one in `CaCl2)`.
fn trim_unbalanced(token: &str) -> (usize, usize) {
    let bytes = token.as_bytes();
    let (mut lo, mut hi) = (0, bytes.len());
    loop {
        let opens = bytes[lo..hi].iter().filter(|&&b| b == b'(' || b == b'[').count();
        let closes = bytes[lo..hi].iter().filter(|&&b| b == b')' || b == b']').count();
        if lo < hi && opens > closes && matches!(bytes[lo], b'(' | b'[') {
            lo += 1;
        } else if lo < hi && closes > opens && matches!(bytes[hi - 1], b')' | b']') {
            hi -= 1;
        } else if lo + 1 < hi
            && opens == closes
            && opens > 0
            && bytes[lo] == b'('
            && bytes[hi - 1] == b')'
            && !token[lo + 1..hi - 1].contains(['(', ')'])
        {
            // a fully wrapped token such as `(NaCl)`
            lo += 1;
            hi -= 1;
        } else {
            return (lo, hi);
        }
    }
}

fn formula_candidates(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some((start, c)) = iter.next() {
        if !is_token_char(c) {
            continue;
        }
        let mut end = start + c.len_utf8();
        while let Some(&(i, c)) = iter.peek() {
            if !is_token_char(c) {
                break;
            }
            end = i + c.len_utf8();
            iter.next();
        }
        let (lo, hi) = trim_unbalanced(&text[start..end]);
        if lo < hi {
            out.push((start + lo, start + hi));
        }
    }
    out
}

/// Find all non-overlapping chemical mentions, ordered by (section, start).
///
/// Overlaps resolve to the longest candidate, then the earliest start, then
/// dictionary matches over formula literals.
pub fn extract_mentions<S: AsRef<str>>(sections: &[S], lexicon: &Lexicon) -> Vec<Mention> {
    let mut candidates: Vec<Mention> = Vec::new();
    for (section, text) in sections.iter().enumerate() {
        let text = text.as_ref();
        let mut prev: Option<char> = None;
        for (start, c) in text.char_indices() {
            let at_word_start = prev.map_or(true, |p| !p.is_alphanumeric());
            prev = Some(c);
            if !at_word_start || c.is_whitespace() {
                continue;
            }
            if let Some((end, hit)) = lexicon.longest_match_at(text, start) {
                candidates.push(Mention {
                    surface: text[start..end].to_string(),
                    span: Span { section, start, end },
                    kind: if hit.preferred {
                        MentionKind::Name
                    } else {
                        MentionKind::Synonym
                    },
                });
            }
        }
        for (start, end) in formula_candidates(text) {
            let token = &text[start..end];
            if formula_guard(token, lexicon) {
                candidates.push(Mention {
                    surface: token.to_string(),
                    span: Span { section, start, end },
                    kind: MentionKind::Formula,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.span
            .len()
            .cmp(&a.span.len())
            .then(a.span.section.cmp(&b.span.section))
            .then(a.span.start.cmp(&b.span.start))
            .then((a.kind == MentionKind::Formula).cmp(&(b.kind == MentionKind::Formula)))
    });
    let mut accepted: Vec<Mention> = Vec::new();
    for candidate in candidates {
        if !accepted.iter().any(|m| m.span.overlaps(&candidate.span)) {
            accepted.push(candidate);
        }
    }
    accepted.sort_by_key(|m| m.span);
    accepted
}

/// Group mentions by the key of their resolved entity. Occurrences are listed
/// in order of first mention; each keeps the entity resolved for its first
/// mention.
pub fn aggregate_occurrences<F>(mentions: Vec<Mention>, mut resolve: F) -> Vec<EntityOccurrence>
where
    F: FnMut(&Mention) -> ResolvedEntity,
{
    let mut index: HashMap<EntityKey, usize> = HashMap::new();
    let mut out: Vec<EntityOccurrence> = Vec::new();
    for mention in mentions {
        let entity = resolve(&mention);
        match index.get(&entity.key) {
            Some(&i) => {
                out[i].frequency += 1;
                out[i].mentions.push(mention);
            }
            None => {
                index.insert(entity.key.clone(), out.len());
                out.push(EntityOccurrence {
                    key: entity.key.clone(),
                    frequency: 1,
                    entity,
                    mentions: vec![mention],
                });
            }
        }
    }
    out
}
