use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

const STOPWORDS_TXT: &str = include_str!("../../data/stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Lowercased alphanumeric runs of `text`.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Term frequencies over all sections, stopwords removed.
pub fn term_counts<S: AsRef<str>>(sections: &[S]) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for section in sections {
        for token in tokenize(section.as_ref()) {
            if !is_stopword(&token) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_lowercased_tokens_without_stopwords() {
        let counts = term_counts(&["Sodium carbonate and water.", "WATER, water; Über-Reaktion"]);
        let expected: BTreeMap<String, u32> = [
            ("carbonate", 1),
            ("reaktion", 1),
            ("sodium", 1),
            ("water", 3),
            ("über", 1),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert_eq!(counts, expected);
    }

    #[test]
    fn subscript_digits_stay_in_tokens() {
        let tokens: Vec<String> = tokenize("MgSO₄ (H2O)").collect();
        assert_eq!(tokens, vec!["mgso₄", "h2o"]);
    }

    #[test]
    fn stopword_list_loaded() {
        assert!(is_stopword("the"));
        assert!(!is_stopword("water"));
    }
}
