//! Structured (XML) full-text parsing into a title and ordered sections.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Section label for text that sits outside every mapped element.
pub const LOOSE_TEXT_LABEL: &str = "text";

/// Maps XML element names (local names, case-sensitive) to section labels.
///
/// Elements mapped to `title` supply the document title; the first one wins
/// and later ones become `heading` sections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagMap(BTreeMap<String, String>);

impl Default for TagMap {
    fn default() -> Self {
        let pairs = [
            ("title", "title"),
            ("article-title", "title"),
            ("abstract", "abstract"),
            ("heading", "heading"),
            ("h1", "heading"),
            ("h2", "heading"),
            ("h3", "heading"),
            ("p", "paragraph"),
            ("para", "paragraph"),
            ("paragraph", "paragraph"),
            ("caption", "paragraph"),
        ];
        TagMap(
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        )
    }
}

impl TagMap {
    pub fn new<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        TagMap(pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }

    pub fn label(&self, tag: &str) -> Option<&str> {
        self.0.get(tag).map(String::as_str)
    }

    /// Parse `tag=label` pairs separated by commas.
    pub fn parse_pairs(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (tag, label) = pair
                .split_once('=')
                .ok_or_else(|| format!("tag map entry `{pair}` is not tag=label"))?;
            map.insert(tag.trim().to_string(), label.trim().to_string());
        }
        Ok(TagMap(map))
    }
}

/// Collapse whitespace runs to one space and trim.
pub(crate) fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Walker<'m> {
    tags: &'m TagMap,
    title: Option<String>,
    sections: Vec<(String, String)>,
    loose: String,
}

impl Walker<'_> {
    fn flush_loose(&mut self) {
        let text = normalize_whitespace(&self.loose);
        self.loose.clear();
        if !text.is_empty() {
            self.sections.push((LOOSE_TEXT_LABEL.to_string(), text));
        }
    }

    fn push_section(&mut self, label: &str, text: String) {
        let text = normalize_whitespace(&text);
        if text.is_empty() {
            return;
        }
        if label == "title" {
            if self.title.is_none() {
                self.title = Some(text);
                return;
            }
            self.sections.push(("heading".to_string(), text));
        } else {
            self.sections.push((label.to_string(), text));
        }
    }

    fn has_mapped_descendant(&self, node: roxmltree::Node) -> bool {
        node.descendants()
            .skip(1)
            .any(|d| d.is_element() && self.tags.label(d.tag_name().name()).is_some())
    }

    /// Walk in document order. A mapped element without mapped descendants
    /// becomes one section holding all of its text; a mapped element that
    /// contains other mapped elements keeps only its loose text under its own
    /// label. Text outside mapped elements goes to a catch-all section.
    fn walk(&mut self, node: roxmltree::Node, enclosing: Option<&str>) {
        for child in node.children() {
            if child.is_text() {
                self.loose.push_str(child.text().unwrap_or_default());
                continue;
            }
            if !child.is_element() {
                continue;
            }
            let label = self.tags.label(child.tag_name().name()).map(str::to_string);
            match label {
                Some(label) if !self.has_mapped_descendant(child) => {
                    self.flush_pending(enclosing);
                    let text: String = child
                        .descendants()
                        .filter(|d| d.is_text())
                        .filter_map(|d| d.text())
                        .collect();
                    self.push_section(&label, text);
                }
                Some(label) => {
                    self.flush_pending(enclosing);
                    self.walk(child, Some(&label));
                    self.flush_pending(Some(&label));
                }
                None => self.walk(child, enclosing),
            }
        }
    }

    fn flush_pending(&mut self, enclosing: Option<&str>) {
        match enclosing {
            Some(label) => {
                let text = std::mem::take(&mut self.loose);
                self.push_section(label, text);
            }
            None => self.flush_loose(),
        }
    }
}

/// Parse an XML full text into `(title, sections)`. The title is empty when
/// no title element exists.
pub fn parse_structured(
    xml: &[u8],
    tags: &TagMap,
) -> Result<(String, Vec<(String, String)>), IngestError> {
    let text = std::str::from_utf8(xml)
        .map_err(|e| IngestError::MalformedDocument(format!("invalid UTF-8: {e}")))?;
    let doc = roxmltree::Document::parse_with_options(
        text,
        roxmltree::ParsingOptions {
            allow_dtd: true,
            ..Default::default()
        },
    )
    .map_err(|e| IngestError::MalformedDocument(e.to_string()))?;
    let mut walker = Walker {
        tags,
        title: None,
        sections: Vec::new(),
        loose: String::new(),
    };
    let root = doc.root_element();
    match tags.label(root.tag_name().name()) {
        Some(label) if !walker.has_mapped_descendant(root) => {
            let text: String = root
                .descendants()
                .filter(|d| d.is_text())
                .filter_map(|d| d.text())
                .collect();
            walker.push_section(label, text);
        }
        Some(label) => {
            let label = label.to_string();
            walker.walk(root, Some(&label));
            walker.flush_pending(Some(&label));
        }
        None => {
            walker.walk(root, None);
            walker.flush_loose();
        }
    }
    Ok((walker.title.unwrap_or_default(), walker.sections))
}
