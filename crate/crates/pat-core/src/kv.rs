//! Flat `key = value` files with `[section]` headers.
//!
//! `#` starts a comment. Keys may repeat; repeated keys are read as lists.
//! Entries before the first header belong to the section named `""`.

use crate::error::{PatError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvSection {
    pub name: String,
    pub entries: Vec<KvEntry>,
}

impl KvSection {
    pub fn get(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a KvEntry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|e| {
                e.value.parse().map_err(|_| {
                    PatError::Parse(format!(
                        "line {}: cannot parse `{}` for [{}] {}",
                        e.line, e.value, self.name, key
                    ))
                })
            })
            .transpose()
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| PatError::Parse(format!("missing key [{}] {}", self.name, key)))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvDocument {
    pub sections: Vec<KvSection>,
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![KvSection::default()];
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| PatError::Parse(format!("line {}: unterminated header", no + 1)))?;
                sections.push(KvSection {
                    name: name.trim().to_string(),
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| PatError::Parse(format!("line {}: expected key = value", no + 1)))?;
            sections
                .last_mut()
                .expect("at least one section")
                .entries
                .push(KvEntry {
                    key: key.trim().to_string(),
                    value: value.trim().to_string(),
                    line: no + 1,
                });
        }
        Ok(KvDocument { sections })
    }

    pub fn section(&self, name: &str) -> Option<&KvSection> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Whitespace- or comma-separated floats.
pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| PatError::Parse(format!("not a number: `{t}`")))
        })
        .collect()
}
