//! `key = value` run files. Keys are the long CLI flag names without `--`;
//! `#` starts a comment, list values are comma separated and repeated keys
//! append.

use crate::error::{Error, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "coupling-ratio",
    "detuning-over-kappa",
    "tau-max",
    "tau-step",
    "measure-interval",
    "delta-detuning",
    "series",
    "mode",
    "output",
    "format",
    "preset",
    "oracle-check",
];

const LIST_KEYS: &[&str] = &["measure-interval", "delta-detuning", "series"];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<Entry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: format!("expected 'key = value', got '{content}'"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config {
                    line,
                    reason: format!("unknown key '{key}'"),
                });
            }
            if value.is_empty() {
                return Err(Error::Config {
                    line,
                    reason: format!("empty value for '{key}'"),
                });
            }
            if !LIST_KEYS.contains(&key.as_str()) && entries.iter().any(|e: &Entry| e.key == key) {
                return Err(Error::Config {
                    line,
                    reason: format!("duplicate key '{key}'"),
                });
            }
            entries.push(Entry { key, value, line });
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// All comma-separated items of a list key, tagged with their line.
    pub fn list(&self, key: &str) -> Vec<(String, usize)> {
        self.entries
            .iter()
            .filter(|e| e.key == key)
            .flat_map(|e| {
                e.value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(move |s| (s.to_string(), e.line))
            })
            .collect()
    }

    /// Parses a scalar value, reporting the offending line on failure.
    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| Error::Config {
                line: e.line,
                reason: format!("invalid value '{}' for '{key}'", e.value),
            }),
        }
    }

    pub fn parse_list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        self.list(key)
            .into_iter()
            .map(|(s, line)| {
                s.parse().map_err(|_| Error::Config {
                    line,
                    reason: format!("invalid value '{s}' for '{key}'"),
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_comments_and_lists() {
        let cfg = ConfigFile::parse(
            "# bad cavity\nn = 4\ncoupling-ratio=0.1   # R\n\nmeasure-interval = 0.5, 2\nmeasure-interval = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.parse_value::<u32>("n").unwrap(), Some(4));
        assert_eq!(cfg.parse_value::<f64>("coupling-ratio").unwrap(), Some(0.1));
        assert_eq!(cfg.parse_value::<f64>("tau-max").unwrap(), None);
        assert_eq!(cfg.parse_list::<f64>("measure-interval").unwrap(), vec![0.5, 2.0, 5.0]);
    }

    #[test]
    fn reports_line_numbers() {
        let err = ConfigFile::parse("n = 4\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
        let err = ConfigFile::parse("n 4\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = ConfigFile::parse("n = 4\nn = 5\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = ConfigFile::parse("tau-max =\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let cfg = ConfigFile::parse("\n\nn = four\n").unwrap();
        let err = cfg.parse_value::<u32>("n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }));
    }
}
