//! Polarity lexicons and valence-shifter tables.
//!
//! Words are normalized to lowercase unigrams; multi-word entries are dropped and
//! duplicates keep their first occurrence. The presence and kind of the valence
//! table selects the scoring algorithm for every lexicon in a [`LexiconSet`].

use std::collections::HashSet;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::io::{format_number, parse_number, Table};
use crate::naming::check_component;

fn normalize_word(word: &str) -> Option<String> {
    let w = word.trim().to_lowercase();
    if w.is_empty() || w.chars().any(char::is_whitespace) {
        None
    } else {
        Some(w)
    }
}

/// Inserts normalized entries, keeping the first occurrence of each word.
fn insert_normalized<V: Copy + PartialEq + std::fmt::Debug>(
    table_name: &str,
    map: &mut IndexMap<String, V>,
    word: &str,
    value: V,
) {
    let Some(w) = normalize_word(word) else {
        return;
    };
    match map.get(&w) {
        Some(existing) if *existing != value => {
            log::warn!(
                "`{table_name}`: duplicate word `{w}` ({value:?}) ignored, keeping {existing:?}"
            );
        }
        Some(_) => {}
        None => {
            map.insert(w, value);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    name: String,
    entries: IndexMap<String, f64>,
}

impl Lexicon {
    pub fn new<S: AsRef<str>>(
        name: impl Into<String>,
        entries: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Lexicon> {
        let name = name.into();
        check_component(&name)?;
        let mut map = IndexMap::new();
        for (word, score) in entries {
            if !score.is_finite() {
                return Err(Error::NonNumeric {
                    column: name.clone(),
                    value: score.to_string(),
                });
            }
            insert_normalized(&name, &mut map, word.as_ref(), score);
        }
        if map.is_empty() {
            return Err(Error::EmptyLexicon(name));
        }
        Ok(Lexicon { name, entries: map })
    }

    /// Two-column table: word, score.
    pub fn from_table(name: impl Into<String>, table: &Table) -> Result<Lexicon> {
        let name = name.into();
        if table.header.len() != 2 {
            return Err(Error::Malformed {
                line: 1,
                message: format!("lexicon needs 2 columns (word, score), found {}", table.header.len()),
            });
        }
        let mut entries = Vec::with_capacity(table.rows.len());
        for (i, row) in table.rows.iter().enumerate() {
            let score = parse_number(&table.header[1], &row[1]).map_err(|e| Error::Malformed {
                line: i as u64 + 2,
                message: e.to_string(),
            })?;
            entries.push((row[0].as_str(), score));
        }
        Lexicon::new(name, entries)
    }

    /// Reads a `word,score` CSV with a header row. The lexicon is named after the file stem.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Lexicon> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidName {
                name: path.display().to_string(),
                reason: "cannot derive a lexicon name from the path".into(),
            })?;
        Lexicon::read_csv_named(name, path)
    }

    pub fn read_csv_named(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Lexicon> {
        let path = path.as_ref();
        let table = Table::read_csv(path)?;
        Lexicon::from_table(name, &table).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_table(&self) -> Table {
        Table::new(
            vec!["word".into(), "score".into()],
            self.entries
                .iter()
                .map(|(w, s)| vec![w.clone(), format_number(*s)])
                .collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(w, s)| (w.as_str(), *s))
    }
}

/// Valence shifter types of the cluster approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShifterKind {
    Negator = 1,
    Amplifier = 2,
    Deamplifier = 3,
    /// Only used in sentence-level scoring.
    Adversative = 4,
}

impl TryFrom<i64> for ShifterKind {
    type Error = Error;

    fn try_from(code: i64) -> Result<Self> {
        match code {
            1 => Ok(ShifterKind::Negator),
            2 => Ok(ShifterKind::Amplifier),
            3 => Ok(ShifterKind::Deamplifier),
            4 => Ok(ShifterKind::Adversative),
            other => Err(Error::InvalidValue(format!(
                "valence shifter type {other} (expected 1, 2, 3 or 4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoringMode {
    Unigram,
    Bigram,
    Cluster,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValenceTable {
    /// Word → multiplier applied to the next word's score.
    Bigram(IndexMap<String, f64>),
    /// Word → shifter type.
    Cluster(IndexMap<String, ShifterKind>),
}

impl ValenceTable {
    pub fn bigram<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let mut map = IndexMap::new();
        for (word, v) in entries {
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    column: "v".into(),
                    value: v.to_string(),
                });
            }
            insert_normalized("valence", &mut map, word.as_ref(), v);
        }
        if map.is_empty() {
            return Err(Error::EmptyLexicon("valence".into()));
        }
        Ok(ValenceTable::Bigram(map))
    }

    pub fn cluster<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, ShifterKind)>) -> Result<Self> {
        let mut map = IndexMap::new();
        for (word, kind) in entries {
            insert_normalized("valence", &mut map, word.as_ref(), kind);
        }
        if map.is_empty() {
            return Err(Error::EmptyLexicon("valence".into()));
        }
        Ok(ValenceTable::Cluster(map))
    }

    /// Two columns: a word column and either `v` (or `y`) with shift values, which
    /// selects bigram mode, or `t` with type codes 1-4, which selects cluster mode.
    pub fn from_table(table: &Table) -> Result<Self> {
        let has = |n: &str| table.header.iter().any(|h| h == n);
        if has("t") && (has("v") || has("y")) {
            return Err(Error::Malformed {
                line: 1,
                message: "valence table has both shift values and type codes".into(),
            });
        }
        if table.header.len() != 2 {
            return Err(Error::Malformed {
                line: 1,
                message: format!("valence table needs 2 columns, found {}", table.header.len()),
            });
        }
        let second = table.header[1].as_str();
        match second {
            "v" | "y" => {
                let mut entries = Vec::with_capacity(table.rows.len());
                for (i, row) in table.rows.iter().enumerate() {
                    let v = parse_number(second, &row[1]).map_err(|e| Error::Malformed {
                        line: i as u64 + 2,
                        message: e.to_string(),
                    })?;
                    entries.push((row[0].as_str(), v));
                }
                ValenceTable::bigram(entries)
            }
            "t" => {
                let mut entries = Vec::with_capacity(table.rows.len());
                for (i, row) in table.rows.iter().enumerate() {
                    let line = i as u64 + 2;
                    let code: i64 = row[1].trim().parse().map_err(|_| Error::Malformed {
                        line,
                        message: format!("type code `{}` is not an integer", row[1]),
                    })?;
                    let kind = ShifterKind::try_from(code).map_err(|e| Error::Malformed {
                        line,
                        message: e.to_string(),
                    })?;
                    entries.push((row[0].as_str(), kind));
                }
                ValenceTable::cluster(entries)
            }
            other => Err(Error::Malformed {
                line: 1,
                message: format!("second valence column must be `v` or `t`, found `{other}`"),
            }),
        }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        ValenceTable::from_table(&Table::read_csv(path)?).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn mode(&self) -> ScoringMode {
        match self {
            ValenceTable::Bigram(_) => ScoringMode::Bigram,
            ValenceTable::Cluster(_) => ScoringMode::Cluster,
        }
    }
}

/// Ordered lexicons plus the optional valence table shared by all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconSet {
    lexicons: Vec<Lexicon>,
    valence: Option<ValenceTable>,
}

impl LexiconSet {
    pub fn new(lexicons: Vec<Lexicon>, valence: Option<ValenceTable>) -> Result<Self> {
        if lexicons.is_empty() {
            return Err(Error::InvalidParameter("a lexicon set needs at least one lexicon".into()));
        }
        let mut names = HashSet::new();
        for lex in &lexicons {
            if !names.insert(lex.name()) {
                return Err(Error::NameCollision(lex.name().to_string()));
            }
        }
        Ok(LexiconSet { lexicons, valence })
    }

    pub fn lexicons(&self) -> &[Lexicon] {
        &self.lexicons
    }

    pub fn valence(&self) -> Option<&ValenceTable> {
        self.valence.as_ref()
    }

    pub fn mode(&self) -> ScoringMode {
        self.valence.as_ref().map_or(ScoringMode::Unigram, ValenceTable::mode)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.lexicons.iter().map(Lexicon::name)
    }

    pub fn len(&self) -> usize {
        self.lexicons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicons.is_empty()
    }
}

/// Language code → lexicon set, for corpora with a language column.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageDispatch {
    sets: IndexMap<String, LexiconSet>,
}

impl LanguageDispatch {
    pub fn new<S: Into<String>>(sets: impl IntoIterator<Item = (S, LexiconSet)>) -> Result<Self> {
        let mut map = IndexMap::new();
        let mut names = HashSet::new();
        for (lang, set) in sets {
            let lang = lang.into();
            for name in set.names() {
                if !names.insert(name.to_string()) {
                    return Err(Error::NameCollision(name.to_string()));
                }
            }
            if map.insert(lang.clone(), set).is_some() {
                return Err(Error::NameCollision(lang));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidParameter("empty language dispatch".into()));
        }
        Ok(LanguageDispatch { sets: map })
    }

    pub fn get(&self, language: &str) -> Option<&LexiconSet> {
        self.sets.get(language)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexiconSet)> {
        self.sets.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_entries() {
        let lex = Lexicon::new("l", [("Good", 1.0), ("good", 1.0), ("bad bad", -1.0)]).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.get("good"), Some(1.0));
    }

    #[test]
    fn first_duplicate_wins() {
        let lex = Lexicon::new("l", [("up", 1.0), ("UP", -1.0)]).unwrap();
        assert_eq!(lex.get("up"), Some(1.0));
    }

    #[test]
    fn normalization_is_idempotent() {
        let lex = Lexicon::new("l", [(" Strong ", 0.5), ("weak", -0.25), ("two words", 1.0)]).unwrap();
        let again = Lexicon::new("l", lex.iter().map(|(w, s)| (w.to_string(), s))).unwrap();
        assert_eq!(lex, again);
    }

    #[test]
    fn empty_lexicon_rejected() {
        assert!(matches!(
            Lexicon::new("l", [("a b", 1.0)]),
            Err(Error::EmptyLexicon(_))
        ));
    }

    #[test]
    fn valence_mode_from_header() {
        let t = Table::new(
            vec!["word".into(), "t".into()],
            vec![vec!["not".into(), "1".into()], vec!["very".into(), "2".into()]],
        );
        let v = ValenceTable::from_table(&t).unwrap();
        assert_eq!(v.mode(), ScoringMode::Cluster);

        let t = Table::new(vec!["word".into(), "v".into()], vec![vec!["not".into(), "-1".into()]]);
        assert_eq!(ValenceTable::from_table(&t).unwrap().mode(), ScoringMode::Bigram);

        let both = Table::new(
            vec!["word".into(), "v".into(), "t".into()],
            vec![vec!["not".into(), "-1".into(), "1".into()]],
        );
        assert!(ValenceTable::from_table(&both).is_err());

        let bad_code = Table::new(vec!["word".into(), "t".into()], vec![vec!["so".into(), "5".into()]]);
        assert!(matches!(ValenceTable::from_table(&bad_code), Err(Error::Malformed { line: 2, .. })));
    }

    #[test]
    fn mode_defaults_to_unigram() {
        let set = LexiconSet::new(vec![Lexicon::new("l", [("good", 1.0)]).unwrap()], None).unwrap();
        assert_eq!(set.mode(), ScoringMode::Unigram);
    }

    #[test]
    fn set_rejects_duplicate_names() {
        let a = Lexicon::new("l", [("good", 1.0)]).unwrap();
        assert!(LexiconSet::new(vec![a.clone(), a], None).is_err());
    }

    #[test]
    fn dispatch_rejects_shared_lexicon_names() {
        let a = LexiconSet::new(vec![Lexicon::new("GI", [("good", 1.0)]).unwrap()], None).unwrap();
        assert!(matches!(
            LanguageDispatch::new([("en", a.clone()), ("fr", a)]),
            Err(Error::NameCollision(_))
        ));
    }
}
