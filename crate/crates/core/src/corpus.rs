//! Dated document collection with per-document feature weights in `[0, 1]`.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use chrono::NaiveDate;
use regex::Regex;

use crate::error::{Error, Result};
use crate::frequency::Frequency;
use crate::io::{format_number, parse_date, parse_number, Table};
use crate::naming::check_component;
use crate::tokenize;

/// Name of the feature injected when a corpus carries no features.
pub const DUMMY_FEATURE: &str = "dummyFeature";

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentRecord {
    pub id: String,
    pub date: NaiveDate,
    pub text: String,
    pub language: Option<String>,
    /// Weights aligned with [`Corpus::feature_names`].
    pub features: Vec<f64>,
}

impl DocumentRecord {
    pub fn new(id: impl Into<String>, date: NaiveDate, text: impl Into<String>) -> Self {
        DocumentRecord {
            id: id.into(),
            date,
            text: text.into(),
            language: None,
            features: Vec::new(),
        }
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn with_features(mut self, features: Vec<f64>) -> Self {
        self.features = features;
        self
    }
}

/// Rule generating a feature in [`Corpus::add_features`].
#[derive(Debug, Clone)]
pub enum FeatureRule {
    /// Matched case-insensitively against the token stream.
    Keywords(Vec<String>),
    /// Matched against the raw text.
    Regex(String),
}

#[derive(Debug, Clone)]
pub struct FeatureSpec {
    pub name: String,
    pub rule: FeatureRule,
}

impl FeatureSpec {
    pub fn keywords<S: Into<String>>(name: impl Into<String>, words: impl IntoIterator<Item = S>) -> Self {
        FeatureSpec {
            name: name.into(),
            rule: FeatureRule::Keywords(words.into_iter().map(Into::into).collect()),
        }
    }

    pub fn regex(name: impl Into<String>, pattern: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            rule: FeatureRule::Regex(pattern.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<DocumentRecord>,
    feature_names: Vec<String>,
}

impl Corpus {
    /// Validates records against the corpus invariants. Records without feature
    /// weights and an empty `feature_names` get the dummy feature.
    pub fn new(mut records: Vec<DocumentRecord>, mut feature_names: Vec<String>) -> Result<Corpus> {
        if records.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if feature_names.is_empty() {
            feature_names.push(DUMMY_FEATURE.to_string());
            for r in &mut records {
                if !r.features.is_empty() {
                    return Err(Error::ShapeMismatch(format!(
                        "document `{}` has feature weights but no feature names were given",
                        r.id
                    )));
                }
                r.features.push(1.0);
            }
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            check_component(name)?;
            if !seen.insert(name.as_str()) {
                return Err(Error::NameCollision(name.clone()));
            }
        }
        let mut ids = HashSet::new();
        let has_language = records[0].language.is_some();
        for r in &records {
            if !ids.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            if r.features.len() != feature_names.len() {
                return Err(Error::ShapeMismatch(format!(
                    "document `{}` has {} feature weights, expected {}",
                    r.id,
                    r.features.len(),
                    feature_names.len()
                )));
            }
            for (name, &w) in feature_names.iter().zip(&r.features) {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::FeatureOutOfRange {
                        id: r.id.clone(),
                        feature: name.clone(),
                        value: w,
                    });
                }
            }
            match &r.language {
                Some(lang) if lang.trim().is_empty() => {
                    return Err(Error::Malformed {
                        line: 0,
                        message: format!("document `{}` has an empty language code", r.id),
                    })
                }
                Some(_) if !has_language => {
                    return Err(Error::Malformed {
                        line: 0,
                        message: "language codes must be given for all documents or none".into(),
                    })
                }
                None if has_language => {
                    return Err(Error::Malformed {
                        line: 0,
                        message: format!("document `{}` lacks a language code", r.id),
                    })
                }
                _ => {}
            }
        }
        Ok(Corpus {
            records,
            feature_names,
        })
    }

    /// Builds a corpus from a table with columns `id`, `date`, `text` (or `texts`),
    /// an optional `language`, and numeric feature columns.
    pub fn from_table(table: &Table) -> Result<Corpus> {
        let id_col = table
            .column_index("id")
            .ok_or_else(|| Error::MissingColumn("id".into()))?;
        let date_col = table
            .column_index("date")
            .ok_or_else(|| Error::MissingColumn("date".into()))?;
        let text_col = table
            .column_index("text")
            .or_else(|| table.column_index("texts"))
            .ok_or_else(|| Error::MissingColumn("text".into()))?;
        let lang_col = table.column_index("language");
        let feature_cols: Vec<usize> = (0..table.header.len())
            .filter(|&i| i != id_col && i != date_col && i != text_col && Some(i) != lang_col)
            .collect();
        let feature_names: Vec<String> =
            feature_cols.iter().map(|&i| table.header[i].clone()).collect();

        let mut records = Vec::with_capacity(table.rows.len());
        for (row_idx, row) in table.rows.iter().enumerate() {
            let line = row_idx as u64 + 2;
            if row.len() != table.header.len() {
                return Err(Error::Malformed {
                    line,
                    message: format!("expected {} fields, found {}", table.header.len(), row.len()),
                });
            }
            let id = row[id_col].trim().to_string();
            if id.is_empty() {
                return Err(Error::Malformed {
                    line,
                    message: "empty id".into(),
                });
            }
            let date = parse_date(&row[date_col])?;
            let features = feature_cols
                .iter()
                .map(|&c| parse_number(&table.header[c], &row[c]))
                .collect::<Result<Vec<f64>>>()?;
            let language = lang_col.map(|c| row[c].trim().to_string());
            records.push(DocumentRecord {
                id,
                date,
                text: row[text_col].clone(),
                language,
                features,
            });
        }
        Corpus::new(records, feature_names)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        Corpus::from_table(&Table::read_csv(path)?).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        Corpus::from_table(&Table::read_jsonl(path)?).map_err(|e| e.context(path.display().to_string()))
    }

    /// Reads `.jsonl`/`.ndjson` as JSON lines and anything else as CSV.
    pub fn read(path: impl AsRef<Path>) -> Result<Corpus> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Corpus::read_jsonl(path),
            _ => Corpus::read_csv(path),
        }
    }

    pub fn to_table(&self) -> Table {
        let mut header = vec!["id".to_string(), "date".to_string(), "text".to_string()];
        if self.has_languages() {
            header.push("language".into());
        }
        header.extend(self.feature_names.iter().cloned());
        let rows = self
            .records
            .iter()
            .map(|r| {
                let mut row = vec![r.id.clone(), r.date.to_string(), r.text.clone()];
                if let Some(lang) = &r.language {
                    row.push(lang.clone());
                }
                row.extend(r.features.iter().map(|&w| format_number(w)));
                row
            })
            .collect();
        Table::new(header, rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_table().write_csv_file(path)
    }

    pub fn records(&self) -> &[DocumentRecord] {
        &self.records
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_languages(&self) -> bool {
        self.records.first().is_some_and(|r| r.language.is_some())
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Adds one feature per spec. With `do_binary`, a feature is 1 when any keyword
    /// token (or regex match) occurs and 0 otherwise; without it, the hit count is
    /// divided by the document's token count and clamped to `[0, 1]`.
    pub fn add_features(&self, specs: &[FeatureSpec], do_binary: bool) -> Result<Corpus> {
        enum Matcher {
            Words(HashSet<String>),
            Pattern(Regex),
        }
        let mut names: HashSet<&str> = self.feature_names.iter().map(String::as_str).collect();
        let mut matchers = Vec::with_capacity(specs.len());
        for spec in specs {
            check_component(&spec.name)?;
            if !names.insert(spec.name.as_str()) {
                return Err(Error::NameCollision(spec.name.clone()));
            }
            matchers.push(match &spec.rule {
                FeatureRule::Keywords(words) => {
                    Matcher::Words(words.iter().map(|w| w.trim().to_lowercase()).collect())
                }
                FeatureRule::Regex(pattern) => {
                    Matcher::Pattern(Regex::new(pattern).map_err(|source| Error::Regex {
                        name: spec.name.clone(),
                        source,
                    })?)
                }
            });
        }

        let mut records = self.records.clone();
        for r in &mut records {
            let tokens = tokenize::tokens(&r.text);
            for m in &matchers {
                let hits = match m {
                    Matcher::Words(words) => tokens.iter().filter(|t| words.contains(*t)).count(),
                    Matcher::Pattern(re) => {
                        if do_binary {
                            usize::from(re.is_match(&r.text))
                        } else {
                            re.find_iter(&r.text).count()
                        }
                    }
                };
                let value = if do_binary {
                    if hits > 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else if tokens.is_empty() {
                    0.0
                } else {
                    (hits as f64 / tokens.len() as f64).clamp(0.0, 1.0)
                };
                r.features.push(value);
            }
        }
        let mut feature_names = self.feature_names.clone();
        feature_names.extend(specs.iter().map(|s| s.name.clone()));
        Ok(Corpus {
            records,
            feature_names,
        })
    }

    /// Drops the named features; removing every feature re-injects the dummy feature.
    pub fn remove_features(&self, names: &[&str]) -> Result<Corpus> {
        let mut drop = vec![false; self.feature_names.len()];
        for name in names {
            let idx = self
                .feature_index(name)
                .ok_or_else(|| Error::UnknownName(name.to_string()))?;
            drop[idx] = true;
        }
        let keep: Vec<usize> = (0..drop.len()).filter(|&i| !drop[i]).collect();
        let mut records = self.records.clone();
        for r in &mut records {
            r.features = keep.iter().map(|&i| r.features[i]).collect();
        }
        let feature_names: Vec<String> = keep.iter().map(|&i| self.feature_names[i].clone()).collect();
        Corpus::new(records, feature_names)
    }

    /// Per-period document counts, token counts and per-feature counts of documents
    /// with a nonzero weight.
    pub fn summarize(&self, by: Frequency) -> Result<CorpusSummary> {
        if self.records.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let k = self.feature_names.len();
        let mut periods: BTreeMap<NaiveDate, (usize, usize, Vec<usize>)> = BTreeMap::new();
        for r in &self.records {
            let entry = periods
                .entry(by.period_start(r.date))
                .or_insert_with(|| (0, 0, vec![0; k]));
            entry.0 += 1;
            entry.1 += tokenize::tokens(&r.text).len();
            for (count, &w) in entry.2.iter_mut().zip(&r.features) {
                if w != 0.0 {
                    *count += 1;
                }
            }
        }
        let mut summary = CorpusSummary {
            by,
            feature_names: self.feature_names.clone(),
            ..Default::default()
        };
        for (period, (docs, tokens, features)) in periods {
            summary.periods.push(period);
            summary.documents.push(docs);
            summary.tokens.push(tokens);
            summary.feature_counts.push(features);
        }
        Ok(summary)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusSummary {
    pub by: Frequency,
    pub feature_names: Vec<String>,
    pub periods: Vec<NaiveDate>,
    pub documents: Vec<usize>,
    pub tokens: Vec<usize>,
    /// `feature_counts[period][feature]`.
    pub feature_counts: Vec<Vec<usize>>,
}

impl CorpusSummary {
    /// Long format: `period, metric, value`, with metrics `documents`, `tokens`
    /// and `feature:<name>`.
    pub fn to_long_table(&self) -> Table {
        let mut rows = Vec::new();
        for (i, period) in self.periods.iter().enumerate() {
            let p = period.to_string();
            rows.push(vec![p.clone(), "documents".into(), self.documents[i].to_string()]);
            rows.push(vec![p.clone(), "tokens".into(), self.tokens[i].to_string()]);
            for (name, count) in self.feature_names.iter().zip(&self.feature_counts[i]) {
                rows.push(vec![p.clone(), format!("feature:{name}"), count.to_string()]);
            }
        }
        Table::new(vec!["period".into(), "metric".into(), "value".into()], rows)
    }
}
