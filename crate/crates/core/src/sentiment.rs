//! Lexicon-based scoring of documents and sentences.
//!
//! Three scorers are available, selected by the valence table of a
//! [`LexiconSet`]: plain unigram sums, bigram valence shifting, and the cluster
//! approach where negators, amplifiers and deamplifiers near a polarized word
//! rescale it.

use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use indexmap::IndexMap;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::io::{format_number, parse_date, parse_number, Table};
use crate::lexicon::{LanguageDispatch, Lexicon, LexiconSet, ShifterKind, ValenceTable};
use crate::naming::{parse_score_column, score_column};
use crate::tokenize::{tokenize, TokenizedDocument};
use crate::weights::{across_doc_weights, within_weights, DocFrequencies, DocScheme, WithinScheme};

const AMPLIFICATION: f64 = 0.8;
const ADVERSATIVE_WEIGHT: f64 = 0.25;

/// Weighted unigram sum `Σ ω_i s_i`.
pub fn score_unigram(tokens: &[String], lexicon: &Lexicon, weights: &[f64]) -> f64 {
    tokens
        .iter()
        .zip(weights)
        .filter_map(|(t, w)| lexicon.get(t).map(|s| w * s))
        .sum()
}

/// Weighted sum where each lexicon hit is multiplied by the shift value of the
/// preceding token, if that token is a valence shifter and not itself a lexicon word.
pub fn score_bigram(
    tokens: &[String],
    lexicon: &Lexicon,
    shifters: &IndexMap<String, f64>,
    weights: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (i, (token, w)) in tokens.iter().zip(weights).enumerate() {
        let Some(s) = lexicon.get(token) else { continue };
        let v = match i.checked_sub(1).map(|p| &tokens[p]) {
            Some(prev) if !lexicon.contains(prev) => shifters.get(prev).copied().unwrap_or(1.0),
            _ => 1.0,
        };
        total += w * v * s;
    }
    total
}

/// The token window around one polarized word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterWindow {
    pub before: Range<usize>,
    pub center: usize,
    pub after: Range<usize>,
}

/// Decomposes a token sequence into non-overlapping clusters.
///
/// `commas` switches to sentence mode: five tokens before instead of four, and
/// both sides stop at a comma.
pub fn cluster_windows(polarized: &[bool], commas: Option<&[usize]>) -> Vec<ClusterWindow> {
    let n = polarized.len();
    let before = if commas.is_some() { 5 } else { 4 };
    let mut out = Vec::new();
    let mut lower_bound = 0;
    let mut j = 0;
    while j < n {
        if !polarized[j] {
            j += 1;
            continue;
        }
        let mut lo = j.saturating_sub(before).max(lower_bound);
        let mut hi = (j + 2).min(n - 1);
        for &c in commas.unwrap_or(&[]) {
            if c <= j && c > lo {
                lo = c;
            }
            if c > j && c <= hi {
                hi = c - 1;
            }
        }
        out.push(ClusterWindow {
            before: lo..j,
            center: j,
            after: j + 1..hi + 1,
        });
        lower_bound = hi + 1;
        j = hi + 1;
    }
    out
}

/// Cluster-based score. `commas` holds sentence-relative comma breaks and enables
/// sentence mode (wider window, comma bounds, adversative conjunctions).
pub fn score_cluster(
    tokens: &[String],
    lexicon: &Lexicon,
    shifters: &IndexMap<String, ShifterKind>,
    weights: &[f64],
    commas: Option<&[usize]>,
) -> f64 {
    let scores: Vec<Option<f64>> = tokens.iter().map(|t| lexicon.get(t)).collect();
    let kinds: Vec<Option<ShifterKind>> = tokens
        .iter()
        .zip(&scores)
        .map(|(t, s)| if s.is_some() { None } else { shifters.get(t).copied() })
        .collect();
    let polarized: Vec<bool> = scores.iter().map(|s| s.is_some_and(|s| s != 0.0)).collect();
    let sentence_mode = commas.is_some();

    let mut total = 0.0;
    for window in cluster_windows(&polarized, commas) {
        let (mut negators, mut amplifiers, mut deamplifiers) = (0u32, 0.0, 0.0);
        let mut adversative = 0.0;
        for m in window.before.clone().chain(window.after.clone()) {
            match kinds[m] {
                Some(ShifterKind::Negator) => negators += 1,
                Some(ShifterKind::Amplifier) => amplifiers += 1.0,
                Some(ShifterKind::Deamplifier) => deamplifiers += 1.0,
                Some(ShifterKind::Adversative) if sentence_mode => {
                    adversative += if m < window.center { 1.0 } else { -1.0 }
                }
                _ => {}
            }
        }
        let odd = negators % 2 == 1;
        let (n, n_n) = if odd { (1.0, -1.0) } else { (0.0, 1.0) };
        if odd {
            // amplifiers count as deamplifiers under negation
            deamplifiers += amplifiers;
            amplifiers = 0.0;
        }
        let mut shift = AMPLIFICATION * (amplifiers - 2.0 * amplifiers * n - deamplifiers);
        if sentence_mode {
            shift *= 1.0 + ADVERSATIVE_WEIGHT * adversative;
        }
        let j = window.center;
        total += n_n * (1.0 + shift.max(-1.0)) * weights[j] * scores[j].unwrap_or(0.0);
        for m in window.after {
            total += weights[m] * scores[m].unwrap_or(0.0);
        }
    }
    total
}

/// Scores one unit of text with the scorer implied by the valence table.
pub fn score_tokens(
    tokens: &[String],
    lexicon: &Lexicon,
    valence: Option<&ValenceTable>,
    weights: &[f64],
    commas: Option<&[usize]>,
) -> f64 {
    match valence {
        None => score_unigram(tokens, lexicon, weights),
        Some(ValenceTable::Bigram(map)) => score_bigram(tokens, lexicon, map, weights),
        Some(ValenceTable::Cluster(map)) => score_cluster(tokens, lexicon, map, weights, commas),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentimentLevel {
    Document,
    Sentence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentRow {
    pub id: String,
    /// 1-based sentence index, for sentence-level tables.
    pub sentence_id: Option<usize>,
    pub date: Option<NaiveDate>,
    pub word_count: usize,
    pub scores: Vec<f64>,
}

/// Scores per document or sentence. Dated tables carry `lexicon--feature`
/// columns; undated ones (scored plain texts) carry one column per lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentTable {
    level: SentimentLevel,
    columns: Vec<String>,
    rows: Vec<SentimentRow>,
}

impl SentimentTable {
    pub fn new(level: SentimentLevel, columns: Vec<String>, rows: Vec<SentimentRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return Err(Error::DuplicateColumn(c.clone()));
            }
        }
        let dated = rows.first().is_some_and(|r| r.date.is_some());
        if dated {
            for c in &columns {
                parse_score_column(c)?;
            }
        }
        let mut keys = HashSet::new();
        for r in &rows {
            if r.scores.len() != columns.len() {
                return Err(Error::ShapeMismatch(format!(
                    "row `{}` has {} scores for {} columns",
                    r.id,
                    r.scores.len(),
                    columns.len()
                )));
            }
            if r.date.is_some() != dated {
                return Err(Error::MissingColumn("date".into()));
            }
            match (level, r.sentence_id) {
                (SentimentLevel::Document, Some(_)) | (SentimentLevel::Sentence, None) => {
                    return Err(Error::ShapeMismatch(format!(
                        "row `{}` does not match the table level",
                        r.id
                    )))
                }
                _ => {}
            }
            if !keys.insert((r.id.as_str(), r.sentence_id)) {
                return Err(Error::DuplicateId(match r.sentence_id {
                    Some(s) => format!("{}#{s}", r.id),
                    None => r.id.clone(),
                }));
            }
            if let Some(bad) = r.scores.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidValue(format!("score {bad} in row `{}`", r.id)));
            }
        }
        Ok(SentimentTable { level, columns, rows })
    }

    pub fn level(&self) -> SentimentLevel {
        self.level
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[SentimentRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_dated(&self) -> bool {
        self.rows.first().is_some_and(|r| r.date.is_some())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .column_index(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r.scores[j]).collect())
    }

    /// Lexicon components of the column names, in first-appearance order.
    pub fn lexicons(&self) -> Vec<String> {
        self.components(0)
    }

    /// Feature components of the column names, in first-appearance order.
    pub fn features(&self) -> Vec<String> {
        self.components(1)
    }

    fn components(&self, part: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.columns {
            let name = match parse_score_column(c) {
                Ok((l, f)) => if part == 0 { l } else { f },
                Err(_) if part == 0 => c.clone(),
                Err(_) => continue,
            };
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }

    pub fn to_table(&self) -> Table {
        let dated = self.is_dated();
        let sentence = self.level == SentimentLevel::Sentence;
        let mut header = vec!["id".to_string()];
        if sentence {
            header.push("sentence_id".into());
        }
        if dated {
            header.push("date".into());
        }
        header.push("word_count".into());
        header.extend(self.columns.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = vec![r.id.clone()];
                if let Some(s) = r.sentence_id {
                    out.push(s.to_string());
                }
                if let Some(d) = r.date {
                    out.push(d.to_string());
                }
                out.push(r.word_count.to_string());
                out.extend(r.scores.iter().map(|&x| format_number(x)));
                out
            })
            .collect();
        Table::new(header, rows)
    }

    /// Reads a table written by [`SentimentTable::to_table`]. `date`,
    /// `sentence_id` and `word_count` are optional; a missing word count reads as 0.
    pub fn from_table(table: &Table) -> Result<Self> {
        let id_col = table
            .column_index("id")
            .ok_or_else(|| Error::MissingColumn("id".into()))?;
        let date_col = table.column_index("date");
        let sentence_col = table.column_index("sentence_id");
        let count_col = table.column_index("word_count");
        let reserved = [Some(id_col), date_col, sentence_col, count_col];
        let score_cols: Vec<usize> = (0..table.header.len())
            .filter(|j| !reserved.contains(&Some(*j)))
            .collect();
        let columns: Vec<String> = score_cols.iter().map(|&j| table.header[j].clone()).collect();
        if date_col.is_some() {
            for c in &columns {
                parse_score_column(c)?;
            }
        }
        let mut rows = Vec::with_capacity(table.rows.len());
        for (line, raw) in table.rows.iter().enumerate() {
            let wrap = |e: Error| e.context(format!("row {}", line + 1));
            let date = date_col.map(|j| parse_date(&raw[j])).transpose().map_err(wrap)?;
            let sentence_id = sentence_col
                .map(|j| {
                    raw[j].trim().parse::<usize>().map_err(|_| Error::NonNumeric {
                        column: "sentence_id".into(),
                        value: raw[j].clone(),
                    })
                })
                .transpose()
                .map_err(wrap)?;
            let word_count = match count_col {
                Some(j) => {
                    let x = parse_number("word_count", &raw[j]).map_err(wrap)?;
                    if x < 0.0 || x.fract() != 0.0 {
                        return Err(wrap(Error::NonNumeric {
                            column: "word_count".into(),
                            value: raw[j].clone(),
                        }));
                    }
                    x as usize
                }
                None => 0,
            };
            let scores = score_cols
                .iter()
                .map(|&j| parse_number(&table.header[j], &raw[j]))
                .collect::<Result<Vec<f64>>>()
                .map_err(wrap)?;
            rows.push(SentimentRow {
                id: raw[id_col].clone(),
                sentence_id,
                date,
                word_count,
                scores,
            });
        }
        let level = if sentence_col.is_some() {
            SentimentLevel::Sentence
        } else {
            SentimentLevel::Document
        };
        SentimentTable::new(level, columns, rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_table(&Table::read_csv(path)?).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_table().write_csv_file(path)
    }
}

/// Checks a foreign score table against the sentiment table contract: an `id`
/// and a `date` column plus numeric `lexicon--feature` columns.
pub fn validate_external_sentiment(table: &Table) -> Result<SentimentTable> {
    if table.column_index("date").is_none() {
        return Err(Error::MissingColumn("date".into()));
    }
    SentimentTable::from_table(table)
}

/// Options for [`compute_sentiment`] and its variants.
#[derive(Debug, Clone, Default)]
pub struct SentimentOptions {
    pub how: WithinScheme,
    pub do_sentence: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Lexicons for scoring: one set for every document, or one set per language.
#[derive(Debug, Clone, Copy)]
pub enum Lexicons<'a> {
    Single(&'a LexiconSet),
    ByLanguage(&'a LanguageDispatch),
}

impl<'a> From<&'a LexiconSet> for Lexicons<'a> {
    fn from(set: &'a LexiconSet) -> Self {
        Lexicons::Single(set)
    }
}

impl<'a> From<&'a LanguageDispatch> for Lexicons<'a> {
    fn from(d: &'a LanguageDispatch) -> Self {
        Lexicons::ByLanguage(d)
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

struct Unit<'a> {
    doc: usize,
    sentence_id: Option<usize>,
    tokens: &'a [String],
    commas: Option<Vec<usize>>,
}

fn split_units(docs: &[TokenizedDocument], do_sentence: bool) -> Vec<Unit<'_>> {
    let mut units = Vec::new();
    for (d, doc) in docs.iter().enumerate() {
        if !do_sentence {
            units.push(Unit {
                doc: d,
                sentence_id: None,
                tokens: &doc.tokens,
                commas: None,
            });
            continue;
        }
        if doc.sentences.is_empty() {
            units.push(Unit {
                doc: d,
                sentence_id: Some(1),
                tokens: &[],
                commas: Some(Vec::new()),
            });
        }
        for (s, span) in doc.sentences.iter().enumerate() {
            let commas = doc
                .comma_breaks
                .iter()
                .filter(|&&c| c > span.start && c < span.end)
                .map(|&c| c - span.start)
                .collect();
            units.push(Unit {
                doc: d,
                sentence_id: Some(s + 1),
                tokens: &doc.tokens[span.clone()],
                commas: Some(commas),
            });
        }
    }
    units
}

fn document_frequencies<'a>(units: &[Unit<'a>]) -> HashMap<&'a str, usize> {
    let mut df: HashMap<&str, usize> = HashMap::new();
    for u in units {
        let unique: HashSet<&str> = u.tokens.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    df
}

struct ScoringInput<'a> {
    ids: Vec<String>,
    dates: Option<Vec<NaiveDate>>,
    /// Per document feature weights and their names; `None` for plain texts.
    features: Option<(&'a [String], Vec<&'a [f64]>)>,
    /// Per document index into `sets`.
    set_of_doc: Vec<usize>,
    sets: Vec<&'a LexiconSet>,
}

fn resolve_sets<'a>(corpus: &'a Corpus, lexicons: Lexicons<'a>) -> Result<(Vec<&'a LexiconSet>, Vec<usize>)> {
    match lexicons {
        Lexicons::Single(set) => Ok((vec![set], vec![0; corpus.len()])),
        Lexicons::ByLanguage(dispatch) => {
            if !corpus.has_languages() {
                return Err(Error::Config(
                    "per-language lexicons need a corpus with a language column".into(),
                ));
            }
            let languages: Vec<&str> = dispatch.iter().map(|(l, _)| l).collect();
            let sets = dispatch.iter().map(|(_, s)| s).collect();
            let set_of_doc = corpus
                .records()
                .iter()
                .map(|r| {
                    let lang = r.language.as_deref().unwrap_or_default();
                    languages
                        .iter()
                        .position(|l| *l == lang)
                        .ok_or_else(|| Error::UnknownLanguage(lang.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((sets, set_of_doc))
        }
    }
}

fn score_all(
    input: ScoringInput<'_>,
    docs: &[TokenizedDocument],
    opts: &SentimentOptions,
) -> Result<SentimentTable> {
    let units = split_units(docs, opts.do_sentence);
    let df = (opts.how == WithinScheme::Tfidf).then(|| document_frequencies(&units));
    let n_units = units.len();

    let offsets: Vec<usize> = input
        .sets
        .iter()
        .scan(0, |acc, s| {
            let start = *acc;
            *acc += s.len();
            Some(start)
        })
        .collect();
    let n_lex: usize = input.sets.iter().map(|s| s.len()).sum();

    let scored: Vec<Result<Vec<f64>>> = with_threads(opts.threads, || {
        units
            .par_iter()
            .map(|u| {
                let per_token: Option<Vec<usize>> = df
                    .as_ref()
                    .map(|df| u.tokens.iter().map(|t| df[t.as_str()]).collect());
                let idf = per_token.as_deref().map(|per_token| DocFrequencies {
                    n_units,
                    per_token,
                });
                let set_index = input.set_of_doc[u.doc];
                let set = input.sets[set_index];
                let mut out = vec![0.0; n_lex];
                let mut shared = None;
                for (l, lex) in set.lexicons().iter().enumerate() {
                    let weights = if opts.how == WithinScheme::ProportionalPol {
                        let n_pol = u.tokens.iter().filter(|t| lex.contains(t)).count();
                        within_weights(opts.how, u.tokens.len(), n_pol, idf)?
                    } else {
                        if shared.is_none() {
                            shared = Some(within_weights(opts.how, u.tokens.len(), 0, idf)?);
                        }
                        shared.clone().unwrap_or_default()
                    };
                    out[offsets[set_index] + l] =
                        score_tokens(u.tokens, lex, set.valence(), &weights, u.commas.as_deref());
                }
                Ok(out)
            })
            .collect()
    })?;

    let lexicon_names: Vec<&str> = input.sets.iter().flat_map(|s| s.names()).collect();
    let (columns, spread): (Vec<String>, bool) = match &input.features {
        Some((names, _)) => (
            lexicon_names
                .iter()
                .flat_map(|l| names.iter().map(move |f| score_column(l, f)))
                .collect(),
            true,
        ),
        None => (lexicon_names.iter().map(|l| l.to_string()).collect(), false),
    };

    let mut rows = Vec::with_capacity(n_units);
    for (u, lex_scores) in units.iter().zip(scored) {
        let lex_scores = lex_scores?;
        let scores = if spread {
            let (_, weights) = input.features.as_ref().expect("features present");
            let w = weights[u.doc];
            lex_scores
                .iter()
                .flat_map(|&s| w.iter().map(move |&wk| if wk == 0.0 { 0.0 } else { s * wk }))
                .collect()
        } else {
            lex_scores
        };
        rows.push(SentimentRow {
            id: input.ids[u.doc].clone(),
            sentence_id: u.sentence_id,
            date: input.dates.as_ref().map(|d| d[u.doc]),
            word_count: u.tokens.len(),
            scores,
        });
    }
    let level = if opts.do_sentence {
        SentimentLevel::Sentence
    } else {
        SentimentLevel::Document
    };
    SentimentTable::new(level, columns, rows)
}

fn tokenize_all(texts: &[&str], threads: Option<usize>) -> Result<Vec<TokenizedDocument>> {
    with_threads(threads, || texts.par_iter().map(|t| tokenize(t)).collect())
}

/// Scores every document of `corpus` against every lexicon and spreads the
/// scores over the corpus features.
pub fn compute_sentiment<'a>(
    corpus: &'a Corpus,
    lexicons: impl Into<Lexicons<'a>>,
    opts: &SentimentOptions,
) -> Result<SentimentTable> {
    let texts: Vec<&str> = corpus.records().iter().map(|r| r.text.as_str()).collect();
    let docs = tokenize_all(&texts, opts.threads)?;
    compute_sentiment_tokens(corpus, lexicons, &docs, opts)
}

/// As [`compute_sentiment`], with caller-supplied tokenization (one entry per
/// document, in corpus order). Tokens are used verbatim.
pub fn compute_sentiment_tokens<'a>(
    corpus: &'a Corpus,
    lexicons: impl Into<Lexicons<'a>>,
    tokens: &[TokenizedDocument],
    opts: &SentimentOptions,
) -> Result<SentimentTable> {
    if tokens.len() != corpus.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tokenized documents for a corpus of {}",
            tokens.len(),
            corpus.len()
        )));
    }
    let (sets, set_of_doc) = resolve_sets(corpus, lexicons.into())?;
    let records = corpus.records();
    let input = ScoringInput {
        ids: records.iter().map(|r| r.id.clone()).collect(),
        dates: Some(records.iter().map(|r| r.date).collect()),
        features: Some((
            corpus.feature_names(),
            records.iter().map(|r| r.features.as_slice()).collect(),
        )),
        set_of_doc,
        sets,
    };
    score_all(input, tokens, opts)
}

/// Scores plain texts. Rows are identified by their 1-based position and the
/// table has one column per lexicon, without dates or features.
pub fn compute_sentiment_texts(
    texts: &[&str],
    lexicons: &LexiconSet,
    opts: &SentimentOptions,
) -> Result<SentimentTable> {
    if texts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let docs = tokenize_all(texts, opts.threads)?;
    let input = ScoringInput {
        ids: (1..=texts.len()).map(|i| i.to_string()).collect(),
        dates: None,
        features: None,
        set_of_doc: vec![0; texts.len()],
        sets: vec![lexicons],
    };
    score_all(input, &docs, opts)
}

/// Collapses a sentence-level table into documents, weighting sentences by
/// `how` over their word counts.
pub fn aggregate_sentences(
    table: &SentimentTable,
    how: DocScheme,
    alpha_exp_docs: f64,
) -> Result<SentimentTable> {
    if table.level() != SentimentLevel::Sentence {
        return Err(Error::InvalidParameter("expected a sentence-level table".into()));
    }
    let mut groups: IndexMap<&str, Vec<&SentimentRow>> = IndexMap::new();
    for r in table.rows() {
        groups.entry(r.id.as_str()).or_default().push(r);
    }
    let p = table.columns().len();
    let mut rows = Vec::with_capacity(groups.len());
    for (id, members) in groups {
        let counts: Vec<usize> = members.iter().map(|r| r.word_count).collect();
        let word_count = counts.iter().sum();
        let weights = if word_count == 0 {
            // nothing to score: every sentence is zero anyway
            vec![1.0 / counts.len() as f64; counts.len()]
        } else {
            across_doc_weights(how, &counts, alpha_exp_docs)?
        };
        let mut scores = vec![0.0; p];
        for (r, w) in members.iter().zip(&weights) {
            for (acc, s) in scores.iter_mut().zip(&r.scores) {
                *acc += w * s;
            }
        }
        rows.push(SentimentRow {
            id: id.to_string(),
            sentence_id: None,
            date: members[0].date,
            word_count,
            scores,
        });
    }
    SentimentTable::new(SentimentLevel::Document, table.columns().to_vec(), rows)
}

type RowKey = (String, Option<usize>, Option<NaiveDate>);

fn row_key(r: &SentimentRow) -> RowKey {
    (r.id.clone(), r.sentence_id, r.date)
}

fn merge_pair(a: &SentimentTable, b: &SentimentTable) -> Result<SentimentTable> {
    if a.level() != b.level() {
        return Err(Error::KeyMismatch("tables have different levels".into()));
    }
    let keys_a: HashSet<RowKey> = a.rows().iter().map(row_key).collect();
    let keys_b: HashSet<RowKey> = b.rows().iter().map(row_key).collect();
    if keys_a == keys_b {
        if let Some(dup) = b.columns().iter().find(|c| a.columns().contains(c)) {
            return Err(Error::DuplicateColumn(dup.clone()));
        }
        let by_key: HashMap<RowKey, &SentimentRow> =
            b.rows().iter().map(|r| (row_key(r), r)).collect();
        let rows = a
            .rows()
            .iter()
            .map(|r| {
                let other = by_key[&row_key(r)];
                let mut row = r.clone();
                row.scores.extend_from_slice(&other.scores);
                row
            })
            .collect();
        let mut columns = a.columns().to_vec();
        columns.extend_from_slice(b.columns());
        return SentimentTable::new(a.level(), columns, rows);
    }
    let same_columns = a.columns().len() == b.columns().len()
        && b.columns().iter().all(|c| a.columns().contains(c));
    if same_columns && keys_a.is_disjoint(&keys_b) {
        let order: Vec<usize> = a
            .columns()
            .iter()
            .map(|c| b.column_index(c).expect("same column set"))
            .collect();
        let mut rows = a.rows().to_vec();
        rows.extend(b.rows().iter().map(|r| SentimentRow {
            scores: order.iter().map(|&j| r.scores[j]).collect(),
            ..r.clone()
        }));
        return SentimentTable::new(a.level(), a.columns().to_vec(), rows);
    }
    Err(Error::KeyMismatch(
        "merging needs identical row keys or identical columns with disjoint rows".into(),
    ))
}

/// Combines tables that share their rows (adding columns) or share their columns
/// (adding rows). Merging a table with itself is rejected.
pub fn merge_sentiment(tables: &[&SentimentTable]) -> Result<SentimentTable> {
    let (first, rest) = tables
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("nothing to merge".into()))?;
    rest.iter()
        .try_fold((*first).clone(), |acc, t| merge_pair(&acc, t))
}

/// Which extreme [`peak_docs`] and peak dates look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakKind {
    Pos,
    Neg,
    #[default]
    Abs,
}

impl std::str::FromStr for PeakKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos" => Ok(PeakKind::Pos),
            "neg" => Ok(PeakKind::Neg),
            "abs" => Ok(PeakKind::Abs),
            other => Err(Error::InvalidParameter(format!("unknown peak type `{other}`"))),
        }
    }
}

/// Indices of the `n` most extreme values; ties keep their original order.
pub(crate) fn peak_indices(values: &[f64], n: usize, kind: PeakKind) -> Result<Vec<usize>> {
    if n > values.len() {
        return Err(Error::InsufficientData {
            needed: n,
            available: values.len(),
        });
    }
    let key = |x: f64| match kind {
        PeakKind::Pos => -x,
        PeakKind::Neg => x,
        PeakKind::Abs => -x.abs(),
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));
    order.truncate(n);
    Ok(order)
}

/// Identifiers of the `n` documents with the most extreme mean score across columns.
pub fn peak_docs(table: &SentimentTable, n: usize, kind: PeakKind) -> Result<Vec<String>> {
    if table.level() != SentimentLevel::Document {
        return Err(Error::InvalidParameter("peak documents need a document-level table".into()));
    }
    let p = table.columns().len().max(1) as f64;
    let means: Vec<f64> = table
        .rows()
        .iter()
        .map(|r| r.scores.iter().sum::<f64>() / p)
        .collect();
    Ok(peak_indices(&means, n, kind)?
        .into_iter()
        .map(|i| table.rows()[i].id.clone())
        .collect())
}
