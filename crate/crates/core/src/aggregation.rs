//! From document-level sentiment to sentiment measures: documents are weighted
//! into one value per period, missing periods are filled, and each resulting
//! series is smoothed over a lag window by every time weighting scheme.

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::frequency::Frequency;
use crate::measures::{MeasureSet, Provenance};
use crate::naming::{parse_score_column, MeasureName};
use crate::sentiment::{
    aggregate_sentences, compute_sentiment, Lexicons, SentimentLevel, SentimentOptions,
    SentimentTable,
};
use crate::weights::{
    across_doc_weights, expand_time_schemes, DocScheme, TimeFamily, TimeParams, TimeScheme,
    WithinScheme,
};

/// How periods without documents are treated before time aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    /// Missing periods get 0.
    #[default]
    Zero,
    /// Missing periods repeat the latest value; leading ones take the first value.
    Latest,
    /// No filling; lag windows run over the available periods.
    None,
}

impl std::str::FromStr for Fill {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Fill::Zero),
            "latest" => Ok(Fill::Latest),
            "none" => Ok(Fill::None),
            other => Err(Error::InvalidParameter(format!("unknown fill `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregationConfig {
    pub how_within: WithinScheme,
    pub how_docs: DocScheme,
    pub how_time: Vec<TimeFamily>,
    pub by: Frequency,
    pub lag: usize,
    pub fill: Fill,
    pub do_ignore_zeros: bool,
    /// Score sentences, then combine them into documents with `how_docs`.
    pub do_sentence: bool,
    pub alpha_exp_docs: f64,
    #[serde(flatten)]
    pub time: TimeParams,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        AggregationConfig {
            how_within: WithinScheme::Proportional,
            how_docs: DocScheme::EqualWeight,
            how_time: vec![TimeFamily::EqualWeight],
            by: Frequency::Day,
            lag: 1,
            fill: Fill::Zero,
            do_ignore_zeros: true,
            do_sentence: false,
            alpha_exp_docs: 0.1,
            time: TimeParams::default(),
        }
    }
}

impl AggregationConfig {
    pub fn time_schemes(&self) -> Result<Vec<TimeScheme>> {
        expand_time_schemes(&self.how_time, &self.time)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 {
            return Err(Error::InvalidParameter("lag must be at least 1".into()));
        }
        for s in self.time_schemes()? {
            s.weights(self.lag)?;
        }
        Ok(())
    }
}

/// One value per period and `lexicon--feature` column.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSeries {
    pub by: Frequency,
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<String>,
    /// One row per date.
    pub values: Vec<Vec<f64>>,
    /// Whether each date was inserted by filling.
    pub filled: Vec<bool>,
}

impl PeriodSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }
}

/// Row indices of a document-level table grouped by period start.
pub(crate) fn rows_by_period(table: &SentimentTable, by: Frequency) -> Result<BTreeMap<NaiveDate, Vec<usize>>> {
    let mut groups: BTreeMap<NaiveDate, Vec<usize>> = BTreeMap::new();
    for (i, r) in table.rows().iter().enumerate() {
        let date = r.date.ok_or_else(|| Error::MissingColumn("date".into()))?;
        groups.entry(by.period_start(date)).or_default().push(i);
    }
    Ok(groups)
}

/// Weights `θ_n` of the documents `rows` for score column `column`. With
/// `ignore_zeros`, documents scoring exactly zero in that column are left out.
pub(crate) fn document_weights(
    table: &SentimentTable,
    rows: &[usize],
    column: usize,
    how: DocScheme,
    ignore_zeros: bool,
    alpha_exp_docs: f64,
) -> Result<Vec<(usize, f64)>> {
    let members: Vec<usize> = if ignore_zeros {
        rows.iter()
            .copied()
            .filter(|&i| table.rows()[i].scores[column] != 0.0)
            .collect()
    } else {
        rows.to_vec()
    };
    if members.is_empty() {
        return Ok(Vec::new());
    }
    let counts: Vec<usize> = members.iter().map(|&i| table.rows()[i].word_count).collect();
    let theta = across_doc_weights(how, &counts, alpha_exp_docs)?;
    Ok(members.into_iter().zip(theta).collect())
}

fn require_document_table(table: &SentimentTable) -> Result<()> {
    if table.level() != SentimentLevel::Document {
        return Err(Error::InvalidParameter("expected a document-level table".into()));
    }
    if !table.is_dated() {
        return Err(Error::MissingColumn("date".into()));
    }
    if table.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for c in table.columns() {
        parse_score_column(c)?;
    }
    Ok(())
}

/// Weighted average of document scores per period and column.
pub fn across_documents(
    table: &SentimentTable,
    by: Frequency,
    how: DocScheme,
    ignore_zeros: bool,
    alpha_exp_docs: f64,
) -> Result<PeriodSeries> {
    require_document_table(table)?;
    let groups = rows_by_period(table, by)?;
    let p = table.columns().len();
    let periods: Vec<(&NaiveDate, &Vec<usize>)> = groups.iter().collect();
    let values = periods
        .par_iter()
        .map(|(_, rows)| {
            (0..p)
                .map(|c| {
                    Ok(document_weights(table, rows, c, how, ignore_zeros, alpha_exp_docs)?
                        .into_iter()
                        .map(|(i, w)| w * table.rows()[i].scores[c])
                        .sum())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PeriodSeries {
        by,
        dates: groups.keys().copied().collect(),
        columns: table.columns().to_vec(),
        filled: vec![false; values.len()],
        values,
    })
}

/// Completes the period grid. Returns the dates, rows, and which rows were inserted.
pub(crate) fn fill_rows(
    by: Frequency,
    dates: &[NaiveDate],
    rows: &[Vec<f64>],
    fill: Fill,
    date_before: Option<NaiveDate>,
    date_after: Option<NaiveDate>,
) -> Result<(Vec<NaiveDate>, Vec<Vec<f64>>, Vec<bool>)> {
    if fill == Fill::None || dates.is_empty() {
        return Ok((dates.to_vec(), rows.to_vec(), vec![false; dates.len()]));
    }
    let first = dates[0];
    let last = *dates.last().expect("non-empty");
    let from = match date_before {
        Some(d) if by.period_start(d) > first => {
            return Err(Error::InvalidParameter(format!(
                "fill start {d} lies after the first date {first}"
            )))
        }
        Some(d) => d,
        None => first,
    };
    let to = match date_after {
        Some(d) if by.period_start(d) < last => {
            return Err(Error::InvalidParameter(format!(
                "fill end {d} lies before the last date {last}"
            )))
        }
        Some(d) => d,
        None => last,
    };
    let grid = by.grid(from, to);
    let width = rows.first().map_or(0, Vec::len);
    let mut out_rows = Vec::with_capacity(grid.len());
    let mut filled = Vec::with_capacity(grid.len());
    let mut k = 0;
    for &d in &grid {
        if k < dates.len() && dates[k] == d {
            out_rows.push(rows[k].clone());
            filled.push(false);
            k += 1;
            continue;
        }
        let row = match fill {
            Fill::Zero => vec![0.0; width],
            Fill::Latest if k == 0 => rows[0].clone(),
            Fill::Latest => out_rows.last().cloned().expect("previous row"),
            Fill::None => unreachable!(),
        };
        out_rows.push(row);
        filled.push(true);
    }
    if k != dates.len() {
        return Err(Error::InvalidValue(
            "dates are not aligned to the period grid".into(),
        ));
    }
    Ok((grid, out_rows, filled))
}

/// Inserts the missing periods between (optionally) `date_before` and `date_after`.
pub fn fill_dates(
    series: &PeriodSeries,
    fill: Fill,
    date_before: Option<NaiveDate>,
    date_after: Option<NaiveDate>,
) -> Result<PeriodSeries> {
    let (dates, values, inserted) =
        fill_rows(series.by, &series.dates, &series.values, fill, date_before, date_after)?;
    let mut filled = Vec::with_capacity(dates.len());
    let mut k = 0;
    for (d, ins) in dates.iter().zip(&inserted) {
        if *ins {
            filled.push(true);
        } else {
            while series.dates[k] != *d {
                k += 1;
            }
            filled.push(series.filled[k]);
        }
    }
    Ok(PeriodSeries {
        by: series.by,
        dates,
        columns: series.columns.clone(),
        values,
        filled,
    })
}

/// Smooths every column with every scheme over windows of `lag` consecutive rows,
/// dropping the first `lag - 1` dates.
pub fn across_time(series: &PeriodSeries, schemes: &[TimeScheme], lag: usize) -> Result<MeasureSet> {
    let weights: Vec<(String, Vec<f64>)> = schemes
        .iter()
        .map(|s| Ok((s.name(), s.weights(lag)?)))
        .collect::<Result<_>>()?;
    across_time_weights(series, &weights, lag)
}

pub(crate) fn across_time_weights(
    series: &PeriodSeries,
    weights: &[(String, Vec<f64>)],
    lag: usize,
) -> Result<MeasureSet> {
    if lag == 0 {
        return Err(Error::InvalidParameter("lag must be at least 1".into()));
    }
    if series.len() < lag {
        return Err(Error::InsufficientData {
            needed: lag,
            available: series.len(),
        });
    }
    let n_out = series.len() - lag + 1;
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (c, column) in series.columns.iter().enumerate() {
        let (lexicon, feature) = parse_score_column(column)?;
        for (scheme, b) in weights {
            names.push(MeasureName::new(&lexicon, &feature, scheme));
            columns.push(
                (0..n_out)
                    .map(|u| {
                        b.iter()
                            .enumerate()
                            .map(|(t, bt)| bt * series.values[u + t][c])
                            .sum()
                    })
                    .collect(),
            );
        }
    }
    MeasureSet::new(series.by, series.dates[lag - 1..].to_vec(), names, columns)
}

/// Aggregates a dated sentiment table into measures. Sentence-level tables are
/// first combined into documents with `how_docs`.
pub fn aggregate(sentiment: &SentimentTable, config: &AggregationConfig) -> Result<MeasureSet> {
    config.validate()?;
    let documents = match sentiment.level() {
        SentimentLevel::Sentence => {
            aggregate_sentences(sentiment, config.how_docs, config.alpha_exp_docs)?
        }
        SentimentLevel::Document => sentiment.clone(),
    };
    let daily = across_documents(
        &documents,
        config.by,
        config.how_docs,
        config.do_ignore_zeros,
        config.alpha_exp_docs,
    )?;
    let series = fill_dates(&daily, config.fill, None, None)?;
    let time_weights: Vec<(String, Vec<f64>)> = config
        .time_schemes()?
        .iter()
        .map(|s| Ok((s.name(), s.weights(config.lag)?)))
        .collect::<Result<_>>()?;
    let measures = across_time_weights(&series, &time_weights, config.lag)?;
    Ok(measures.with_provenance(Arc::new(Provenance {
        sentiment: documents,
        config: config.clone(),
        series,
        time_weights,
    })))
}

/// Scores the corpus and aggregates the scores into measures.
pub fn build_measures<'a>(
    corpus: &'a Corpus,
    lexicons: impl Into<Lexicons<'a>>,
    config: &AggregationConfig,
) -> Result<MeasureSet> {
    config.validate()?;
    let opts = SentimentOptions {
        how: config.how_within,
        do_sentence: config.do_sentence,
        threads: None,
    };
    let sentiment = compute_sentiment(corpus, lexicons, &opts)?;
    aggregate(&sentiment, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::SentimentRow;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, d).unwrap()
    }

    fn table(rows: &[(u32, usize, f64)]) -> SentimentTable {
        let rows = rows
            .iter()
            .enumerate()
            .map(|(i, &(d, q, s))| SentimentRow {
                id: i.to_string(),
                sentence_id: None,
                date: Some(day(d)),
                word_count: q,
                scores: vec![s],
            })
            .collect();
        SentimentTable::new(SentimentLevel::Document, vec!["l--f".into()], rows).unwrap()
    }

    #[test]
    fn across_documents_examples() {
        let t = table(&[(1, 5, 1.0), (1, 5, 3.0)]);
        let s = across_documents(&t, Frequency::Day, DocScheme::EqualWeight, false, 0.1).unwrap();
        assert_eq!(s.values, vec![vec![2.0]]);

        let t = table(&[(1, 5, 0.0), (1, 5, 4.0)]);
        let s = across_documents(&t, Frequency::Day, DocScheme::EqualWeight, true, 0.1).unwrap();
        assert_eq!(s.values, vec![vec![4.0]]);
        let s = across_documents(&t, Frequency::Day, DocScheme::EqualWeight, false, 0.1).unwrap();
        assert_eq!(s.values, vec![vec![2.0]]);

        let t = table(&[(1, 10, 1.0), (1, 30, 3.0)]);
        let s = across_documents(&t, Frequency::Day, DocScheme::Proportional, false, 0.1).unwrap();
        assert!((s.values[0][0] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn fill_modes() {
        let t = table(&[(1, 1, 1.0), (3, 1, 3.0)]);
        let s = across_documents(&t, Frequency::Day, DocScheme::EqualWeight, false, 0.1).unwrap();
        let z = fill_dates(&s, Fill::Zero, None, None).unwrap();
        assert_eq!(z.dates, vec![day(1), day(2), day(3)]);
        assert_eq!(z.values, vec![vec![1.0], vec![0.0], vec![3.0]]);
        assert_eq!(z.filled, vec![false, true, false]);

        let l = fill_dates(&s, Fill::Latest, Some(day(1) - chrono::Days::new(2)), None).unwrap();
        let flat: Vec<f64> = l.values.iter().map(|r| r[0]).collect();
        assert_eq!(flat, vec![1.0, 1.0, 1.0, 1.0, 3.0]);

        assert_eq!(fill_dates(&s, Fill::None, None, None).unwrap(), s);
        assert!(fill_dates(&s, Fill::Zero, Some(day(2)), None).is_err());
    }

    fn series(values: &[f64]) -> PeriodSeries {
        PeriodSeries {
            by: Frequency::Day,
            dates: (1..=values.len() as u32).map(day).collect(),
            columns: vec!["l--f".into()],
            values: values.iter().map(|&v| vec![v]).collect(),
            filled: vec![false; values.len()],
        }
    }

    #[test]
    fn across_time_examples() {
        let s = series(&[3.0, 6.0, 9.0]);
        let m = across_time(&s, &[TimeScheme::EqualWeight], 3).unwrap();
        assert_eq!(m.dates(), [day(3)]);
        assert!((m.column(0)[0] - 6.0).abs() < 1e-12);

        let m = across_time(&series(&[1.0, 2.0]), &[TimeScheme::Linear], 2).unwrap();
        assert!((m.column(0)[0] - 5.0 / 3.0).abs() < 1e-15);

        let s = series(&[1.0, -2.0, 5.0]);
        let m = across_time(&s, &[TimeScheme::Beta { a: 2.0, b: 3.0 }], 1).unwrap();
        assert_eq!(m.column(0), [1.0, -2.0, 5.0]);
        assert_eq!(m.dates(), s.dates.as_slice());

        assert!(matches!(
            across_time(&series(&[1.0]), &[TimeScheme::EqualWeight], 2),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = AggregationConfig {
            how_time: vec![TimeFamily::Almon, TimeFamily::Beta],
            lag: 30,
            fill: Fill::Latest,
            ..Default::default()
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: AggregationConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
