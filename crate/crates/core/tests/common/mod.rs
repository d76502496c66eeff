//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sentiment_measures::aggregation::Fill;
use sentiment_measures::corpus::{Corpus, DocumentRecord};
use sentiment_measures::lexicon::{Lexicon, LexiconSet};
use sentiment_measures::weights::{DocScheme, WithinScheme};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn day(offset: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 1).unwrap() + Days::new(offset)
}

pub const LEX_A: &[(&str, f64)] = &[("up", 1.0), ("gain", 0.5), ("down", -1.0), ("loss", -0.75)];
pub const LEX_B: &[(&str, f64)] = &[("good", 1.0), ("bad", -1.0), ("up", 0.5), ("fear", -0.25)];
const NEUTRAL: &[&str] = &["the", "market", "news", "today", "said"];

pub fn lexicons() -> LexiconSet {
    LexiconSet::new(
        vec![
            Lexicon::new("lexA", LEX_A.iter().copied()).unwrap(),
            Lexicon::new("lexB", LEX_B.iter().copied()).unwrap(),
        ],
        None,
    )
    .unwrap()
}

/// Lowercase space-separated texts over a small vocabulary, so whitespace
/// splitting is the tokenization.
pub fn random_corpus(rng: &mut ChaCha8Rng, n_docs: usize, n_days: u64) -> Corpus {
    let vocab: Vec<&str> = LEX_A
        .iter()
        .chain(LEX_B)
        .map(|(w, _)| *w)
        .chain(NEUTRAL.iter().copied())
        .collect();
    let records = (0..n_docs)
        .map(|i| {
            let len = rng.gen_range(1..10);
            let text: Vec<&str> = (0..len).map(|_| *vocab.choose(rng).unwrap()).collect();
            let features = (0..2)
                .map(|_| *[0.0, 0.0, 0.3, 0.5, 1.0, rng.gen_range(0.0..1.0)].choose(rng).unwrap())
                .collect();
            DocumentRecord::new(format!("doc{i}"), day(rng.gen_range(0..n_days)), text.join(" "))
                .with_features(features)
        })
        .collect();
    Corpus::new(records, vec!["f1".into(), "f2".into()]).unwrap()
}

/// Straightforward re-derivation of the measures for unigram scoring:
/// returns measure name → (date, value) series.
pub struct Naive {
    pub within: WithinScheme,
    pub docs: DocScheme,
    pub ignore_zeros: bool,
    pub fill: Fill,
    pub lag: usize,
}

impl Naive {
    fn doc_score(&self, text: &str, lexicon: &[(&str, f64)]) -> (f64, usize) {
        let words: Vec<&str> = text.split_whitespace().collect();
        let q = words.len();
        let sum: f64 = words
            .iter()
            .filter_map(|w| lexicon.iter().find(|(x, _)| x == w).map(|(_, s)| *s))
            .sum();
        let s = match self.within {
            WithinScheme::Counts => sum,
            WithinScheme::Proportional => sum / q as f64,
            other => panic!("naive oracle does not cover {other}"),
        };
        (s, q)
    }

    fn time_weights(&self, scheme: &str) -> Vec<f64> {
        let raw: Vec<f64> = match scheme {
            "equal_weight" => vec![1.0; self.lag],
            "linear" => (1..=self.lag).map(|t| t as f64).collect(),
            other => panic!("naive oracle does not cover {other}"),
        };
        let total: f64 = raw.iter().sum();
        raw.iter().map(|x| x / total).collect()
    }

    pub fn measures(&self, corpus: &Corpus) -> BTreeMap<String, Vec<(NaiveDate, f64)>> {
        let mut out = BTreeMap::new();
        for (lname, lex) in [("lexA", LEX_A), ("lexB", LEX_B)] {
            for (k, fname) in ["f1", "f2"].iter().enumerate() {
                // per date: (score, word count) of each document
                let mut by_date: BTreeMap<NaiveDate, Vec<(f64, usize)>> = BTreeMap::new();
                for r in corpus.records() {
                    let (s, q) = self.doc_score(&r.text, lex);
                    by_date.entry(r.date).or_default().push((s * r.features[k], q));
                }
                let mut series: Vec<(NaiveDate, f64)> = Vec::new();
                for (d, docs) in &by_date {
                    let docs: Vec<&(f64, usize)> =
                        docs.iter().filter(|(s, _)| !self.ignore_zeros || *s != 0.0).collect();
                    let value = if docs.is_empty() {
                        0.0
                    } else {
                        match self.docs {
                            DocScheme::EqualWeight => docs.iter().map(|(s, _)| s).sum::<f64>() / docs.len() as f64,
                            DocScheme::Proportional => {
                                let z: usize = docs.iter().map(|(_, q)| q).sum();
                                docs.iter().map(|(s, q)| s * *q as f64 / z as f64).sum()
                            }
                            other => panic!("naive oracle does not cover {other}"),
                        }
                    };
                    series.push((*d, value));
                }
                let series = self.filled(series);
                for scheme in ["equal_weight", "linear"] {
                    let b = self.time_weights(scheme);
                    let values: Vec<(NaiveDate, f64)> = (self.lag - 1..series.len())
                        .map(|u| {
                            let v = (0..self.lag).map(|t| b[t] * series[u + 1 - self.lag + t].1).sum();
                            (series[u].0, v)
                        })
                        .collect();
                    out.insert(format!("{lname}--{fname}--{scheme}"), values);
                }
            }
        }
        out
    }

    fn filled(&self, series: Vec<(NaiveDate, f64)>) -> Vec<(NaiveDate, f64)> {
        if self.fill == Fill::None {
            return series;
        }
        let first = series[0].0;
        let last = series.last().unwrap().0;
        let mut out: Vec<(NaiveDate, f64)> = Vec::new();
        let mut d = first;
        while d <= last {
            let v = match series.iter().find(|(x, _)| *x == d) {
                Some((_, v)) => *v,
                None if self.fill == Fill::Zero => 0.0,
                None => out.last().unwrap().1,
            };
            out.push((d, v));
            d = d + Days::new(1);
        }
        out
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
