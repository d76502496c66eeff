//! Linear decomposition of model predictions into lexicon, feature, time scheme,
//! lag and document contributions.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use indexmap::IndexMap;
use rayon::prelude::*;

use crate::aggregation::{document_weights, rows_by_period};
use crate::error::{Error, Result};
use crate::io::{format_number, parse_date, parse_number, Table};
use crate::measures::{MeasureSet, Provenance};
use crate::model::{Externals, FittedModel, IterResults};
use crate::naming::{score_column, Dimension};

/// Pseudo-document receiving the contributions of dates inserted by filling.
pub const FILL_DOCUMENT: &str = "(fill)";

/// One value per date and component.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionTable {
    pub components: Vec<String>,
    /// One row per date.
    pub values: Vec<Vec<f64>>,
}

impl DimensionTable {
    fn row_sums(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attributions {
    pub dates: Vec<NaiveDate>,
    pub predictions: Vec<f64>,
    /// Intercept of the model behind each prediction.
    pub intercept: Vec<f64>,
    pub externals: DimensionTable,
    pub lexicons: DimensionTable,
    pub features: DimensionTable,
    pub time: DimensionTable,
    /// `lag0` is the current period. Needs aggregation provenance.
    pub lags: Option<DimensionTable>,
    /// Per date, contribution by document id. Needs aggregation provenance.
    pub documents: Option<Vec<IndexMap<String, f64>>>,
    pub normalized: bool,
}

/// Names of the dimensions in long-format output.
pub const DIMENSIONS: [&str; 8] = [
    "prediction",
    "intercept",
    "externals",
    "lexicons",
    "features",
    "time",
    "lags",
    "documents",
];

struct Term {
    coefficient: f64,
    /// Measure column, when the regressor is a sentiment measure.
    measure: Option<usize>,
    /// Index in the external regressors otherwise.
    external: Option<usize>,
    name: String,
}

struct DateContribution {
    prediction: f64,
    intercept: f64,
    externals: Vec<f64>,
    lexicons: Vec<f64>,
    features: Vec<f64>,
    time: Vec<f64>,
    lags: Option<Vec<f64>>,
    documents: Option<IndexMap<String, f64>>,
}

struct Context<'a> {
    measures: &'a MeasureSet,
    externals: Option<&'a Externals>,
    external_names: Vec<String>,
    lexicons: Vec<String>,
    features: Vec<String>,
    time: Vec<String>,
    provenance: Option<Trace<'a>>,
}

/// What is needed to look behind a measure value.
struct Trace<'a> {
    provenance: &'a Provenance,
    lag: usize,
    groups: BTreeMap<NaiveDate, Vec<usize>>,
    series_column: HashMap<String, usize>,
    time_weights: HashMap<&'a str, &'a [f64]>,
}

impl<'a> Context<'a> {
    fn new(measures: &'a MeasureSet, externals: Option<&'a Externals>) -> Result<Self> {
        let provenance = match measures.provenance() {
            None => None,
            Some(p) => Some(Trace {
                provenance: p,
                lag: p.config.lag,
                groups: rows_by_period(&p.sentiment, p.config.by)?,
                series_column: p
                    .series
                    .columns
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c.clone(), i))
                    .collect(),
                time_weights: p
                    .time_weights
                    .iter()
                    .map(|(n, w)| (n.as_str(), w.as_slice()))
                    .collect(),
            }),
        };
        Ok(Context {
            measures,
            externals,
            external_names: externals.map(|e| e.names.clone()).unwrap_or_default(),
            lexicons: measures.lexicons(),
            features: measures.features(),
            time: measures.time_schemes(),
            provenance,
        })
    }

    fn terms(&self, model: &FittedModel) -> Result<Vec<Term>> {
        model
            .names
            .iter()
            .zip(&model.coefficients)
            .enumerate()
            .map(|(j, (name, &coefficient))| {
                if j < model.n_measures {
                    let m = self.measures.index_of(name)?;
                    Ok(Term { coefficient, measure: Some(m), external: None, name: name.clone() })
                } else {
                    let e = self
                        .external_names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| Error::UnknownName(name.clone()))?;
                    Ok(Term { coefficient, measure: None, external: Some(e), name: name.clone() })
                }
            })
            .collect()
    }

    fn contribution(&self, model: &FittedModel, terms: &[Term], date: NaiveDate) -> Result<DateContribution> {
        let row = self
            .measures
            .date_index(date)
            .ok_or_else(|| Error::KeyMismatch(format!("date {date} is not in the measures")))?;
        let mut out = DateContribution {
            prediction: model.intercept,
            intercept: model.intercept,
            externals: vec![0.0; self.external_names.len()],
            lexicons: vec![0.0; self.lexicons.len()],
            features: vec![0.0; self.features.len()],
            time: vec![0.0; self.time.len()],
            lags: self.provenance.as_ref().map(|t| vec![0.0; t.lag]),
            documents: self.provenance.as_ref().map(|_| IndexMap::new()),
        };
        for term in terms {
            if let Some(e) = term.external {
                let ext = self.externals.expect("external term implies externals");
                let value = ext.at(&[date])?[e][0];
                let c = term.coefficient * value;
                out.externals[e] += c;
                out.prediction += c;
                continue;
            }
            let m = term.measure.expect("measure term");
            let c = term.coefficient * self.measures.column(m)[row];
            out.prediction += c;
            let name = &self.measures.names()[m];
            for (dim, list, slot) in [
                (Dimension::Lexicons, &self.lexicons, &mut out.lexicons),
                (Dimension::Features, &self.features, &mut out.features),
                (Dimension::Time, &self.time, &mut out.time),
            ] {
                let k = list
                    .iter()
                    .position(|x| x == name.component(dim))
                    .expect("component listed");
                slot[k] += c;
            }
            if let Some(trace) = &self.provenance {
                self.trace_term(trace, term, date, &mut out)?;
            }
        }
        Ok(out)
    }

    /// Spreads `β·s` over the lag window and the documents behind each period.
    fn trace_term(&self, trace: &Trace, term: &Term, date: NaiveDate, out: &mut DateContribution) -> Result<()> {
        let name = &self.measures.names()[term.measure.expect("measure term")];
        let series = &trace.provenance.series;
        let config = &trace.provenance.config;
        let column = *trace
            .series_column
            .get(&score_column(&name.lexicon, &name.feature))
            .ok_or_else(|| Error::UnknownName(term.name.clone()))?;
        let b = *trace
            .time_weights
            .get(name.time.as_str())
            .ok_or_else(|| Error::UnknownName(term.name.clone()))?;
        let end = series
            .date_index(date)
            .ok_or_else(|| Error::KeyMismatch(format!("date {date} is not in the aggregated series")))?;
        if end + 1 < trace.lag {
            return Err(Error::KeyMismatch(format!("date {date} has an incomplete lag window")));
        }
        let start = end + 1 - trace.lag;
        let lags = out.lags.as_mut().expect("traced");
        let docs = out.documents.as_mut().expect("traced");
        for (t, bt) in b.iter().enumerate() {
            let r = start + t;
            let weight = term.coefficient * bt;
            lags[trace.lag - 1 - t] += weight * series.values[r][column];
            if series.filled[r] {
                *docs.entry(FILL_DOCUMENT.to_string()).or_insert(0.0) += weight * series.values[r][column];
                continue;
            }
            let members = trace
                .groups
                .get(&series.dates[r])
                .ok_or_else(|| Error::KeyMismatch(format!("no documents for {}", series.dates[r])))?;
            let table = &trace.provenance.sentiment;
            for (n, theta) in document_weights(
                table,
                members,
                column,
                config.how_docs,
                config.do_ignore_zeros,
                config.alpha_exp_docs,
            )? {
                let doc = &table.rows()[n];
                *docs.entry(doc.id.clone()).or_insert(0.0) += weight * theta * doc.scores[column];
            }
        }
        Ok(())
    }

    fn assemble(&self, parts: Vec<(NaiveDate, DateContribution)>) -> Attributions {
        let n = parts.len();
        let table = |components: &[String]| DimensionTable {
            components: components.to_vec(),
            values: Vec::with_capacity(n),
        };
        let mut a = Attributions {
            dates: Vec::with_capacity(n),
            predictions: Vec::with_capacity(n),
            intercept: Vec::with_capacity(n),
            externals: table(&self.external_names),
            lexicons: table(&self.lexicons),
            features: table(&self.features),
            time: table(&self.time),
            lags: self
                .provenance
                .as_ref()
                .map(|t| table(&(0..t.lag).map(|l| format!("lag{l}")).collect::<Vec<_>>())),
            documents: self.provenance.as_ref().map(|_| Vec::with_capacity(n)),
            normalized: false,
        };
        for (date, c) in parts {
            a.dates.push(date);
            a.predictions.push(c.prediction);
            a.intercept.push(c.intercept);
            a.externals.values.push(c.externals);
            a.lexicons.values.push(c.lexicons);
            a.features.values.push(c.features);
            a.time.values.push(c.time);
            if let (Some(t), Some(v)) = (a.lags.as_mut(), c.lags) {
                t.values.push(v);
            }
            if let (Some(d), Some(v)) = (a.documents.as_mut(), c.documents) {
                d.push(v);
            }
        }
        a
    }
}

/// Attributions of a fitted model at `ref_dates` (default: its training dates).
/// `measures` and `externals` must be those the model was fit on.
pub fn attributions(
    model: &FittedModel,
    measures: &MeasureSet,
    externals: Option<&Externals>,
    ref_dates: Option<&[NaiveDate]>,
) -> Result<Attributions> {
    let ctx = Context::new(measures, externals)?;
    let terms = ctx.terms(model)?;
    let dates = ref_dates.unwrap_or(&model.dates);
    let parts = dates
        .par_iter()
        .map(|&d| Ok((d, ctx.contribution(model, &terms, d)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ctx.assemble(parts))
}

/// Attributions of every out-of-sample prediction, each with its own model.
pub fn attributions_iter(
    results: &IterResults,
    measures: &MeasureSet,
    externals: Option<&Externals>,
) -> Result<Attributions> {
    let ctx = Context::new(measures, externals)?;
    let parts = results
        .models
        .par_iter()
        .zip(&results.dates)
        .map(|(model, &d)| {
            let terms = ctx.terms(model)?;
            Ok((d, ctx.contribution(model, &terms, d)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ctx.assemble(parts))
}

fn normalize_in_place(values: &mut [f64]) {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
}

impl Attributions {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// The dated table for a named dimension (`lexicons`, `features`, `time`, `lags`, `externals`).
    pub fn dimension(&self, name: &str) -> Option<&DimensionTable> {
        match name {
            "lexicons" => Some(&self.lexicons),
            "features" => Some(&self.features),
            "time" => Some(&self.time),
            "lags" => self.lags.as_ref(),
            "externals" => Some(&self.externals),
            _ => None,
        }
    }

    /// Per date, the sum over the components of a dimension (`documents` included).
    pub fn totals(&self, name: &str) -> Option<Vec<f64>> {
        if name == "documents" {
            return self
                .documents
                .as_ref()
                .map(|d| d.iter().map(|m| m.values().sum()).collect());
        }
        self.dimension(name).map(DimensionTable::row_sums)
    }

    /// Largest deviation of `dimension + intercept + externals` from the prediction.
    pub fn identity_error(&self, name: &str) -> Option<f64> {
        let totals = self.totals(name)?;
        let ext = self.externals.row_sums();
        Some(
            (0..self.len())
                .map(|i| (totals[i] + self.intercept[i] + ext[i] - self.predictions[i]).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Divides each date's vector by its ℓ2 norm, dimension by dimension.
    pub fn normalize(&self) -> Attributions {
        let mut a = self.clone();
        for t in [&mut a.lexicons, &mut a.features, &mut a.time] {
            t.values.iter_mut().for_each(|r| normalize_in_place(r));
        }
        if let Some(t) = a.lags.as_mut() {
            t.values.iter_mut().for_each(|r| normalize_in_place(r));
        }
        if let Some(d) = a.documents.as_mut() {
            for m in d.iter_mut() {
                let mut v: Vec<f64> = m.values().copied().collect();
                normalize_in_place(&mut v);
                m.values_mut().zip(v).for_each(|(x, y)| *x = y);
            }
        }
        a.normalized = true;
        a
    }

    /// `date, dimension, component, value`; predictions and intercepts are rows too.
    pub fn to_long_table(&self) -> Table {
        let mut rows = Vec::new();
        let mut push = |d: &NaiveDate, dim: &str, comp: &str, v: f64| {
            rows.push(vec![d.to_string(), dim.to_string(), comp.to_string(), format_number(v)]);
        };
        for (i, d) in self.dates.iter().enumerate() {
            push(d, "prediction", "prediction", self.predictions[i]);
            push(d, "intercept", "(Intercept)", self.intercept[i]);
            for dim in ["externals", "lexicons", "features", "time", "lags"] {
                if let Some(t) = self.dimension(dim) {
                    for (c, v) in t.components.iter().zip(&t.values[i]) {
                        push(d, dim, c, *v);
                    }
                }
            }
            if let Some(docs) = &self.documents {
                for (id, v) in &docs[i] {
                    push(d, "documents", id, *v);
                }
            }
        }
        Table::new(
            ["date", "dimension", "component", "value"].map(String::from).to_vec(),
            rows,
        )
    }

    pub fn write_long_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_long_table().write_csv_file(path)
    }

    /// Inverse of [`Attributions::to_long_table`]. Normalization is not recorded,
    /// so the result reports `normalized = false`.
    pub fn from_long_table(table: &Table) -> Result<Self> {
        let col = |name: &str| table.column_index(name).ok_or_else(|| Error::MissingColumn(name.into()));
        let (dc, mc, cc, vc) = (col("date")?, col("dimension")?, col("component")?, col("value")?);
        let mut dates: Vec<NaiveDate> = Vec::new();
        // dimension -> component order, and (date, dimension, component) -> value
        let mut components: IndexMap<String, IndexMap<String, ()>> = IndexMap::new();
        let mut values: HashMap<(usize, String, String), f64> = HashMap::new();
        let mut docs: Vec<IndexMap<String, f64>> = Vec::new();
        let mut any_docs = false;
        for (line, r) in table.rows.iter().enumerate() {
            let d = parse_date(&r[dc])?;
            if dates.last() != Some(&d) {
                if dates.contains(&d) {
                    return Err(Error::Malformed {
                        line: line as u64 + 2,
                        message: format!("rows for {d} are not contiguous"),
                    });
                }
                dates.push(d);
                docs.push(IndexMap::new());
            }
            let i = dates.len() - 1;
            let dim = r[mc].as_str();
            if !DIMENSIONS.contains(&dim) {
                return Err(Error::UnknownName(dim.to_string()));
            }
            let v = parse_number("value", &r[vc])?;
            if dim == "documents" {
                any_docs = true;
                docs[i].insert(r[cc].clone(), v);
            } else {
                components.entry(dim.into()).or_default().insert(r[cc].clone(), ());
                values.insert((i, dim.into(), r[cc].clone()), v);
            }
        }
        let get = |i: usize, dim: &str, comp: &str| -> Result<f64> {
            values
                .get(&(i, dim.to_string(), comp.to_string()))
                .copied()
                .ok_or_else(|| Error::KeyMismatch(format!("missing {dim}/{comp} for {}", dates[i])))
        };
        let dimension = |dim: &str| -> Result<Option<DimensionTable>> {
            let Some(comps) = components.get(dim) else {
                return Ok(None);
            };
            let comps: Vec<String> = comps.keys().cloned().collect();
            let values = (0..dates.len())
                .map(|i| comps.iter().map(|c| get(i, dim, c)).collect())
                .collect::<Result<_>>()?;
            Ok(Some(DimensionTable { components: comps, values }))
        };
        let empty = || DimensionTable {
            components: Vec::new(),
            values: vec![Vec::new(); dates.len()],
        };
        Ok(Attributions {
            predictions: (0..dates.len()).map(|i| get(i, "prediction", "prediction")).collect::<Result<_>>()?,
            intercept: (0..dates.len()).map(|i| get(i, "intercept", "(Intercept)")).collect::<Result<_>>()?,
            externals: dimension("externals")?.unwrap_or_else(empty),
            lexicons: dimension("lexicons")?.unwrap_or_else(empty),
            features: dimension("features")?.unwrap_or_else(empty),
            time: dimension("time")?.unwrap_or_else(empty),
            lags: dimension("lags")?,
            documents: any_docs.then_some(docs),
            normalized: false,
            dates,
        })
    }

    pub fn read_long_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_long_table(&Table::read_csv(path)?).map_err(|e| e.context(path.display().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::Frequency;
    use crate::model::{Calibration, Criterion};
    use crate::naming::MeasureName;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, d).unwrap()
    }

    fn measures() -> MeasureSet {
        let names = vec![
            MeasureName::new("l1", "f1", "linear"),
            MeasureName::new("l1", "f2", "linear"),
            MeasureName::new("l2", "f1", "linear"),
        ];
        let columns = vec![vec![1.0, 2.0, 3.0], vec![0.5, -1.0, 0.0], vec![-2.0, 4.0, 1.0]];
        MeasureSet::new(Frequency::Day, vec![day(1), day(2), day(3)], names, columns).unwrap()
    }

    fn model(coefficients: Vec<f64>) -> FittedModel {
        FittedModel {
            names: vec!["l1--f1--linear".into(), "l1--f2--linear".into(), "l2--f1--linear".into()],
            n_measures: 3,
            intercept: 0.25,
            coefficients,
            alpha: 1.0,
            lambda: 0.0,
            df: 3.0,
            calibration: Calibration { criterion: Criterion::Bic, alpha: 1.0, lambda: 0.0, points: Vec::new() },
            discarded: Vec::new(),
            dates: vec![day(1), day(2), day(3)],
            target: vec![0.0; 3],
            fitted: vec![0.0; 3],
        }
    }

    #[test]
    fn dimension_sums_match_predictions() {
        let m = measures();
        let fit = model(vec![1.0, 2.0, -0.5]);
        let a = attributions(&fit, &m, None, None).unwrap();
        assert_eq!(a.predictions[0], 0.25 + 1.0 + 1.0 + 1.0);
        for dim in ["lexicons", "features", "time"] {
            assert!(a.identity_error(dim).unwrap() < 1e-12, "{dim}");
        }
        // feature f2 only comes from the second measure
        assert_eq!(a.features.values[1][1], 2.0 * -1.0);
        assert!(a.lags.is_none());
    }

    #[test]
    fn zero_model_attributes_nothing() {
        let a = attributions(&model(vec![0.0; 3]), &measures(), None, None).unwrap();
        assert!(a.lexicons.values.iter().flatten().all(|&v| v == 0.0));
        let n = a.normalize();
        assert!(n.lexicons.values.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn normalized_rows_have_unit_norm() {
        let a = attributions(&model(vec![1.0, 2.0, -0.5]), &measures(), None, None)
            .unwrap()
            .normalize();
        for r in &a.lexicons.values {
            let norm: f64 = r.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn long_table_round_trip() {
        let a = attributions(&model(vec![1.0, 2.0, -0.5]), &measures(), None, None).unwrap();
        let t = a.to_long_table();
        // 3 dates × (prediction + intercept + 2 lexicons + 2 features + 1 scheme)
        assert_eq!(t.rows.len(), 3 * 7);
        let back = Attributions::from_long_table(&t).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn unknown_date_is_rejected() {
        let r = attributions(&model(vec![1.0; 3]), &measures(), None, Some(&[day(9)]));
        assert!(matches!(r, Err(Error::KeyMismatch(_))));
    }
}
