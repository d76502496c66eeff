//! Sentiment measures: dated series named `lexicon--feature--time`, and the
//! operations that reshape them.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDate;
use indexmap::IndexMap;

use crate::aggregation::{fill_rows, AggregationConfig, Fill, PeriodSeries};
use crate::error::{Error, Result};
use crate::frequency::Frequency;
use crate::io::{format_number, parse_date, parse_number, Table};
use crate::naming::{check_component, Dimension, MeasureName};
use crate::sentiment::{peak_indices, PeakKind, SentimentTable};

/// What produced a measure set: needed to trace measures back to documents.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    /// The document-level scores that were aggregated.
    pub sentiment: SentimentTable,
    pub config: AggregationConfig,
    /// Per-period values after filling, before time aggregation.
    pub series: PeriodSeries,
    /// Time scheme name and its weights over the lag window.
    pub time_weights: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    by: Frequency,
    dates: Vec<NaiveDate>,
    names: Vec<MeasureName>,
    /// One vector per measure, aligned with `dates`.
    columns: Vec<Vec<f64>>,
    provenance: Option<Arc<Provenance>>,
}

/// A row filter on the values of one named measure.
#[derive(Debug, Clone, PartialEq)]
pub enum RowCondition {
    Greater(String, f64),
    Less(String, f64),
    /// Closed interval.
    Between(String, f64, f64),
}

/// Centering applied by [`MeasureSet::scale`].
#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    None,
    Mean,
    /// One value per measure.
    Values(Vec<f64>),
    /// One row per date, one value per measure.
    Matrix(Vec<Vec<f64>>),
}

/// Scaling applied by [`MeasureSet::scale`], after centering.
#[derive(Debug, Clone, PartialEq)]
pub enum Scale {
    None,
    /// Sample standard deviation.
    Sd,
    Values(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

/// Groupings for [`MeasureSet::merge_dimensions`]: new name → members, per dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Merges {
    pub lexicons: Vec<(String, Vec<String>)>,
    pub features: Vec<(String, Vec<String>)>,
    pub time: Vec<(String, Vec<String>)>,
}

impl Merges {
    fn for_dimension(&self, dim: Dimension) -> &[(String, Vec<String>)] {
        match dim {
            Dimension::Lexicons => &self.lexicons,
            Dimension::Features => &self.features,
            Dimension::Time => &self.time,
        }
    }
}

/// Per-dimension global series.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMeasures {
    pub dates: Vec<NaiveDate>,
    pub lexicons: Vec<f64>,
    pub features: Vec<f64>,
    pub time: Vec<f64>,
    pub global: Vec<f64>,
}

impl GlobalMeasures {
    pub fn to_table(&self) -> Table {
        let header = ["date", "global_lexicons", "global_features", "global_time", "global"]
            .map(String::from)
            .to_vec();
        let rows = (0..self.dates.len())
            .map(|i| {
                vec![
                    self.dates[i].to_string(),
                    format_number(self.lexicons[i]),
                    format_number(self.features[i]),
                    format_number(self.time[i]),
                    format_number(self.global[i]),
                ]
            })
            .collect();
        Table::new(header, rows)
    }
}

/// Summary statistics, one entry per measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureStats {
    pub names: Vec<MeasureName>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    /// Average correlation with every other measure.
    pub mean_corr: Vec<f64>,
}

impl MeasureStats {
    /// Statistics as rows, measures as columns.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["statistic".to_string()];
        header.extend(self.names.iter().map(ToString::to_string));
        let row = |label: &str, v: &[f64]| {
            let mut r = vec![label.to_string()];
            r.extend(v.iter().map(|&x| format_number(x)));
            r
        };
        Table::new(
            header,
            vec![
                row("mean", &self.mean),
                row("sd", &self.sd),
                row("max", &self.max),
                row("min", &self.min),
                row("meanCorr", &self.mean_corr),
            ],
        )
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub(crate) fn sample_sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

pub(crate) fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

impl MeasureSet {
    pub fn new(
        by: Frequency,
        dates: Vec<NaiveDate>,
        names: Vec<MeasureName>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} series",
                names.len(),
                columns.len()
            )));
        }
        if names.is_empty() || dates.is_empty() {
            return Err(Error::EmptyResult);
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidValue("dates must be strictly increasing".into()));
        }
        let mut seen = HashSet::new();
        for (name, col) in names.iter().zip(&columns) {
            for c in name.components() {
                check_component(c)?;
            }
            if !seen.insert(name) {
                return Err(Error::DuplicateColumn(name.to_string()));
            }
            if col.len() != dates.len() {
                return Err(Error::ShapeMismatch(format!(
                    "series `{name}` has {} values for {} dates",
                    col.len(),
                    dates.len()
                )));
            }
        }
        Ok(MeasureSet {
            by,
            dates,
            names,
            columns,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Arc<Provenance>) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_deref()
    }

    pub fn by(&self) -> Frequency {
        self.by
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[MeasureName] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Number of dates.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Number of measures.
    pub fn n_measures(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n.to_string() == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Distinct components of one dimension, in first-appearance order.
    pub fn dimension(&self, dim: Dimension) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for n in &self.names {
            let c = n.component(dim);
            if !out.iter().any(|x| x == c) {
                out.push(c.to_string());
            }
        }
        out
    }

    pub fn lexicons(&self) -> Vec<String> {
        self.dimension(Dimension::Lexicons)
    }

    pub fn features(&self) -> Vec<String> {
        self.dimension(Dimension::Features)
    }

    pub fn time_schemes(&self) -> Vec<String> {
        self.dimension(Dimension::Time)
    }

    /// Values at date index `i` across all measures.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    fn rebuild(&self, dates: Vec<NaiveDate>, names: Vec<MeasureName>, columns: Vec<Vec<f64>>, keep: bool) -> Result<Self> {
        let mut out = MeasureSet::new(self.by, dates, names, columns)?;
        if keep {
            out.provenance = self.provenance.clone();
        }
        Ok(out)
    }

    /// Keeps the rows at `indices`, in increasing order.
    pub fn subset_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidParameter(format!(
                "row {bad} is out of range for {} dates",
                self.len()
            )));
        }
        if idx.is_empty() {
            return Err(Error::EmptyResult);
        }
        let dates = idx.iter().map(|&i| self.dates[i]).collect();
        let columns = self
            .columns
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect();
        self.rebuild(dates, self.names.clone(), columns, true)
    }

    /// Keeps the dates satisfying `keep`.
    pub fn filter_dates(&self, keep: impl Fn(NaiveDate) -> bool) -> Result<Self> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(self.dates[i])).collect();
        self.subset_rows(&idx)
    }

    /// Keeps the dates within `[from, to]`; either bound may be open.
    pub fn subset_dates(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<Self> {
        self.filter_dates(|d| from.is_none_or(|f| d >= f) && to.is_none_or(|t| d <= t))
    }

    pub fn subset_condition(&self, condition: &RowCondition) -> Result<Self> {
        let (name, test): (&str, Box<dyn Fn(f64) -> bool>) = match condition {
            RowCondition::Greater(n, v) => (n, Box::new(move |x| x > *v)),
            RowCondition::Less(n, v) => (n, Box::new(move |x| x < *v)),
            RowCondition::Between(n, a, b) => (n, Box::new(move |x| x >= *a && x <= *b)),
        };
        let j = self.index_of(name)?;
        let idx: Vec<usize> = (0..self.len()).filter(|&i| test(self.columns[j][i])).collect();
        self.subset_rows(&idx)
    }

    fn matches(&self, combos: &[Vec<String>]) -> Result<Vec<bool>> {
        let known: HashSet<&str> = self.names.iter().flat_map(|n| n.components()).collect();
        for c in combos.iter().flatten() {
            if !known.contains(c.as_str()) {
                return Err(Error::UnknownName(c.clone()));
            }
        }
        Ok(self
            .names
            .iter()
            .map(|n| {
                let parts = n.components();
                combos
                    .iter()
                    .any(|combo| combo.iter().all(|c| parts.contains(&c.as_str())))
            })
            .collect())
    }

    fn keep_columns(&self, keep: &[bool]) -> Result<Self> {
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for ((n, c), &k) in self.names.iter().zip(&self.columns).zip(keep) {
            if k {
                names.push(n.clone());
                columns.push(c.clone());
            }
        }
        if names.is_empty() {
            return Err(Error::EmptyResult);
        }
        self.rebuild(self.dates.clone(), names, columns, true)
    }

    /// Keeps the measures whose components include every name of at least one combination.
    pub fn select(&self, combos: &[Vec<String>]) -> Result<Self> {
        let m = self.matches(combos)?;
        self.keep_columns(&m)
    }

    /// Drops the measures whose components include every name of at least one combination.
    pub fn delete(&self, combos: &[Vec<String>]) -> Result<Self> {
        let m: Vec<bool> = self.matches(combos)?.into_iter().map(|x| !x).collect();
        self.keep_columns(&m)
    }

    /// Averages measures over the given groupings, all dimensions at once.
    /// Without `do_keep` the originals whose components were grouped are dropped;
    /// with it, every original measure is kept alongside the merged ones.
    pub fn merge_dimensions(&self, merges: &Merges, do_keep: bool) -> Result<Self> {
        let mut maps: Vec<HashMap<String, String>> = Vec::new();
        for dim in Dimension::ALL {
            let present = self.dimension(dim);
            let mut map = HashMap::new();
            for (new_name, members) in merges.for_dimension(dim) {
                check_component(new_name)?;
                if members.is_empty() {
                    return Err(Error::InvalidParameter(format!("group `{new_name}` has no members")));
                }
                for m in members {
                    if !present.contains(m) {
                        return Err(Error::UnknownName(m.clone()));
                    }
                    if map.insert(m.clone(), new_name.clone()).is_some() {
                        return Err(Error::InvalidParameter(format!(
                            "`{m}` belongs to more than one group"
                        )));
                    }
                }
            }
            let grouped: HashSet<&String> = map.keys().collect();
            let targets: HashSet<&String> = map.values().collect();
            if let Some(clash) = present.iter().find(|p| !grouped.contains(p) && targets.contains(p)) {
                return Err(Error::NameCollision(clash.clone()));
            }
            maps.push(map);
        }
        let mut merged: IndexMap<MeasureName, (Vec<f64>, usize)> = IndexMap::new();
        for (name, col) in self.names.iter().zip(&self.columns) {
            let mapped = |dim: usize, c: &str| maps[dim].get(c).cloned().unwrap_or_else(|| c.to_string());
            let target = MeasureName::new(
                mapped(0, &name.lexicon),
                mapped(1, &name.feature),
                mapped(2, &name.time),
            );
            let entry = merged
                .entry(target)
                .or_insert_with(|| (vec![0.0; self.len()], 0));
            for (acc, v) in entry.0.iter_mut().zip(col) {
                *acc += v;
            }
            entry.1 += 1;
        }
        let mut names = Vec::new();
        let mut columns = Vec::new();
        if do_keep {
            names.extend(self.names.iter().cloned());
            columns.extend(self.columns.iter().cloned());
        }
        for (name, (sum, count)) in merged {
            if do_keep && names.contains(&name) {
                continue;
            }
            names.push(name);
            columns.push(sum.into_iter().map(|s| s / count as f64).collect());
        }
        self.rebuild(self.dates.clone(), names, columns, false)
    }

    /// Weighted averages over all measures per dimension; weights are looked up by
    /// the component of each measure and need not sum to one.
    pub fn global_measures(
        &self,
        lexicon_weights: &[f64],
        feature_weights: &[f64],
        time_weights: &[f64],
    ) -> Result<GlobalMeasures> {
        let p = self.n_measures() as f64;
        let mut out = Vec::new();
        for (dim, w) in Dimension::ALL
            .into_iter()
            .zip([lexicon_weights, feature_weights, time_weights])
        {
            let comps = self.dimension(dim);
            if comps.len() != w.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} {} weights for {} components",
                    w.len(),
                    dim.as_str(),
                    comps.len()
                )));
            }
            let per_measure: Vec<f64> = self
                .names
                .iter()
                .map(|n| w[comps.iter().position(|c| c == n.component(dim)).expect("known")])
                .collect();
            out.push(
                (0..self.len())
                    .map(|i| {
                        self.columns
                            .iter()
                            .zip(&per_measure)
                            .map(|(c, w)| c[i] * w)
                            .sum::<f64>()
                            / p
                    })
                    .collect::<Vec<f64>>(),
            );
        }
        let global = (0..self.len())
            .map(|i| (out[0][i] + out[1][i] + out[2][i]) / 3.0)
            .collect();
        let time = out.pop().expect("three");
        let features = out.pop().expect("three");
        let lexicons = out.pop().expect("three");
        Ok(GlobalMeasures {
            dates: self.dates.clone(),
            lexicons,
            features,
            time,
            global,
        })
    }

    /// `(x - center) / scale` elementwise.
    pub fn scale(&self, center: &Center, scale: &Scale) -> Result<Self> {
        let n = self.len();
        let p = self.n_measures();
        let check_values = |v: &[f64], what: &str| {
            if v.len() != p {
                Err(Error::ShapeMismatch(format!("{} {what} values for {p} measures", v.len())))
            } else {
                Ok(())
            }
        };
        let check_matrix = |m: &[Vec<f64>], what: &str| {
            if m.len() != n || m.iter().any(|r| r.len() != p) {
                Err(Error::ShapeMismatch(format!("{what} matrix must be {n} x {p}")))
            } else {
                Ok(())
            }
        };
        match center {
            Center::Values(v) => check_values(v, "center")?,
            Center::Matrix(m) => check_matrix(m, "center")?,
            _ => {}
        }
        match scale {
            Scale::Values(v) => check_values(v, "scale")?,
            Scale::Matrix(m) => check_matrix(m, "scale")?,
            _ => {}
        }
        let mut columns = Vec::with_capacity(p);
        for (j, col) in self.columns.iter().enumerate() {
            let centered: Vec<f64> = match center {
                Center::None => col.clone(),
                Center::Mean => {
                    let m = mean(col);
                    col.iter().map(|x| x - m).collect()
                }
                Center::Values(v) => col.iter().map(|x| x - v[j]).collect(),
                Center::Matrix(m) => col.iter().enumerate().map(|(i, x)| x - m[i][j]).collect(),
            };
            let scaled: Vec<f64> = match scale {
                Scale::None => centered,
                Scale::Sd => {
                    let sd = sample_sd(col);
                    if !(sd.is_finite() && sd > 0.0) {
                        return Err(Error::Numerical(format!(
                            "series `{}` has no variation to scale by",
                            self.names[j]
                        )));
                    }
                    centered.iter().map(|x| x / sd).collect()
                }
                Scale::Values(v) => centered.iter().map(|x| x / v[j]).collect(),
                Scale::Matrix(m) => centered.iter().enumerate().map(|(i, x)| x / m[i][j]).collect(),
            };
            if scaled.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!(
                    "scaling `{}` produced non-finite values",
                    self.names[j]
                )));
            }
            columns.push(scaled);
        }
        self.rebuild(self.dates.clone(), self.names.clone(), columns, false)
    }

    /// Differences of order `differences` at lag `lag`; the first `lag × differences` dates are dropped.
    pub fn diff(&self, lag: usize, differences: usize) -> Result<Self> {
        if lag == 0 || differences == 0 {
            return Err(Error::InvalidParameter("lag and differences must be positive".into()));
        }
        let drop = lag * differences;
        if drop >= self.len() {
            return Err(Error::InsufficientData {
                needed: drop + 1,
                available: self.len(),
            });
        }
        let columns = self
            .columns
            .iter()
            .map(|c| {
                let mut x = c.clone();
                for _ in 0..differences {
                    x = (lag..x.len()).map(|i| x[i] - x[i - lag]).collect();
                }
                x
            })
            .collect();
        self.rebuild(self.dates[drop..].to_vec(), self.names.clone(), columns, false)
    }

    /// Inserts missing dates at the measure frequency.
    pub fn fill(&self, fill: Fill, date_before: Option<NaiveDate>, date_after: Option<NaiveDate>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..self.len()).map(|i| self.row(i)).collect();
        let (dates, rows, _) = fill_rows(self.by, &self.dates, &rows, fill, date_before, date_after)?;
        let columns = (0..self.n_measures())
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        self.rebuild(dates, self.names.clone(), columns, false)
    }

    /// Dates with the most extreme mean across measures.
    pub fn peak_dates(&self, n: usize, kind: PeakKind) -> Result<Vec<NaiveDate>> {
        let means: Vec<f64> = (0..self.len()).map(|i| mean(&self.row(i))).collect();
        Ok(peak_indices(&means, n, kind)?
            .into_iter()
            .map(|i| self.dates[i])
            .collect())
    }

    pub fn stats(&self) -> MeasureStats {
        let p = self.n_measures();
        let mut corr = vec![vec![f64::NAN; p]; p];
        for a in 0..p {
            for b in a + 1..p {
                let c = correlation(&self.columns[a], &self.columns[b]);
                corr[a][b] = c;
                corr[b][a] = c;
            }
        }
        let mean_corr = (0..p)
            .map(|a| {
                let vals: Vec<f64> = (0..p)
                    .filter(|&b| b != a && corr[a][b].is_finite())
                    .map(|b| corr[a][b])
                    .collect();
                if vals.is_empty() {
                    f64::NAN
                } else {
                    mean(&vals)
                }
            })
            .collect();
        MeasureStats {
            names: self.names.clone(),
            mean: self.columns.iter().map(|c| mean(c)).collect(),
            sd: self.columns.iter().map(|c| sample_sd(c)).collect(),
            max: self.columns.iter().map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect(),
            min: self.columns.iter().map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).collect(),
            mean_corr,
        }
    }

    /// `date` followed by one column per measure.
    pub fn to_wide_table(&self) -> Table {
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().map(ToString::to_string));
        let rows = (0..self.len())
            .map(|i| {
                let mut r = vec![self.dates[i].to_string()];
                r.extend(self.columns.iter().map(|c| format_number(c[i])));
                r
            })
            .collect();
        Table::new(header, rows)
    }

    /// Columns `date, lexicon, feature, time, value`.
    pub fn to_long_table(&self) -> Table {
        let header = ["date", "lexicon", "feature", "time", "value"]
            .map(String::from)
            .to_vec();
        let mut rows = Vec::with_capacity(self.len() * self.n_measures());
        for i in 0..self.len() {
            for (n, c) in self.names.iter().zip(&self.columns) {
                rows.push(vec![
                    self.dates[i].to_string(),
                    n.lexicon.clone(),
                    n.feature.clone(),
                    n.time.clone(),
                    format_number(c[i]),
                ]);
            }
        }
        Table::new(header, rows)
    }

    pub fn from_wide_table(table: &Table, by: Frequency) -> Result<Self> {
        let date_col = table
            .column_index("date")
            .ok_or_else(|| Error::MissingColumn("date".into()))?;
        let mut names = Vec::new();
        let mut idx = Vec::new();
        for (j, h) in table.header.iter().enumerate() {
            if j != date_col {
                names.push(h.parse::<MeasureName>()?);
                idx.push(j);
            }
        }
        let dates = table
            .rows
            .iter()
            .map(|r| parse_date(&r[date_col]))
            .collect::<Result<Vec<_>>>()?;
        if let Some(d) = dates.iter().find(|d| by.period_start(**d) != **d) {
            return Err(Error::InvalidValue(format!("date {d} does not start a {by} period")));
        }
        let columns = idx
            .iter()
            .map(|&j| {
                table
                    .rows
                    .iter()
                    .map(|r| parse_number(&table.header[j], &r[j]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MeasureSet::new(by, dates, names, columns)
    }

    pub fn write_wide_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_wide_table().write_csv_file(path)
    }

    pub fn write_long_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_long_table().write_csv_file(path)
    }

    pub fn read_wide_csv(path: impl AsRef<Path>, by: Frequency) -> Result<Self> {
        let path = path.as_ref();
        Self::from_wide_table(&Table::read_csv(path)?, by)
            .map_err(|e| e.context(path.display().to_string()))
    }
}
