//! Sparse linear regression of a target on sentiment measures and external
//! regressors, with one-shot and rolling out-of-sample estimation.

mod calibrate;
mod enet;

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use calibrate::{calibrate_cv, calibrate_ic, rolling_splits, Calibration, CalibrationPoint, Criterion, Fold};
pub use enet::{elastic_net_fit, lambda_path, ElasticNetFit, Problem, MAX_SWEEPS, TOLERANCE};

use crate::error::{Error, Result};
use crate::io::{format_number, parse_date, parse_number, Table};
use crate::measures::MeasureSet;
use crate::sentiment::with_threads;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub criterion: Criterion,
    pub alphas: Vec<f64>,
    /// Fixed λ grid; when absent a path is generated per α.
    pub lambdas: Option<Vec<f64>>,
    pub h: i64,
    pub do_difference: bool,
    pub do_iter: bool,
    /// Estimation window size for iterative estimation.
    pub n_sample: Option<usize>,
    /// 1-based index of the first iteration to run.
    pub start: usize,
    pub oos: usize,
    pub train_window: Option<usize>,
    pub test_window: Option<usize>,
    pub do_intercept: bool,
    /// Whether each external regressor is penalized; empty means all are.
    pub do_shrinkage_x: Vec<bool>,
    pub threads: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            criterion: Criterion::Bic,
            alphas: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            lambdas: None,
            h: 0,
            do_difference: false,
            do_iter: false,
            n_sample: None,
            start: 1,
            oos: 0,
            train_window: None,
            test_window: None,
            do_intercept: true,
            do_shrinkage_x: Vec::new(),
            threads: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Config("alphas must be a non-empty list within [0, 1]".into()));
        }
        if let Some(l) = &self.lambdas {
            if l.is_empty() || l.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Config("lambdas must be a non-empty list of nonnegative values".into()));
            }
        }
        if self.do_difference && self.h == 0 {
            return Err(Error::Config("differencing needs a nonzero h".into()));
        }
        if self.start == 0 {
            return Err(Error::Config("start is 1-based".into()));
        }
        if self.do_iter && self.n_sample.is_none() {
            return Err(Error::Config("iterative estimation needs n_sample".into()));
        }
        if self.criterion == Criterion::Cv {
            let (Some(train), Some(test)) = (self.train_window, self.test_window) else {
                return Err(Error::Config("cross-validation needs train_window and test_window".into()));
            };
            if let Some(m) = self.n_sample.filter(|_| self.do_iter) {
                if train + test + self.oos > m {
                    return Err(Error::Config(format!(
                        "train_window + test_window + oos = {} exceeds n_sample = {m}",
                        train + test + self.oos
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dated external regressors, one vector per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Externals {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Externals {
    /// Reads a table with a `date` column and one numeric column per variable.
    pub fn from_table(table: &Table) -> Result<Self> {
        let (dates, names, columns) = dated_columns(table)?;
        Ok(Externals { dates, names, columns })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_table(&Table::read_csv(path)?).map_err(|e| e.context(path.display().to_string()))
    }

    /// Values at `dates`, which must all be present.
    pub fn at(&self, dates: &[NaiveDate]) -> Result<Vec<Vec<f64>>> {
        let idx = dates
            .iter()
            .map(|d| {
                self.dates
                    .iter()
                    .position(|x| x == d)
                    .ok_or_else(|| Error::KeyMismatch(format!("no external values for {d}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .columns
            .iter()
            .map(|c| idx.iter().map(|&i| c[i]).collect())
            .collect())
    }
}

/// Splits a dated table into dates, column names and numeric columns.
pub fn dated_columns(table: &Table) -> Result<(Vec<NaiveDate>, Vec<String>, Vec<Vec<f64>>)> {
    let date_col = table
        .column_index("date")
        .ok_or_else(|| Error::MissingColumn("date".into()))?;
    let dates = table
        .rows
        .iter()
        .map(|r| parse_date(&r[date_col]))
        .collect::<Result<Vec<_>>>()?;
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (j, h) in table.header.iter().enumerate() {
        if j == date_col {
            continue;
        }
        names.push(h.clone());
        columns.push(
            table
                .rows
                .iter()
                .map(|r| parse_number(h, &r[j]))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((dates, names, columns))
}

/// Regressors on a common date index: sentiment measures first, externals after.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub n_measures: usize,
    pub penalized: Vec<bool>,
}

impl Design {
    /// Measures plus externals looked up at the measure dates. `shrink` holds one
    /// flag per external variable; empty penalizes them all.
    pub fn new(measures: &MeasureSet, externals: Option<&Externals>, shrink: &[bool]) -> Result<Self> {
        let mut names: Vec<String> = measures.names().iter().map(ToString::to_string).collect();
        let mut columns = measures.columns().to_vec();
        let mut penalized = vec![true; names.len()];
        let n_measures = names.len();
        if let Some(ext) = externals {
            if !shrink.is_empty() && shrink.len() != ext.names.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} shrinkage flags for {} external variables",
                    shrink.len(),
                    ext.names.len()
                )));
            }
            let mut seen: HashSet<String> = names.iter().cloned().collect();
            for n in &ext.names {
                if !seen.insert(n.clone()) {
                    return Err(Error::DuplicateColumn(n.clone()));
                }
            }
            names.extend(ext.names.iter().cloned());
            columns.extend(ext.at(measures.dates())?);
            penalized.extend((0..ext.names.len()).map(|j| shrink.get(j).copied().unwrap_or(true)));
        } else if !shrink.is_empty() {
            return Err(Error::ShapeMismatch("shrinkage flags given without external variables".into()));
        }
        Ok(Design {
            dates: measures.dates().to_vec(),
            names,
            columns,
            n_measures,
            penalized,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Target/regressor pairing after shifting by `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub target: Vec<f64>,
    /// Regressor row used for each target.
    pub x_rows: Vec<usize>,
    /// Target index (the later one when differencing) for each pair.
    pub y_rows: Vec<usize>,
}

/// Pairs targets with regressors.
///
/// `h > 0`: `y[t+h]` (minus `y[t]` when differencing) on `X[t]`.
/// `h < 0`: `y[t]` on `X[t+|h|]`, or `y[t+|h|] − y[t]` on `X[t+|h|]` when differencing.
pub fn align_target(y: &[f64], n_rows: usize, h: i64, do_difference: bool) -> Result<Alignment> {
    if y.len() != n_rows {
        return Err(Error::ShapeMismatch(format!(
            "target has {} values, regressors have {n_rows} rows",
            y.len()
        )));
    }
    let g = h.unsigned_abs() as usize;
    if g >= y.len() {
        return Err(Error::InsufficientData {
            needed: g + 1,
            available: y.len(),
        });
    }
    if do_difference && g == 0 {
        return Err(Error::InvalidParameter("differencing needs a nonzero h".into()));
    }
    let pairs = y.len() - g;
    let mut a = Alignment {
        target: Vec::with_capacity(pairs),
        x_rows: Vec::with_capacity(pairs),
        y_rows: Vec::with_capacity(pairs),
    };
    for t in 0..pairs {
        let (value, x_row, y_row) = match (h >= 0, do_difference) {
            (true, false) => (y[t + g], t, t + g),
            (true, true) => (y[t + g] - y[t], t, t + g),
            (false, false) => (y[t], t + g, t),
            (false, true) => (y[t + g] - y[t], t + g, t + g),
        };
        a.target.push(value);
        a.x_rows.push(x_row);
        a.y_rows.push(y_row);
    }
    Ok(a)
}

/// Indices of columns to drop: exact duplicates of an earlier column, and columns
/// with at least half their values equal to zero.
pub fn discard_degenerate(columns: &[Vec<f64>]) -> Vec<usize> {
    let mut dropped = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for (j, c) in columns.iter().enumerate() {
        let zeros = c.iter().filter(|&&v| v == 0.0).count();
        if 2 * zeros >= c.len() || kept.iter().any(|&k| columns[k] == *c) {
            dropped.push(j);
        } else {
            kept.push(j);
        }
    }
    dropped
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    /// Retained regressor names, measures first.
    pub names: Vec<String>,
    /// How many of `names` are sentiment measures.
    pub n_measures: usize,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
    pub df: f64,
    pub calibration: Calibration,
    /// Measures dropped before estimation.
    pub discarded: Vec<String>,
    /// Regressor dates of the training pairs.
    pub dates: Vec<NaiveDate>,
    pub target: Vec<f64>,
    pub fitted: Vec<f64>,
}

impl FittedModel {
    /// `δ + x·β` for regressor values ordered as `names`.
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    /// Predictions for every row of `design`, matching regressors by name.
    pub fn predict(&self, design: &Design) -> Result<Vec<f64>> {
        let idx = self
            .names
            .iter()
            .map(|n| design.index_of(n).ok_or_else(|| Error::UnknownName(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..design.len())
            .map(|i| {
                let row: Vec<f64> = idx.iter().map(|&j| design.columns[j][i]).collect();
                self.predict_row(&row)
            })
            .collect())
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|j| self.coefficients[j])
    }

    /// `name, value`, intercept first.
    pub fn coefficients_table(&self) -> Table {
        let mut rows = vec![vec!["(Intercept)".to_string(), format_number(self.intercept)]];
        rows.extend(
            self.names
                .iter()
                .zip(&self.coefficients)
                .map(|(n, b)| vec![n.clone(), format_number(*b)]),
        );
        Table::new(vec!["name".into(), "value".into()], rows)
    }

    /// `alpha, lambda, df, rss, value` for every evaluated grid point.
    pub fn calibration_table(&self) -> Table {
        let rows = self
            .calibration
            .points
            .iter()
            .map(|p| {
                [p.alpha, p.lambda, p.df, p.rss, p.value]
                    .iter()
                    .map(|&x| format_number(x))
                    .collect()
            })
            .collect();
        Table::new(
            ["alpha", "lambda", "df", "rss", "value"].map(String::from).to_vec(),
            rows,
        )
    }
}

fn fit_window(design: &Design, aligned: &Alignment, pairs: std::ops::Range<usize>, cfg: &ModelConfig) -> Result<FittedModel> {
    let x_rows = &aligned.x_rows[pairs.clone()];
    let target = aligned.target[pairs].to_vec();
    let window: Vec<Vec<f64>> = design
        .columns
        .iter()
        .map(|c| x_rows.iter().map(|&i| c[i]).collect())
        .collect();
    let dropped: HashSet<usize> = discard_degenerate(&window[..design.n_measures]).into_iter().collect();
    let keep: Vec<usize> = (0..design.names.len()).filter(|j| !dropped.contains(j)).collect();
    if keep.is_empty() {
        return Err(Error::EmptyResult.context("every regressor was discarded"));
    }
    let columns: Vec<Vec<f64>> = keep.iter().map(|&j| window[j].clone()).collect();
    let penalized: Vec<bool> = keep.iter().map(|&j| design.penalized[j]).collect();
    let problem = Problem::new(&columns, &target, cfg.do_intercept, &penalized)?;
    let (calibration, fit) = match cfg.criterion {
        Criterion::Cv => {
            let calibration = calibrate_cv(
                &columns,
                &target,
                &penalized,
                cfg.do_intercept,
                &cfg.alphas,
                cfg.lambdas.as_deref(),
                cfg.train_window.unwrap_or_default(),
                cfg.test_window.unwrap_or_default(),
                cfg.oos,
            )?;
            let fit = problem.fit(calibration.alpha, calibration.lambda, None)?;
            (calibration, fit)
        }
        criterion => calibrate_ic(&problem, &cfg.alphas, cfg.lambdas.as_deref(), criterion)?,
    };
    let fitted = (0..target.len())
        .map(|i| {
            let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            fit.predict_row(&row)
        })
        .collect();
    Ok(FittedModel {
        names: keep.iter().map(|&j| design.names[j].clone()).collect(),
        n_measures: keep.iter().filter(|&&j| j < design.n_measures).count(),
        intercept: fit.intercept,
        coefficients: fit.coefficients,
        alpha: fit.alpha,
        lambda: fit.lambda,
        df: fit.df,
        calibration,
        discarded: {
            let mut d: Vec<usize> = dropped.into_iter().collect();
            d.sort_unstable();
            d.into_iter().map(|j| design.names[j].clone()).collect()
        },
        dates: x_rows.iter().map(|&i| design.dates[i]).collect(),
        target,
        fitted,
    })
}

/// Aligns, discards degenerate measures, calibrates, and fits on the whole sample.
pub fn fit_model(design: &Design, y: &[f64], cfg: &ModelConfig) -> Result<FittedModel> {
    cfg.validate()?;
    let aligned = align_target(y, design.len(), cfg.h, cfg.do_difference)?;
    let n = aligned.target.len();
    with_threads(cfg.threads, || fit_window(design, &aligned, 0..n, cfg))?
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Performance {
    /// Root mean squared prediction error.
    pub rmse: f64,
    /// Mean absolute prediction error.
    pub mad: f64,
    /// Percentage of predictions whose direction of change matches the realized one.
    pub mda: f64,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

impl Performance {
    pub fn new(predicted: &[f64], realized: &[f64], reference: &[f64]) -> Self {
        let n = predicted.len() as f64;
        let mut se = 0.0;
        let mut ae = 0.0;
        let mut hits = 0usize;
        for ((p, r), b) in predicted.iter().zip(realized).zip(reference) {
            se += (p - r).powi(2);
            ae += (p - r).abs();
            if sign(p - b) == sign(r - b) {
                hits += 1;
            }
        }
        Performance {
            rmse: (se / n).sqrt(),
            mad: ae / n,
            mda: 100.0 * hits as f64 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterResults {
    pub models: Vec<FittedModel>,
    /// Regressor date of each predicted pair.
    pub dates: Vec<NaiveDate>,
    pub predicted: Vec<f64>,
    pub realized: Vec<f64>,
    /// Last training target (0 for a differenced target), the base for directional accuracy.
    pub reference: Vec<f64>,
    pub performance: Performance,
}

impl IterResults {
    pub fn len(&self) -> usize {
        self.predicted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted.is_empty()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.predicted.iter().zip(&self.realized).map(|(p, r)| p - r).collect()
    }

    pub fn predictions_table(&self) -> Table {
        let rows = (0..self.len())
            .map(|i| {
                vec![
                    self.dates[i].to_string(),
                    format_number(self.predicted[i]),
                    format_number(self.realized[i]),
                    format_number(self.reference[i]),
                    format_number(self.predicted[i] - self.realized[i]),
                    format_number(self.models[i].alpha),
                    format_number(self.models[i].lambda),
                ]
            })
            .collect();
        Table::new(
            ["date", "predicted", "realized", "reference", "error", "alpha", "lambda"]
                .map(String::from)
                .to_vec(),
            rows,
        )
    }

    pub fn performance_table(&self) -> Table {
        let p = self.performance;
        Table::new(
            vec!["metric".into(), "value".into()],
            vec![
                vec!["RMSE".into(), format_number(p.rmse)],
                vec!["MAD".into(), format_number(p.mad)],
                vec!["MDA".into(), format_number(p.mda)],
            ],
        )
    }

    /// `date, name, value` for every iteration's coefficients, intercept included.
    pub fn coefficients_table(&self) -> Table {
        let mut rows = Vec::new();
        for (d, m) in self.dates.iter().zip(&self.models) {
            rows.push(vec![d.to_string(), "(Intercept)".into(), format_number(m.intercept)]);
            for (n, b) in m.names.iter().zip(&m.coefficients) {
                rows.push(vec![d.to_string(), n.clone(), format_number(*b)]);
            }
        }
        Table::new(["date", "name", "value"].map(String::from).to_vec(), rows)
    }
}

/// Number of rolling iterations for `n` observations.
pub fn iteration_count(n: usize, n_sample: usize, h: i64, oos: usize) -> Result<usize> {
    let needed = n_sample + h.unsigned_abs() as usize + oos + 1;
    if n < needed {
        return Err(Error::InsufficientData { needed, available: n });
    }
    Ok(n - n_sample - h.unsigned_abs() as usize - oos)
}

/// Rolling estimation: each iteration fits on `n_sample` consecutive aligned pairs
/// and predicts the pair `oos` steps after the window.
pub fn fit_model_iter(design: &Design, y: &[f64], cfg: &ModelConfig) -> Result<IterResults> {
    cfg.validate()?;
    let m = cfg.n_sample.ok_or_else(|| Error::Config("iterative estimation needs n_sample".into()))?;
    let total = iteration_count(y.len(), m, cfg.h, cfg.oos)?;
    if cfg.start > total {
        return Err(Error::Config(format!("start {} exceeds the {total} iterations", cfg.start)));
    }
    let aligned = align_target(y, design.len(), cfg.h, cfg.do_difference)?;
    let outcomes: Vec<(FittedModel, f64)> = with_threads(cfg.threads, || {
        (cfg.start - 1..total)
            .into_par_iter()
            .map(|i| {
                let model = fit_window(design, &aligned, i..i + m, cfg)?;
                let target = i + m + cfg.oos;
                let row: Vec<f64> = model
                    .names
                    .iter()
                    .map(|n| design.columns[design.index_of(n).expect("known")][aligned.x_rows[target]])
                    .collect();
                let prediction = model.predict_row(&row);
                Ok((model, prediction))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut out = IterResults {
        models: Vec::with_capacity(outcomes.len()),
        dates: Vec::new(),
        predicted: Vec::new(),
        realized: Vec::new(),
        reference: Vec::new(),
        performance: Performance { rmse: 0.0, mad: 0.0, mda: 0.0 },
    };
    for (k, (model, prediction)) in outcomes.into_iter().enumerate() {
        let i = cfg.start - 1 + k;
        let target = i + m + cfg.oos;
        out.dates.push(design.dates[aligned.x_rows[target]]);
        out.predicted.push(prediction);
        out.realized.push(aligned.target[target]);
        out.reference.push(if cfg.do_difference { 0.0 } else { aligned.target[i + m - 1] });
        out.models.push(model);
    }
    out.performance = Performance::new(&out.predicted, &out.realized, &out.reference);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMetric {
    SquaredError,
    AbsoluteError,
    DirectionalMiss,
}

/// Out-of-sample losses: one row per shared date, one column per model.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl LossMatrix {
    pub fn to_table(&self) -> Table {
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        let rows = (0..self.dates.len())
            .map(|i| {
                let mut r = vec![self.dates[i].to_string()];
                r.extend(self.values.iter().map(|c| format_number(c[i])));
                r
            })
            .collect();
        Table::new(header, rows)
    }
}

pub fn loss_data(models: &[(&str, &IterResults)], metric: LossMetric) -> Result<LossMatrix> {
    let (_, first) = models
        .first()
        .ok_or_else(|| Error::InvalidParameter("no models given".into()))?;
    let mut values = Vec::with_capacity(models.len());
    for (name, r) in models {
        if r.dates != first.dates {
            return Err(Error::KeyMismatch(format!("model `{name}` has different out-of-sample dates")));
        }
        values.push(
            (0..r.len())
                .map(|i| {
                    let (p, a, b) = (r.predicted[i], r.realized[i], r.reference[i]);
                    match metric {
                        LossMetric::SquaredError => (p - a).powi(2),
                        LossMetric::AbsoluteError => (p - a).abs(),
                        LossMetric::DirectionalMiss => f64::from(sign(p - b) != sign(a - b)),
                    }
                })
                .collect(),
        );
    }
    Ok(LossMatrix {
        dates: first.dates.clone(),
        names: models.iter().map(|(n, _)| n.to_string()).collect(),
        values,
    })
}
