//! Choosing `(α, λ)`: information criteria on the full sample, or rolling-origin
//! cross-validation.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enet::{ElasticNetFit, Problem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Criterion {
    #[default]
    #[serde(rename = "BIC")]
    Bic,
    #[serde(rename = "AIC")]
    Aic,
    #[serde(rename = "Cp")]
    Cp,
    #[serde(rename = "cv")]
    Cv,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "BIC" => Ok(Criterion::Bic),
            "AIC" => Ok(Criterion::Aic),
            "Cp" => Ok(Criterion::Cp),
            "cv" => Ok(Criterion::Cv),
            other => Err(Error::InvalidParameter(format!("unknown calibration type `{other}`"))),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPoint {
    pub alpha: f64,
    pub lambda: f64,
    pub df: f64,
    pub rss: f64,
    /// Criterion value, or mean test RMSE under cross-validation.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub criterion: Criterion,
    pub alpha: f64,
    pub lambda: f64,
    pub points: Vec<CalibrationPoint>,
}

/// The λ values to try for `alpha`, largest first.
fn grid(problem: &Problem, alpha: f64, lambdas: Option<&[f64]>) -> Result<Vec<f64>> {
    match lambdas {
        Some(l) => {
            if l.is_empty() {
                return Err(Error::InvalidParameter("empty lambda grid".into()));
            }
            if let Some(bad) = l.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {bad}")));
            }
            let mut l = l.to_vec();
            l.sort_by(|a, b| b.total_cmp(a));
            Ok(l)
        }
        None => problem.lambda_path(alpha, 100, 1e-3),
    }
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("empty alpha grid".into()));
    }
    if let Some(bad) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {bad}")));
    }
    Ok(())
}

fn information_criterion(criterion: Criterion, n: f64, rss: f64, df: f64, sigma2: f64) -> f64 {
    let rss = rss.max(1e-300);
    match criterion {
        Criterion::Bic => n * (rss / n).ln() + df * n.ln(),
        Criterion::Aic => n * (rss / n).ln() + 2.0 * df,
        Criterion::Cp => rss / n + 2.0 * df * sigma2 / n,
        Criterion::Cv => unreachable!(),
    }
}

/// Minimizes BIC, AIC or Cp over the grid; returns the calibration and the chosen fit.
/// For Cp, σ̂² is RSS / (N − df) of the least-penalized fit at the same α.
pub fn calibrate_ic(
    problem: &Problem,
    alphas: &[f64],
    lambdas: Option<&[f64]>,
    criterion: Criterion,
) -> Result<(Calibration, ElasticNetFit)> {
    check_alphas(alphas)?;
    if criterion == Criterion::Cv {
        return Err(Error::InvalidParameter("cross-validation is not an information criterion".into()));
    }
    let n = problem.n() as f64;
    let per_alpha: Vec<Vec<(CalibrationPoint, ElasticNetFit)>> = alphas
        .par_iter()
        .map(|&alpha| {
            let fits = problem.fit_path(alpha, &grid(problem, alpha, lambdas)?)?;
            let least = fits.last().expect("non-empty grid");
            let sigma2 = least.rss / (n - least.df).max(1.0);
            Ok(fits
                .into_iter()
                .map(|f| {
                    let point = CalibrationPoint {
                        alpha,
                        lambda: f.lambda,
                        df: f.df,
                        rss: f.rss,
                        value: information_criterion(criterion, n, f.rss, f.df, sigma2),
                    };
                    (point, f)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, &ElasticNetFit)> = None;
    for (point, fit) in per_alpha.iter().flatten() {
        if best.is_none_or(|(v, _)| point.value < v) {
            best = Some((point.value, fit));
        }
    }
    let (_, fit) = best.expect("non-empty grid");
    let fit = fit.clone();
    let points = per_alpha.into_iter().flatten().map(|(p, _)| p).collect();
    Ok((
        Calibration {
            criterion,
            alpha: fit.alpha,
            lambda: fit.lambda,
            points,
        },
        fit,
    ))
}

/// One rolling-origin fold, as 0-based row ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

/// Train on `train` consecutive rows, skip `oos`, test on the next `test`; the
/// origin advances by one row until the test window would pass the end.
pub fn rolling_splits(n: usize, train: usize, test: usize, oos: usize) -> Result<Vec<Fold>> {
    if train == 0 || test == 0 {
        return Err(Error::InvalidParameter("train and test windows must be positive".into()));
    }
    let span = train + oos + test;
    if span > n {
        return Err(Error::InsufficientData { needed: span, available: n });
    }
    Ok((0..=n - span)
        .map(|o| Fold {
            train: o..o + train,
            test: o + train + oos..o + span,
        })
        .collect())
}

fn rows(columns: &[Vec<f64>], range: &Range<usize>) -> Vec<Vec<f64>> {
    columns.iter().map(|c| c[range.clone()].to_vec()).collect()
}

/// Cross-validated calibration. The λ grid per α comes from the full sample; the
/// pair with the lowest mean per-fold test RMSE wins.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_cv(
    columns: &[Vec<f64>],
    y: &[f64],
    penalized: &[bool],
    do_intercept: bool,
    alphas: &[f64],
    lambdas: Option<&[f64]>,
    train: usize,
    test: usize,
    oos: usize,
) -> Result<Calibration> {
    check_alphas(alphas)?;
    let full = Problem::new(columns, y, do_intercept, penalized)?;
    let folds = rolling_splits(y.len(), train, test, oos)?;
    let grids: Vec<Vec<f64>> = alphas
        .iter()
        .map(|&a| grid(&full, a, lambdas))
        .collect::<Result<_>>()?;

    // errors[fold][alpha][lambda]
    let errors: Vec<Vec<Vec<f64>>> = folds
        .par_iter()
        .map(|fold| {
            let problem = Problem::new(&rows(columns, &fold.train), &y[fold.train.clone()], do_intercept, penalized)?;
            let test_x = rows(columns, &fold.test);
            let test_y = &y[fold.test.clone()];
            alphas
                .iter()
                .zip(&grids)
                .map(|(&alpha, lambdas)| {
                    let fits = problem.fit_path(alpha, lambdas)?;
                    Ok(fits
                        .iter()
                        .map(|f| {
                            let sse: f64 = test_y
                                .iter()
                                .enumerate()
                                .map(|(i, yi)| {
                                    let row: Vec<f64> = test_x.iter().map(|c| c[i]).collect();
                                    (yi - f.predict_row(&row)).powi(2)
                                })
                                .sum();
                            (sse / test_y.len() as f64).sqrt()
                        })
                        .collect())
                })
                .collect::<Result<Vec<Vec<f64>>>>()
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    let mut best: Option<(f64, f64, f64)> = None;
    for (a, (&alpha, lambdas)) in alphas.iter().zip(&grids).enumerate() {
        for (l, &lambda) in lambdas.iter().enumerate() {
            let value = errors.iter().map(|e| e[a][l]).sum::<f64>() / folds.len() as f64;
            points.push(CalibrationPoint {
                alpha,
                lambda,
                df: f64::NAN,
                rss: f64::NAN,
                value,
            });
            if best.is_none_or(|(v, _, _)| value < v) {
                best = Some((value, alpha, lambda));
            }
        }
    }
    let (_, alpha, lambda) = best.expect("non-empty grid");
    Ok(Calibration {
        criterion: Criterion::Cv,
        alpha,
        lambda,
        points,
    })
}
