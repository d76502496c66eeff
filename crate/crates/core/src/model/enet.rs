//! Elastic-net least squares by cyclic coordinate descent.
//!
//! The objective is `(1/N)·RSS + λ[α‖β‖₁ + (1−α)‖β‖₂²]` over standardized
//! regressors (population variance). With an intercept, regressors and target are
//! centered; without one, regressors are scaled by their root mean square and
//! nothing is centered. Coefficients are reported on the original scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-7;
pub const MAX_SWEEPS: usize = 100_000;
const KKT_TOLERANCE: f64 = 1e-9;

/// A fit at one `(α, λ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetFit {
    pub alpha: f64,
    pub lambda: f64,
    pub intercept: f64,
    /// Original-scale coefficients.
    pub coefficients: Vec<f64>,
    /// Coefficients of the standardized regressors.
    pub standardized: Vec<f64>,
    pub sweeps: usize,
    /// Objective value after each sweep.
    pub objective_trace: Vec<f64>,
    /// Largest violation of the optimality conditions at the solution.
    pub kkt_residual: f64,
    pub rss: f64,
    /// Effective degrees of freedom, intercept included.
    pub df: f64,
}

impl ElasticNetFit {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Standardized data and cross products shared by all fits on one sample.
#[derive(Debug, Clone)]
pub struct Problem {
    n: usize,
    p: usize,
    xs: DMatrix<f64>,
    ys: DVector<f64>,
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    /// `yᵀy / N` of the standardized target.
    yy: f64,
    means: Vec<f64>,
    scales: Vec<f64>,
    y_mean: f64,
    usable: Vec<bool>,
    penalized: Vec<bool>,
    intercept: bool,
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn pseudo_inverse(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(m);
    }
    let svd = m.svd(true, true);
    let max_sv = svd.singular_values.max();
    let eps = (max_sv * 1e-12).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps)
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))
}

impl Problem {
    /// `columns` holds one vector per regressor; `penalized[j]` says whether
    /// regressor `j` enters the penalty.
    pub fn new(columns: &[Vec<f64>], y: &[f64], intercept: bool, penalized: &[bool]) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, available: n });
        }
        if penalized.len() != p {
            return Err(Error::ShapeMismatch(format!(
                "{} penalty flags for {p} regressors",
                penalized.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("target contains non-finite values".into()));
        }
        let nf = n as f64;
        let y_mean = if intercept { y.iter().sum::<f64>() / nf } else { 0.0 };
        let ys = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let mut xs = DMatrix::zeros(n, p);
        let mut means = vec![0.0; p];
        let mut scales = vec![0.0; p];
        let mut usable = vec![false; p];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "regressor {j} has {} values, target has {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue(format!("regressor {j} contains non-finite values")));
            }
            let m = if intercept { col.iter().sum::<f64>() / nf } else { 0.0 };
            let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / nf).sqrt();
            means[j] = m;
            let scale_floor = 1e-12 * (1.0 + m.abs());
            if s > scale_floor {
                scales[j] = s;
                usable[j] = true;
                for (i, v) in col.iter().enumerate() {
                    xs[(i, j)] = (v - m) / s;
                }
            }
        }
        let gram = xs.tr_mul(&xs) / nf;
        let yy = ys.norm_squared() / nf;
        let xty = xs.tr_mul(&ys) / nf;
        Ok(Problem {
            n,
            p,
            xs,
            ys,
            gram,
            xty,
            yy,
            means,
            scales,
            y_mean,
            usable,
            penalized: penalized.to_vec(),
            intercept,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn penalty(&self, beta: &[f64], alpha: f64, lambda: f64) -> f64 {
        let (mut l1, mut l2) = (0.0, 0.0);
        for j in 0..self.p {
            if self.penalized[j] {
                l1 += beta[j].abs();
                l2 += beta[j] * beta[j];
            }
        }
        lambda * (alpha * l1 + (1.0 - alpha) * l2)
    }

    fn rss(&self, beta: &[f64]) -> f64 {
        let b = DVector::from_column_slice(beta);
        (&self.ys - &self.xs * b).norm_squared()
    }

    /// The elastic-net objective at standardized coefficients `beta`.
    pub fn objective(&self, beta: &[f64], alpha: f64, lambda: f64) -> f64 {
        self.rss(beta) / self.n as f64 + self.penalty(beta, alpha, lambda)
    }

    fn gradient(&self, beta: &[f64], gb: &[f64], j: usize, alpha: f64, lambda: f64) -> f64 {
        let g = -2.0 * (self.xty[j] - gb[j]);
        if self.penalized[j] {
            g + 2.0 * lambda * (1.0 - alpha) * beta[j]
        } else {
            g
        }
    }

    /// Largest violation of the stationarity / subgradient conditions.
    pub fn kkt_residual(&self, beta: &[f64], alpha: f64, lambda: f64) -> f64 {
        let b = DVector::from_column_slice(beta);
        let gb = &self.gram * b;
        let mut worst: f64 = 0.0;
        for j in 0..self.p {
            if !self.usable[j] {
                continue;
            }
            let g = self.gradient(beta, gb.as_slice(), j, alpha, lambda);
            let violation = if !self.penalized[j] {
                g.abs()
            } else if beta[j] != 0.0 {
                (g + lambda * alpha * beta[j].signum()).abs()
            } else {
                (g.abs() - lambda * alpha).max(0.0)
            };
            worst = worst.max(violation);
        }
        worst
    }

    fn least_squares(&self, subset: &[usize]) -> Result<Vec<f64>> {
        let k = subset.len();
        let g = DMatrix::from_fn(k, k, |a, b| self.gram[(subset[a], subset[b])]);
        let c = DVector::from_fn(k, |a, _| self.xty[subset[a]]);
        let sol = pseudo_inverse(g)? * c;
        let mut beta = vec![0.0; self.p];
        for (a, &j) in subset.iter().enumerate() {
            beta[j] = sol[a];
        }
        Ok(beta)
    }

    /// Smallest λ at which all penalized coefficients are zero, for mixing `alpha`.
    /// Falls back to 1 when the data carry no signal.
    pub fn lambda_max(&self, alpha: f64) -> Result<f64> {
        let free: Vec<usize> = (0..self.p)
            .filter(|&j| self.usable[j] && !self.penalized[j])
            .collect();
        let beta = self.least_squares(&free)?;
        let gb = &self.gram * DVector::from_column_slice(&beta);
        let g = (0..self.p)
            .filter(|&j| self.usable[j] && self.penalized[j])
            .map(|j| (self.xty[j] - gb[j]).abs())
            .fold(0.0, f64::max);
        let lmax = 2.0 * g / alpha.max(1e-3);
        Ok(if lmax > 1e-12 { lmax } else { 1.0 })
    }

    /// `count` geometrically spaced values from `lambda_max` down to `lambda_max × ratio`.
    pub fn lambda_path(&self, alpha: f64, count: usize, ratio: f64) -> Result<Vec<f64>> {
        let lmax = self.lambda_max(alpha)?;
        if count == 1 {
            return Ok(vec![lmax]);
        }
        let step = ratio.ln() / (count - 1) as f64;
        Ok((0..count).map(|k| lmax * (step * k as f64).exp()).collect())
    }

    /// Degrees of freedom `tr(G_A (G_A + λ(1−α) D)⁺)` over the active set, plus one
    /// for the intercept. `D` marks penalized regressors.
    pub fn degrees_of_freedom(&self, beta: &[f64], alpha: f64, lambda: f64) -> Result<f64> {
        let active: Vec<usize> = (0..self.p)
            .filter(|&j| self.usable[j] && (!self.penalized[j] || beta[j] != 0.0))
            .collect();
        let k = active.len();
        let mut df = 0.0;
        if k > 0 {
            let g = DMatrix::from_fn(k, k, |a, b| self.gram[(active[a], active[b])]);
            let mut m = g.clone();
            let ridge = lambda * (1.0 - alpha);
            for (a, &j) in active.iter().enumerate() {
                if self.penalized[j] {
                    m[(a, a)] += ridge;
                }
            }
            df = (g * pseudo_inverse(m)?).trace();
        }
        Ok(df + if self.intercept { 1.0 } else { 0.0 })
    }

    fn finish(&self, alpha: f64, lambda: f64, beta: Vec<f64>, sweeps: usize, trace: Vec<f64>) -> Result<ElasticNetFit> {
        let coefficients: Vec<f64> = (0..self.p)
            .map(|j| if self.usable[j] { beta[j] / self.scales[j] } else { 0.0 })
            .collect();
        let intercept = if self.intercept {
            self.y_mean - coefficients.iter().zip(&self.means).map(|(b, m)| b * m).sum::<f64>()
        } else {
            0.0
        };
        Ok(ElasticNetFit {
            alpha,
            lambda,
            intercept,
            kkt_residual: self.kkt_residual(&beta, alpha, lambda),
            rss: self.rss(&beta),
            df: self.degrees_of_freedom(&beta, alpha, lambda)?,
            coefficients,
            standardized: beta,
            sweeps,
            objective_trace: trace,
        })
    }

    /// Fits at `(alpha, lambda)`, starting from standardized coefficients `warm`.
    pub fn fit(&self, alpha: f64, lambda: f64, warm: Option<&[f64]>) -> Result<ElasticNetFit> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
        }
        if lambda == 0.0 {
            let usable: Vec<usize> = (0..self.p).filter(|&j| self.usable[j]).collect();
            let beta = self.least_squares(&usable)?;
            let obj = self.objective(&beta, alpha, lambda);
            return self.finish(alpha, lambda, beta, 0, vec![obj]);
        }
        let mut beta: Vec<f64> = match warm {
            Some(w) if w.len() == self.p => {
                (0..self.p).map(|j| if self.usable[j] { w[j] } else { 0.0 }).collect()
            }
            _ => vec![0.0; self.p],
        };
        let mut gb: Vec<f64> = (&self.gram * DVector::from_column_slice(&beta)).as_slice().to_vec();
        let all: Vec<usize> = (0..self.p).filter(|&j| self.usable[j]).collect();
        let mut trace = vec![self.objective_from_gram(&beta, &gb, alpha, lambda)];
        let mut sweeps = 0;
        // Full sweeps alternate with sweeps over the current nonzero set; the
        // fit stops only after a full sweep that meets the criteria.
        let mut full = true;
        loop {
            if sweeps >= MAX_SWEEPS {
                return Err(Error::NonConvergence { sweeps });
            }
            sweeps += 1;
            let active: Vec<usize>;
            let set = if full {
                &all
            } else {
                active = all.iter().copied().filter(|&j| beta[j] != 0.0).collect();
                &active
            };
            let max_change = self.sweep(set, &mut beta, &mut gb, alpha, lambda);
            trace.push(self.objective_from_gram(&beta, &gb, alpha, lambda));
            let settled = max_change == 0.0
                || (max_change < TOLERANCE
                    && (!full || self.kkt_residual(&beta, alpha, lambda) <= KKT_TOLERANCE));
            match (full, settled) {
                (true, true) => break,
                (true, false) => full = false,
                (false, true) => full = true,
                (false, false) => {}
            }
        }
        self.finish(alpha, lambda, beta, sweeps, trace)
    }

    /// One coordinate pass over `set`; returns the largest coefficient change.
    fn sweep(&self, set: &[usize], beta: &mut [f64], gb: &mut [f64], alpha: f64, lambda: f64) -> f64 {
        let threshold = lambda * alpha / 2.0;
        let ridge = lambda * (1.0 - alpha);
        let mut max_change: f64 = 0.0;
        for &j in set {
            let gjj = self.gram[(j, j)];
            let rho = self.xty[j] - gb[j] + gjj * beta[j];
            let new = if self.penalized[j] {
                soft_threshold(rho, threshold) / (gjj + ridge)
            } else {
                rho / gjj
            };
            let delta = new - beta[j];
            if delta != 0.0 {
                for (g, gkj) in gb.iter_mut().zip(self.gram.column(j).iter()) {
                    *g += delta * gkj;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    }

    /// The objective using `G·β`, without touching the data matrix.
    fn objective_from_gram(&self, beta: &[f64], gb: &[f64], alpha: f64, lambda: f64) -> f64 {
        let mut rss_n = self.yy;
        for j in 0..self.p {
            rss_n += beta[j] * (gb[j] - 2.0 * self.xty[j]);
        }
        rss_n.max(0.0) + self.penalty(beta, alpha, lambda)
    }

    /// Fits along `lambdas` in the given order, warm-starting each fit from the previous.
    pub fn fit_path(&self, alpha: f64, lambdas: &[f64]) -> Result<Vec<ElasticNetFit>> {
        let mut out: Vec<ElasticNetFit> = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let warm = out.last().map(|f| f.standardized.clone());
            out.push(self.fit(alpha, lambda, warm.as_deref())?);
        }
        Ok(out)
    }
}

/// One-shot fit; `penalized` defaults to penalizing every regressor.
pub fn elastic_net_fit(
    columns: &[Vec<f64>],
    y: &[f64],
    alpha: f64,
    lambda: f64,
    do_intercept: bool,
    penalized: Option<&[bool]>,
) -> Result<ElasticNetFit> {
    let all = vec![true; columns.len()];
    let problem = Problem::new(columns, y, do_intercept, penalized.unwrap_or(&all))?;
    problem.fit(alpha, lambda, None)
}

/// The default λ grid: 100 values from λ_max down to λ_max / 1000.
pub fn lambda_path(
    columns: &[Vec<f64>],
    y: &[f64],
    alpha: f64,
    do_intercept: bool,
    penalized: Option<&[bool]>,
) -> Result<Vec<f64>> {
    let all = vec![true; columns.len()];
    Problem::new(columns, y, do_intercept, penalized.unwrap_or(&all))?.lambda_path(alpha, 100, 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x1: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let x2: Vec<f64> = (0..20).map(|i| (i as f64 * 1.3).cos() + 0.1 * i as f64).collect();
        let x3: Vec<f64> = (0..20).map(|i| ((i * i) % 7) as f64).collect();
        let y = (0..20)
            .map(|i| 1.0 + 2.0 * x1[i] - 0.5 * x2[i] + 0.3 * x3[i] + 0.05 * ((i * 13) % 5) as f64)
            .collect();
        (vec![x1, x2, x3], y)
    }

    #[test]
    fn zero_target_gives_zero_fit() {
        let (x, _) = design();
        let fit = elastic_net_fit(&x, &[0.0; 20], 0.5, 0.1, true, None).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        assert_eq!(fit.intercept, 0.0);
    }

    #[test]
    fn lambda_max_zeroes_everything() {
        let (x, y) = design();
        for alpha in [1.0, 0.5, 0.1] {
            let path = lambda_path(&x, &y, alpha, true, None).unwrap();
            assert_eq!(path.len(), 100);
            assert!(path.windows(2).all(|w| w[0] > w[1]));
            let fit = elastic_net_fit(&x, &y, alpha, path[0], true, None).unwrap();
            assert!(fit.standardized.iter().all(|&b| b == 0.0), "{alpha}: {:?}", fit.standardized);
            let below = elastic_net_fit(&x, &y, alpha, path[0] * 0.99, true, None).unwrap();
            assert!(below.standardized.iter().any(|&b| b != 0.0));
        }
        assert!(lambda_path(&x, &y, 0.0, true, None).unwrap()[0].is_finite());
    }

    #[test]
    fn objective_never_increases_and_kkt_holds() {
        let (x, y) = design();
        for alpha in [0.0, 0.3, 1.0] {
            for lambda in [0.001, 0.05, 0.5] {
                let fit = elastic_net_fit(&x, &y, alpha, lambda, true, None).unwrap();
                for w in fit.objective_trace.windows(2) {
                    assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
                }
                assert!(fit.kkt_residual <= 1e-6);
            }
        }
    }

    #[test]
    fn df_limits() {
        let (x, y) = design();
        let ols = elastic_net_fit(&x, &y, 0.5, 0.0, true, None).unwrap();
        assert!((ols.df - 4.0).abs() < 1e-9);
        let lasso = elastic_net_fit(&x, &y, 1.0, 0.3, true, None).unwrap();
        let active = lasso.standardized.iter().filter(|&&b| b != 0.0).count() as f64;
        assert!((lasso.df - (active + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn constant_column_is_fixed_at_zero() {
        let (mut x, y) = design();
        x.push(vec![3.0; 20]);
        let fit = elastic_net_fit(&x, &y, 0.5, 0.01, true, None).unwrap();
        assert_eq!(fit.coefficients[3], 0.0);
    }

    #[test]
    fn unpenalized_regressor_escapes_shrinkage() {
        let (x, y) = design();
        let flags = [false, true, true];
        let huge = elastic_net_fit(&x, &y, 1.0, 1e6, true, Some(&flags)).unwrap();
        // only x1 survives, at its simple regression slope
        let simple = elastic_net_fit(&x[..1], &y, 1.0, 0.0, true, None).unwrap();
        assert!((huge.coefficients[0] - simple.coefficients[0]).abs() < 1e-9);
        assert_eq!(&huge.coefficients[1..], &[0.0, 0.0]);
    }
}
