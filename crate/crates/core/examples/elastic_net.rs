//! Elastic net on simulated data: a λ path, then BIC and cross-validated calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sentiment_measures::model::{calibrate_cv, calibrate_ic, Criterion, Problem};

fn main() -> sentiment_measures::Result<()> {
    let (n, p) = (150, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let columns: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| normal.sample(&mut rng)).collect()).collect();
    let beta = [2.0, -1.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let y: Vec<f64> = (0..n)
        .map(|i| 0.5 + (0..p).map(|j| beta[j] * columns[j][i]).sum::<f64>() + 0.3 * normal.sample(&mut rng))
        .collect();

    let penalized = vec![true; p];
    let problem = Problem::new(&columns, &y, true, &penalized)?;
    let path = problem.lambda_path(1.0, 100, 1e-3)?;
    println!("lasso path: λ from {:.4} to {:.6}", path[0], path[99]);
    for fit in problem.fit_path(1.0, &path)?.iter().step_by(20) {
        let active = fit.coefficients.iter().filter(|b| **b != 0.0).count();
        println!("  λ {:.5}  active {active:>2}  df {:.2}  sweeps {}", fit.lambda, fit.df, fit.sweeps);
    }

    let (cal, fit) = calibrate_ic(&problem, &[0.0, 0.5, 1.0], None, Criterion::Bic)?;
    println!("\nBIC picks α = {}, λ = {:.5}", cal.alpha, cal.lambda);
    println!("intercept {:.3}", fit.intercept);
    for (j, b) in fit.coefficients.iter().enumerate() {
        println!("  β{j:<2} {b:+.3}   (true {:+.1})", beta[j]);
    }

    let cv = calibrate_cv(&columns, &y, &penalized, true, &[0.5, 1.0], None, 100, 5, 0)?;
    println!("\ncross-validation picks α = {}, λ = {:.5}", cv.alpha, cv.lambda);
    Ok(())
}
