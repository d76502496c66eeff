//! Rolling out-of-sample forecasts of a target from sentiment measures plus an
//! external regressor, with a comparison of two specifications.

use sentiment_measures::cli::{Pipeline, PipelineConfig};
use sentiment_measures::model::{fit_model_iter, loss_data, Design, LossMetric, ModelConfig};

fn main() -> sentiment_measures::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/pipeline.toml");
    let pipeline = Pipeline::new(PipelineConfig::read(path)?, None);
    let measures = pipeline.measures()?;
    let externals = pipeline.externals()?;
    let y = pipeline.target(measures.dates())?;

    let config = ModelConfig {
        h: 1,
        do_iter: true,
        n_sample: Some(50),
        oos: 0,
        alphas: vec![0.5, 1.0],
        ..Default::default()
    };
    let with_ext = Design::new(&measures, externals.as_ref(), &[false])?;
    let without = Design::new(&measures, None, &[])?;
    let a = fit_model_iter(&with_ext, &y, &config)?;
    let b = fit_model_iter(&without, &y, &config)?;
    for (name, r) in [("with rate", &a), ("sentiment only", &b)] {
        let p = r.performance;
        println!(
            "{name:<15} {} predictions  RMSE {:.4}  MAD {:.4}  MDA {:.1}%",
            r.len(),
            p.rmse,
            p.mad,
            p.mda
        );
    }
    let losses = loss_data(&[("with rate", &a), ("sentiment only", &b)], LossMetric::SquaredError)?;
    println!("\nfirst squared losses:");
    for i in 0..5 {
        println!("  {}  {:.4}  {:.4}", losses.dates[i], losses.values[0][i], losses.values[1][i]);
    }
    Ok(())
}
