//! Breaking fitted values down by lexicon, feature, time scheme, lag and document.

use sentiment_measures::attribution::attributions;
use sentiment_measures::cli::{Pipeline, PipelineConfig};
use sentiment_measures::model::{fit_model, Design};

fn main() -> sentiment_measures::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/pipeline.toml");
    let pipeline = Pipeline::new(PipelineConfig::read(path)?, None);
    let measures = pipeline.measures()?;
    let externals = pipeline.externals()?;
    let design = Design::new(&measures, externals.as_ref(), &[])?;
    let y = pipeline.target(measures.dates())?;
    let fit = fit_model(&design, &y, &pipeline.config.model)?;

    let last = *fit.dates.last().unwrap();
    let a = attributions(&fit, &measures, externals.as_ref(), Some(&[last]))?;
    println!("prediction for {last}: {:.4} (intercept {:.4})", a.predictions[0], a.intercept[0]);
    for dim in ["lexicons", "features", "time", "lags", "externals"] {
        let t = a.dimension(dim).unwrap();
        println!("\n{dim}:");
        for (c, v) in t.components.iter().zip(&t.values[0]) {
            println!("  {c:<20} {v:+.4}");
        }
    }
    let mut docs: Vec<_> = a.documents.as_ref().unwrap()[0].iter().collect();
    docs.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()));
    println!("\nlargest document contributions:");
    for (id, v) in docs.iter().take(5) {
        println!("  {id:<20} {v:+.4}");
    }
    for dim in ["lexicons", "features", "time", "lags", "documents"] {
        println!("{dim:<10} identity error {:.2e}", a.identity_error(dim).unwrap());
    }
    Ok(())
}
