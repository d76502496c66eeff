//! Loads the fixture corpus, adds keyword and regex features, and prints
//! per-month counts.

use sentiment_measures::corpus::{Corpus, FeatureSpec};
use sentiment_measures::frequency::Frequency;

fn main() -> sentiment_measures::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.csv");
    let corpus = Corpus::read(path)?;
    let corpus = corpus.add_features(
        &[
            FeatureSpec::keywords("economy", ["economy", "inflation", "gdp"]),
            FeatureSpec::regex("vote", r"(?i)\bvot(e|ing)\b"),
        ],
        true,
    )?;
    println!("{} documents, features: {:?}", corpus.len(), corpus.feature_names());

    let summary = corpus.summarize(Frequency::Month)?;
    for (i, period) in summary.periods.iter().enumerate() {
        println!(
            "{period}  docs {:>3}  tokens {:>5}  per feature {:?}",
            summary.documents[i], summary.tokens[i], summary.feature_counts[i]
        );
    }
    Ok(())
}
