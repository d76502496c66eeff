//! Selecting, merging, scaling and collapsing measures.

use sentiment_measures::aggregation::{build_measures, AggregationConfig};
use sentiment_measures::corpus::{Corpus, FeatureSpec};
use sentiment_measures::lexicon::{Lexicon, LexiconSet};
use sentiment_measures::measures::{Center, Merges, Scale};
use sentiment_measures::sentiment::PeakKind;
use sentiment_measures::weights::TimeFamily;

fn main() -> sentiment_measures::Result<()> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let corpus = Corpus::read(format!("{data}/corpus.csv"))?.add_features(
        &[
            FeatureSpec::keywords("economy", ["economy", "inflation", "jobs", "gdp", "market"]),
            FeatureSpec::keywords("politics", ["election", "government", "policy", "senate", "vote"]),
        ],
        true,
    )?;
    let lexicons = LexiconSet::new(
        vec![
            Lexicon::read_csv(format!("{data}/lexicon_finance.csv"))?,
            Lexicon::read_csv(format!("{data}/lexicon_general.csv"))?,
        ],
        None,
    )?;
    let config = AggregationConfig {
        how_time: vec![TimeFamily::EqualWeight, TimeFamily::Linear],
        lag: 14,
        ..Default::default()
    };
    let measures = build_measures(&corpus, &lexicons, &config)?;
    println!("initial: {} measures", measures.n_measures());

    let economy = measures.select(&[vec!["economy".to_string()]])?;
    println!("economy only: {}", economy.n_measures());

    let merged = measures.merge_dimensions(
        &Merges {
            lexicons: vec![("both".into(), vec!["lexicon_finance".into(), "lexicon_general".into()])],
            features: vec![("topics".into(), vec!["economy".into(), "politics".into()])],
            ..Default::default()
        },
        false,
    )?;
    let names: Vec<String> = merged.names().iter().map(ToString::to_string).collect();
    println!("merged: {names:?}");

    let scaled = merged.scale(&Center::Mean, &Scale::Sd)?;
    println!("scaled means: {:?}", scaled.stats().mean.iter().map(|m| format!("{m:.1e}")).collect::<Vec<_>>());

    let global = measures.global_measures(&[0.5, 0.5], &[0.7, 0.3, 0.0], &[1.0, 0.0])?;
    let peaks = measures.peak_dates(3, PeakKind::Abs)?;
    println!("global sentiment on {} dates, strongest on {peaks:?}", global.dates.len());
    Ok(())
}
