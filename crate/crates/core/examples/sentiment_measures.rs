//! Corpus to sentiment measures: score, aggregate per day, smooth over time.

use sentiment_measures::aggregation::{build_measures, AggregationConfig, Fill};
use sentiment_measures::corpus::{Corpus, FeatureSpec};
use sentiment_measures::frequency::Frequency;
use sentiment_measures::lexicon::{Lexicon, LexiconSet, ValenceTable};
use sentiment_measures::weights::{DocScheme, TimeFamily, WithinScheme};

fn main() -> sentiment_measures::Result<()> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let corpus = Corpus::read(format!("{data}/corpus.csv"))?.add_features(
        &[FeatureSpec::keywords("economy", ["economy", "inflation", "jobs", "gdp", "market"])],
        false,
    )?;
    let lexicons = LexiconSet::new(
        vec![
            Lexicon::read_csv(format!("{data}/lexicon_finance.csv"))?,
            Lexicon::read_csv(format!("{data}/lexicon_general.csv"))?,
        ],
        Some(ValenceTable::read_csv(format!("{data}/valence_cluster.csv"))?),
    )?;
    let config = AggregationConfig {
        how_within: WithinScheme::ProportionalPol,
        how_docs: DocScheme::Proportional,
        how_time: vec![TimeFamily::EqualWeight, TimeFamily::Linear],
        by: Frequency::Week,
        lag: 4,
        fill: Fill::Zero,
        ..Default::default()
    };
    let measures = build_measures(&corpus, &lexicons, &config)?;
    println!("{} measures, {} weekly dates", measures.n_measures(), measures.len());

    let stats = measures.stats();
    for (i, name) in stats.names.iter().enumerate() {
        println!(
            "{name:<45} mean {:+.4}  sd {:.4}  min {:+.4}  max {:+.4}",
            stats.mean[i], stats.sd[i], stats.min[i], stats.max[i]
        );
    }
    Ok(())
}
