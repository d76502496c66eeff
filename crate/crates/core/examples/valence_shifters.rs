//! The same sentences under unigram, bigram and cluster scoring.

use sentiment_measures::lexicon::{Lexicon, LexiconSet, ShifterKind, ValenceTable};
use sentiment_measures::sentiment::{compute_sentiment_texts, SentimentOptions};
use sentiment_measures::weights::WithinScheme;

fn main() -> sentiment_measures::Result<()> {
    let lexicon = Lexicon::new("lex", [("good", 1.0), ("bad", -1.0)])?;
    let texts = ["good", "not good", "not very good", "very bad", "barely good"];

    let bigram = ValenceTable::bigram([("not", -1.0), ("very", 1.8), ("barely", 0.2)])?;
    let cluster = ValenceTable::cluster([
        ("not", ShifterKind::Negator),
        ("very", ShifterKind::Amplifier),
        ("barely", ShifterKind::Deamplifier),
    ])?;
    let opts = SentimentOptions {
        how: WithinScheme::Counts,
        ..Default::default()
    };
    let sets = [
        ("unigram", LexiconSet::new(vec![lexicon.clone()], None)?),
        ("bigram", LexiconSet::new(vec![lexicon.clone()], Some(bigram))?),
        ("cluster", LexiconSet::new(vec![lexicon], Some(cluster))?),
    ];

    print!("{:<16}", "");
    for (mode, _) in &sets {
        print!("{mode:>10}");
    }
    println!();
    let scores: Vec<_> = sets
        .iter()
        .map(|(_, s)| compute_sentiment_texts(&texts, s, &opts))
        .collect::<Result<_, _>>()?;
    for (i, text) in texts.iter().enumerate() {
        print!("{text:<16}");
        for table in &scores {
            print!("{:>10.3}", table.rows()[i].scores[0]);
        }
        println!();
    }
    Ok(())
}
