//! Sentence-level scoring with adversative conjunctions and comma-bounded
//! clusters, then the documents recombined from their sentences.

use sentiment_measures::lexicon::{Lexicon, LexiconSet, ShifterKind, ValenceTable};
use sentiment_measures::sentiment::{aggregate_sentences, compute_sentiment_texts, SentimentOptions};
use sentiment_measures::weights::{DocScheme, WithinScheme};

fn main() -> sentiment_measures::Result<()> {
    let lexicon = Lexicon::new("lex", [("good", 1.0), ("bad", -1.0), ("great", 1.0)])?;
    let valence = ValenceTable::cluster([
        ("not", ShifterKind::Negator),
        ("very", ShifterKind::Amplifier),
        ("but", ShifterKind::Adversative),
        ("however", ShifterKind::Adversative),
    ])?;
    let set = LexiconSet::new(vec![lexicon], Some(valence))?;
    let texts = [
        "The start was bad. But the end was very good!",
        "Not bad, however not great either.",
        "Very good but very bad.",
    ];
    let opts = SentimentOptions {
        how: WithinScheme::Counts,
        do_sentence: true,
        ..Default::default()
    };
    let sentences = compute_sentiment_texts(&texts, &set, &opts)?;
    for r in sentences.rows() {
        println!("doc {} sentence {:?}: {:+.3} ({} words)", r.id, r.sentence_id, r.scores[0], r.word_count);
    }
    let documents = aggregate_sentences(&sentences, DocScheme::Proportional, 0.1)?;
    for r in documents.rows() {
        println!("doc {}: {:+.3}", r.id, r.scores[0]);
    }
    Ok(())
}
