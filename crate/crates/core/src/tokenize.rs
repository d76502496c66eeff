//! Tokenization shared by sentiment scoring and keyword features.
//!
//! Words are found by Unicode word segmentation, case-folded, and purely numeric
//! tokens ("5", "5.85", "1,000") are dropped. Sentences end at `.`, `!` or `?`
//! followed by whitespace or the end of the text; abbreviations are not special-cased.

use std::ops::Range;

use unicode_segmentation::UnicodeSegmentation;

/// A tokenized text with its sentence partition.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TokenizedDocument {
    pub tokens: Vec<String>,
    /// Non-empty spans that partition `tokens`, in order.
    pub sentences: Vec<Range<usize>>,
    /// Token indices immediately preceded by a comma in the source text.
    pub comma_breaks: Vec<usize>,
}

impl TokenizedDocument {
    /// Wraps caller-supplied tokens as a single sentence. Tokens are used verbatim.
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let n = tokens.len();
        TokenizedDocument {
            tokens,
            sentences: if n > 0 { std::iter::once(0..n).collect() } else { Vec::new() },
            comma_breaks: Vec::new(),
        }
    }

    /// Wraps caller-supplied tokenized sentences. Empty sentences are dropped.
    pub fn from_sentences(sentences: Vec<Vec<String>>) -> Self {
        let mut tokens = Vec::new();
        let mut spans = Vec::new();
        for sentence in sentences {
            if sentence.is_empty() {
                continue;
            }
            let start = tokens.len();
            tokens.extend(sentence);
            spans.push(start..tokens.len());
        }
        TokenizedDocument {
            tokens,
            sentences: spans,
            comma_breaks: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Tokenizes `text`, recording sentence spans and comma positions.
pub fn tokenize(text: &str) -> TokenizedDocument {
    let mut doc = TokenizedDocument::default();
    for sentence in split_sentences(text) {
        let start = doc.tokens.len();
        let mut prev_end: Option<usize> = None;
        for (offset, word) in sentence.unicode_word_indices() {
            if is_numeric_token(word) {
                continue;
            }
            if let Some(end) = prev_end {
                if sentence[end..offset].contains(',') {
                    doc.comma_breaks.push(doc.tokens.len());
                }
            }
            doc.tokens.push(word.to_lowercase());
            prev_end = Some(offset + word.len());
        }
        if doc.tokens.len() > start {
            doc.sentences.push(start..doc.tokens.len());
        }
    }
    doc
}

/// Tokens only, without sentence bookkeeping.
pub fn tokens(text: &str) -> Vec<String> {
    text.unicode_words()
        .filter(|w| !is_numeric_token(w))
        .map(str::to_lowercase)
        .collect()
}

fn is_numeric_token(word: &str) -> bool {
    word.chars().any(char::is_numeric)
        && word
            .chars()
            .all(|c| c.is_numeric() || matches!(c, '.' | ',' | '\'' | '_'))
}

fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let at_boundary = match chars.peek() {
                None => true,
                Some((_, next)) => next.is_whitespace(),
            };
            if at_boundary {
                let end = i + c.len_utf8();
                out.push(&text[start..end]);
                start = end;
            }
        }
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_fold_and_punctuation() {
        assert_eq!(tokenize("Not GOOD, really.").tokens, vec!["not", "good", "really"]);
    }

    #[test]
    fn numbers_are_stripped() {
        assert_eq!(tokenize("rose to 5.85 from 5.79").tokens, vec!["rose", "to", "from"]);
        assert_eq!(tokens("30-year rates at 1,000"), vec!["year", "rates", "at"]);
    }

    #[test]
    fn sentence_spans() {
        let doc = tokenize("Bad. Good!");
        assert_eq!(doc.tokens, vec!["bad", "good"]);
        assert_eq!(doc.sentences, vec![0..1, 1..2]);
    }

    #[test]
    fn decimal_point_does_not_split_sentence() {
        let doc = tokenize("It rose to 5.85 today. Then fell");
        assert_eq!(doc.sentences.len(), 2);
        assert_eq!(doc.sentences[0], 0..4);
    }

    #[test]
    fn commas_recorded_between_tokens() {
        let doc = tokenize("good, but not great, sadly");
        assert_eq!(doc.tokens, vec!["good", "but", "not", "great", "sadly"]);
        assert_eq!(doc.comma_breaks, vec![1, 4]);
    }

    #[test]
    fn empty_text() {
        let doc = tokenize("  ... 42 ");
        assert!(doc.is_empty());
        assert!(doc.sentences.is_empty());
    }

    #[test]
    fn spans_partition_tokens() {
        let doc = tokenize("One two. Three! Four five six? Seven");
        let mut next = 0;
        for span in &doc.sentences {
            assert_eq!(span.start, next);
            assert!(span.end > span.start);
            next = span.end;
        }
        assert_eq!(next, doc.len());
    }
}
