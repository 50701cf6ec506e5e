//! Text normalization, word tokenization, sentence packing and n-grams.
//!
//! Everything downstream (title matching, TF-IDF, ROUGE, filters) works on
//! the tokens produced here, so the rules are deliberately small:
//! lowercase, collapse whitespace, strip punctuation from token edges.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Default size of an extraction unit, in words.
pub const DEFAULT_TARGET_WORDS: usize = 100;

/// A packed run of raw sentences from one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceUnit {
    pub doc_index: usize,
    pub sent_index: usize,
    pub text: String,
    pub word_count: usize,
}

impl SentenceUnit {
    pub fn tokens(&self) -> Vec<&str> {
        tokenize_words(&self.text)
    }
}

/// Lowercases and collapses whitespace runs into single spaces.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for piece in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(piece.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Strips punctuation from both edges of a whitespace-delimited piece.
/// Returns `None` when nothing is left.
fn strip_edges(piece: &str) -> Option<&str> {
    let token = piece.trim_matches(|c: char| !c.is_alphanumeric());
    (!token.is_empty()).then_some(token)
}

/// Splits on whitespace and trims edge punctuation; empty tokens are dropped.
///
/// Tokens borrow from the input. Inner punctuation is kept, so `"1.5"` and
/// `"guarda-chuva"` stay single tokens.
pub fn tokenize_words(text: &str) -> Vec<&str> {
    text.split_whitespace().filter_map(strip_edges).collect()
}

/// Number of word tokens in `text`, without allocating the token list.
pub fn count_words(text: &str) -> usize {
    text.split_whitespace().filter_map(strip_edges).count()
}

fn ends_sentence(piece: &str) -> bool {
    piece.ends_with(['.', '!', '?'])
}

/// Splits normalized text at terminal punctuation and greedily packs the
/// raw sentences into units of roughly `target_words` words.
///
/// A unit is closed before the next raw sentence when it already holds at
/// least half the target and taking the sentence would push it over 1.2x
/// the target. Units without any word token are dropped. `doc_index` is
/// stamped on every unit.
pub fn split_sentences(text: &str, target_words: usize, doc_index: usize) -> Vec<SentenceUnit> {
    let target_words = target_words.max(1);
    let upper = target_words as f64 * 1.2;
    let lower = target_words as f64 * 0.5;

    let mut units = Vec::new();
    let mut unit_text = String::new();
    let mut unit_words = 0usize;

    let flush = |unit_text: &mut String, unit_words: &mut usize, units: &mut Vec<SentenceUnit>| {
        if *unit_words > 0 {
            units.push(SentenceUnit {
                doc_index,
                sent_index: units.len(),
                text: std::mem::take(unit_text),
                word_count: *unit_words,
            });
        } else {
            unit_text.clear();
        }
        *unit_words = 0;
    };

    let mut pieces = text.split_whitespace().peekable();
    let mut raw = String::new();
    while pieces.peek().is_some() {
        // one raw sentence
        raw.clear();
        let mut raw_words = 0usize;
        for piece in pieces.by_ref() {
            if !raw.is_empty() {
                raw.push(' ');
            }
            raw.push_str(piece);
            if strip_edges(piece).is_some() {
                raw_words += 1;
            }
            if ends_sentence(piece) {
                break;
            }
        }

        if unit_words as f64 >= lower && (unit_words + raw_words) as f64 > upper {
            flush(&mut unit_text, &mut unit_words, &mut units);
        }
        if !unit_text.is_empty() {
            unit_text.push(' ');
        }
        unit_text.push_str(&raw);
        unit_words += raw_words;
    }
    flush(&mut unit_text, &mut unit_words, &mut units);
    units
}

/// Builds the ordered super document of all units over all documents.
pub fn super_document<S: AsRef<str>>(docs: &[S], target_words: usize) -> Vec<SentenceUnit> {
    docs.iter()
        .enumerate()
        .flat_map(|(i, doc)| split_sentences(&normalize(doc.as_ref()), target_words, i))
        .collect()
}

/// Multiset of n-grams over a token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NgramBag {
    pub n: usize,
    pub counts: HashMap<Vec<String>, usize>,
}

impl NgramBag {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Sliding-window n-gram counts. `n` must be at least 1.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> NgramBag {
    assert!(n >= 1, "n-gram width must be at least 1");
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let key = window.iter().map(|t| t.as_ref().to_owned()).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    NgramBag { n, counts }
}

/// Borrowed n-gram counts, used on the hot scoring paths.
pub(crate) fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if n >= 1 && tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}
