//! Extractive stage: rank the ~100-word units of all documents, keep the
//! top `L`, and join them behind the title with `[SEP]` separators.
//!
//! Three rankers are available:
//!
//! * TF-IDF against the title words, with IDF computed over the units of
//!   the example's own super document,
//! * a seeded uniform draw without replacement,
//! * a cheating oracle ranking by distinct-bigram recall of the target.
//!
//! Ties are broken by `(doc_index, sent_index)` ascending, so rankings are
//! total and every selection of size `L` is a prefix of the one of size
//! `L + 1`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus_io::DatasetExample;
use crate::error::{Error, Result};
use crate::seed::{self, Stream};
use crate::text::{normalize, super_document, tokenize_words, SentenceUnit, DEFAULT_TARGET_WORDS};

pub const SEP: &str = "[SEP]";
const SEP_JOIN: &str = " [SEP] ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub unit: SentenceUnit,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractResult {
    pub title: String,
    pub selected: Vec<ScoredSentence>,
    pub assembled: String,
}

impl ExtractResult {
    fn new(title: String, selected: Vec<ScoredSentence>) -> Self {
        let assembled = assemble(&title, selected.iter().map(|s| s.unit.text.as_str()));
        Self {
            title,
            selected,
            assembled,
        }
    }

    /// Selected sentence texts joined by spaces: the extract without title
    /// and separators.
    pub fn body(&self) -> String {
        self.selected
            .iter()
            .map(|s| s.unit.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Keeps the first `l` selected sentences.
    pub fn truncated(&self, l: usize) -> ExtractResult {
        ExtractResult::new(self.title.clone(), self.selected.iter().take(l).cloned().collect())
    }

    pub fn to_line(&self) -> ExtractLine {
        ExtractLine {
            title: self.title.clone(),
            assembled: self.assembled.clone(),
            selected: self
                .selected
                .iter()
                .map(|s| SelectedRef {
                    doc: s.unit.doc_index,
                    sent: s.unit.sent_index,
                    score: s.score,
                })
                .collect(),
        }
    }
}

/// One line of an extracts file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractLine {
    pub title: String,
    pub assembled: String,
    pub selected: Vec<SelectedRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedRef {
    pub doc: usize,
    pub sent: usize,
    pub score: Option<f64>,
}

/// `title [SEP] s1 [SEP] s2 ...`
pub fn assemble<'a>(title: &str, sentences: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = title.to_owned();
    for s in sentences {
        out.push_str(SEP_JOIN);
        out.push_str(s);
    }
    out
}

/// Drops the title segment and the separators from an assembled extract.
pub fn strip_title_and_separators(assembled: &str) -> String {
    assembled.split(SEP_JOIN).skip(1).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    /// `log_b(x) = ln(x) / ln(b)`; applied to finished natural-log sums so
    /// every base sees the same rounding before the constant rescale.
    fn rescale(self, natural: f64) -> f64 {
        match self {
            LogBase::Natural => natural,
            LogBase::Two => natural / std::f64::consts::LN_2,
        }
    }
}

/// Term frequency times log inverse sentence frequency, with the document
/// set being the units of `units`. Zero when the term is absent from
/// `sentence`.
pub fn tfidf_term(term: &str, sentence: &SentenceUnit, units: &[SentenceUnit]) -> Result<f64> {
    if units.is_empty() {
        return Err(Error::invalid("TF-IDF over an empty super document"));
    }
    let tf = sentence.tokens().iter().filter(|t| **t == term).count();
    if tf == 0 {
        return Ok(0.0);
    }
    let df = units.iter().filter(|u| u.tokens().contains(&term)).count().max(1);
    Ok(tf as f64 * (units.len() as f64 / df as f64).ln())
}

/// Sum of [`tfidf_term`] over the title's tokens, repeated tokens counted
/// each time.
pub fn tfidf_sentence(sentence: &SentenceUnit, title: &str, units: &[SentenceUnit]) -> Result<f64> {
    let title = normalize(title);
    let terms = tokenize_words(&title);
    if terms.is_empty() {
        return Err(Error::invalid("title has no word tokens"));
    }
    terms.iter().map(|t| tfidf_term(t, sentence, units)).sum()
}

/// Scores every unit against the title in one pass over the units.
pub fn tfidf_scores(units: &[SentenceUnit], title: &str, base: LogBase) -> Result<Vec<f64>> {
    if units.is_empty() {
        return Err(Error::invalid("TF-IDF over an empty super document"));
    }
    let title = normalize(title);
    let title_tokens = tokenize_words(&title);
    if title_tokens.is_empty() {
        return Err(Error::invalid("title has no word tokens"));
    }
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for t in &title_tokens {
        let next = slot.len();
        slot.entry(t).or_insert(next);
    }
    // multiplicity of each distinct title term
    let mut weight = vec![0usize; slot.len()];
    for t in &title_tokens {
        weight[slot[t]] += 1;
    }

    let width = slot.len();
    let mut tf = vec![0usize; units.len() * width];
    let mut df = vec![0usize; width];
    for (i, unit) in units.iter().enumerate() {
        let row = &mut tf[i * width..(i + 1) * width];
        for token in tokenize_words(&unit.text) {
            if let Some(&k) = slot.get(token) {
                row[k] += 1;
            }
        }
        for (k, &c) in row.iter().enumerate() {
            if c > 0 {
                df[k] += 1;
            }
        }
    }
    let n = units.len() as f64;
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { (n / d as f64).ln() })
        .collect();
    Ok(tf
        .chunks(width)
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (weight[k] * c) as f64 * idf[k])
                .sum::<f64>()
        })
        .map(|s| base.rescale(s))
        .collect())
}

/// Distinct bigrams of a target, stored as pairs of interned word ids.
struct TargetBigrams {
    ids: HashMap<String, u32>,
    pairs: HashSet<(u32, u32)>,
}

fn target_bigrams(target: &str) -> Result<TargetBigrams> {
    let norm = normalize(target);
    let tokens = tokenize_words(&norm);
    if tokens.len() < 2 {
        return Err(Error::invalid("cheating score needs a target with at least two words"));
    }
    let mut ids = HashMap::new();
    let seq: Vec<u32> = tokens
        .iter()
        .map(|t| {
            let next = ids.len() as u32;
            *ids.entry((*t).to_owned()).or_insert(next)
        })
        .collect();
    let pairs = seq.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(TargetBigrams { ids, pairs })
}

fn bigram_recall(text: &str, target: &TargetBigrams) -> f64 {
    let seq: Vec<Option<u32>> = tokenize_words(text)
        .into_iter()
        .map(|t| target.ids.get(t).copied())
        .collect();
    let shared: HashSet<(u32, u32)> = seq
        .windows(2)
        .filter_map(|w| Some((w[0]?, w[1]?)))
        .filter(|p| target.pairs.contains(p))
        .collect();
    shared.len() as f64 / target.pairs.len() as f64
}

/// Share of the target's distinct bigrams that also appear in the sentence.
pub fn cheating_score(sentence: &SentenceUnit, target: &str) -> Result<f64> {
    Ok(bigram_recall(&sentence.text, &target_bigrams(target)?))
}

fn rank(units: Vec<SentenceUnit>, scores: Vec<f64>) -> Vec<ScoredSentence> {
    let mut scored: Vec<ScoredSentence> = units
        .into_iter()
        .zip(scores)
        .map(|(unit, score)| ScoredSentence {
            unit,
            score: Some(score),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(a.unit.doc_index.cmp(&b.unit.doc_index))
            .then(a.unit.sent_index.cmp(&b.unit.sent_index))
    });
    scored
}

fn units_of(example: &DatasetExample, target_words: usize) -> Result<Vec<SentenceUnit>> {
    let units = super_document(&example.docs, target_words);
    if units.is_empty() {
        return Err(Error::invalid(format!("example {:?} has no sentences", example.title)));
    }
    Ok(units)
}

/// Which ranker to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Tfidf,
    Random,
    Cheating,
}

impl ExtractorKind {
    pub const ALL: [ExtractorKind; 3] = [ExtractorKind::Random, ExtractorKind::Tfidf, ExtractorKind::Cheating];

    pub fn name(self) -> &'static str {
        match self {
            ExtractorKind::Tfidf => "tfidf",
            ExtractorKind::Random => "random",
            ExtractorKind::Cheating => "cheating",
        }
    }
}

impl FromStr for ExtractorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfidf" | "tf-idf" => Ok(ExtractorKind::Tfidf),
            "random" => Ok(ExtractorKind::Random),
            "cheating" => Ok(ExtractorKind::Cheating),
            other => Err(Error::invalid(format!("unknown extractor {other:?}"))),
        }
    }
}

/// An extractor configured with everything except the example and `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extractor {
    pub kind: ExtractorKind,
    pub target_words: usize,
    /// Top-level seed; the random ranker derives one seed per example index.
    pub seed: u64,
    pub log_base: LogBase,
}

impl Extractor {
    pub fn new(kind: ExtractorKind) -> Self {
        Self {
            kind,
            target_words: DEFAULT_TARGET_WORDS,
            seed: 0,
            log_base: LogBase::Natural,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_target_words(mut self, target_words: usize) -> Self {
        self.target_words = target_words;
        self
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    /// Runs on the `index`-th example of a dataset. Only the random ranker
    /// looks at `index`.
    pub fn extract(&self, example: &DatasetExample, l: usize, index: u64) -> Result<ExtractResult> {
        let title = normalize(&example.title);
        let units = units_of(example, self.target_words)?;
        let selected = match self.kind {
            ExtractorKind::Tfidf => {
                let scores = tfidf_scores(&units, &title, self.log_base)?;
                rank(units, scores)
            }
            ExtractorKind::Cheating => {
                let target = target_bigrams(&example.summary)?;
                let scores = units.iter().map(|u| bigram_recall(&u.text, &target)).collect();
                rank(units, scores)
            }
            ExtractorKind::Random => {
                let seed = seed::derive_seed(self.seed, Stream::RandomExtract, index);
                draw(units, l, seed)
            }
        };
        Ok(ExtractResult::new(title, selected.into_iter().take(l).collect()))
    }
}

/// Partial Fisher-Yates: the first `l` draws of a seeded shuffle. Draw `k`
/// does not depend on `l`, so smaller selections are prefixes of larger.
fn draw(mut units: Vec<SentenceUnit>, l: usize, seed: u64) -> Vec<ScoredSentence> {
    let mut rng = seed::rng(seed);
    let n = units.len();
    let take = l.min(n);
    for i in 0..take {
        let j = rng.random_range(i..n);
        units.swap(i, j);
    }
    units.truncate(take);
    units
        .into_iter()
        .map(|unit| ScoredSentence { unit, score: None })
        .collect()
}

pub fn select_tfidf(example: &DatasetExample, l: usize) -> Result<ExtractResult> {
    Extractor::new(ExtractorKind::Tfidf).extract(example, l, 0)
}

/// Uniform draw of `min(l, |O|)` units using `seed` directly.
pub fn select_random(example: &DatasetExample, l: usize, seed: u64) -> Result<ExtractResult> {
    let title = normalize(&example.title);
    let units = units_of(example, DEFAULT_TARGET_WORDS)?;
    Ok(ExtractResult::new(title, draw(units, l, seed)))
}

/// Ranks by bigram recall against `target` (normally the example summary).
pub fn select_cheating(example: &DatasetExample, l: usize, target: &str) -> Result<ExtractResult> {
    let title = normalize(&example.title);
    let units = units_of(example, DEFAULT_TARGET_WORDS)?;
    let target = target_bigrams(target)?;
    let scores = units.iter().map(|u| bigram_recall(&u.text, &target)).collect();
    Ok(ExtractResult::new(
        title,
        rank(units, scores).into_iter().take(l).collect(),
    ))
}
