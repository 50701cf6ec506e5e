//! Dataset construction: title matching, the four acceptance rules with
//! clone detection, train/validation/test splitting and percentile stats.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{CorpusRecord, DatasetExample, WikiEntry};
use crate::error::{Error, Result};
use crate::seed;
use crate::text::{count_words, normalize, tokenize_words};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub max_docs: usize,
    pub min_total_input_words: usize,
    pub min_summary_words: usize,
    pub clone_threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_docs: 15,
            min_total_input_words: 1000,
            min_summary_words: 20,
            clone_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RejectReason {
    TooFewInputWords,
    SummaryTooShort,
    NoMatchingDocs,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::TooFewInputWords => "too few input words",
            RejectReason::SummaryTooShort => "summary too short",
            RejectReason::NoMatchingDocs => "no matching documents",
        })
    }
}

/// Outcome of [`apply_filters`]. `clones_removed` counts documents dropped
/// by clone detection, whichever way the example went.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub outcome: std::result::Result<DatasetExample, RejectReason>,
    pub clones_removed: usize,
}

fn title_terms(title: &str) -> Result<Vec<String>> {
    let norm = normalize(title);
    let mut terms: Vec<String> = tokenize_words(&norm).into_iter().map(str::to_owned).collect();
    if terms.is_empty() {
        return Err(Error::invalid(format!("title {title:?} has no word tokens")));
    }
    terms.sort();
    terms.dedup();
    Ok(terms)
}

fn contains_all(text: &str, terms: &[String]) -> bool {
    let norm = normalize(text);
    let tokens: HashSet<&str> = tokenize_words(&norm).into_iter().collect();
    terms.iter().all(|t| tokens.contains(t.as_str()))
}

/// Records whose text contains every title word as a whole token, in corpus
/// order, at most `max_docs` of them.
pub fn match_documents<'a, I>(title: &str, corpus: I, max_docs: usize) -> Result<Vec<CorpusRecord>>
where
    I: IntoIterator<Item = &'a CorpusRecord>,
{
    let terms = title_terms(title)?;
    Ok(corpus
        .into_iter()
        .filter(|r| contains_all(&r.text, &terms))
        .take(max_docs)
        .cloned()
        .collect())
}

/// Streaming form of [`match_documents`] for many titles at once.
///
/// Titles are indexed by one of their words, so each corpus record is
/// tokenized once and checked only against titles that share that word.
pub struct TitleMatcher {
    terms: Vec<Vec<String>>,
    by_key: HashMap<String, Vec<usize>>,
    matched: Vec<Vec<String>>,
    max_docs: usize,
}

impl TitleMatcher {
    pub fn new<S: AsRef<str>>(titles: &[S], max_docs: usize) -> Result<Self> {
        let mut terms = Vec::with_capacity(titles.len());
        let mut by_key: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, title) in titles.iter().enumerate() {
            let t = title_terms(title.as_ref())?;
            // longest word is a cheap proxy for the rarest one
            let key = t.iter().max_by_key(|w| (w.len(), w.as_str())).unwrap().clone();
            by_key.entry(key).or_default().push(i);
            terms.push(t);
        }
        Ok(Self {
            matched: vec![Vec::new(); terms.len()],
            terms,
            by_key,
            max_docs,
        })
    }

    pub fn observe(&mut self, record: &CorpusRecord) {
        let norm = normalize(&record.text);
        let tokens: HashSet<&str> = tokenize_words(&norm).into_iter().collect();
        for token in &tokens {
            let Some(candidates) = self.by_key.get(*token) else {
                continue;
            };
            for &i in candidates {
                if self.matched[i].len() < self.max_docs && self.terms[i].iter().all(|t| tokens.contains(t.as_str())) {
                    self.matched[i].push(record.text.clone());
                }
            }
        }
    }

    /// Matched document texts per title, in the order titles were given.
    pub fn finish(self) -> Vec<Vec<String>> {
        self.matched
    }
}

fn distinct<'a>(tokens: &[&'a str]) -> HashSet<&'a str> {
    tokens.iter().copied().collect()
}

/// Fraction of the summary's distinct words that also occur in the document.
pub fn clone_score<S: AsRef<str>, T: AsRef<str>>(doc_tokens: &[S], summary_tokens: &[T]) -> Result<f64> {
    let summary: HashSet<&str> = summary_tokens.iter().map(AsRef::as_ref).collect();
    if summary.is_empty() {
        return Err(Error::invalid("clone score needs a non-empty summary"));
    }
    let doc: HashSet<&str> = doc_tokens.iter().map(AsRef::as_ref).collect();
    let shared = summary.iter().filter(|w| doc.contains(*w)).count();
    Ok(shared as f64 / summary.len() as f64)
}

/// Applies the acceptance rules to one candidate.
///
/// Clone documents (score strictly above the threshold) go first, then the
/// surviving list is cut to `max_docs`. Rejection checks run in the order
/// summary length, empty document list, total input words.
pub fn apply_filters(candidate: &DatasetExample, config: &FilterConfig) -> Filtered {
    let summary_norm = normalize(&candidate.summary);
    let summary_tokens = tokenize_words(&summary_norm);
    if summary_tokens.len() < config.min_summary_words || summary_tokens.is_empty() {
        return Filtered {
            outcome: Err(RejectReason::SummaryTooShort),
            clones_removed: 0,
        };
    }
    let summary_set = distinct(&summary_tokens);

    let mut clones_removed = 0;
    let mut kept = Vec::new();
    let mut total_words = 0usize;
    for doc in &candidate.docs {
        let norm = normalize(doc);
        let tokens = tokenize_words(&norm);
        let shared = distinct(&tokens).intersection(&summary_set).count();
        let score = shared as f64 / summary_set.len() as f64;
        if score > config.clone_threshold {
            clones_removed += 1;
            continue;
        }
        if kept.len() < config.max_docs {
            total_words += tokens.len();
            kept.push(doc.clone());
        }
    }

    let outcome = if kept.is_empty() {
        Err(RejectReason::NoMatchingDocs)
    } else if total_words < config.min_total_input_words {
        Err(RejectReason::TooFewInputWords)
    } else {
        Ok(DatasetExample {
            title: candidate.title.clone(),
            summary: candidate.summary.clone(),
            docs: kept,
        })
    };
    Filtered {
        outcome,
        clones_removed,
    }
}

/// Re-checks an example against every bound of `config`.
pub fn satisfies(example: &DatasetExample, config: &FilterConfig) -> bool {
    let summary_norm = normalize(&example.summary);
    let summary_tokens = tokenize_words(&summary_norm);
    if summary_tokens.len() < config.min_summary_words || summary_tokens.is_empty() {
        return false;
    }
    if example.docs.is_empty() || example.docs.len() > config.max_docs {
        return false;
    }
    let mut total = 0;
    for doc in &example.docs {
        let norm = normalize(doc);
        let tokens = tokenize_words(&norm);
        total += tokens.len();
        match clone_score(&tokens, &summary_tokens) {
            Ok(s) if s <= config.clone_threshold => {}
            _ => return false,
        }
    }
    total >= config.min_total_input_words
}

/// Counts from one dataset build.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub candidates: usize,
    pub accepted: usize,
    pub too_few_input_words: usize,
    pub summary_too_short: usize,
    pub no_matching_docs: usize,
    pub clone_docs_removed: usize,
}

impl BuildReport {
    fn record(&mut self, filtered: &Filtered) {
        self.candidates += 1;
        self.clone_docs_removed += filtered.clones_removed;
        match filtered.outcome {
            Ok(_) => self.accepted += 1,
            Err(RejectReason::TooFewInputWords) => self.too_few_input_words += 1,
            Err(RejectReason::SummaryTooShort) => self.summary_too_short += 1,
            Err(RejectReason::NoMatchingDocs) => self.no_matching_docs += 1,
        }
    }
}

/// Matches every wiki entry against a streamed corpus and filters the
/// resulting candidates. Accepted examples keep the wiki order.
pub fn build_dataset<I>(
    wiki: &[WikiEntry],
    corpus: I,
    config: &FilterConfig,
) -> Result<(Vec<DatasetExample>, BuildReport)>
where
    I: IntoIterator<Item = Result<CorpusRecord>>,
{
    let titles: Vec<&str> = wiki.iter().map(|w| w.title.as_str()).collect();
    let mut matcher = TitleMatcher::new(&titles, config.max_docs)?;
    for record in corpus {
        matcher.observe(&record?);
    }
    let mut report = BuildReport::default();
    let mut accepted = Vec::new();
    for (entry, docs) in wiki.iter().zip(matcher.finish()) {
        let candidate = DatasetExample {
            title: entry.title.clone(),
            summary: entry.summary.clone(),
            docs,
        };
        let filtered = apply_filters(&candidate, config);
        report.record(&filtered);
        if let Ok(example) = filtered.outcome {
            accepted.push(example);
        }
    }
    Ok((accepted, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle followed by contiguous slicing. Train and validation sizes
/// are rounded from the ratios; test takes the remainder.
pub fn split_dataset<T>(mut items: Vec<T>, ratios: SplitRatios, seed: u64) -> Result<Split<T>> {
    let sum = ratios.train + ratios.validation + ratios.test;
    if (sum - 1.0).abs() > 1e-9 || [ratios.train, ratios.validation, ratios.test].iter().any(|r| *r < 0.0) {
        return Err(Error::invalid(format!(
            "split ratios must be non-negative and sum to 1, got {sum}"
        )));
    }
    let n = items.len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 examples to split, got {n}")));
    }
    let n_train = ((n as f64 * ratios.train).round() as usize).min(n);
    let n_val = ((n as f64 * ratios.validation).round() as usize).min(n - n_train);

    items.shuffle(&mut seed::rng(seed));
    let test = items.split_off(n_train + n_val);
    let validation = items.split_off(n_train);
    Ok(Split {
        train: items,
        validation,
        test,
    })
}

pub const STAT_PERCENTILES: [u32; 5] = [20, 40, 60, 80, 100];

/// Nearest-rank percentile of an ascending slice: the value at 1-based rank
/// `ceil(p / 100 * n)`, with rank clamped to at least 1.
pub fn nearest_rank<T: Copy>(sorted: &[T], pct: f64) -> Option<T> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (pct / 100.0 * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PercentileRow {
    pub percentile: u32,
    pub input_size_words: usize,
    pub output_size_words: usize,
    pub n_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub examples: usize,
    pub rows: Vec<PercentileRow>,
}

/// Per-example sizes used by the percentile table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExampleSizes {
    pub input_words: usize,
    pub output_words: usize,
    pub documents: usize,
}

impl ExampleSizes {
    pub fn of(example: &DatasetExample) -> Self {
        Self {
            input_words: example.docs.iter().map(|d| count_words(d)).sum(),
            output_words: count_words(&example.summary),
            documents: example.docs.len(),
        }
    }
}

pub fn compute_stats<'a, I>(examples: I) -> Result<DatasetStats>
where
    I: IntoIterator<Item = &'a DatasetExample>,
{
    stats_from_sizes(examples.into_iter().map(ExampleSizes::of))
}

pub fn stats_from_sizes<I: IntoIterator<Item = ExampleSizes>>(sizes: I) -> Result<DatasetStats> {
    let (mut input, mut output, mut docs) = (Vec::new(), Vec::new(), Vec::new());
    for s in sizes {
        input.push(s.input_words);
        output.push(s.output_words);
        docs.push(s.documents);
    }
    if input.is_empty() {
        return Err(Error::invalid("cannot compute statistics of an empty dataset"));
    }
    input.sort_unstable();
    output.sort_unstable();
    docs.sort_unstable();
    let rows = STAT_PERCENTILES
        .iter()
        .map(|&p| PercentileRow {
            percentile: p,
            input_size_words: nearest_rank(&input, p as f64).unwrap(),
            output_size_words: nearest_rank(&output, p as f64).unwrap(),
            n_documents: nearest_rank(&docs, p as f64).unwrap(),
        })
        .collect();
    Ok(DatasetStats {
        examples: input.len(),
        rows,
    })
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16}", "Percentile (%)")?;
        for r in &self.rows {
            write!(f, "{:>10}", r.percentile)?;
        }
        writeln!(f)?;
        type Field = fn(&PercentileRow) -> usize;
        let fields: [(&str, Field); 3] = [
            ("Input size", |r| r.input_size_words),
            ("Output size", |r| r.output_size_words),
            ("# Documents", |r| r.n_documents),
        ];
        for (name, get) in fields {
            write!(f, "{name:<16}")?;
            for r in &self.rows {
                write!(f, "{:>10}", get(r))?;
            }
            writeln!(f)?;
        }
        write!(f, "({} examples)", self.examples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, text: &str) -> CorpusRecord {
        CorpusRecord {
            docid: id.into(),
            url: format!("http://{id}"),
            title: String::new(),
            text: text.into(),
        }
    }

    #[test]
    fn title_words_match_in_any_order() {
        let corpus = vec![
            record("a", "Dumont visitou Santos ontem"),
            record("b", "o porto de santos"),
        ];
        let m = match_documents("Santos Dumont", &corpus, 15).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].docid, "a");
    }

    #[test]
    fn matching_is_whole_word() {
        let corpus = vec![record("a", "santosdumont e santistas")];
        assert!(match_documents("santos", &corpus, 15).unwrap().is_empty());
    }

    #[test]
    fn matches_truncate_in_corpus_order() {
        let corpus: Vec<_> = (0..20).map(|i| record(&format!("d{i}"), "santos dumont")).collect();
        let m = match_documents("santos dumont", &corpus, 15).unwrap();
        assert_eq!(m.len(), 15);
        assert_eq!(m[14].docid, "d14");
    }

    #[test]
    fn empty_title_is_an_error() {
        assert!(match_documents(" !! ", &[], 15).is_err());
    }

    #[test]
    fn streaming_matcher_agrees_with_direct_matching() {
        let corpus = vec![
            record("a", "santos dumont voou"),
            record("b", "dumont"),
            record("c", "Mário de Andrade e Santos Dumont"),
            record("d", "andrade mário"),
        ];
        let titles = ["Santos Dumont", "Mário de Andrade", "ausente"];
        let mut matcher = TitleMatcher::new(&titles, 15).unwrap();
        corpus.iter().for_each(|r| matcher.observe(r));
        let streamed = matcher.finish();
        for (title, got) in titles.iter().zip(streamed) {
            let direct: Vec<String> = match_documents(title, &corpus, 15)
                .unwrap()
                .into_iter()
                .map(|r| r.text)
                .collect();
            assert_eq!(got, direct, "{title}");
        }
    }

    #[test]
    fn clone_score_examples() {
        assert_eq!(clone_score(&["a", "b", "c"], &["a", "b", "c"]).unwrap(), 1.0);
        assert_eq!(clone_score(&["x", "y", "z"], &["a", "b", "c"]).unwrap(), 0.0);
        // {a,b} of {a,b,c}
        assert_eq!(clone_score(&["a", "b", "a"], &["a", "b", "c"]).unwrap(), 2.0 / 3.0);
        assert!(clone_score::<&str, &str>(&["a"], &[]).is_err());
    }

    fn words(prefix: &str, n: usize) -> String {
        (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn filter_rejections() {
        let config = FilterConfig::default();
        let short_input = DatasetExample {
            title: "t".into(),
            summary: words("s", 20),
            docs: vec![words("d", 500), words("e", 499)],
        };
        assert_eq!(
            apply_filters(&short_input, &config).outcome,
            Err(RejectReason::TooFewInputWords)
        );
        let short_summary = DatasetExample {
            summary: words("s", 19),
            docs: vec![words("d", 1000)],
            ..short_input.clone()
        };
        assert_eq!(
            apply_filters(&short_summary, &config).outcome,
            Err(RejectReason::SummaryTooShort)
        );
        let no_docs = DatasetExample {
            docs: vec![],
            ..short_input
        };
        assert_eq!(
            apply_filters(&no_docs, &config).outcome,
            Err(RejectReason::NoMatchingDocs)
        );
    }

    #[test]
    fn clone_is_removed_before_word_count() {
        let summary = words("s", 20);
        // 12 of 20 summary words -> 0.6
        let clone = words("s", 12) + " " + &words("c", 988);
        let honest = words("d", 1000);
        let candidate = DatasetExample {
            title: "t".into(),
            summary,
            docs: vec![clone, honest.clone()],
        };
        let filtered = apply_filters(&candidate, &FilterConfig::default());
        assert_eq!(filtered.clones_removed, 1);
        assert_eq!(filtered.outcome.unwrap().docs, vec![honest]);
    }

    #[test]
    fn accepted_examples_are_truncated_to_max_docs() {
        let candidate = DatasetExample {
            title: "t".into(),
            summary: words("s", 20),
            docs: (0..20).map(|i| words(&format!("d{i}x"), 100)).collect(),
        };
        let config = FilterConfig::default();
        let accepted = apply_filters(&candidate, &config).outcome.unwrap();
        assert_eq!(accepted.docs.len(), 15);
        assert!(satisfies(&accepted, &config));
    }

    #[test]
    fn split_sizes() {
        let s = split_dataset((0..10).collect::<Vec<_>>(), SplitRatios::default(), 0).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        let again = split_dataset((0..10).collect::<Vec<_>>(), SplitRatios::default(), 0).unwrap();
        assert_eq!(s, again);
        assert!(split_dataset(vec![1, 2], SplitRatios::default(), 0).is_err());
        let bad = SplitRatios {
            train: 0.5,
            validation: 0.1,
            test: 0.1,
        };
        assert!(split_dataset((0..10).collect::<Vec<_>>(), bad, 0).is_err());
    }

    #[test]
    fn nearest_rank_examples() {
        let v = [10, 20, 30, 40, 50];
        assert_eq!(nearest_rank(&v, 100.0), Some(50));
        // ceil(0.2 * 5) = 1 -> first value
        assert_eq!(nearest_rank(&v, 20.0), Some(10));
        assert_eq!(nearest_rank(&v, 0.0), Some(10));
        assert_eq!(nearest_rank::<i32>(&[], 50.0), None);
    }

    #[test]
    fn stats_of_one_example_are_constant() {
        let ex = DatasetExample {
            title: "t".into(),
            summary: words("s", 25),
            docs: vec![words("d", 600), words("e", 700)],
        };
        let stats = compute_stats([&ex]).unwrap();
        for row in &stats.rows {
            assert_eq!(row.input_size_words, 1300);
            assert_eq!(row.output_size_words, 25);
            assert_eq!(row.n_documents, 2);
        }
        assert!(compute_stats(std::iter::empty()).is_err());
        let text = stats.to_string();
        assert!(text.contains("Input size"));
    }
}
