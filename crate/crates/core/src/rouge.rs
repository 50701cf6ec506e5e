//! ROUGE-1, ROUGE-2 and ROUGE-L (whole-sequence LCS) with precision,
//! recall and F1.
//!
//! N-gram matches use clipped counts: each distinct n-gram contributes
//! `min(count in candidate, count in reference)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::text::{ngram_counts, normalize, tokenize_words};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    #[serde(rename = "f")]
    pub f1: f64,
}

impl PrfScore {
    pub fn from_counts(matches: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |den: usize| if den == 0 { 0.0 } else { matches as f64 / den as f64 };
        Self::from_pr(ratio(candidate_total), ratio(reference_total))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeReport {
    pub r1: PrfScore,
    pub r2: PrfScore,
    pub rl: PrfScore,
}

/// Which ROUGE variant a value came from; used to index reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RougeMetric {
    R1,
    R2,
    RL,
}

impl RougeMetric {
    pub const ALL: [RougeMetric; 3] = [RougeMetric::R1, RougeMetric::R2, RougeMetric::RL];

    pub fn name(self) -> &'static str {
        match self {
            RougeMetric::R1 => "R1",
            RougeMetric::R2 => "R2",
            RougeMetric::RL => "RL",
        }
    }
}

impl RougeReport {
    pub fn get(&self, metric: RougeMetric) -> PrfScore {
        match metric {
            RougeMetric::R1 => self.r1,
            RougeMetric::R2 => self.r2,
            RougeMetric::RL => self.rl,
        }
    }
}

/// Clipped n-gram match count between two token sequences.
pub fn ngram_matches<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> usize {
    let cand: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
    let refr: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let cand_counts = ngram_counts(&cand, n);
    let ref_counts = ngram_counts(&refr, n);
    let (small, large) = if cand_counts.len() <= ref_counts.len() {
        (&cand_counts, &ref_counts)
    } else {
        (&ref_counts, &cand_counts)
    };
    small.iter().filter_map(|(g, &c)| large.get(g).map(|&o| c.min(o))).sum()
}

fn ngram_total(len: usize, n: usize) -> usize {
    (len + 1).saturating_sub(n)
}

pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> PrfScore {
    assert!(n >= 1, "ROUGE-N needs n >= 1");
    let matches = ngram_matches(candidate, reference, n);
    PrfScore::from_counts(
        matches,
        ngram_total(candidate.len(), n),
        ngram_total(reference.len(), n),
    )
}

/// Length of the longest common subsequence, using a single DP row sized
/// by the shorter input.
pub fn lcs_length<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    // Interning keeps the inner loop on integer compares.
    let mut ids = HashMap::new();
    let short_ids = intern(short, &mut ids);
    let long_ids = intern(long, &mut ids);

    let mut row = vec![0usize; short_ids.len() + 1];
    for &x in &long_ids {
        let mut diag = 0;
        for (j, &y) in short_ids.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short_ids.len()]
}

fn intern<'a, S: AsRef<str>>(seq: &'a [S], ids: &mut HashMap<&'a str, u32>) -> Vec<u32> {
    seq.iter()
        .map(|s| {
            let next = ids.len() as u32;
            *ids.entry(s.as_ref()).or_insert(next)
        })
        .collect()
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> PrfScore {
    let m = lcs_length(candidate, reference);
    PrfScore::from_counts(m, candidate.len(), reference.len())
}

pub fn score_tokens<S: AsRef<str>>(predicted: &[S], target: &[S]) -> RougeReport {
    RougeReport {
        r1: rouge_n(predicted, target, 1),
        r2: rouge_n(predicted, target, 2),
        rl: rouge_l(predicted, target),
    }
}

/// Normalizes and tokenizes both strings, then scores them.
pub fn score_pair(predicted: &str, target: &str) -> RougeReport {
    let p = normalize(predicted);
    let t = normalize(target);
    score_tokens(&tokenize_words(&p), &tokenize_words(&t))
}

/// ROUGE-2 recall only; the quantity plotted by the L sweep.
pub fn r2_recall(predicted: &str, target: &str) -> f64 {
    let p = normalize(predicted);
    let t = normalize(target);
    rouge_n(&tokenize_words(&p), &tokenize_words(&t), 2).recall
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_scores_one() {
        let a = toks("o gato preto");
        for n in 1..=3 {
            let s = rouge_n(&a, &a, n);
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
        let s = rouge_l(&a, &a);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn unigram_example() {
        // shared {o, gato}: 2 of 3 each side
        let s = rouge_n(&toks("o gato preto"), &toks("o gato branco"), 1);
        assert_eq!(s.precision, 2.0 / 3.0);
        assert_eq!(s.recall, 2.0 / 3.0);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn clipping_limits_repeats() {
        // candidate has "a" x3, reference x1 -> one match
        let s = rouge_n(&toks("a a a"), &toks("a b"), 1);
        assert_eq!(s.precision, 1.0 / 3.0);
        assert_eq!(s.recall, 1.0 / 2.0);
    }

    #[test]
    fn n_longer_than_inputs_is_zero() {
        let s = rouge_n(&toks("a b"), &toks("a b"), 3);
        assert_eq!(s, PrfScore::default());
    }

    #[test]
    fn lcs_examples() {
        let a = toks("a b c d");
        assert_eq!(lcs_length(&a, &a), 4);
        assert_eq!(lcs_length(&a, &Vec::<&str>::new()), 0);
        assert_eq!(lcs_length(&a, &toks("a c b d")), 3);
        let s = rouge_l(&a, &toks("a c b d"));
        assert_eq!((s.precision, s.recall, s.f1), (0.75, 0.75, 0.75));
        assert_eq!(rouge_l(&a, &toks("x y")), PrfScore::default());
    }

    #[test]
    fn score_pair_degenerate_inputs() {
        let r = score_pair("O gato.", "o GATO");
        assert_eq!(r.r1.f1, 1.0);
        assert_eq!(r.r2.f1, 1.0);
        assert_eq!(r.rl.f1, 1.0);
        assert_eq!(score_pair("", "o gato"), RougeReport::default());
        assert_eq!(score_pair("o gato", ""), RougeReport::default());
    }

    #[test]
    fn report_serializes_with_short_keys() {
        let json = serde_json::to_value(score_pair("a b", "a b")).unwrap();
        assert_eq!(json["r1"]["p"], 1.0);
        assert_eq!(json["rl"]["f"], 1.0);
    }
}
