//! Deterministic synthetic datasets for tests, benchmarks and demos.
//!
//! Each example has a two-word title and a target summary made of
//! `PHRASES` fixed eight-word phrases. Documents are built from 100-word
//! single-sentence blocks, so every block becomes exactly one extraction
//! unit at the default target size. Blocks come in four kinds:
//!
//! * title blocks: both title words and one target phrase,
//! * fact blocks: two target phrases, no title word,
//! * distractor blocks: the first title word only,
//! * filler blocks: random vocabulary.
//!
//! TF-IDF therefore prefers title blocks, the cheating oracle prefers fact
//! blocks, and a random draw mostly lands on filler.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus_io::DatasetExample;
use crate::seed::{self, Rng};

const PHRASES: usize = 8;
const PHRASE_LEN: usize = 8;
const BLOCK_WORDS: usize = 100;
const TITLE_BLOCKS: usize = 6;
const FACT_BLOCKS: usize = 3;
const DISTRACTOR_BLOCKS: usize = 3;
const BLOCKS_PER_DOC: usize = 6;

const ONSETS: [&str; 14] = ["b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "ch"];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];

/// Pseudo-Portuguese vocabulary of distinct lowercase words.
pub fn vocabulary(size: usize, seed: u64) -> Vec<String> {
    let mut rng = seed::rng(seed);
    let mut seen = std::collections::HashSet::new();
    let mut words = Vec::with_capacity(size);
    while words.len() < size {
        let syllables = rng.random_range(2..=4);
        let w: String = (0..syllables)
            .map(|_| {
                format!(
                    "{}{}",
                    ONSETS[rng.random_range(0..ONSETS.len())],
                    NUCLEI[rng.random_range(0..NUCLEI.len())]
                )
            })
            .collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

struct Builder<'a> {
    vocab: &'a [String],
    banned: [&'a str; 2],
    rng: Rng,
}

impl Builder<'_> {
    fn filler(&mut self, n: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let w = &self.vocab[self.rng.random_range(0..self.vocab.len())];
            if !self.banned.contains(&w.as_str()) {
                out.push(w.clone());
            }
        }
        out
    }

    /// A 100-word block: filler with each chunk spliced in whole at a random
    /// position, ending in a period.
    fn block(&mut self, chunks: &[Vec<String>]) -> String {
        let planted: usize = chunks.iter().map(Vec::len).sum();
        let mut words = self.filler(BLOCK_WORDS - planted);
        for chunk in chunks {
            let at = self.rng.random_range(0..=words.len());
            words.splice(at..at, chunk.iter().cloned());
        }
        words.join(" ") + "."
    }
}

/// One synthetic example; `index` only feeds the seed.
pub fn planted_example(vocab: &[String], seed: u64, index: u64) -> DatasetExample {
    let mut rng = seed::rng(seed::derive_seed(seed, seed::Stream::Fixture, index));
    let pick = |rng: &mut Rng| vocab[rng.random_range(0..vocab.len())].clone();
    let t1 = pick(&mut rng);
    let mut t2 = pick(&mut rng);
    while t2 == t1 {
        t2 = pick(&mut rng);
    }
    let mut b = Builder {
        vocab,
        banned: [t1.as_str(), t2.as_str()],
        rng,
    };
    let phrases: Vec<Vec<String>> = (0..PHRASES).map(|_| b.filler(PHRASE_LEN)).collect();
    let summary = phrases.iter().map(|p| p.join(" ")).collect::<Vec<_>>().join(", ") + ".";

    // Every document gets one title block; the first three also get one fact
    // block each and the last three a distractor. Capping planted content per
    // document keeps each document's clone score well below one half.
    let mut docs: Vec<Vec<String>> = Vec::with_capacity(TITLE_BLOCKS);
    for (d, phrase) in phrases.iter().enumerate().take(TITLE_BLOCKS) {
        let mut blocks = vec![b.block(&[vec![t1.clone()], vec![t2.clone()], phrase.clone()])];
        if d < FACT_BLOCKS {
            let (x, y) = (2 + 2 * d, 3 + 2 * d);
            blocks.push(b.block(&[phrases[x].clone(), phrases[y].clone()]));
        } else if d - FACT_BLOCKS < DISTRACTOR_BLOCKS {
            blocks.push(b.block(&[vec![t1.clone()]]));
        }
        while blocks.len() < BLOCKS_PER_DOC {
            blocks.push(b.block(&[]));
        }
        blocks.shuffle(&mut b.rng);
        docs.push(blocks);
    }
    docs.shuffle(&mut b.rng);

    let docs = docs.into_iter().map(|blocks| blocks.join(" ")).collect();
    let title = format!("{} {}", capitalize(&t1), capitalize(&t2));
    DatasetExample { title, summary, docs }
}

fn capitalize(w: &str) -> String {
    let mut chars = w.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Lazily generates `n` examples over a shared 20 000-word vocabulary.
pub fn planted_dataset(n: usize, seed: u64) -> impl Iterator<Item = DatasetExample> {
    let vocab = vocabulary(20_000, seed);
    (0..n as u64).map(move |i| planted_example(&vocab, seed, i))
}
