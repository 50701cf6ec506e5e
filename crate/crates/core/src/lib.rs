//! Multi-document lead summarization pipeline.
//!
//! Builds (title, lead summary, source documents) datasets from a web
//! corpus, runs TF-IDF / random / cheating extractive stages over pooled
//! ~100-word units, scores outputs with ROUGE-1/2/L and bootstrap
//! intervals, and feeds extracts to an external abstractive model through
//! a line-delimited JSON child-process protocol.

pub mod abstractive;
pub mod config;
pub mod corpus_io;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod extractive;
pub mod rouge;
pub mod seed;
pub mod synth;
pub mod text;

pub use abstractive::{invoke_external, truncate_input, AbstractiveConfig, Summary, TokenCounter, WordCounter};
pub use config::PipelineConfig;
pub use corpus_io::{
    read_corpus, read_examples, write_examples, CorpusRecord, DatasetExample, MalformedPolicy, WikiEntry,
};
pub use dataset::{
    apply_filters, clone_score, compute_stats, match_documents, split_dataset, FilterConfig, RejectReason,
};
pub use error::{Error, Result};
pub use eval::{bootstrap_ci, l_sweep, run_experiment1, score_corpus, BootstrapCI, BootstrapConfig, SweepPoint};
pub use extractive::{ExtractResult, Extractor, ExtractorKind, ScoredSentence};
pub use rouge::{lcs_length, rouge_l, rouge_n, score_pair, PrfScore, RougeReport};
pub use text::{ngrams, normalize, split_sentences, tokenize_words, NgramBag, SentenceUnit};
