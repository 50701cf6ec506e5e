//! Corpus scoring, percentile bootstrap intervals, the L sweep and the
//! extractive comparison table.

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::DatasetExample;
use crate::dataset::nearest_rank;
use crate::error::{Error, Result};
use crate::extractive::{strip_title_and_separators, Extractor, ExtractorKind};
use crate::rouge::{r2_recall, score_pair, PrfScore, RougeMetric, RougeReport};
use crate::seed::{self, Stream};

/// Mean computed around the first value. Exact for constant input.
fn shifted_mean(values: impl ExactSizeIterator<Item = f64> + Clone) -> f64 {
    let n = values.len();
    let Some(first) = values.clone().next() else {
        return 0.0;
    };
    let mut acc = 0.0;
    for v in values {
        acc += v - first;
    }
    first + acc / n as f64
}

fn mean_of(values: &[f64]) -> f64 {
    shifted_mean(values.iter().copied())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusScores {
    pub per_example: Vec<RougeReport>,
    pub mean: RougeReport,
}

impl CorpusScores {
    /// Per-example values of one field, ready for bootstrapping.
    pub fn column(&self, metric: RougeMetric, field: fn(&PrfScore) -> f64) -> Vec<f64> {
        self.per_example.iter().map(|r| field(&r.get(metric))).collect()
    }
}

fn mean_report(reports: &[RougeReport]) -> RougeReport {
    let prf = |get: fn(&RougeReport) -> PrfScore| PrfScore {
        precision: mean_of(&reports.iter().map(|r| get(r).precision).collect::<Vec<_>>()),
        recall: mean_of(&reports.iter().map(|r| get(r).recall).collect::<Vec<_>>()),
        f1: mean_of(&reports.iter().map(|r| get(r).f1).collect::<Vec<_>>()),
    };
    RougeReport {
        r1: prf(|r| r.r1),
        r2: prf(|r| r.r2),
        rl: prf(|r| r.rl),
    }
}

/// Scores `(predicted, target)` pairs and averages every field.
pub fn score_corpus<P, T>(pairs: &[(P, T)]) -> Result<CorpusScores>
where
    P: AsRef<str> + Sync,
    T: AsRef<str> + Sync,
{
    if pairs.is_empty() {
        return Err(Error::invalid("cannot score an empty corpus"));
    }
    let per_example: Vec<RougeReport> = pairs
        .par_iter()
        .map(|(p, t)| score_pair(p.as_ref(), t.as_ref()))
        .collect();
    let mean = mean_report(&per_example);
    Ok(CorpusScores { per_example, mean })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub lo_pct: f64,
    pub hi_pct: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_resamples: 1000,
            lo_pct: 2.5,
            hi_pct: 97.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub lo: f64,
    pub mean: f64,
    pub hi: f64,
    pub n_resamples: usize,
    pub lo_pct: f64,
    pub hi_pct: f64,
}

/// Means of `n_resamples` with-replacement resamples, sorted ascending.
/// Resample `r` draws from its own generator seeded with `seed + r`.
pub fn resampled_means(values: &[f64], n_resamples: usize, seed: u64) -> Vec<f64> {
    let n = values.len();
    let mut means: Vec<f64> = (0..n_resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::rng(seed.wrapping_add(r));
            let first = values[rng.random_range(0..n)];
            let mut acc = 0.0;
            for _ in 1..n {
                acc += values[rng.random_range(0..n)] - first;
            }
            first + acc / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    means
}

/// Percentile bootstrap of the mean.
pub fn bootstrap_ci(values: &[f64], config: BootstrapConfig, seed: u64) -> Result<BootstrapCI> {
    if values.is_empty() {
        return Err(Error::invalid("bootstrap of an empty sample"));
    }
    let BootstrapConfig {
        n_resamples,
        lo_pct,
        hi_pct,
    } = config;
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct >= hi_pct {
        return Err(Error::invalid(format!(
            "bootstrap percentiles must satisfy 0 <= lo < hi <= 100, got {lo_pct} and {hi_pct}"
        )));
    }
    if n_resamples == 0 {
        return Err(Error::invalid("bootstrap needs at least one resample"));
    }
    let means = resampled_means(values, n_resamples, seed);
    Ok(BootstrapCI {
        lo: nearest_rank(&means, lo_pct).unwrap(),
        mean: mean_of(values),
        hi: nearest_rank(&means, hi_pct).unwrap(),
        n_resamples,
        lo_pct,
        hi_pct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "L")]
    pub l: usize,
    pub r2_recall_mean: f64,
}

/// Mean ROUGE-2 recall of the extract (title and separators removed)
/// against each example's summary, for every `L` in `l_values`.
///
/// Each example is extracted once at the largest `L`; smaller selections
/// are prefixes of it.
pub fn l_sweep(examples: &[DatasetExample], extractor: &Extractor, l_values: &[usize]) -> Result<Vec<SweepPoint>> {
    if examples.is_empty() {
        return Err(Error::invalid("L sweep over an empty dataset"));
    }
    if l_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("L values must be sorted ascending"));
    }
    let Some(&max_l) = l_values.last() else {
        return Ok(Vec::new());
    };
    let per_example: Vec<Vec<f64>> = examples
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            let full = extractor.extract(ex, max_l, i as u64)?;
            Ok(l_values
                .iter()
                .map(|&l| {
                    let candidate = strip_title_and_separators(&full.truncated(l).assembled);
                    r2_recall(&candidate, &ex.summary)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(l_values
        .iter()
        .enumerate()
        .map(|(k, &l)| SweepPoint {
            l,
            r2_recall_mean: shifted_mean(per_example.iter().map(|row| row[k])),
        })
        .collect())
}

pub fn render_sweep(points: &[SweepPoint]) -> String {
    let mut out = format!("{:>4}  {:>12}\n", "L", "R2 R (%)");
    for p in points {
        out.push_str(&format!("{:>4}  {:>12.2}\n", p.l, p.r2_recall_mean * 100.0));
    }
    out
}

/// Extracts every example with one extractor and scores the extract body
/// against the summary.
pub fn score_extractor(examples: &[DatasetExample], extractor: &Extractor, l: usize) -> Result<CorpusScores> {
    let pairs: Vec<(String, &str)> = examples
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            let r = extractor.extract(ex, l, i as u64)?;
            Ok((strip_title_and_separators(&r.assembled), ex.summary.as_str()))
        })
        .collect::<Result<_>>()?;
    score_corpus(&pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub extractor: ExtractorKind,
    pub r1_f: BootstrapCI,
    pub r2_f: BootstrapCI,
    pub rl_f: BootstrapCI,
}

impl ExperimentRow {
    pub fn get(&self, metric: RougeMetric) -> &BootstrapCI {
        match metric {
            RougeMetric::R1 => &self.r1_f,
            RougeMetric::R2 => &self.r2_f,
            RougeMetric::RL => &self.rl_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    #[serde(rename = "L")]
    pub l: usize,
    pub examples: usize,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    pub fn row(&self, kind: ExtractorKind) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.extractor == kind)
    }
}

/// Runs the random, TF-IDF and cheating extractors at `L` and reports the
/// mean F of ROUGE-1/2/L with bootstrap intervals.
///
/// The random extractor uses the top-level `seed` (one derived seed per
/// example); the interval for extractor row `e`, metric `m` is seeded with
/// `derive_seed(seed, Bootstrap, 3 * e + m)`.
pub fn run_experiment1(
    dataset: &[DatasetExample],
    l: usize,
    seed: u64,
    target_words: usize,
    bootstrap: BootstrapConfig,
) -> Result<ExperimentTable> {
    if dataset.is_empty() {
        return Err(Error::invalid("experiment over an empty dataset"));
    }
    let mut rows = Vec::new();
    for (e, kind) in ExtractorKind::ALL.into_iter().enumerate() {
        let extractor = Extractor::new(kind).with_seed(seed).with_target_words(target_words);
        let scores = score_extractor(dataset, &extractor, l)?;
        let mut cis = RougeMetric::ALL.into_iter().enumerate().map(|(m, metric)| {
            let values = scores.column(metric, |p| p.f1);
            let s = seed::derive_seed(seed, Stream::Bootstrap, (3 * e + m) as u64);
            bootstrap_ci(&values, bootstrap, s)
        });
        rows.push(ExperimentRow {
            extractor: kind,
            r1_f: cis.next().unwrap()?,
            r2_f: cis.next().unwrap()?,
            rl_f: cis.next().unwrap()?,
        });
    }
    Ok(ExperimentTable {
        l,
        examples: dataset.len(),
        seed,
        rows,
    })
}

impl fmt::Display for ExperimentTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |ci: &BootstrapCI| format!("{:.1} [{:.1}, {:.1}]", ci.mean * 100.0, ci.lo * 100.0, ci.hi * 100.0);
        writeln!(
            f,
            "Extractive, L = {} ({} examples, seed {})",
            self.l, self.examples, self.seed
        )?;
        writeln!(
            f,
            "{:<10}{:>22}{:>22}{:>22}",
            "Model", "R1 F (%)", "R2 F (%)", "RL F (%)"
        )?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<10}{:>22}{:>22}{:>22}",
                row.extractor.name(),
                cell(&row.r1_f),
                cell(&row.r2_f),
                cell(&row.rl_f)
            )?;
        }
        Ok(())
    }
}
