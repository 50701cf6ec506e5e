//! Prints the extractive comparison and the TF-IDF L sweep on the planted
//! synthetic dataset.

use leadsum_core::eval::{l_sweep, render_sweep, run_experiment1, BootstrapConfig};
use leadsum_core::extractive::{Extractor, ExtractorKind};
use leadsum_core::synth::planted_dataset;

fn main() -> leadsum_core::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let examples: Vec<_> = planted_dataset(n, 0).collect();
    let table = run_experiment1(&examples, 5, 0, 100, BootstrapConfig::default())?;
    println!("{table}");
    let ls: Vec<usize> = (0..=18).step_by(2).collect();
    let sweep = l_sweep(&examples, &Extractor::new(ExtractorKind::Tfidf), &ls)?;
    print!("{}", render_sweep(&sweep));
    Ok(())
}
