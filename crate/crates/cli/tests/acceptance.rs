//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so criteria execute one at a
//! time and their timings do not interfere.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use leadsum_core::abstractive::{invoke_external, truncate_input, AbstractiveConfig, WordCounter};
use leadsum_core::corpus_io::write_json_line;
use leadsum_core::dataset::{apply_filters, split_dataset, FilterConfig, RejectReason, SplitRatios};
use leadsum_core::eval::{bootstrap_ci, l_sweep, run_experiment1, BootstrapConfig};
use leadsum_core::rouge::{lcs_length, rouge_n};
use leadsum_core::synth::{planted_example, vocabulary};
use leadsum_core::text::count_words;
use leadsum_core::{read_examples, DatasetExample, Extractor, ExtractorKind, MalformedPolicy};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/synthetic_200.jsonl")
}

fn load_fixture() -> Vec<DatasetExample> {
    let file = std::io::BufReader::new(File::open(fixture_path()).expect("bundled fixture"));
    read_examples(file, MalformedPolicy::Abort)
        .collect::<Result<_, _>>()
        .expect("fixture parses")
}

fn clipped_matches_oracle(a: &[&str], b: &[&str], n: usize) -> usize {
    let grams = |s: &[&str]| -> Vec<Vec<String>> {
        if s.len() < n {
            return vec![];
        }
        (0..=s.len() - n)
            .map(|i| s[i..i + n].iter().map(|t| t.to_string()).collect())
            .collect()
    };
    let mut pool = grams(b);
    let mut matched = 0;
    for g in grams(a) {
        if let Some(pos) = pool.iter().position(|x| *x == g) {
            pool.swap_remove(pos);
            matched += 1;
        }
    }
    matched
}

fn lcs_oracle(a: &[&str], b: &[&str]) -> usize {
    let is_subsequence = |sub: &[&str]| {
        let mut it = b.iter();
        sub.iter().all(|x| it.any(|y| y == x))
    };
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        if (mask.count_ones() as usize) <= best {
            continue;
        }
        let sub: Vec<&str> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
        if is_subsequence(&sub) {
            best = sub.len();
        }
    }
    best
}

fn random_seq<'a>(rng: &mut impl Rng, words: &[&'a str], max_len: usize) -> Vec<&'a str> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| words[rng.random_range(0..words.len())]).collect()
}

fn c1_rouge_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let words = ["a", "b", "c", "d"];
    let mut bad = 0;
    for _ in 0..1000 {
        let a = random_seq(&mut rng, &words, 8);
        let b = random_seq(&mut rng, &words, 8);
        for n in 1..=2 {
            let m = clipped_matches_oracle(&a, &b, n);
            let total = |len: usize| (len + 1).saturating_sub(n);
            let frac = |t: usize| if t == 0 { 0.0 } else { m as f64 / t as f64 };
            let s = rouge_n(&a, &b, n);
            if s.precision != frac(total(a.len())) || s.recall != frac(total(b.len())) {
                bad += 1;
            }
        }
        if lcs_length(&a, &b) != lcs_oracle(&a, &b) {
            bad += 1;
        }
    }
    let t = start.elapsed();
    check(
        bad == 0 && t < Duration::from_secs(10),
        format!("{bad} mismatches over 1000 pairs in {t:.2?}"),
    )
}

fn c2_duality() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let words = ["a", "b", "c", "d", "e", "f"];
    let mut bad = 0;
    for i in 0..10_000 {
        let a = random_seq(&mut rng, &words, 20);
        let b = random_seq(&mut rng, &words, 20);
        let n = 1 + i % 3;
        if rouge_n(&a, &b, n).precision != rouge_n(&b, &a, n).recall {
            bad += 1;
        }
    }
    check(bad == 0, format!("{bad} violations over 10000 pairs"))
}

fn c3_ordering(fixture: &[DatasetExample]) -> Outcome {
    let start = Instant::now();
    let table = run_experiment1(fixture, 5, 0, 100, BootstrapConfig::default()).map_err(|e| e.to_string())?;
    let r2 = |k| table.row(k).unwrap().r2_f.mean;
    let (rand, tfidf, cheat) = (
        r2(ExtractorKind::Random),
        r2(ExtractorKind::Tfidf),
        r2(ExtractorKind::Cheating),
    );
    let t = start.elapsed();
    check(
        tfidf - rand >= 0.01 && cheat - tfidf >= 0.01 && t < Duration::from_secs(30),
        format!("R2 F random {rand:.4} < tfidf {tfidf:.4} < cheating {cheat:.4} in {t:.2?}"),
    )
}

fn c4_sweep(fixture: &[DatasetExample]) -> Outcome {
    let ls: Vec<usize> = (0..=18).step_by(2).collect();
    let points = l_sweep(fixture, &Extractor::new(ExtractorKind::Tfidf), &ls).map_err(|e| e.to_string())?;
    let r: Vec<f64> = points.iter().map(|p| p.r2_recall_mean).collect();
    let monotone = r.windows(2).all(|w| w[0] <= w[1]);
    let first = r[1] - r[0];
    let last = r[9] - r[8];
    let shown: Vec<String> = r.iter().map(|x| format!("{:.3}", x)).collect();
    check(
        monotone && r[0] == 0.0 && last <= first,
        format!(
            "curve [{}], first step {first:.4}, last step {last:.4}",
            shown.join(", ")
        ),
    )
}

fn words(prefix: &str, n: usize) -> String {
    (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(" ")
}

fn c5_filters() -> Outcome {
    let config = FilterConfig::default();
    let summary20 = words("s", 20);
    let mk = |summary: &str, docs: Vec<String>| DatasetExample {
        title: "t".into(),
        summary: summary.into(),
        docs,
    };
    let outcome = |ex: &DatasetExample| apply_filters(ex, &config);
    let mut failures = Vec::new();
    let mut expect = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    // input words: two docs so the total crosses the bound, not one doc
    let input = |n: usize| mk(&summary20, vec![words("x", n / 2), words("y", n - n / 2)]);
    expect(
        "999 input words rejected",
        outcome(&input(999)).outcome == Err(RejectReason::TooFewInputWords),
    );
    expect("1000 input words accepted", outcome(&input(1000)).outcome.is_ok());

    let doc = vec![words("x", 1000)];
    expect(
        "19 summary words rejected",
        outcome(&mk(&words("s", 19), doc.clone())).outcome == Err(RejectReason::SummaryTooShort),
    );
    expect(
        "20 summary words accepted",
        outcome(&mk(&words("s", 20), doc.clone())).outcome.is_ok(),
    );

    // clone: a doc sharing k of 20 distinct summary words, next to a clean doc
    let clone_case = |k: usize, distinct: usize| {
        let summary = words("s", distinct);
        let leaky = format!("{} {}", words("s", k), words("z", 50));
        outcome(&mk(&summary, vec![words("x", 1000), leaky]))
    };
    let half = clone_case(10, 20);
    expect(
        "clone 10/20 = 0.5 kept",
        half.clones_removed == 0 && half.outcome.as_ref().is_ok_and(|e| e.docs.len() == 2),
    );
    let over = clone_case(11, 20);
    expect(
        "clone 11/20 removed",
        over.clones_removed == 1 && over.outcome.as_ref().is_ok_and(|e| e.docs.len() == 1),
    );
    let eps = clone_case(501, 1000);
    expect("clone 0.5 + 0.001 removed", eps.clones_removed == 1);
    let exact = clone_case(500, 1000);
    expect("clone 500/1000 kept", exact.clones_removed == 0);

    check(
        failures.is_empty(),
        if failures.is_empty() {
            "8 threshold cases exact".into()
        } else {
            failures.join("; ")
        },
    )
}

fn c6_split() -> Outcome {
    let n = 114_652;
    let s = split_dataset((0..n).collect::<Vec<u32>>(), SplitRatios::default(), 0).map_err(|e| e.to_string())?;
    let sizes = (s.train.len(), s.validation.len(), s.test.len());
    let mut all: Vec<u32> = s.train.into_iter().chain(s.validation).chain(s.test).collect();
    all.sort_unstable();
    let partition = all.iter().copied().eq(0..n);
    check(
        sizes == (91_722, 11_465, 11_465) && partition,
        format!("sizes {sizes:?}, partition {partition}"),
    )
}

fn c7_bootstrap() -> Outcome {
    let config = BootstrapConfig::default();
    let constant = vec![0.4375; 777];
    let c = bootstrap_ci(&constant, config, 3).map_err(|e| e.to_string())?;
    let degenerate = c.lo == 0.4375 && c.mean == 0.4375 && c.hi == 0.4375;

    let mut rng = StdRng::seed_from_u64(7);
    let values: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let start = Instant::now();
    let a = bootstrap_ci(&values, config, 11).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let b = bootstrap_ci(&values, config, 11).map_err(|e| e.to_string())?;
    check(
        degenerate && a == b && t < Duration::from_secs(5),
        format!(
            "constant -> ({}, {}, {}), repeatable {}, 1000 x 10000 in {t:.2?}",
            c.lo,
            c.mean,
            c.hi,
            a == b
        ),
    )
}

fn c8_adapter() -> Outcome {
    let echo = env!("CARGO_BIN_EXE_echo-model");
    let inputs: Vec<String> = (0..1000)
        .map(|i| format!("titulo {i} [SEP] {}", words("w", 20 + i % 37)))
        .collect();
    let config = AbstractiveConfig {
        command: format!("{echo} --reverse"),
        k_max: 10_000,
        ..Default::default()
    };
    let summaries = invoke_external(&config, &inputs).map_err(|e| e.to_string())?;
    let round_trip = summaries.len() == inputs.len()
        && summaries
            .iter()
            .zip(&inputs)
            .enumerate()
            .all(|(i, (s, x))| s.id == i && s.summary == *x);

    let mut runner = TestRunner::new(PropConfig {
        cases: 512,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (
        proptest::collection::vec("[a-z]{1,7}|,|\\(x\\)", 0..3000),
        4usize..=2048,
    );
    let prop = runner.run(&strategy, |(body, j)| {
        let s = format!("santos dumont [SEP] {}", body.join(" "));
        let t = truncate_input(&s, j, &WordCounter).unwrap();
        proptest::prop_assert!(count_words(&t) <= j, "{} words > J = {j}", count_words(&t));
        Ok(())
    });
    check(
        round_trip && prop.is_ok(),
        format!("1000 reversed responses restored: {round_trip}; truncation over 512 random J: {prop:?}"),
    )
}

fn peak_child_rss_kb() -> i64 {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    unsafe { libc::getrusage(libc::RUSAGE_CHILDREN, &mut usage) };
    usage.ru_maxrss
}

fn c9_throughput() -> Outcome {
    const TARGET_BYTES: u64 = 100_000_000;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dataset = dir.path().join("big.jsonl");
    let mut w = BufWriter::new(File::create(&dataset).map_err(|e| e.to_string())?);
    let vocab = vocabulary(20_000, 9);
    let (mut bytes, mut words_total, mut n) = (0u64, 0usize, 0u64);
    let mut line = Vec::new();
    while bytes < TARGET_BYTES {
        let ex = planted_example(&vocab, 9, n);
        words_total += ex.docs.iter().map(|d| count_words(d)).sum::<usize>();
        line.clear();
        write_json_line(&mut line, &ex).map_err(|e| e.to_string())?;
        w.write_all(&line).map_err(|e| e.to_string())?;
        bytes += line.len() as u64;
        n += 1;
    }
    w.flush().map_err(|e| e.to_string())?;
    drop(w);

    let out = dir.path().join("extracts.jsonl");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_leadsum"))
        .args(["extract", "--extractor", "tfidf", "-L", "5", "--dataset"])
        .arg(&dataset)
        .arg("--out")
        .arg(&out)
        .env("LEADSUM_LOG", "warn")
        .stdout(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let rss_mb = peak_child_rss_kb() as f64 / 1024.0;
    let lines = std::fs::read_to_string(&out).map(|s| s.lines().count()).unwrap_or(0);
    check(
        status.success() && lines as u64 == n && t < Duration::from_secs(120) && rss_mb < 2048.0,
        format!(
            "{:.0} MB, {n} examples, {:.1}M words in {t:.2?}, peak RSS {rss_mb:.0} MB, exit {status}",
            bytes as f64 / 1e6,
            words_total as f64 / 1e6
        ),
    )
}

fn main() {
    let fixture = load_fixture();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("ROUGE oracle equivalence", Box::new(c1_rouge_oracle)),
        ("ROUGE duality", Box::new(c2_duality)),
        ("extractive ordering", Box::new(|| c3_ordering(&fixture))),
        ("L-sweep shape", Box::new(|| c4_sweep(&fixture))),
        ("dataset filter thresholds", Box::new(c5_filters)),
        ("split arithmetic", Box::new(c6_split)),
        ("bootstrap degeneracy and determinism", Box::new(c7_bootstrap)),
        ("adapter protocol", Box::new(c8_adapter)),
        ("extract throughput", Box::new(c9_throughput)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
