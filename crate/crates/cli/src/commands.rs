use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use leadsum_core::abstractive::{invoke_external, truncate_input, WordCounter};
use leadsum_core::corpus_io::{read_corpus, read_examples, read_wiki, write_json_line, SkippedLine};
use leadsum_core::dataset::{build_dataset, split_dataset, stats_from_sizes, ExampleSizes, SplitRatios};
use leadsum_core::eval::{l_sweep, render_sweep, run_experiment1, score_corpus};
use leadsum_core::extractive::ExtractLine;
use leadsum_core::{DatasetExample, Extractor, ExtractorKind, MalformedPolicy, PipelineConfig, RougeReport};

use crate::io::{self, TextLine};
use crate::{
    AbstractiveArgs, BuildDatasetArgs, Cli, Command, ExperimentArgs, ExtractArgs, Failure, RougeArgs, StatsArgs,
    SweepArgs,
};

/// Examples extracted per parallel batch; bounds memory on large inputs.
const EXTRACT_CHUNK: usize = 512;

struct Ctx {
    config: PipelineConfig,
    policy: MalformedPolicy,
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    let ctx = Ctx {
        config,
        policy: if cli.skip_malformed {
            MalformedPolicy::Skip
        } else {
            MalformedPolicy::Abort
        },
    };
    match cli.command {
        Command::BuildDataset(a) => build(&ctx, a),
        Command::Stats(a) => stats(&ctx, a),
        Command::Extract(a) => extract(&ctx, a),
        Command::Rouge(a) => rouge(a),
        Command::Experiment(a) => experiment(&ctx, a),
        Command::SweepL(a) => sweep(&ctx, a),
        Command::AbstractiveRun(a) => abstractive(&ctx, a),
    }
}

fn report_skipped(path: &Path, skipped: &[SkippedLine]) {
    for s in skipped.iter().take(10) {
        warn!("{}: skipped line {}: {}", path.display(), s.line, s.message);
    }
    if skipped.len() > 10 {
        warn!("{}: skipped {} malformed lines in total", path.display(), skipped.len());
    }
}

fn load_examples(ctx: &Ctx, path: &Path) -> anyhow::Result<Vec<DatasetExample>> {
    let mut reader = read_examples(io::open(path)?, ctx.policy);
    let examples = reader
        .by_ref()
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("reading {}", path.display()))?;
    report_skipped(path, reader.skipped());
    Ok(examples)
}

fn extractor_kind(name: &str) -> Result<ExtractorKind, Failure> {
    name.parse()
        .map_err(|e: leadsum_core::Error| Failure::Usage(e.to_string()))
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> anyhow::Result<usize> {
    let mut w = io::create(path)?;
    let mut n = 0;
    for item in items {
        write_json_line(&mut w, &item)?;
        n += 1;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(n)
}

fn build(ctx: &Ctx, a: BuildDatasetArgs) -> Result<(), Failure> {
    let mut filter = ctx.config.filter;
    filter.max_docs = a.max_docs.unwrap_or(filter.max_docs);
    filter.min_total_input_words = a.min_input_words.unwrap_or(filter.min_total_input_words);
    filter.min_summary_words = a.min_summary_words.unwrap_or(filter.min_summary_words);
    filter.clone_threshold = a.clone_threshold.unwrap_or(filter.clone_threshold);
    if filter.max_docs == 0 {
        return Err(Failure::Usage("--max-docs must be positive".into()));
    }

    let mut wiki_reader = read_wiki(io::open(&a.wiki)?, ctx.policy);
    let wiki = wiki_reader
        .by_ref()
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("reading {}", a.wiki.display()))?;
    report_skipped(&a.wiki, wiki_reader.skipped());

    let mut corpus = read_corpus(io::open(&a.corpus)?, ctx.policy);
    let (examples, report) =
        build_dataset(&wiki, corpus.by_ref(), &filter).with_context(|| format!("reading {}", a.corpus.display()))?;
    report_skipped(&a.corpus, corpus.skipped());

    info!(
        "{} candidates, {} accepted ({} too few input words, {} summary too short, {} without documents, {} clone documents removed)",
        report.candidates,
        report.accepted,
        report.too_few_input_words,
        report.summary_too_short,
        report.no_matching_docs,
        report.clone_docs_removed
    );
    write_lines(&a.out, &examples)?;

    if let Some(dir) = &a.split_dir {
        let seed = a.seed.unwrap_or(ctx.config.seed);
        let split = split_dataset(examples, SplitRatios::default(), seed)?;
        for (name, part) in [
            ("train", &split.train),
            ("validation", &split.validation),
            ("test", &split.test),
        ] {
            write_lines(&dir.join(format!("{name}.jsonl")), part.iter())?;
            info!("{name}: {} examples", part.len());
        }
    }
    Ok(())
}

fn stats(ctx: &Ctx, a: StatsArgs) -> Result<(), Failure> {
    let mut reader = read_examples(io::open(&a.dataset)?, ctx.policy);
    let mut error = None;
    // stream: sizes only, never the whole dataset
    let stats = stats_from_sizes(reader.by_ref().map_while(|r| match r {
        Ok(ex) => Some(ExampleSizes::of(&ex)),
        Err(e) => {
            error = Some(e);
            None
        }
    }));
    if let Some(e) = error {
        return Err(anyhow::Error::from(e)
            .context(format!("reading {}", a.dataset.display()))
            .into());
    }
    report_skipped(&a.dataset, reader.skipped());
    let stats = stats?;
    if let Some(out) = &a.out {
        io::write_json(out, &stats)?;
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&stats).map_err(anyhow::Error::from)?);
    } else {
        println!("{}", stats.to_string().trim_end());
    }
    Ok(())
}

fn extract(ctx: &Ctx, a: ExtractArgs) -> Result<(), Failure> {
    let kind = extractor_kind(&a.extractor)?;
    let l = a.l.unwrap_or(ctx.config.l);
    let extractor = Extractor::new(kind)
        .with_seed(a.seed.unwrap_or(ctx.config.seed))
        .with_target_words(a.target_words.unwrap_or(ctx.config.target_words));
    if extractor.target_words == 0 {
        return Err(Failure::Usage("--target-words must be positive".into()));
    }

    let mut reader = read_examples(io::open(&a.dataset)?, ctx.policy);
    let mut out = io::create(&a.out)?;
    let mut chunk: Vec<DatasetExample> = Vec::with_capacity(EXTRACT_CHUNK);
    let mut done = 0u64;
    let mut flush = |chunk: &mut Vec<DatasetExample>, done: &mut u64| -> anyhow::Result<()> {
        let base = *done;
        let lines: Vec<ExtractLine> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, ex)| extractor.extract(ex, l, base + i as u64).map(|r| r.to_line()))
            .collect::<Result<_, _>>()?;
        for line in &lines {
            write_json_line(&mut out, line)?;
        }
        *done += chunk.len() as u64;
        chunk.clear();
        Ok(())
    };
    for ex in reader.by_ref() {
        chunk.push(ex.with_context(|| format!("reading {}", a.dataset.display()))?);
        if chunk.len() == EXTRACT_CHUNK {
            flush(&mut chunk, &mut done)?;
        }
    }
    flush(&mut chunk, &mut done)?;
    out.flush().with_context(|| format!("writing {}", a.out.display()))?;
    report_skipped(&a.dataset, reader.skipped());
    info!("{} extracts written with {} at L={l}", done, kind.name());
    Ok(())
}

#[derive(Serialize)]
struct RougeLine<'a> {
    title: Option<&'a str>,
    #[serde(flatten)]
    scores: &'a RougeReport,
}

fn rouge(a: RougeArgs) -> Result<(), Failure> {
    let predictions = io::read_text_lines(&a.predictions)?;
    let targets = io::read_text_lines(&a.targets)?;
    if predictions.len() != targets.len() {
        return Err(anyhow!(
            "{} has {} lines but {} has {}",
            a.predictions.display(),
            predictions.len(),
            a.targets.display(),
            targets.len()
        )
        .into());
    }
    if predictions.is_empty() {
        return Err(anyhow!("no predictions in {}", a.predictions.display()).into());
    }
    let pairs: Vec<(&str, &str)> = predictions
        .iter()
        .zip(&targets)
        .map(|(p, t)| (&*p.text, &*t.text))
        .collect();
    let scores = score_corpus(&pairs)?;
    fn pick(l: &TextLine) -> Option<&str> {
        l.title.as_deref()
    }
    let title = |i: usize| pick(&predictions[i]).or_else(|| pick(&targets[i]));
    write_lines(
        &a.out,
        scores.per_example.iter().enumerate().map(|(i, s)| RougeLine {
            title: title(i),
            scores: s,
        }),
    )?;
    let m = &scores.mean;
    println!("examples  {}", pairs.len());
    for (name, s) in [("ROUGE-1", &m.r1), ("ROUGE-2", &m.r2), ("ROUGE-L", &m.rl)] {
        println!(
            "{name}   P {:.2}  R {:.2}  F {:.2}",
            100.0 * s.precision,
            100.0 * s.recall,
            100.0 * s.f1
        );
    }
    Ok(())
}

fn experiment(ctx: &Ctx, a: ExperimentArgs) -> Result<(), Failure> {
    let examples = load_examples(ctx, &a.dataset)?;
    let mut bootstrap = ctx.config.bootstrap();
    bootstrap.n_resamples = a.n_resamples.unwrap_or(bootstrap.n_resamples);
    if bootstrap.n_resamples == 0 {
        return Err(Failure::Usage("--n-resamples must be positive".into()));
    }
    let table = run_experiment1(
        &examples,
        a.l.unwrap_or(ctx.config.l),
        a.seed.unwrap_or(ctx.config.seed),
        a.target_words.unwrap_or(ctx.config.target_words),
        bootstrap,
    )?;
    if let Some(out) = &a.out {
        io::write_json(out, &table)?;
    }
    println!("{}", table.to_string().trim_end());
    Ok(())
}

fn sweep(ctx: &Ctx, a: SweepArgs) -> Result<(), Failure> {
    let kind = extractor_kind(&a.extractor)?;
    if a.l_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage("--l-values must be strictly increasing".into()));
    }
    let examples = load_examples(ctx, &a.dataset)?;
    let extractor = Extractor::new(kind)
        .with_seed(a.seed.unwrap_or(ctx.config.seed))
        .with_target_words(a.target_words.unwrap_or(ctx.config.target_words));
    let points = l_sweep(&examples, &extractor, &a.l_values)?;
    if let Some(out) = &a.out {
        io::write_json(out, &points)?;
    }
    print!("{}", render_sweep(&points));
    Ok(())
}

#[derive(Serialize)]
struct AbstractiveLine<'a> {
    title: &'a str,
    input: &'a str,
    #[serde(flatten)]
    summary: &'a leadsum_core::Summary,
}

fn abstractive(ctx: &Ctx, a: AbstractiveArgs) -> Result<(), Failure> {
    let mut config = ctx.config.abstractive.clone();
    if let Some(c) = a.command {
        config.command = c;
    }
    config.max_input_tokens = a.j.unwrap_or(config.max_input_tokens);
    config.k_max = a.k_max.unwrap_or(config.k_max);
    config.k_min = a.k_min.unwrap_or(config.k_min);
    if config.command.trim().is_empty() {
        return Err(Failure::Usage(
            "no model command given (--command or abstractive.command)".into(),
        ));
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let mut lines = Vec::new();
    for (n, line) in std::io::BufRead::lines(io::open(&a.extracts)?).enumerate() {
        let line = line.with_context(|| format!("reading {}", a.extracts.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ExtractLine>(&line) {
            Ok(l) => lines.push(l),
            Err(e) if ctx.policy == MalformedPolicy::Skip => {
                warn!("{}: skipped line {}: {e}", a.extracts.display(), n + 1)
            }
            Err(e) => return Err(anyhow!("{}: line {}: {e}", a.extracts.display(), n + 1).into()),
        }
    }
    let inputs: Vec<String> = lines
        .par_iter()
        .map(|l| truncate_input(&l.assembled, config.max_input_tokens, &WordCounter))
        .collect::<Result<_, _>>()?;
    let summaries = invoke_external(&config, &inputs)?;
    let flagged = summaries.iter().filter(|s| s.violation.is_some()).count();
    write_lines(
        &a.out,
        lines
            .iter()
            .zip(&inputs)
            .zip(&summaries)
            .map(|((l, input), summary)| AbstractiveLine {
                title: &l.title,
                input,
                summary,
            }),
    )?;
    info!(
        "{} summaries written, {flagged} outside [{}, {}] tokens",
        summaries.len(),
        config.k_min,
        config.k_max
    );
    Ok(())
}
