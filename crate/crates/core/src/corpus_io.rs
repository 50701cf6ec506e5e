//! Line-delimited JSON readers and writers for corpus and dataset files.
//!
//! Corpus lines: `{"docid", "url", "title", "text"}`.
//! Dataset lines: `{"title", "summary", "docs": [...]}`.
//! Wiki lines (dataset builder input): `{"title", "summary"}`.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub docid: String,
    pub url: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetExample {
    pub title: String,
    pub summary: String,
    pub docs: Vec<String>,
}

/// A Wikipedia title with its lead section, before documents are attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiEntry {
    pub title: String,
    pub summary: String,
}

/// What to do with a line that fails to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MalformedPolicy {
    /// Stop with an error carrying the line number.
    #[default]
    Abort,
    /// Log a warning with the line number and continue.
    Skip,
}

/// A line that was skipped under [`MalformedPolicy::Skip`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub message: String,
}

fn object_on_line(raw: &str, line: usize) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(raw) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::MalformedLine {
            line,
            message: "expected a JSON object".into(),
        }),
        Err(e) => Err(Error::MalformedLine {
            line,
            message: e.to_string(),
        }),
    }
}

fn take_string(map: &mut Map<String, Value>, key: &'static str, line: usize) -> Result<String> {
    match map.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Error::MalformedLine {
            line,
            message: format!("key {key} must be a string"),
        }),
        None => Err(Error::MissingKey { line, key }),
    }
}

fn take_string_list(map: &mut Map<String, Value>, key: &'static str, line: usize) -> Result<Vec<String>> {
    let bad = || Error::MalformedLine {
        line,
        message: format!("key {key} must be a list of strings"),
    };
    match map.remove(key) {
        Some(Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                Value::String(s) => Ok(s),
                _ => Err(bad()),
            })
            .collect(),
        Some(_) => Err(bad()),
        None => Err(Error::MissingKey { line, key }),
    }
}

/// Shared line loop: skips blank lines, tracks 1-based line numbers and
/// applies the malformed-line policy.
struct JsonLines<R> {
    reader: R,
    buf: String,
    line: usize,
    policy: MalformedPolicy,
    skipped: Vec<SkippedLine>,
    done: bool,
}

impl<R: BufRead> JsonLines<R> {
    fn new(reader: R, policy: MalformedPolicy) -> Self {
        Self {
            reader,
            buf: String::new(),
            line: 0,
            policy,
            skipped: Vec::new(),
            done: false,
        }
    }

    fn next_with<T>(&mut self, parse: impl Fn(&str, usize) -> Result<T>) -> Option<Result<T>> {
        if self.done {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
            self.line += 1;
            let raw = self.buf.trim();
            if raw.is_empty() {
                continue;
            }
            match parse(raw, self.line) {
                Ok(v) => return Some(Ok(v)),
                Err(e @ (Error::MalformedLine { .. } | Error::MissingKey { .. }))
                    if self.policy == MalformedPolicy::Skip =>
                {
                    warn!("skipping {e}");
                    self.skipped.push(SkippedLine {
                        line: self.line,
                        message: e.to_string(),
                    });
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Streaming corpus reader. Holds only the set of docids seen so far.
pub struct CorpusReader<R> {
    lines: JsonLines<R>,
    seen: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    /// Lines that were skipped so far under [`MalformedPolicy::Skip`].
    pub fn skipped(&self) -> &[SkippedLine] {
        &self.lines.skipped
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<CorpusRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let record = self.lines.next_with(|raw, line| {
            let mut map = object_on_line(raw, line)?;
            Ok(CorpusRecord {
                docid: take_string(&mut map, "docid", line)?,
                url: take_string(&mut map, "url", line)?,
                title: take_string(&mut map, "title", line)?,
                text: take_string(&mut map, "text", line)?,
            })
        })?;
        Some(record.and_then(|r| {
            if r.docid.is_empty() {
                return Err(Error::MalformedLine {
                    line: self.lines.line,
                    message: "empty docid".into(),
                });
            }
            if !self.seen.insert(r.docid.clone()) {
                self.lines.done = true;
                return Err(Error::DuplicateDocId(r.docid));
            }
            Ok(r)
        }))
    }
}

pub fn read_corpus<R: BufRead>(reader: R, policy: MalformedPolicy) -> CorpusReader<R> {
    CorpusReader {
        lines: JsonLines::new(reader, policy),
        seen: HashSet::new(),
    }
}

pub struct ExampleReader<R> {
    lines: JsonLines<R>,
}

impl<R: BufRead> ExampleReader<R> {
    pub fn skipped(&self) -> &[SkippedLine] {
        &self.lines.skipped
    }
}

impl<R: BufRead> Iterator for ExampleReader<R> {
    type Item = Result<DatasetExample>;

    fn next(&mut self) -> Option<Self::Item> {
        self.lines.next_with(|raw, line| {
            let mut map = object_on_line(raw, line)?;
            Ok(DatasetExample {
                title: take_string(&mut map, "title", line)?,
                summary: take_string(&mut map, "summary", line)?,
                docs: take_string_list(&mut map, "docs", line)?,
            })
        })
    }
}

pub fn read_examples<R: BufRead>(reader: R, policy: MalformedPolicy) -> ExampleReader<R> {
    ExampleReader {
        lines: JsonLines::new(reader, policy),
    }
}

pub struct WikiReader<R> {
    lines: JsonLines<R>,
}

impl<R: BufRead> WikiReader<R> {
    pub fn skipped(&self) -> &[SkippedLine] {
        &self.lines.skipped
    }
}

impl<R: BufRead> Iterator for WikiReader<R> {
    type Item = Result<WikiEntry>;

    fn next(&mut self) -> Option<Self::Item> {
        self.lines.next_with(|raw, line| {
            let mut map = object_on_line(raw, line)?;
            Ok(WikiEntry {
                title: take_string(&mut map, "title", line)?,
                summary: take_string(&mut map, "summary", line)?,
            })
        })
    }
}

pub fn read_wiki<R: BufRead>(reader: R, policy: MalformedPolicy) -> WikiReader<R> {
    WikiReader {
        lines: JsonLines::new(reader, policy),
    }
}

/// Writes any serializable value as one JSON line.
pub fn write_json_line<W: Write, T: Serialize + ?Sized>(sink: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *sink, value).map_err(std::io::Error::from)?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn write_examples<'a, W, I>(sink: &mut W, examples: I) -> Result<usize>
where
    W: Write,
    I: IntoIterator<Item = &'a DatasetExample>,
{
    let mut n = 0;
    for example in examples {
        write_json_line(sink, example)?;
        n += 1;
    }
    Ok(n)
}
