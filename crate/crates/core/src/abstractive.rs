//! Adapter to an external abstractive model run as a child process.
//!
//! Requests go to the child's stdin as `{"id": <int>, "input": "<str>"}`
//! lines; the child answers on stdout with `{"id": <int>, "summary": "<str>"}`
//! lines in any order and signals completion by closing stdout.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::process::{Command, Stdio};
use std::thread;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::count_words;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AbstractiveConfig {
    /// Maximum input tokens handed to the model.
    pub max_input_tokens: usize,
    pub k_max: usize,
    pub k_min: usize,
    /// Program and arguments, shell-quoted.
    pub command: String,
}

impl Default for AbstractiveConfig {
    fn default() -> Self {
        Self {
            max_input_tokens: 768,
            k_max: 256,
            k_min: 20,
            command: String::new(),
        }
    }
}

impl AbstractiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_input_tokens == 0 {
            return Err(Error::invalid("J must be positive"));
        }
        if !(0 < self.k_min && self.k_min < self.k_max) {
            return Err(Error::invalid(format!(
                "output bounds must satisfy 0 < K_min < K_max, got {} and {}",
                self.k_min, self.k_max
            )));
        }
        Ok(())
    }
}

/// Counts model input tokens. Counts must not decrease as a string grows
/// by whole whitespace-delimited pieces.
pub trait TokenCounter {
    fn count(&self, text: &str) -> usize;
}

/// Word tokens as produced by [`crate::text::tokenize_words`].
#[derive(Debug, Clone, Copy, Default)]
pub struct WordCounter;

impl TokenCounter for WordCounter {
    fn count(&self, text: &str) -> usize {
        count_words(text)
    }
}

impl<F: Fn(&str) -> usize> TokenCounter for F {
    fn count(&self, text: &str) -> usize {
        self(text)
    }
}

/// Longest whitespace-boundary prefix of `assembled` with at most
/// `max_tokens` tokens. Fails when the title (text before the first
/// separator) alone does not fit.
pub fn truncate_input<C: TokenCounter + ?Sized>(assembled: &str, max_tokens: usize, counter: &C) -> Result<String> {
    if max_tokens == 0 {
        return Err(Error::invalid("J must be positive"));
    }
    let title = assembled.split_once(" [SEP] ").map_or("", |(t, _)| t);
    let title_tokens = counter.count(title);
    if title_tokens > max_tokens {
        return Err(Error::invalid(format!(
            "J = {max_tokens} is smaller than the title's {title_tokens} tokens"
        )));
    }
    if counter.count(assembled) <= max_tokens {
        return Ok(assembled.to_owned());
    }
    // End offsets of each whitespace-delimited piece.
    let ends: Vec<usize> = assembled
        .char_indices()
        .zip(assembled.chars().skip(1).map(Some).chain(std::iter::once(None)))
        .filter(|((_, c), next)| !c.is_whitespace() && next.is_none_or(char::is_whitespace))
        .map(|((i, c), _)| i + c.len_utf8())
        .collect();
    // Binary search for the last end whose prefix still fits.
    let (mut lo, mut hi) = (0usize, ends.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if counter.count(&assembled[..ends[mid - 1]]) <= max_tokens {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(if lo == 0 {
        String::new()
    } else {
        assembled[..ends[lo - 1]].trim_start().to_owned()
    })
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    id: usize,
    input: &'a str,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: usize,
    summary: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthViolation {
    TooShort,
    TooLong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub id: usize,
    pub summary: String,
    pub tokens: usize,
    pub violation: Option<LengthViolation>,
}

/// Sends every input to the configured command and collects one summary
/// per input, in input order. Summaries outside `[k_min, k_max]` tokens are
/// flagged and logged, not rejected.
pub fn invoke_external<S: AsRef<str>>(config: &AbstractiveConfig, inputs: &[S]) -> Result<Vec<Summary>> {
    invoke_external_with(config, inputs, &WordCounter)
}

pub fn invoke_external_with<S, C>(config: &AbstractiveConfig, inputs: &[S], counter: &C) -> Result<Vec<Summary>>
where
    S: AsRef<str>,
    C: TokenCounter + ?Sized,
{
    config.validate()?;
    let argv = shlex::split(&config.command)
        .filter(|a| !a.is_empty())
        .ok_or_else(|| Error::invalid(format!("cannot parse command {:?}", config.command)))?;
    debug!("spawning {argv:?} for {} inputs", inputs.len());
    let mut child = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::External(format!("cannot launch {:?}: {e}", argv[0])))?;

    let mut payload = Vec::new();
    for (id, input) in inputs.iter().enumerate() {
        serde_json::to_writer(
            &mut payload,
            &Request {
                id,
                input: input.as_ref(),
            },
        )
        .map_err(std::io::Error::from)?;
        payload.push(b'\n');
    }

    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");

    let (responses, diagnostics, written) = thread::scope(|scope| {
        let writer = scope.spawn(move || -> std::io::Result<()> {
            let mut w = BufWriter::new(stdin);
            w.write_all(&payload)?;
            w.flush()
            // dropping closes the child's stdin
        });
        let err_reader = scope.spawn(move || {
            let mut buf = String::new();
            let _ = stderr.read_to_string(&mut buf);
            buf
        });
        let mut responses = Vec::new();
        let mut read_error = None;
        for (n, line) in BufReader::new(stdout).lines().enumerate() {
            match line {
                Ok(line) if line.trim().is_empty() => {}
                // keep draining after a bad line so the child never blocks
                Ok(line) => match serde_json::from_str::<Response>(&line) {
                    Ok(r) => responses.push(r),
                    Err(e) if read_error.is_none() => {
                        read_error = Some(Error::External(format!("response line {}: {e}", n + 1)));
                    }
                    Err(_) => {}
                },
                Err(e) => {
                    read_error = Some(e.into());
                    break;
                }
            }
        }
        let written = writer.join().expect("writer thread");
        let diagnostics = err_reader.join().expect("stderr thread");
        (read_error.map_or(Ok(responses), Err), diagnostics, written)
    });

    let status = child.wait()?;
    if !status.success() {
        return Err(Error::External(format!(
            "child exited with {status}; stderr: {}",
            diagnostics.trim()
        )));
    }
    let responses = responses?;
    if let Err(e) = written {
        return Err(Error::External(format!("writing to child failed: {e}")));
    }

    let mut by_id: HashMap<usize, String> = HashMap::with_capacity(responses.len());
    for r in responses {
        if r.id >= inputs.len() {
            return Err(Error::External(format!("child answered unknown id {}", r.id)));
        }
        if by_id.insert(r.id, r.summary).is_some() {
            return Err(Error::External(format!("child answered id {} twice", r.id)));
        }
    }
    (0..inputs.len())
        .map(|id| {
            let summary = by_id
                .remove(&id)
                .ok_or_else(|| Error::External(format!("child gave no summary for id {id}")))?;
            let tokens = counter.count(&summary);
            let violation = if tokens < config.k_min {
                Some(LengthViolation::TooShort)
            } else if tokens > config.k_max {
                Some(LengthViolation::TooLong)
            } else {
                None
            };
            if let Some(v) = violation {
                warn!(
                    "summary {id} has {tokens} tokens, outside [{}, {}] ({v:?})",
                    config.k_min, config.k_max
                );
            }
            Ok(Summary {
                id,
                summary,
                tokens,
                violation,
            })
        })
        .collect()
}
