//! Stand-in abstractive model for tests and demos.
//!
//! Reads `{"id", "input"}` lines on stdin and answers `{"id", "summary"}`
//! with the input echoed back. With `--reverse` it buffers everything and
//! answers in reverse order, exercising out-of-order responses.

use std::io::{BufRead, BufWriter, Write};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Deserialize)]
struct Request {
    id: u64,
    input: String,
}

#[derive(Serialize)]
struct Response {
    id: u64,
    summary: String,
}

fn main() -> Result<()> {
    let reverse = std::env::args().any(|a| a == "--reverse");
    let stdin = std::io::stdin().lock();
    let mut out = BufWriter::new(std::io::stdout().lock());
    let mut pending = Vec::new();
    for line in stdin.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: Request = serde_json::from_str(&line).context("bad request line")?;
        let resp = Response {
            id: req.id,
            summary: req.input,
        };
        if reverse {
            pending.push(resp);
        } else {
            serde_json::to_writer(&mut out, &resp)?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
    }
    for resp in pending.iter().rev() {
        serde_json::to_writer(&mut out, resp)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
