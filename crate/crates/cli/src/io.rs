use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::with_capacity(1 << 20, file))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::with_capacity(1 << 20, file))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

/// One scored text from a predictions or targets file.
#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    pub title: Option<String>,
    pub text: String,
}

/// Reads line-aligned texts. A line holding a JSON object contributes its
/// `text`, `summary` or (title and separators removed) `assembled` field;
/// any other line is taken verbatim.
pub fn read_text_lines(path: &Path) -> Result<Vec<TextLine>> {
    let mut out = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line.with_context(|| format!("{}: line {}", path.display(), n + 1))?;
        out.push(parse_text_line(&line));
    }
    // a trailing newline is not an extra empty prediction
    while out
        .last()
        .is_some_and(|l: &TextLine| l.title.is_none() && l.text.is_empty())
    {
        out.pop();
    }
    Ok(out)
}

fn parse_text_line(line: &str) -> TextLine {
    let trimmed = line.trim();
    if trimmed.starts_with('{') {
        if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(trimmed) {
            let title = map.get("title").and_then(|v| v.as_str()).map(str::to_owned);
            let field = |k: &str| map.get(k).and_then(|v| v.as_str());
            let text = field("text")
                .or_else(|| field("summary"))
                .map(str::to_owned)
                .or_else(|| field("assembled").map(leadsum_core::extractive::strip_title_and_separators));
            if let Some(text) = text {
                return TextLine { title, text };
            }
        }
    }
    TextLine {
        title: None,
        text: line.to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_plain_lines() {
        assert_eq!(
            parse_text_line(r#"{"title": "T", "text": "abc"}"#),
            TextLine {
                title: Some("T".into()),
                text: "abc".into()
            }
        );
        assert_eq!(
            parse_text_line(r#"{"title": "T", "assembled": "t [SEP] a [SEP] b"}"#).text,
            "a b"
        );
        assert_eq!(parse_text_line(r#"{"summary": "s", "docs": []}"#).text, "s");
        assert_eq!(parse_text_line("{not json").text, "{not json");
        assert_eq!(parse_text_line("plain text").title, None);
    }
}
