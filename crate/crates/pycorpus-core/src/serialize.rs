//! Reversible one-line serialization of function records.
//!
//! A multi-line code fragment becomes a single corpus line: one `DCSP`
//! token per logical indentation level, lines joined with `DCNL`, all
//! tokens single-space separated. Docstrings are cleaned (empty and
//! non-alphanumeric lines dropped, whitespace runs collapsed) and wrapped
//! as single-quoted literals.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::extract::FunctionRecord;
use crate::pyparse::Line;

/// Newline marker token.
pub const DCNL: &str = "DCNL";
/// One-indentation-level marker token.
pub const DCSP: &str = "DCSP";

/// One serialized example: the line-aligned corpus form of a record.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorpusTriple {
    pub decl_line: String,
    pub docstring_line: Option<String>,
    pub body_line: String,
    pub metadata_line: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SerializeError {
    #[error("malformed body line: {0}")]
    MalformedLine(String),
    #[error("source contains a reserved marker token ({0})")]
    MarkerCollision(&'static str),
}

/// Escape canonical lines into a single corpus line.
pub fn escape_body(lines: &[Line]) -> String {
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        if i > 0 {
            out.push_str(" ");
            out.push_str(DCNL);
            out.push_str(" ");
        }
        for _ in 0..line.indent {
            out.push_str(DCSP);
            out.push_str(" ");
        }
        out.push_str(&line.text);
    }
    out
}

/// Exact inverse of [`escape_body`]: split on `DCNL` tokens, count leading
/// `DCSP` tokens per segment, rejoin the rest with single spaces.
pub fn unescape_body(body_line: &str) -> Result<Vec<Line>, SerializeError> {
    let mut lines = Vec::new();
    for segment in split_marker(body_line) {
        let mut indent = 0usize;
        let mut text_tokens: Vec<&str> = Vec::new();
        for tok in segment.split_whitespace() {
            if tok == DCSP {
                if !text_tokens.is_empty() {
                    return Err(SerializeError::MalformedLine(format!(
                        "{} marker after line content in segment {:?}",
                        DCSP, segment
                    )));
                }
                indent += 1;
            } else {
                text_tokens.push(tok);
            }
        }
        if text_tokens.is_empty() {
            return Err(SerializeError::MalformedLine(format!(
                "empty line segment {:?}",
                segment
            )));
        }
        lines.push(Line::new(indent, text_tokens.join(" ")));
    }
    Ok(lines)
}

/// Split a body line on standalone `DCNL` tokens.
fn split_marker(line: &str) -> Vec<String> {
    let mut segments = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for tok in line.split_whitespace() {
        if tok == DCNL {
            segments.push(cur.join(" "));
            cur.clear();
        } else {
            cur.push(tok);
        }
    }
    segments.push(cur.join(" "));
    segments
}

/// Clean a raw docstring into its single-line quoted corpus form. Returns
/// `None` when no line with an alphanumeric character survives.
pub fn clean_docstring(docstring_raw: &str) -> Option<String> {
    let mut kept: Vec<String> = Vec::new();
    for raw_line in docstring_raw.split('\n') {
        let collapsed = raw_line.split_whitespace().collect::<Vec<_>>().join(" ");
        if collapsed.chars().any(|c| c.is_alphanumeric()) {
            kept.push(collapsed);
        }
    }
    if kept.is_empty() {
        return None;
    }
    let joined = kept.join(&format!(" {} ", DCNL));
    let mut out = String::with_capacity(joined.len() + 2);
    out.push('\'');
    for c in joined.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            _ => out.push(c),
        }
    }
    out.push('\'');
    Some(out)
}

fn has_marker_token(text: &str) -> Option<&'static str> {
    for tok in text.split_whitespace() {
        if tok == DCNL {
            return Some(DCNL);
        }
        if tok == DCSP {
            return Some(DCSP);
        }
    }
    None
}

/// Serialize a record. Fails when the source itself contains a standalone
/// `DCNL`/`DCSP` token, which would make the escaping ambiguous; callers
/// drop and count such records.
pub fn record_to_triple(
    record: &FunctionRecord,
    metadata_prefix: &str,
) -> Result<CorpusTriple, SerializeError> {
    for line in record.decl_lines.iter().chain(&record.body_lines) {
        if let Some(m) = has_marker_token(&line.text) {
            return Err(SerializeError::MarkerCollision(m));
        }
    }
    if let Some(ds) = &record.docstring_raw {
        if let Some(m) = has_marker_token(ds) {
            return Err(SerializeError::MarkerCollision(m));
        }
    }
    Ok(CorpusTriple {
        decl_line: escape_body(&record.decl_lines),
        docstring_line: record.docstring_raw.as_deref().and_then(clean_docstring),
        body_line: escape_body(&record.body_lines),
        metadata_line: format!(
            "{}/{}/{}/{} {}",
            metadata_prefix, record.owner, record.repo, record.rel_path, record.line
        ),
    })
}

/// Rebuild parseable function source from a serialized declaration and
/// body, for round-trip checking.
pub fn reassemble_source(decl_line: &str, body_line: &str) -> Result<String, SerializeError> {
    let mut lines = unescape_body(decl_line)?;
    lines.extend(unescape_body(body_line)?);
    Ok(crate::pyparse::render_source(&lines))
}

impl CorpusTriple {
    /// Dedup key: the serialized content without provenance.
    pub fn content_key(&self) -> (String, Option<String>, String) {
        (
            self.decl_line.clone(),
            self.docstring_line.clone(),
            self.body_line.clone(),
        )
    }
}
