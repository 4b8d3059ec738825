//! The on-disk corpus format: three or four parallel text files, UTF-8
//! with LF line endings, line i of every file describing the same example.
//! Suffixes are `.decl`, `.bodies`, `.docstring` (parallel corpora only)
//! and `.metadata`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pycorpus_core::extract::FunctionRecord;
use pycorpus_core::serialize::{record_to_triple, unescape_body, CorpusTriple, SerializeError};

pub const DECL_SUFFIX: &str = "decl";
pub const BODIES_SUFFIX: &str = "bodies";
pub const DOCSTRING_SUFFIX: &str = "docstring";
pub const METADATA_SUFFIX: &str = "metadata";
pub const PROVENANCE_SUFFIX: &str = "provenance";

/// Paths of one corpus's aligned files. `docstring_path` is absent for
/// code-only corpora.
#[derive(Debug, Clone)]
pub struct CorpusFiles {
    pub decl_path: PathBuf,
    pub body_path: PathBuf,
    pub docstring_path: Option<PathBuf>,
    pub metadata_path: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(
        "aligned corpus files disagree: {} has {} lines but {} has {}",
        first.display(), first_lines, second.display(), second_lines
    )]
    Misaligned {
        first: PathBuf,
        first_lines: usize,
        second: PathBuf,
        second_lines: usize,
    },
    #[error("{path}:{line}: {source}")]
    BadLine {
        path: PathBuf,
        line: usize,
        source: SerializeError,
    },
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    base.with_file_name(name)
}

impl CorpusFiles {
    /// Derive file paths from a base path like `out/parallel`.
    pub fn at_base(base: &Path, with_docstrings: bool) -> Self {
        CorpusFiles {
            decl_path: with_suffix(base, DECL_SUFFIX),
            body_path: with_suffix(base, BODIES_SUFFIX),
            docstring_path: with_docstrings.then(|| with_suffix(base, DOCSTRING_SUFFIX)),
            metadata_path: with_suffix(base, METADATA_SUFFIX),
        }
    }

    /// Like [`CorpusFiles::at_base`], treating the docstring file as
    /// present only when it exists on disk.
    pub fn detect(base: &Path) -> Self {
        let docstring = with_suffix(base, DOCSTRING_SUFFIX);
        CorpusFiles {
            decl_path: with_suffix(base, DECL_SUFFIX),
            body_path: with_suffix(base, BODIES_SUFFIX),
            docstring_path: docstring.exists().then_some(docstring),
            metadata_path: with_suffix(base, METADATA_SUFFIX),
        }
    }

    pub fn has_docstrings(&self) -> bool {
        self.docstring_path.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WriteReport {
    pub written: usize,
    pub dropped_marker_collisions: usize,
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.lines().map(str::to_string).collect())
}

/// An output file written to a temporary sibling and renamed into place on
/// success, so interrupted runs never leave truncated corpora behind.
pub struct AtomicFile {
    tmp: tempfile::NamedTempFile,
    target: PathBuf,
}

impl AtomicFile {
    pub fn create(target: &Path) -> Result<Self, CorpusError> {
        let dir = target.parent().unwrap_or_else(|| Path::new("."));
        fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|source| CorpusError::Io {
            path: target.to_path_buf(),
            source,
        })?;
        Ok(AtomicFile {
            tmp,
            target: target.to_path_buf(),
        })
    }

    pub fn write_line(&mut self, line: &str) -> Result<(), CorpusError> {
        self.tmp
            .write_all(line.as_bytes())
            .and_then(|_| self.tmp.write_all(b"\n"))
            .map_err(|source| CorpusError::Io {
                path: self.target.clone(),
                source,
            })
    }

    pub fn commit(self) -> Result<(), CorpusError> {
        self.tmp
            .persist(&self.target)
            .map(|_| ())
            .map_err(|e| CorpusError::Io {
                path: self.target.clone(),
                source: e.error,
            })
    }
}

/// Write whole files atomically: every target is fully staged before any
/// rename happens.
pub fn write_text_file(target: &Path, content: &str) -> Result<(), CorpusError> {
    let mut f = AtomicFile::create(target)?;
    f.tmp
        .write_all(content.as_bytes())
        .map_err(|source| CorpusError::Io {
            path: target.to_path_buf(),
            source,
        })?;
    f.commit()
}

/// Serialize records into corpus files, preserving input order. Records
/// whose source collides with the marker tokens are dropped and counted.
pub fn write_corpus<'a>(
    records: impl IntoIterator<Item = &'a FunctionRecord>,
    out: &CorpusFiles,
    metadata_prefix: &str,
) -> Result<WriteReport, CorpusError> {
    let mut triples = Vec::new();
    let mut report = WriteReport::default();
    for record in records {
        match record_to_triple(record, metadata_prefix) {
            Ok(t) => triples.push(t),
            Err(SerializeError::MarkerCollision(_)) => report.dropped_marker_collisions += 1,
            Err(e) => {
                return Err(CorpusError::BadLine {
                    path: out.decl_path.clone(),
                    line: report.written + 1,
                    source: e,
                })
            }
        }
    }
    report.written = triples.len();
    write_triples(&triples, out)?;
    Ok(report)
}

/// Write pre-serialized triples, preserving order.
pub fn write_triples(triples: &[CorpusTriple], out: &CorpusFiles) -> Result<(), CorpusError> {
    let mut decl = AtomicFile::create(&out.decl_path)?;
    let mut body = AtomicFile::create(&out.body_path)?;
    let mut meta = AtomicFile::create(&out.metadata_path)?;
    let mut doc = out
        .docstring_path
        .as_ref()
        .map(|p| AtomicFile::create(p))
        .transpose()?;
    for t in triples {
        decl.write_line(&t.decl_line)?;
        body.write_line(&t.body_line)?;
        meta.write_line(&t.metadata_line)?;
        if let Some(doc) = doc.as_mut() {
            doc.write_line(t.docstring_line.as_deref().unwrap_or_default())?;
        }
    }
    decl.commit()?;
    body.commit()?;
    meta.commit()?;
    if let Some(doc) = doc {
        doc.commit()?;
    }
    Ok(())
}

/// Read and validate a corpus: equal line counts across files and
/// well-formed marker grammar in every declaration and body line.
pub fn read_corpus(files: &CorpusFiles) -> Result<Vec<CorpusTriple>, CorpusError> {
    let decls = read_lines(&files.decl_path)?;
    let bodies = read_lines(&files.body_path)?;
    let metas = read_lines(&files.metadata_path)?;
    let docs = files
        .docstring_path
        .as_ref()
        .map(|p| read_lines(p))
        .transpose()?;

    let check = |other: &Path, n: usize| -> Result<(), CorpusError> {
        if n != decls.len() {
            return Err(CorpusError::Misaligned {
                first: files.decl_path.clone(),
                first_lines: decls.len(),
                second: other.to_path_buf(),
                second_lines: n,
            });
        }
        Ok(())
    };
    check(&files.body_path, bodies.len())?;
    check(&files.metadata_path, metas.len())?;
    if let (Some(d), Some(p)) = (&docs, &files.docstring_path) {
        check(p, d.len())?;
    }

    let mut out = Vec::with_capacity(decls.len());
    for (i, ((decl_line, body_line), metadata_line)) in
        decls.into_iter().zip(bodies).zip(metas).enumerate()
    {
        for (line, path) in [
            (&decl_line, &files.decl_path),
            (&body_line, &files.body_path),
        ] {
            unescape_body(line).map_err(|source| CorpusError::BadLine {
                path: path.clone(),
                line: i + 1,
                source,
            })?;
        }
        let docstring_line = docs.as_ref().map(|d| d[i].clone()).filter(|s| !s.is_empty());
        out.push(CorpusTriple {
            decl_line,
            body_line,
            metadata_line,
            docstring_line,
        });
    }
    Ok(out)
}
