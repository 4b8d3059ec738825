//! Repository tree scanning: walk `root/<owner>/<repo>/**/*.py`, parse
//! each file, extract top-level functions, and route records by docstring
//! presence. Output order is deterministic regardless of filesystem order:
//! lexicographic by (owner, repo, rel_path), then by line within a file.

use std::fs;
use std::path::{Path, PathBuf};

use pycorpus_core::extract::{extract_functions, FunctionRecord, Provenance};
use pycorpus_core::pyparse::{parse_module_bytes, ParseFailure};
use pycorpus_core::serialize::clean_docstring;
use walkdir::WalkDir;

#[derive(Debug, Default)]
pub struct ScanReport {
    pub files_seen: usize,
    pub parse_failures: Vec<ParseFailure>,
    pub read_failures: Vec<(PathBuf, String)>,
    /// Files not matching the owner/repo layout (too shallow).
    pub skipped_layout: usize,
    /// Functions dropped because they use `print` as a name under the
    /// print-function future, which cannot re-parse standalone.
    pub skipped_print_name: usize,
    pub functions_total: usize,
}

#[derive(Debug)]
pub struct ScanOutput {
    pub parallel: Vec<FunctionRecord>,
    pub code_only: Vec<FunctionRecord>,
    pub report: ScanReport,
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("scan root {0} is not a readable directory")]
    BadRoot(PathBuf),
}

fn provenance_for(root: &Path, file: &Path) -> Option<Provenance> {
    let rel = file.strip_prefix(root).ok()?;
    let mut parts = rel.iter();
    let owner = parts.next()?.to_str()?.to_string();
    let repo = parts.next()?.to_str()?.to_string();
    let rest: Vec<&str> = parts.map(|p| p.to_str()).collect::<Option<_>>()?;
    if rest.is_empty() {
        return None;
    }
    Some(Provenance {
        owner,
        repo,
        rel_path: rest.join("/"),
    })
}

/// Scan a directory tree. Parse failures and unreadable files are logged
/// in the report, not fatal; an unusable root is.
pub fn scan_tree(root: &Path) -> Result<ScanOutput, ScanError> {
    if !root.is_dir() {
        return Err(ScanError::BadRoot(root.to_path_buf()));
    }
    let mut files: Vec<(Provenance, PathBuf)> = Vec::new();
    let mut report = ScanReport::default();
    for entry in WalkDir::new(root).follow_links(false).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e.path().map(|p| p.to_path_buf()).unwrap_or_default();
                report.read_failures.push((path, e.to_string()));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        if entry.path().extension().and_then(|e| e.to_str()) != Some("py") {
            continue;
        }
        report.files_seen += 1;
        match provenance_for(root, entry.path()) {
            Some(p) => files.push((p, entry.path().to_path_buf())),
            None => report.skipped_layout += 1,
        }
    }
    files.sort_by(|a, b| {
        (&a.0.owner, &a.0.repo, &a.0.rel_path).cmp(&(&b.0.owner, &b.0.repo, &b.0.rel_path))
    });

    let mut parallel = Vec::new();
    let mut code_only = Vec::new();
    for (prov, path) in files {
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                report.read_failures.push((path, e.to_string()));
                continue;
            }
        };
        let source_path = format!("{}/{}/{}", prov.owner, prov.repo, prov.rel_path);
        let module = match parse_module_bytes(&bytes, &source_path) {
            Ok(m) => m,
            Err(e) => {
                report.parse_failures.push(e);
                continue;
            }
        };
        let extraction = extract_functions(&module, &prov);
        report.skipped_print_name += extraction.skipped_print_name;
        for record in extraction.records {
            report.functions_total += 1;
            let has_docstring = record
                .docstring_raw
                .as_deref()
                .and_then(clean_docstring)
                .is_some();
            if has_docstring {
                parallel.push(record);
            } else {
                code_only.push(record);
            }
        }
    }
    Ok(ScanOutput {
        parallel,
        code_only,
        report,
    })
}
