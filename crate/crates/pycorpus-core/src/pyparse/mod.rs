//! Python 2.7 parsing and canonical unparsing.
//!
//! [`parse_module`] accepts UTF-8 source text and builds a comment-free
//! syntax tree covering the full Python 2.7 grammar, including the
//! `print`/`exec` statements, backtick repr, tuple parameters, and the
//! grammar-changing `__future__` imports. [`unparse_canonical`] regenerates
//! a deterministic one-statement-per-line surface form; re-parsing that
//! output reproduces the tree, which is what makes the corpus serialization
//! reversible.

pub mod ast;
mod lexer;
mod parser;
mod strings;
mod unparse;

use alloc::string::{String, ToString};

pub use ast::Module;
pub use unparse::{
    render_source, unparse_function_decl, unparse_module, unparse_stmt, Line,
};


/// Why a source file could not be parsed as Python 2.7. Callers are
/// expected to log and skip the file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}: {reason}")]
pub struct ParseFailure {
    pub path: String,
    pub line: u32,
    pub reason: String,
}

/// Parse UTF-8 source text into a module tree. Comments never reach the
/// tree; syntax outside the Python 2.7 grammar is a [`ParseFailure`].
pub fn parse_module(source_text: &str, source_path: &str) -> Result<Module, ParseFailure> {
    parser::parse(source_text, source_path)
}

/// Parse raw bytes, treating them as UTF-8. Undecodable input is a
/// [`ParseFailure`] like any other unparseable file.
pub fn parse_module_bytes(bytes: &[u8], source_path: &str) -> Result<Module, ParseFailure> {
    let text = core::str::from_utf8(bytes).map_err(|e| ParseFailure {
        path: source_path.to_string(),
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() as u32,
        reason: "file is not valid UTF-8".to_string(),
    })?;
    parse_module(text, source_path)
}

/// Canonical lines for a module: the `unparse_canonical` operation.
pub fn unparse_canonical(module: &Module) -> alloc::vec::Vec<Line> {
    unparse_module(module)
}

/// Structural equality ignoring provenance (source paths, line numbers) and
/// original surface formatting.
pub fn tree_equal(a: &Module, b: &Module) -> bool {
    a == b
}
