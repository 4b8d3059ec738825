//! Core algorithms for mining parallel corpora of Python functions and
//! their docstrings: Python 2.7 parsing and canonical unparsing, function
//! extraction, reversible one-line serialization, dataset operations
//! (dedup, seeded splits, statistics), subword tokenization, and corpus
//! BLEU.
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that touches
//! the filesystem lives in the companion CLI crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bleu;
pub mod datasetops;
pub mod extract;
pub mod pyparse;
pub mod serialize;
pub mod subtok;
