//! Dataset operations over serialized corpora: exact deduplication, seeded
//! reproducible splits, summary statistics, and backtranslation corpus
//! assembly.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::serialize::{CorpusTriple, DCNL};

/// Sizes and seed of a train/valid/test partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub valid_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("split sizes too large: valid {valid} + test {test} must be < corpus size {corpus}")]
    SpecTooLarge {
        valid: usize,
        test: usize,
        corpus: usize,
    },
    #[error("synthetic docstring count {synthetic} does not match code-only corpus size {code_only}")]
    SyntheticCountMismatch { synthetic: usize, code_only: usize },
}

/// Keep the first occurrence of each distinct (decl, docstring, body) key;
/// metadata is not part of the key. Order is preserved.
pub fn dedup(triples: Vec<CorpusTriple>) -> Vec<CorpusTriple> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(triples.len());
    for t in triples {
        if seen.insert(t.content_key()) {
            out.push(t);
        }
    }
    out
}

/// SplitMix64 (Steele, Lea & Flood 2014): the fixed 64-bit generator behind
/// every seeded shuffle in this crate, chosen so splits reproduce
/// bit-exactly across platforms and implementations.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Fisher-Yates shuffle driven by SplitMix64: for i from n-1 down to 1,
/// j = next() mod (i+1), swap(i, j).
pub fn seeded_shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = SplitMix64::new(seed);
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Partition a corpus: shuffle with the seeded permutation, take
/// `test_size` examples for test, the next `valid_size` for valid, and the
/// remainder for train.
pub fn split(
    triples: Vec<CorpusTriple>,
    spec: &SplitSpec,
) -> Result<(Vec<CorpusTriple>, Vec<CorpusTriple>, Vec<CorpusTriple>), DatasetError> {
    let n = triples.len();
    if spec.valid_size + spec.test_size >= n {
        return Err(DatasetError::SpecTooLarge {
            valid: spec.valid_size,
            test: spec.test_size,
            corpus: n,
        });
    }
    let mut shuffled = triples;
    seeded_shuffle(&mut shuffled, spec.seed);
    let train = shuffled.split_off(spec.test_size + spec.valid_size);
    let valid = shuffled.split_off(spec.test_size);
    let test = shuffled;
    Ok((train, valid, test))
}

/// Count whitespace-separated tokens; `DCNL`/`DCSP` markers count as
/// tokens.
pub fn token_count(line: &str) -> usize {
    line.split_whitespace().count()
}

/// Lines of code encoded in one serialized line: 1 + number of `DCNL`
/// markers.
pub fn loc_count(line: &str) -> usize {
    1 + line.split_whitespace().filter(|t| *t == DCNL).count()
}

/// Per-element corpus statistics. `mean` is exactly `tokens / examples`
/// before any rounding; `std` is the population standard deviation; the
/// median of an even count is the lower of the two central values.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStats {
    pub examples: usize,
    pub tokens: u64,
    pub locs: Option<u64>,
    pub mean: f64,
    pub std: f64,
    pub median: u64,
}

/// Compute stats for one corpus element (declarations, bodies, or
/// docstrings). `count_locs` is false for docstrings, which have no lines
/// of code.
pub fn element_stats(lines: &[String], count_locs: bool) -> ElementStats {
    let mut counts: Vec<u64> = lines.iter().map(|l| token_count(l) as u64).collect();
    let tokens: u64 = counts.iter().sum();
    let locs = count_locs.then(|| lines.iter().map(|l| loc_count(l) as u64).sum());
    let n = counts.len();
    let mean = if n == 0 { 0.0 } else { tokens as f64 / n as f64 };
    let variance = if n == 0 {
        0.0
    } else {
        counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n as f64
    };
    let std = libm::sqrt(variance);
    counts.sort_unstable();
    let median = if n == 0 {
        0
    } else if n % 2 == 1 {
        counts[n / 2]
    } else {
        counts[n / 2 - 1]
    };
    ElementStats {
        examples: n,
        tokens,
        locs,
        mean,
        std,
        median,
    }
}

/// Combined backtranslation training corpus: real parallel examples
/// followed by (synthetic docstring, real declaration + body) pairs, with a
/// per-example provenance tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BacktranslationCorpus {
    pub decl_lines: Vec<String>,
    pub docstring_lines: Vec<String>,
    pub body_lines: Vec<String>,
    pub metadata_lines: Vec<String>,
    /// "real" or "synthetic" per example, aligned with the other fields.
    pub provenance: Vec<&'static str>,
}

pub struct CorpusColumns {
    pub decl_lines: Vec<String>,
    pub docstring_lines: Option<Vec<String>>,
    pub body_lines: Vec<String>,
    pub metadata_lines: Vec<String>,
}

/// Concatenate the parallel corpus with code-only examples paired to
/// externally generated synthetic docstrings. The synthetic line count
/// must equal the code-only corpus size.
pub fn assemble_backtranslation(
    parallel: CorpusColumns,
    code_only: CorpusColumns,
    synthetic_docstrings: Vec<String>,
) -> Result<BacktranslationCorpus, DatasetError> {
    if synthetic_docstrings.len() != code_only.decl_lines.len() {
        return Err(DatasetError::SyntheticCountMismatch {
            synthetic: synthetic_docstrings.len(),
            code_only: code_only.decl_lines.len(),
        });
    }
    let real = parallel.decl_lines.len();
    let synth = code_only.decl_lines.len();
    let mut out = BacktranslationCorpus {
        decl_lines: parallel.decl_lines,
        docstring_lines: parallel.docstring_lines.unwrap_or_default(),
        body_lines: parallel.body_lines,
        metadata_lines: parallel.metadata_lines,
        provenance: Vec::with_capacity(real + synth),
    };
    out.provenance.extend(core::iter::repeat("real").take(real));
    out.decl_lines.extend(code_only.decl_lines);
    out.docstring_lines.extend(synthetic_docstrings);
    out.body_lines.extend(code_only.body_lines);
    out.metadata_lines.extend(code_only.metadata_lines);
    out.provenance
        .extend(core::iter::repeat("synthetic").take(synth));
    Ok(out)
}
