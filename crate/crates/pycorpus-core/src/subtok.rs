//! Subword tokenization: punctuation-aware splitting followed by
//! byte-pair encoding.
//!
//! `punct_split` separates every non-alphanumeric character into its own
//! token, a simplified stand-in for the Moses tokenizer's treatment of
//! punctuation inside identifiers. BPE then learns merges of the most
//! frequent adjacent symbol pairs; an end-of-token sentinel is attached to
//! the final character symbol of each token (suffix convention), and
//! non-final subtokens carry the `@@` continuation marker on output.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// End-of-token sentinel appended to each token's final symbol while
/// learning and applying merges.
pub const END_OF_TOKEN: &str = "</w>";
/// Marker appended to every non-final subtoken of a split token.
pub const CONTINUATION_MARKER: &str = "@@";

/// Default protected marker tokens that pass through tokenization unsplit.
pub const DEFAULT_PROTECTED: [&str; 2] = [crate::serialize::DCNL, crate::serialize::DCSP];

/// An ordered list of learned merges plus the marker conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    pub merges: Vec<(String, String)>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubtokError {
    #[error("dangling continuation marker at end of sequence")]
    MalformedSequence,
    #[error("invalid model file: {0}")]
    MalformedModel(String),
    #[error("input token {0:?} ends with the continuation marker")]
    MarkerCollision(String),
}

/// Split a corpus line into tokens: whitespace first, then each
/// non-alphanumeric character becomes its own token. Tokens in `protected`
/// pass through unsplit.
pub fn punct_split(line: &str, protected: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::new();
    for word in line.split_whitespace() {
        if protected.contains(word) {
            out.push(word.to_owned());
            continue;
        }
        let mut run = String::new();
        for c in word.chars() {
            if c.is_alphanumeric() {
                run.push(c);
            } else {
                if !run.is_empty() {
                    out.push(core::mem::take(&mut run));
                }
                out.push(c.to_string());
            }
        }
        if !run.is_empty() {
            out.push(run);
        }
    }
    out
}

/// A token decomposed into its working symbol sequence: chars, with the
/// sentinel attached to the last one.
fn symbolize(token: &str) -> Vec<String> {
    let chars: Vec<char> = token.chars().collect();
    let mut symbols: Vec<String> = chars.iter().map(|c| c.to_string()).collect();
    if let Some(last) = symbols.last_mut() {
        last.push_str(END_OF_TOKEN);
    }
    symbols
}

fn count_pairs(vocab: &BTreeMap<Vec<String>, u64>) -> BTreeMap<(String, String), u64> {
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    for (symbols, &freq) in vocab {
        for w in symbols.windows(2) {
            *pairs.entry((w[0].clone(), w[1].clone())).or_insert(0) += freq;
        }
    }
    pairs
}

fn merge_symbols(symbols: &[String], pair: &(String, String)) -> Vec<String> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == pair.0 && symbols[i + 1] == pair.1 {
            out.push(format!("{}{}", pair.0, pair.1));
            i += 2;
        } else {
            out.push(symbols[i].clone());
            i += 1;
        }
    }
    out
}

/// Learn up to `num_merges` merges from weighted token frequencies. Each
/// round merges the most frequent adjacent pair, ties broken by
/// lexicographically smallest (left, right); learning stops early once no
/// pair occurs at least twice.
pub fn bpe_learn(token_frequencies: &BTreeMap<String, u64>, num_merges: usize) -> BpeModel {
    let mut vocab: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for (token, &freq) in token_frequencies {
        if token.is_empty() {
            continue;
        }
        *vocab.entry(symbolize(token)).or_insert(0) += freq;
    }
    let mut merges = Vec::new();
    for _ in 0..num_merges {
        let pairs = count_pairs(&vocab);
        // max frequency, then smallest pair
        let Some(best) = pairs
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(p, f)| (p.clone(), *f))
        else {
            break;
        };
        if best.1 < 2 {
            break;
        }
        let pair = best.0;
        vocab = vocab
            .into_iter()
            .map(|(symbols, freq)| (merge_symbols(&symbols, &pair), freq))
            .fold(BTreeMap::new(), |mut acc, (symbols, freq)| {
                *acc.entry(symbols).or_insert(0) += freq;
                acc
            });
        merges.push(pair);
    }
    BpeModel {
        merges,
        version: "1".to_string(),
    }
}

impl BpeModel {
    fn ranks(&self) -> BTreeMap<(String, String), usize> {
        self.merges
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect()
    }

    /// Serialize as text: a version header line, then one merge per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("#version: {}\n", self.version);
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<BpeModel, SubtokError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SubtokError::MalformedModel("empty model file".into()))?;
        let version = header
            .strip_prefix("#version:")
            .ok_or_else(|| SubtokError::MalformedModel("missing #version header".into()))?
            .trim()
            .to_string();
        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let (Some(l), Some(r), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(SubtokError::MalformedModel(format!(
                    "line {}: expected exactly two symbols",
                    i + 2
                )));
            };
            merges.push((l.to_string(), r.to_string()));
        }
        Ok(BpeModel { merges, version })
    }
}

/// Apply the model's merges to each token and emit subtokens, continuation
/// marker on every subtoken except a token's last. Protected tokens are
/// never decomposed.
pub fn bpe_apply(
    model: &BpeModel,
    tokens: &[String],
    protected: &BTreeSet<String>,
) -> Result<Vec<String>, SubtokError> {
    let ranks = model.ranks();
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        if token.is_empty() {
            continue;
        }
        if protected.contains(token) {
            out.push(token.clone());
            continue;
        }
        if token.ends_with(CONTINUATION_MARKER) {
            return Err(SubtokError::MarkerCollision(token.clone()));
        }
        let mut symbols = symbolize(token);
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| ranks.get(&(w[0].clone(), w[1].clone())))
                .min()
                .copied();
            let Some(rank) = best else { break };
            let pair = model.merges[rank].clone();
            symbols = merge_symbols(&symbols, &pair);
        }
        let last = symbols.len() - 1;
        for (i, mut sym) in symbols.into_iter().enumerate() {
            if i == last {
                sym.truncate(sym.len() - END_OF_TOKEN.len());
                out.push(sym);
            } else {
                sym.push_str(CONTINUATION_MARKER);
                out.push(sym);
            }
        }
    }
    Ok(out)
}

/// Concatenate maximal runs of continuation-marked subtokens: the exact
/// inverse of [`bpe_apply`]'s marking scheme.
pub fn bpe_revert(subtokens: &[String]) -> Result<Vec<String>, SubtokError> {
    let mut out = Vec::new();
    let mut pending = String::new();
    for sub in subtokens {
        match sub.strip_suffix(CONTINUATION_MARKER) {
            Some(head) => pending.push_str(head),
            None => {
                pending.push_str(sub);
                out.push(core::mem::take(&mut pending));
            }
        }
    }
    if !pending.is_empty() {
        return Err(SubtokError::MalformedSequence);
    }
    Ok(out)
}
