//! Corpus-level BLEU with the exact semantics of the classic
//! `multi-bleu.perl` scorer: clipped n-gram counts summed over the corpus
//! for orders 1-4, geometric mean, and the brevity penalty
//! `exp(1 - ref_len/cand_len)` when the candidate side is shorter. Any
//! zero precision zeroes the score; no smoothing.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

const MAX_ORDER: usize = 4;

/// Corpus BLEU result. `bleu` is a percentage in [0, 100].
#[derive(Debug, Clone, PartialEq)]
pub struct BleuReport {
    pub bleu: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub candidate_length: u64,
    pub reference_length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BleuError {
    #[error("line count mismatch: {candidates} candidate lines vs {references} reference lines")]
    LengthMismatch { candidates: usize, references: usize },
    #[error("empty corpus")]
    EmptyCorpus,
}

/// Score whitespace-tokenized candidate lines against aligned single
/// references.
pub fn corpus_bleu(candidates: &[String], references: &[String]) -> Result<BleuReport, BleuError> {
    if candidates.len() != references.len() {
        return Err(BleuError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(BleuError::EmptyCorpus);
    }

    let mut clipped = [0u64; MAX_ORDER];
    let mut total = [0u64; MAX_ORDER];
    let mut cand_len: u64 = 0;
    let mut ref_len: u64 = 0;

    for (cand, reference) in candidates.iter().zip(references) {
        let c: Vec<&str> = cand.split_whitespace().collect();
        let r: Vec<&str> = reference.split_whitespace().collect();
        cand_len += c.len() as u64;
        ref_len += r.len() as u64;
        for n in 1..=MAX_ORDER {
            let c_grams = ngram_counts(&c, n);
            if c_grams.is_empty() {
                continue;
            }
            let r_grams = ngram_counts(&r, n);
            for (gram, count) in &c_grams {
                total[n - 1] += count;
                let matched = r_grams.get(gram).copied().unwrap_or(0);
                clipped[n - 1] += (*count).min(matched);
            }
        }
    }

    let mut precisions = [0.0f64; MAX_ORDER];
    for n in 0..MAX_ORDER {
        if total[n] > 0 {
            precisions[n] = clipped[n] as f64 / total[n] as f64;
        }
    }
    let brevity_penalty = if cand_len == 0 {
        0.0
    } else if cand_len < ref_len {
        libm::exp(1.0 - ref_len as f64 / cand_len as f64)
    } else {
        1.0
    };
    let bleu = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|&p| libm::log(p)).sum::<f64>() / MAX_ORDER as f64;
        brevity_penalty * libm::exp(log_mean) * 100.0
    };
    Ok(BleuReport {
        bleu,
        precisions,
        brevity_penalty,
        candidate_length: cand_len,
        reference_length: ref_len,
    })
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> BTreeMap<Vec<&'a str>, u64> {
    let mut counts = BTreeMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

impl BleuReport {
    /// The classic scorer's one-line report format.
    pub fn summary_line(&self) -> String {
        alloc::format!(
            "BLEU = {:.2}, {:.1}/{:.1}/{:.1}/{:.1} (BP={:.3}, ratio={:.3}, hyp_len={}, ref_len={})",
            self.bleu,
            100.0 * self.precisions[0],
            100.0 * self.precisions[1],
            100.0 * self.precisions[2],
            100.0 * self.precisions[3],
            self.brevity_penalty,
            if self.reference_length == 0 {
                0.0
            } else {
                self.candidate_length as f64 / self.reference_length as f64
            },
            self.candidate_length,
            self.reference_length
        )
    }
}
