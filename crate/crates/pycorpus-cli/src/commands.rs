//! One function per `pycorpus` subcommand. Each is a deterministic batch
//! job: configuration problems surface before any output file is written,
//! and outputs go through temp-file-and-rename.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context};
use pycorpus_core::bleu::corpus_bleu;
use pycorpus_core::datasetops::{
    assemble_backtranslation, dedup, element_stats, split, CorpusColumns, ElementStats, SplitSpec,
};
use pycorpus_core::extract::{extract_functions, Provenance};
use pycorpus_core::pyparse::parse_module;
use pycorpus_core::serialize::{escape_body, reassemble_source, CorpusTriple};
use pycorpus_core::subtok::{bpe_apply, bpe_learn, bpe_revert, punct_split, BpeModel};

use crate::config::PipelineConfig;
use crate::corpus::{read_corpus, write_corpus, write_text_file, write_triples, CorpusFiles};
use crate::scan::scan_tree;

pub fn cmd_extract(cfg: &PipelineConfig, root: &Path, out_dir: &Path) -> anyhow::Result<()> {
    let scan = scan_tree(root)?;
    let report = &scan.report;
    if cfg.verbose {
        for f in &report.parse_failures {
            eprintln!("parse failure: {}", f);
        }
        for (path, reason) in &report.read_failures {
            eprintln!("read failure: {}: {}", path.display(), reason);
        }
    }
    let parallel_files = CorpusFiles::at_base(&out_dir.join("parallel"), true);
    let code_only_files = CorpusFiles::at_base(&out_dir.join("code_only"), false);
    let prefix = &cfg.extract.metadata_prefix;
    let parallel_report = write_corpus(&scan.parallel, &parallel_files, prefix)?;
    let code_only_report = write_corpus(&scan.code_only, &code_only_files, prefix)?;
    println!("files seen:               {}", report.files_seen);
    println!("parse failures:           {}", report.parse_failures.len());
    println!(
        "read failures:            {}",
        report.read_failures.len()
    );
    println!("layout-skipped files:     {}", report.skipped_layout);
    println!("print-name funcs skipped: {}", report.skipped_print_name);
    println!("functions extracted:      {}", report.functions_total);
    println!(
        "parallel examples:        {} written, {} dropped (marker collision)",
        parallel_report.written, parallel_report.dropped_marker_collisions
    );
    println!(
        "code-only examples:       {} written, {} dropped (marker collision)",
        code_only_report.written, code_only_report.dropped_marker_collisions
    );
    Ok(())
}

pub fn cmd_dedup(input: &Path, output: &Path) -> anyhow::Result<()> {
    let files = CorpusFiles::detect(input);
    let triples = read_corpus(&files)?;
    let before = triples.len();
    let kept = dedup(triples);
    let out = CorpusFiles::at_base(output, files.has_docstrings());
    write_triples(&kept, &out)?;
    println!(
        "dedup: {} examples in, {} kept, {} removed",
        before,
        kept.len(),
        before - kept.len()
    );
    Ok(())
}

pub fn cmd_split(cfg: &PipelineConfig, input: &Path, out_dir: &Path) -> anyhow::Result<()> {
    let spec = SplitSpec {
        valid_size: cfg.split.valid_size,
        test_size: cfg.split.test_size,
        seed: cfg.split.seed,
    };
    let files = CorpusFiles::detect(input);
    let triples = read_corpus(&files)?;
    let total = triples.len();
    let (train, valid, test) = split(triples, &spec)?;
    for (name, part) in [("train", &train), ("valid", &valid), ("test", &test)] {
        let out = CorpusFiles::at_base(&out_dir.join(name), files.has_docstrings());
        write_triples(part, &out)?;
    }
    println!(
        "split: {} examples -> train {}, valid {}, test {} (valid_size={}, test_size={}, seed={})",
        total,
        train.len(),
        valid.len(),
        test.len(),
        spec.valid_size,
        spec.test_size,
        spec.seed
    );
    Ok(())
}

fn print_element(name: &str, s: &ElementStats) {
    let locs = s
        .locs
        .map(|l| l.to_string())
        .unwrap_or_else(|| "-".to_string());
    println!(
        "{:<14} {:>10} {:>12} {:>10}",
        name, s.examples, s.tokens, locs
    );
}

fn print_machine(name: &str, s: &ElementStats) {
    println!("{}.examples={}", name, s.examples);
    println!("{}.tokens={}", name, s.tokens);
    if let Some(l) = s.locs {
        println!("{}.locs={}", name, l);
    }
    println!("{}.mean={}", name, s.mean);
    println!("{}.std={}", name, s.std);
    println!("{}.median={}", name, s.median);
}

pub fn cmd_stats(input: &Path) -> anyhow::Result<()> {
    let files = CorpusFiles::detect(input);
    let triples = read_corpus(&files)?;
    let decls: Vec<String> = triples.iter().map(|t| t.decl_line.clone()).collect();
    let bodies: Vec<String> = triples.iter().map(|t| t.body_line.clone()).collect();
    let docs: Option<Vec<String>> = files.has_docstrings().then(|| {
        triples
            .iter()
            .map(|t| t.docstring_line.clone().unwrap_or_default())
            .collect()
    });

    let decl_stats = element_stats(&decls, true);
    let body_stats = element_stats(&bodies, true);
    let doc_stats = docs.as_ref().map(|d| element_stats(d, false));

    println!("# token = whitespace-separated field content; DCNL/DCSP markers count as tokens");
    println!("# std is population (divide by N); median of an even count is the lower central value");
    println!(
        "{:<14} {:>10} {:>12} {:>10}",
        "element", "examples", "tokens", "locs"
    );
    print_element("declarations", &decl_stats);
    print_element("bodies", &body_stats);
    if let Some(ds) = &doc_stats {
        print_element("docstrings", ds);
    }
    println!();
    println!(
        "{:<14} {:>10} {:>10} {:>10}   (tokens per example)",
        "element", "mean", "std", "median"
    );
    for (name, s) in [("declarations", &decl_stats), ("bodies", &body_stats)]
        .into_iter()
        .chain(doc_stats.iter().map(|s| ("docstrings", s)))
    {
        println!(
            "{:<14} {:>10.2} {:>10.2} {:>10}",
            name, s.mean, s.std, s.median
        );
    }
    println!();
    print_machine("declarations", &decl_stats);
    print_machine("bodies", &body_stats);
    if let Some(ds) = &doc_stats {
        print_machine("docstrings", ds);
    }
    Ok(())
}

fn read_plain_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn line_tokens(line: &str, use_punct: bool, protected: &BTreeSet<String>) -> Vec<String> {
    if use_punct {
        punct_split(line, protected)
    } else {
        line.split_whitespace().map(str::to_string).collect()
    }
}

pub fn cmd_learn_bpe(
    cfg: &PipelineConfig,
    inputs: &[std::path::PathBuf],
    model_path: &Path,
) -> anyhow::Result<()> {
    let protected: BTreeSet<String> = cfg.bpe.protected.iter().cloned().collect();
    let mut freqs: BTreeMap<String, u64> = BTreeMap::new();
    let mut lines_seen = 0usize;
    for input in inputs {
        for line in read_plain_lines(input)? {
            lines_seen += 1;
            for tok in line_tokens(&line, cfg.bpe.punct_split, &protected) {
                if protected.contains(&tok) {
                    continue; // markers are never decomposed, nothing to learn
                }
                *freqs.entry(tok).or_insert(0) += 1;
            }
        }
    }
    let model = bpe_learn(&freqs, cfg.bpe.num_merges);
    write_text_file(model_path, &model.to_text())?;
    println!(
        "learn-bpe: {} lines, {} distinct tokens, {} merges learned (requested {}, punct_split={})",
        lines_seen,
        freqs.len(),
        model.merges.len(),
        cfg.bpe.num_merges,
        cfg.bpe.punct_split
    );
    Ok(())
}

fn load_model(path: &Path) -> anyhow::Result<BpeModel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read model {}", path.display()))?;
    Ok(BpeModel::from_text(&text)?)
}

pub fn cmd_apply_bpe(
    cfg: &PipelineConfig,
    model_path: &Path,
    input: &Path,
    output: &Path,
) -> anyhow::Result<()> {
    let protected: BTreeSet<String> = cfg.bpe.protected.iter().cloned().collect();
    let model = load_model(model_path)?;
    let mut out_lines = Vec::new();
    for (i, line) in read_plain_lines(input)?.into_iter().enumerate() {
        let tokens = line_tokens(&line, cfg.bpe.punct_split, &protected);
        let subtokens = bpe_apply(&model, &tokens, &protected)
            .with_context(|| format!("{}:{}", input.display(), i + 1))?;
        out_lines.push(subtokens.join(" "));
    }
    let mut text = out_lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_text_file(output, &text)?;
    println!(
        "apply-bpe: {} lines subtokenized (punct_split={})",
        out_lines.len(),
        cfg.bpe.punct_split
    );
    Ok(())
}

pub fn cmd_revert_bpe(input: &Path, output: &Path) -> anyhow::Result<()> {
    let mut out_lines = Vec::new();
    for (i, line) in read_plain_lines(input)?.into_iter().enumerate() {
        let subtokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        let tokens =
            bpe_revert(&subtokens).with_context(|| format!("{}:{}", input.display(), i + 1))?;
        out_lines.push(tokens.join(" "));
    }
    let mut text = out_lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_text_file(output, &text)?;
    println!("revert-bpe: {} lines restored", out_lines.len());
    Ok(())
}

pub fn cmd_bleu(candidates: &Path, references: &Path) -> anyhow::Result<()> {
    let cands = read_plain_lines(candidates)?;
    let refs = read_plain_lines(references)?;
    let report = corpus_bleu(&cands, &refs)?;
    println!("{}", report.summary_line());
    println!("bleu={}", report.bleu);
    for (i, p) in report.precisions.iter().enumerate() {
        println!("p{}={}", i + 1, p);
    }
    println!("bp={}", report.brevity_penalty);
    println!("hyp_len={}", report.candidate_length);
    println!("ref_len={}", report.reference_length);
    Ok(())
}

fn triples_to_columns(triples: Vec<CorpusTriple>, with_docs: bool) -> CorpusColumns {
    CorpusColumns {
        decl_lines: triples.iter().map(|t| t.decl_line.clone()).collect(),
        docstring_lines: with_docs.then(|| {
            triples
                .iter()
                .map(|t| t.docstring_line.clone().unwrap_or_default())
                .collect()
        }),
        body_lines: triples.iter().map(|t| t.body_line.clone()).collect(),
        metadata_lines: triples.into_iter().map(|t| t.metadata_line).collect(),
    }
}

pub fn cmd_assemble_bt(
    parallel: &Path,
    code_only: &Path,
    synthetic: &Path,
    output: &Path,
) -> anyhow::Result<()> {
    let parallel_files = CorpusFiles::detect(parallel);
    if !parallel_files.has_docstrings() {
        bail!(
            "parallel corpus at {} has no docstring file",
            parallel.display()
        );
    }
    let parallel_triples = read_corpus(&parallel_files)?;
    let code_only_triples = read_corpus(&CorpusFiles::detect(code_only))?;
    let synthetic_lines = read_plain_lines(synthetic)?;
    let combined = assemble_backtranslation(
        triples_to_columns(parallel_triples, true),
        triples_to_columns(code_only_triples, false),
        synthetic_lines,
    )?;

    let out = CorpusFiles::at_base(output, true);
    let n = combined.decl_lines.len();
    let join = |lines: &[String]| {
        let mut text = lines.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        text
    };
    write_text_file(&out.decl_path, &join(&combined.decl_lines))?;
    write_text_file(&out.body_path, &join(&combined.body_lines))?;
    write_text_file(out.docstring_path.as_ref().unwrap(), &join(&combined.docstring_lines))?;
    write_text_file(&out.metadata_path, &join(&combined.metadata_lines))?;
    let provenance: Vec<String> = combined.provenance.iter().map(|p| p.to_string()).collect();
    write_text_file(
        &crate::corpus::CorpusFiles::at_base(output, false)
            .decl_path
            .with_extension(crate::corpus::PROVENANCE_SUFFIX),
        &join(&provenance),
    )?;
    let synthetic_count = combined
        .provenance
        .iter()
        .filter(|p| **p == "synthetic")
        .count();
    println!(
        "assemble-bt: {} examples ({} real + {} synthetic)",
        n,
        n - synthetic_count,
        synthetic_count
    );
    Ok(())
}

/// Re-check the reversibility guarantee over a whole corpus: every example
/// is reassembled from its serialized form, re-parsed, re-extracted, and
/// re-serialized; the result must be byte-identical.
pub fn cmd_roundtrip_check(input: &Path) -> anyhow::Result<()> {
    let files = CorpusFiles::detect(input);
    let triples = read_corpus(&files)?;
    let total = triples.len();
    let dummy = Provenance {
        owner: "o".into(),
        repo: "r".into(),
        rel_path: "f.py".into(),
    };
    let mut failures = 0usize;
    for t in &triples {
        if !example_round_trips(t, &dummy) {
            failures += 1;
            println!("FAIL {}", t.metadata_line);
        }
    }
    println!("roundtrip-check: {} examples, {} failures", total, failures);
    if failures > 0 {
        bail!("{} of {} examples failed the round trip", failures, total);
    }
    Ok(())
}

fn example_round_trips(t: &CorpusTriple, prov: &Provenance) -> bool {
    let Ok(source) = reassemble_source(&t.decl_line, &t.body_line) else {
        return false;
    };
    let Ok(module) = parse_module(&source, "roundtrip") else {
        return false;
    };
    let extraction = extract_functions(&module, prov);
    let [record] = extraction.records.as_slice() else {
        return false;
    };
    escape_body(&record.decl_lines) == t.decl_line && escape_body(&record.body_lines) == t.body_line
}
