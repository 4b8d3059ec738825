//! `pycorpus`: mine Python 2.7 repository trees into parallel
//! (declaration, docstring, body) corpora and run the downstream dataset
//! operations: dedup, splits, statistics, subword tokenization, BLEU, and
//! backtranslation assembly.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use pycorpus_cli::commands;
use pycorpus_cli::config::PipelineConfig;

#[derive(Parser)]
#[command(name = "pycorpus", version, about)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Log per-file details (parse failures, read errors).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a repository tree and write the parallel and code-only corpora.
    Extract {
        /// Root directory laid out as <root>/<owner>/<repo>/...
        #[arg(long)]
        root: PathBuf,
        /// Output directory for parallel.* and code_only.* files.
        #[arg(long)]
        out: PathBuf,
        /// Leading component of metadata lines.
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Remove exact duplicate examples (metadata excluded from the key).
    Dedup {
        /// Corpus base path, e.g. out/parallel.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Partition a corpus into train/valid/test with a seeded shuffle.
    Split {
        #[arg(long)]
        input: PathBuf,
        /// Directory receiving train.*, valid.*, and test.* files.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        valid_size: Option<usize>,
        #[arg(long)]
        test_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print corpus statistics (examples, tokens, lines of code).
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Learn a BPE merge table from corpus field files.
    LearnBpe {
        /// One or more input files; frequencies are pooled (joint vocabulary).
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        merges: Option<usize>,
        /// Disable punctuation splitting before BPE.
        #[arg(long)]
        no_punct_split: bool,
    },
    /// Subtokenize a file with a learned BPE model.
    ApplyBpe {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        no_punct_split: bool,
    },
    /// Undo BPE subtokenization.
    RevertBpe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Corpus BLEU of candidate lines against aligned references.
    Bleu {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        references: PathBuf,
    },
    /// Combine the parallel corpus with synthetic-docstring examples.
    AssembleBt {
        #[arg(long)]
        parallel: PathBuf,
        #[arg(long)]
        code_only: PathBuf,
        /// File of synthetic docstring lines, aligned with the code-only corpus.
        #[arg(long)]
        synthetic: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Verify that every example reassembles, re-parses, and re-serializes
    /// byte-identically.
    RoundtripCheck {
        #[arg(long)]
        input: PathBuf,
    },
}

fn resolved_config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cfg.verbose |= cli.verbose;
    match &cli.command {
        Command::Extract { prefix, .. } => {
            if let Some(p) = prefix {
                cfg.extract.metadata_prefix = p.clone();
            }
        }
        Command::Split {
            valid_size,
            test_size,
            seed,
            ..
        } => {
            if let Some(v) = valid_size {
                cfg.split.valid_size = *v;
            }
            if let Some(t) = test_size {
                cfg.split.test_size = *t;
            }
            if let Some(s) = seed {
                cfg.split.seed = *s;
            }
        }
        Command::LearnBpe {
            merges,
            no_punct_split,
            ..
        } => {
            if let Some(m) = merges {
                cfg.bpe.num_merges = *m;
            }
            if *no_punct_split {
                cfg.bpe.punct_split = false;
            }
        }
        Command::ApplyBpe { no_punct_split, .. } => {
            if *no_punct_split {
                cfg.bpe.punct_split = false;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let cfg = match resolved_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {:#}", e);
            std::process::exit(2);
        }
    };
    eprintln!("config: {:?}", cfg);
    let result = match &cli.command {
        Command::Extract { root, out, .. } => commands::cmd_extract(&cfg, root, out),
        Command::Dedup { input, output } => commands::cmd_dedup(input, output),
        Command::Split { input, out_dir, .. } => commands::cmd_split(&cfg, input, out_dir),
        Command::Stats { input } => commands::cmd_stats(input),
        Command::LearnBpe { input, model, .. } => commands::cmd_learn_bpe(&cfg, input, model),
        Command::ApplyBpe {
            model,
            input,
            output,
            ..
        } => commands::cmd_apply_bpe(&cfg, model, input, output),
        Command::RevertBpe { input, output } => commands::cmd_revert_bpe(input, output),
        Command::Bleu {
            candidates,
            references,
        } => commands::cmd_bleu(candidates, references),
        Command::AssembleBt {
            parallel,
            code_only,
            synthetic,
            output,
        } => commands::cmd_assemble_bt(parallel, code_only, synthetic, output),
        Command::RoundtripCheck { input } => commands::cmd_roundtrip_check(input),
    };
    if let Err(e) = result {
        eprintln!("error: {:#}", e);
        std::process::exit(1);
    }
}
