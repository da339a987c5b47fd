//! Subcommand definitions and their implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use progtrans_core::{
    augment_corpus, corpus_bleu, expected_utilities, extract_lexicon, learn_bpe, mbr_select,
    parse_control_token, AugmentMode, Direction, Extracted, SegmentKind, SegmentSubset, Sentence,
    Side, UtilityKind, Vocabulary, DEFAULT_EM_ITERATIONS,
};
use rayon::prelude::*;

use crate::config::{PipelineConfig, DEFAULT_MERGES};
use crate::formats::{self, AugmentedPaths};
use crate::pipeline::{load_corpus, run_pipeline};
use crate::stages::{self, Segmenter};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "PROGTRANS_THREADS";

/// Flag appended to a scores line when some candidate had no `<tgt>` segment.
pub const MISSING_FLAG: &str = "!missing";

#[derive(Debug, Parser)]
#[command(name = "progtrans", version, about = "Progressive-translation corpus preparation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Tokenized source corpus, one sentence per line.
    #[arg(long)]
    pub src: PathBuf,
    /// Tokenized target corpus, line-aligned with --src.
    #[arg(long)]
    pub tgt: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a Model 1 table and write it with the Viterbi alignments.
    Align {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// tgt2src links each target word to a source word; src2tgt the reverse.
        #[arg(long, default_value = "tgt2src")]
        direction: Direction,
        #[arg(long, default_value_t = DEFAULT_EM_ITERATIONS)]
        iterations: usize,
        /// Translation table output.
        #[arg(long)]
        table: PathBuf,
        /// Pharaoh alignment output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Intersect the two directional alignments.
    Symmetrize {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        tgt2src: PathBuf,
        #[arg(long)]
        src2tgt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the bilingual lexicon from symmetric alignments.
    Lexicon {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        alignment: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Word-for-word translation of the source side.
    Lex {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reorder `lex` into target word order.
    Ali {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        lex: PathBuf,
        /// The tgt2src Pharaoh alignment.
        #[arg(long)]
        alignment: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a shared merge table on both sides.
    BpeLearn {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = DEFAULT_MERGES)]
        merges: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment a file with a merge table.
    BpeApply {
        #[arg(long)]
        codes: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Segmented corpus whose subwords form the allowed vocabulary.
        #[arg(long)]
        vocab_corpus: Option<PathBuf>,
        /// Minimum count for a subword to be allowed.
        #[arg(long, default_value_t = 1)]
        threshold: u64,
    },
    /// Build the augmented training corpus.
    Augment {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        lex: Option<PathBuf>,
        #[arg(long)]
        ali: Option<PathBuf>,
        #[arg(long, default_value = "lex,ali,tgt")]
        segments: SegmentSubset,
        #[arg(long, default_value = "full")]
        mode: AugmentMode,
        /// Output prefix; writes PREFIX.src, PREFIX.tgt and PREFIX.manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pull one segment out of decoded outputs.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "tgt")]
        kind: SegmentKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Consensus decoding over line-aligned candidate files.
    Mbr {
        #[arg(long, num_args = 1.., required = true)]
        candidates: Vec<PathBuf>,
        #[arg(long, default_value = "chrf")]
        utility: UtilityKind,
        #[arg(long)]
        out: PathBuf,
        /// Expected utilities, one tab-separated line per sentence.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Corpus BLEU of a hypothesis file against a reference file.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
    /// Run every stage from a corpus to the augmented training data.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub src: Option<PathBuf>,
    #[arg(long)]
    pub tgt: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub merges: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub segments: Option<SegmentSubset>,
    #[arg(long)]
    pub mode: Option<AugmentMode>,
    #[arg(long)]
    pub utility: Option<UtilityKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub vocab_threshold: Option<u64>,
}

impl PipelineArgs {
    /// The config file (if any) with flags applied on top.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.src {
            c.src = Some(v.clone());
        }
        if let Some(v) = &self.tgt {
            c.tgt = Some(v.clone());
        }
        if let Some(v) = &self.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = self.merges {
            c.merges = v;
        }
        if let Some(v) = self.iterations {
            c.iterations = v;
        }
        if let Some(v) = &self.segments {
            c.segments = v.clone();
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.utility {
            c.utility = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.vocab_threshold {
            c.vocab_threshold = v;
        }
        Ok(c)
    }
}

/// Runs one subcommand, writing progress and reports to `log`.
pub fn run(cli: Cli, log: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Align { corpus, direction, iterations, table, out } => {
            let c = load_corpus(&corpus.src, &corpus.tgt)?;
            let (t, aligns) = stages::align(&c, direction, iterations).context("stage align failed")?;
            formats::write_translation_table(&table, &t)?;
            formats::write_directional(&out, &aligns)?;
            writeln!(log, "align {direction}: {} pairs, {} table entries", c.len(), t.len())?;
        }
        Command::Symmetrize { corpus, tgt2src, src2tgt, out } => {
            let c = load_corpus(&corpus.src, &corpus.tgt)?;
            let a = formats::read_directional(&tgt2src, Direction::TgtToSrc, &c)?;
            let b = formats::read_directional(&src2tgt, Direction::SrcToTgt, &c)?;
            let sym = stages::symmetrize(&a, &b).context("stage symmetrize failed")?;
            formats::write_symmetric(&out, &sym)?;
            let links: usize = sym.iter().map(|s| s.links().len()).sum();
            writeln!(log, "symmetrize: {links} links")?;
        }
        Command::Lexicon { corpus, alignment, out } => {
            let c = load_corpus(&corpus.src, &corpus.tgt)?;
            let sym = formats::read_symmetric(&alignment)?;
            let lexicon = extract_lexicon(&c, &sym).context("stage lexicon failed")?;
            formats::write_lexicon(&out, &lexicon)?;
            writeln!(log, "lexicon: {} entries", lexicon.len())?;
        }
        Command::Lex { src, lexicon, out } => {
            let sources = formats::read_sentences(&src, Side::Source, false)?;
            let lexicon = formats::read_lexicon(&lexicon)?;
            formats::write_sentences(&out, &stages::lex_sequences(&sources, &lexicon))?;
        }
        Command::Ali { corpus, lex, alignment, out } => {
            let c = load_corpus(&corpus.src, &corpus.tgt)?;
            let lex = formats::read_sentences(&lex, Side::Source, false)?;
            let t2s = formats::read_directional(&alignment, Direction::TgtToSrc, &c)?;
            let targets: Vec<Sentence> = c.side(Side::Target).cloned().collect();
            let ali = stages::ali_sequences(&lex, &t2s, &targets).context("stage ali failed")?;
            formats::write_sentences(&out, &ali)?;
        }
        Command::BpeLearn { corpus, merges, out } => {
            let c = load_corpus(&corpus.src, &corpus.tgt)?;
            let table = learn_bpe(&stages::joint_vocab(&c), merges);
            formats::write_merge_table(&out, &table)?;
            writeln!(log, "bpe-learn: {} merges", table.len())?;
        }
        Command::BpeApply { codes, input, out, vocab_corpus, threshold } => {
            let table = formats::read_merge_table(&codes)?;
            let vocab = match &vocab_corpus {
                Some(p) => Some(Vocabulary::count(&formats::read_sentences(p, Side::Target, true)?)),
                None => None,
            };
            let sentences = formats::read_sentences(&input, Side::Source, true)?;
            let segmented = Segmenter::new(&table, vocab.as_ref(), threshold).segment_all(&sentences);
            formats::write_sentences(&out, &segmented)?;
        }
        Command::Augment { corpus, lex, ali, segments, mode, out } => {
            let c = load_corpus(&corpus.src, &corpus.tgt)?;
            let sources: Vec<Sentence> = c.side(Side::Source).cloned().collect();
            let targets: Vec<Sentence> = c.side(Side::Target).cloned().collect();
            let lex = optional_segment(lex.as_deref(), SegmentKind::Lex, &segments, c.len())?;
            let ali = optional_segment(ali.as_deref(), SegmentKind::Ali, &segments, c.len())?;
            let sets = stages::segment_sets(&sources, &lex, &ali, &targets)?;
            let examples = augment_corpus(&sets, &segments, mode);
            formats::write_augmented(&AugmentedPaths::with_prefix(&out), &examples)?;
            writeln!(log, "augment: {} examples from {} pairs", examples.len(), c.len())?;
        }
        Command::Extract { input, kind, out } => {
            let lines = formats::read_token_lines(&input)?;
            let mut missing = 0;
            let mut result = Vec::with_capacity(lines.len());
            for (n, line) in lines.iter().enumerate() {
                let e = progtrans_core::extract_segment(line, kind)
                    .with_context(|| format!("{}:{}", input.display(), n + 1))?;
                missing += usize::from(e.is_missing());
                result.push(e.tokens().to_vec());
            }
            formats::write_token_lines(&out, &result)?;
            writeln!(log, "extract {kind}: {} lines, {missing} without the marker", lines.len())?;
        }
        Command::Mbr { candidates, utility, out, scores } => {
            let report = mbr_files(&candidates, utility)?;
            formats::write_token_lines(&out, &report.consensus)?;
            if let Some(path) = scores {
                formats::write_text(&path, &report.scores_text())?;
            }
            writeln!(log, "mbr: {} sentences, {} candidates missing <tgt>", report.consensus.len(), report.missing)?;
        }
        Command::Bleu { hyp, reference } => {
            let hyps = formats::read_token_lines(&hyp)?;
            let refs = formats::read_token_lines(&reference)?;
            let report = corpus_bleu(&hyps, &refs).context("cannot score")?;
            writeln!(log, "{report}")?;
        }
        Command::Pipeline(args) => {
            let config = args.resolve()?;
            let summary = run_pipeline(&config)?;
            writeln!(
                log,
                "pipeline: {} pairs, {} lexicon entries, {} merges, {} examples",
                summary.pairs, summary.lexicon_entries, summary.merges, summary.examples
            )?;
        }
    }
    Ok(())
}

fn optional_segment(
    path: Option<&Path>,
    kind: SegmentKind,
    segments: &SegmentSubset,
    n: usize,
) -> Result<Vec<Sentence>> {
    match path {
        Some(p) => Ok(formats::read_sentences(p, Side::Target, true)?),
        None if segments.contains(kind) => bail!("--segments includes {kind} but --{kind} was not given"),
        None => Ok(vec![Sentence::default(); n]),
    }
}

/// The candidate a decoded line contributes: its `<tgt>` segment if the line
/// carries segment markers, else the line itself minus any control token.
pub fn candidate_from_line(line: &[String]) -> Result<(Vec<String>, bool)> {
    if line.iter().any(|t| SegmentKind::from_marker(t).is_some()) {
        return match progtrans_core::extract_segment(line, SegmentKind::Tgt)? {
            Extracted::Present(tokens) => Ok((tokens, false)),
            Extracted::Missing => Ok((Vec::new(), true)),
        };
    }
    let plain = line.iter().filter(|t| parse_control_token(t).is_none()).cloned().collect();
    Ok((plain, false))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbrReport {
    pub consensus: Vec<Vec<String>>,
    pub scores: Vec<Vec<f64>>,
    pub missing_lines: Vec<bool>,
    pub missing: usize,
}

impl MbrReport {
    pub fn scores_text(&self) -> String {
        let mut out = String::new();
        for (row, missing) in self.scores.iter().zip(&self.missing_lines) {
            let cells: Vec<String> = row.iter().map(|s| format!("{s:.6}")).collect();
            out.push_str(&cells.join("\t"));
            if *missing {
                out.push('\t');
                out.push_str(MISSING_FLAG);
            }
            out.push('\n');
        }
        out
    }
}

/// Reads line-aligned candidate files and picks the consensus for every line.
pub fn mbr_files(paths: &[PathBuf], utility: UtilityKind) -> Result<MbrReport> {
    ensure!(!paths.is_empty(), "no candidate files");
    let files = paths
        .iter()
        .map(|p| formats::read_token_lines(p).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let lines = files[0].len();
    for (p, f) in paths.iter().zip(&files) {
        ensure!(
            f.len() == lines,
            "{} has {} lines but {} has {lines}",
            p.display(),
            f.len(),
            paths[0].display()
        );
    }
    let rows = (0..lines)
        .into_par_iter()
        .map(|i| {
            let mut pool = Vec::with_capacity(files.len());
            let mut missing = 0;
            for (p, f) in paths.iter().zip(&files) {
                let (cand, miss) = candidate_from_line(&f[i])
                    .with_context(|| format!("{}:{}", p.display(), i + 1))?;
                missing += usize::from(miss);
                pool.push(cand);
            }
            let (best, _) = mbr_select(&pool, utility)?;
            let scores = expected_utilities(&pool, utility);
            Ok((pool.swap_remove(best), scores, missing))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = MbrReport { consensus: Vec::new(), scores: Vec::new(), missing_lines: Vec::new(), missing: 0 };
    for (c, s, m) in rows {
        report.consensus.push(c);
        report.scores.push(s);
        report.missing_lines.push(m > 0);
        report.missing += m;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn candidate_extraction() {
        assert_eq!(candidate_from_line(&toks("<213> <ali> a b <tgt> c d")).unwrap(), (toks("c d"), false));
        assert_eq!(candidate_from_line(&toks("<lex> a b")).unwrap(), (vec![], true));
        assert_eq!(candidate_from_line(&toks("<3> x y")).unwrap(), (toks("x y"), false));
        assert!(candidate_from_line(&toks("<tgt> a <tgt> b")).is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        std::fs::write(&cfg, "merges = 50\nmode = simple\nseed = 4\n").unwrap();
        let cli = Cli::try_parse_from([
            "progtrans", "pipeline", "--config", cfg.to_str().unwrap(), "--merges", "7",
        ])
        .unwrap();
        let Command::Pipeline(args) = cli.command else { panic!() };
        let c = args.resolve().unwrap();
        assert_eq!((c.merges, c.mode, c.seed), (7, AugmentMode::Simple, 4));
    }

    #[test]
    fn unknown_flag_is_rejected() {
        assert!(Cli::try_parse_from(["progtrans", "bleu", "--hyp", "a", "--ref", "b", "--bogus"]).is_err());
    }
}
